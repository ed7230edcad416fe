#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mixctl/io.hpp"

using namespace mixctl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path = fs::temp_directory_path() / (std::string("mixctl_io_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Snapshot, HeaderLayout) {
    TempDir tmp;
    RawField f{4, 3, std::vector<double>(12)};
    for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = 0.5 * static_cast<double>(i);
    write_raw(tmp.path / "a.bin", f);
    const std::string bytes = slurp(tmp.path / "a.bin");
    ASSERT_EQ(bytes.size(), 24u + 12u * 8u);
    EXPECT_EQ(bytes.substr(0, 8), "MIXFLD01");
    std::int32_t nx, ny;
    std::memcpy(&nx, bytes.data() + 8, 4);
    std::memcpy(&ny, bytes.data() + 12, 4);
    EXPECT_EQ(nx, 4);
    EXPECT_EQ(ny, 3);
    for (int i = 16; i < 24; ++i) EXPECT_EQ(bytes[i], '\0');
    double x5;
    std::memcpy(&x5, bytes.data() + 24 + 5 * 8, 8);
    EXPECT_EQ(x5, 2.5);  // x fastest: (i=1, j=1)
}

TEST(Snapshot, RoundTripIsBitwise) {
    TempDir tmp;
    const Grid g = make_grid(16, 9);
    const ScalarField f = preset_theta(g, "blob");
    write_snapshot(tmp.path / "b.bin", f);
    const ScalarField r = read_snapshot(tmp.path / "b.bin", g.lx, g.ly);
    EXPECT_EQ(r.grid.nx, 16);
    EXPECT_EQ(r.grid.ny, 9);
    EXPECT_EQ(r.values, f.values);
}

TEST(Snapshot, RejectsBadMagicAndTruncation) {
    TempDir tmp;
    write_text(tmp.path / "bad.bin", std::string(64, 'x'));
    EXPECT_THROW((void)read_raw(tmp.path / "bad.bin"), IoError);
    write_raw(tmp.path / "ok.bin", {2, 2, {1, 2, 3, 4}});
    std::string bytes = slurp(tmp.path / "ok.bin");
    write_text(tmp.path / "short.bin", bytes.substr(0, bytes.size() - 4));
    EXPECT_THROW((void)read_raw(tmp.path / "short.bin"), IoError);
    EXPECT_THROW((void)read_raw(tmp.path / "missing.bin"), IoError);
    EXPECT_THROW(write_raw(tmp.path / "mismatch.bin", {2, 2, {1, 2, 3}}), IoError);
}

TEST(Velocity, RoundTrip) {
    TempDir tmp;
    const Problem p = reference_problem(16, 17, 0.05);
    const ControlTrajectory g = random_control(p.grid, p.stokes.nt, p.stokes.dt, 1);
    const VelocityTrajectory v = solve_stokes(p.v0, g, p.stokes);
    write_velocity(tmp.path / "vel", v, p.stokes.k);
    EXPECT_TRUE(fs::exists(tmp.path / "vel" / "u_000000.bin"));
    const VelocityTrajectory r = read_velocity(tmp.path / "vel");
    ASSERT_EQ(r.nt(), v.nt());
    EXPECT_EQ(r.dt, v.dt);
    for (int n = 0; n <= v.nt(); ++n) {
        EXPECT_EQ(r.snapshots[n].u, v.snapshots[n].u);
        EXPECT_EQ(r.snapshots[n].v, v.snapshots[n].v);
    }
    const auto m = nlohmann::json::parse(slurp(tmp.path / "vel" / "manifest.json"));
    EXPECT_EQ(m.at("nt"), v.nt());
    EXPECT_EQ(m.at("k"), p.stokes.k);
    EXPECT_EQ(m.at("nx"), 16);
}

TEST(Velocity, StrideWritesSubsetAndLastStep) {
    TempDir tmp;
    const Problem p = reference_problem(16, 17, 0.05);
    const VelocityTrajectory v = solve_stokes(p.v0, ControlTrajectory(p.grid, p.stokes.nt, p.stokes.dt), p.stokes);
    ASSERT_GT(v.nt(), 4);
    write_velocity(tmp.path / "vel", v, p.stokes.k, 4);
    EXPECT_TRUE(fs::exists(tmp.path / "vel" / "v_000004.bin"));
    EXPECT_FALSE(fs::exists(tmp.path / "vel" / "v_000001.bin"));
    char last[32];
    std::snprintf(last, sizeof last, "v_%06d.bin", v.nt());
    EXPECT_TRUE(fs::exists(tmp.path / "vel" / last));
    EXPECT_THROW((void)read_velocity(tmp.path / "vel"), IoError);
}

TEST(Scalar, ManifestAndFiles) {
    TempDir tmp;
    const Problem p = reference_problem(16, 17, 0.05);
    const VelocityTrajectory v = solve_stokes(p.v0, ControlTrajectory(p.grid, p.stokes.nt, p.stokes.dt), p.stokes);
    const ScalarTrajectory s = solve_forward(p.theta0, v, 1e-2, p.cfl, 3);
    write_scalar(tmp.path / "theta", s, p.stokes.k);
    const auto m = nlohmann::json::parse(slurp(tmp.path / "theta" / "manifest.json"));
    EXPECT_EQ(m.at("epsilon"), 1e-2);
    EXPECT_EQ(m.at("stride"), 3);
    char last[32];
    std::snprintf(last, sizeof last, "theta_%06d.bin", s.nt);
    const ScalarField t = read_snapshot(tmp.path / "theta" / last, p.grid.lx, p.grid.ly);
    EXPECT_EQ(t.values, s.terminal.values);
}

TEST(Control, RoundTrip) {
    TempDir tmp;
    const Grid g = make_grid(8, 9);
    const ControlTrajectory c = random_control(g, 10, 0.1, 2);
    write_control(tmp.path / "ctl", c);
    const ControlTrajectory r = read_control(tmp.path / "ctl", g, 0.1);
    ASSERT_EQ(r.nt(), 10);
    for (int n = 0; n <= 10; ++n) {
        EXPECT_EQ(r.slices[n].bottom, c.slices[n].bottom);
        EXPECT_EQ(r.slices[n].top, c.slices[n].top);
    }
    EXPECT_THROW((void)read_control(tmp.path / "ctl", make_grid(16, 9), 0.1), IoError);
}

TEST(Csv, Headers) {
    TempDir tmp;
    write_diagnostics_csv(tmp.path / "d.csv", {{0.0, 1.0, 2.0, 3.0, 4.0, 5.0}});
    EXPECT_EQ(slurp(tmp.path / "d.csv"), "t,mass,L1,L2,Linf,mixnorm\n0,1,2,3,4,5\n");
    IterationRecord r;
    r.iter = 3;
    r.J = 0.25;
    write_history_csv(tmp.path / "h.csv", {r});
    EXPECT_EQ(slurp(tmp.path / "h.csv"), "iter,J,mix_term,control_term,grad_norm,step,residual\n3,0.25,0,0,0,0,0\n");
}

TEST(Json, OptResultKeys) {
    const Grid g = make_grid(8, 9);
    OptResult r;
    r.g_final = ControlTrajectory(g, 4, 0.25);
    r.status = "converged";
    r.converged = true;
    r.history.push_back({});
    const auto j = nlohmann::json::parse(to_json(r));
    for (const char* key : {"cost", "residual", "grad_v_infty_integral", "iterations", "converged", "status",
                            "control_norm", "history"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_TRUE(j.at("cost").contains("mix_term"));
    EXPECT_EQ(j.at("status"), "converged");
}
