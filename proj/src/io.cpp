#include "mixctl/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mixctl {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'M', 'I', 'X', 'F', 'L', 'D', '0', '1'};

std::string numbered(const char* prefix, int n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%06d.bin", prefix, n);
    return buf;
}

json manifest(const Grid& g, int nt, double dt, double k) {
    return {{"nt", nt}, {"dt", dt}, {"k", k}, {"Lx", g.lx}, {"Ly", g.ly}, {"nx", g.nx}, {"ny", g.ny}};
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string fmt(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

void write_raw(const fs::path& path, const RawField& f) {
    if (f.data.size() != static_cast<std::size_t>(f.nx) * f.ny)
        throw IoError("write_raw: data size does not match nx*ny");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const std::int32_t dims[2] = {f.nx, f.ny};
    const char reserved[8] = {};
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    out.write(reserved, 8);
    out.write(reinterpret_cast<const char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * 8));
    if (!out) throw IoError("short write to " + path.string());
}

RawField read_raw(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[8];
    std::int32_t dims[2];
    char reserved[8];
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    in.read(reserved, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw IoError(path.string() + ": not a field snapshot");
    if (dims[0] <= 0 || dims[1] <= 0) throw IoError(path.string() + ": bad dimensions");
    RawField f{dims[0], dims[1], std::vector<double>(static_cast<std::size_t>(dims[0]) * dims[1])};
    in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * 8));
    if (!in) throw IoError(path.string() + ": truncated data");
    return f;
}

void write_snapshot(const fs::path& path, const ScalarField& f) {
    write_raw(path, {f.grid.nx, f.grid.ny, f.values});
}

ScalarField read_snapshot(const fs::path& path, double lx, double ly) {
    RawField r = read_raw(path);
    ScalarField f(make_grid(r.nx, r.ny, lx, ly));
    f.values = std::move(r.data);
    return f;
}

void write_velocity(const fs::path& dir, const VelocityTrajectory& v, double k, int stride) {
    if (v.snapshots.empty()) throw IoError("write_velocity: empty trajectory");
    if (stride < 1) throw IoError("write_velocity: stride must be >= 1");
    fs::create_directories(dir);
    const Grid& g = v.snapshots.front().grid;
    for (int n = 0; n <= v.nt(); ++n) {
        if (n % stride != 0 && n != v.nt()) continue;
        const VectorField& s = v.snapshots[n];
        write_raw(dir / numbered("u", n), {g.nx, g.ny, s.u});
        write_raw(dir / numbered("v", n), {g.nx, g.ny + 1, s.v});
    }
    json m = manifest(g, v.nt(), v.dt, k);
    m["stride"] = stride;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

VelocityTrajectory read_velocity(const fs::path& dir) {
    const json m = read_json(dir / "manifest.json");
    const Grid g = make_grid(m.at("nx"), m.at("ny"), m.at("Lx"), m.at("Ly"));
    if (m.value("stride", 1) != 1) throw IoError(dir.string() + ": strided velocity output cannot be reloaded");
    VelocityTrajectory v;
    v.dt = m.at("dt");
    const int nt = m.at("nt");
    for (int n = 0; n <= nt; ++n) {
        VectorField s(g);
        RawField u = read_raw(dir / numbered("u", n));
        RawField w = read_raw(dir / numbered("v", n));
        if (u.nx != g.nx || u.ny != g.ny || w.nx != g.nx || w.ny != g.ny + 1)
            throw IoError(dir.string() + ": snapshot " + std::to_string(n) + " has wrong dimensions");
        s.u = std::move(u.data);
        s.v = std::move(w.data);
        v.snapshots.push_back(std::move(s));
    }
    return v;
}

void write_scalar(const fs::path& dir, const ScalarTrajectory& s, double k) {
    fs::create_directories(dir);
    const Grid& g = s.terminal.grid;
    for (std::size_t i = 0; i < s.snapshots.size(); ++i)
        write_snapshot(dir / numbered("theta", static_cast<int>(i) * s.stride), s.snapshots[i]);
    if (s.nt % s.stride != 0) write_snapshot(dir / numbered("theta", s.nt), s.terminal);
    json m = manifest(g, s.nt, s.dt, k);
    m["epsilon"] = s.epsilon;
    m["stride"] = s.stride;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void write_control(const fs::path& dir, const ControlTrajectory& g) {
    fs::create_directories(dir);
    const int nx = g.grid.nx, rows = g.nt() + 1;
    RawField b{nx, rows, {}}, t{nx, rows, {}};
    for (const BoundarySlice& s : g.slices) {
        b.data.insert(b.data.end(), s.bottom.begin(), s.bottom.end());
        t.data.insert(t.data.end(), s.top.begin(), s.top.end());
    }
    write_raw(dir / "bottom.bin", b);
    write_raw(dir / "top.bin", t);
}

ControlTrajectory read_control(const fs::path& dir, const Grid& grid, double dt) {
    RawField b = read_raw(dir / "bottom.bin");
    RawField t = read_raw(dir / "top.bin");
    if (b.nx != grid.nx || t.nx != grid.nx || b.ny != t.ny)
        throw IoError(dir.string() + ": control arrays do not match the grid");
    ControlTrajectory g(grid, b.ny - 1, dt);
    for (int n = 0; n < b.ny; ++n) {
        auto off = b.data.begin() + static_cast<std::ptrdiff_t>(n) * grid.nx;
        std::copy(off, off + grid.nx, g.slices[n].bottom.begin());
        auto offt = t.data.begin() + static_cast<std::ptrdiff_t>(n) * grid.nx;
        std::copy(offt, offt + grid.nx, g.slices[n].top.begin());
    }
    return g;
}

void write_diagnostics_csv(const fs::path& path, const std::vector<TransportDiagnostics>& d) {
    std::ostringstream s;
    s << "t,mass,L1,L2,Linf,mixnorm\n";
    for (const auto& r : d)
        s << fmt(r.t) << ',' << fmt(r.mass) << ',' << fmt(r.l1) << ',' << fmt(r.l2) << ',' << fmt(r.linf) << ','
          << fmt(r.mixnorm) << '\n';
    write_text(path, s.str());
}

void write_history_csv(const fs::path& path, const std::vector<IterationRecord>& h) {
    std::ostringstream s;
    s << "iter,J,mix_term,control_term,grad_norm,step,residual\n";
    for (const auto& r : h)
        s << r.iter << ',' << fmt(r.J) << ',' << fmt(r.mix_term) << ',' << fmt(r.control_term) << ','
          << fmt(r.grad_norm) << ',' << fmt(r.step) << ',' << fmt(r.residual) << '\n';
    write_text(path, s.str());
}

std::string to_json(const CostReport& c) {
    return json{{"mix_term", c.mix_term},
                {"control_term", c.control_term},
                {"total", c.total},
                {"gamma", c.gamma},
                {"epsilon", c.epsilon}}
        .dump(2);
}

std::string to_json(const OptResult& r) {
    json j;
    j["cost"] = json::parse(to_json(r.final_cost));
    j["residual"] = r.residual;
    j["grad_v_infty_integral"] = r.grad_v_integral;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["status"] = r.status;
    j["control_norm"] = control_norm(r.g_final);
    json hist = json::array();
    for (const auto& h : r.history) hist.push_back({{"iter", h.iter}, {"J", h.J}, {"grad_norm", h.grad_norm}});
    j["history"] = hist;
    return j.dump(2);
}

}  // namespace mixctl
