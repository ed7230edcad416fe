#include "mixctl/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mixctl/adjoint.hpp"
#include "mixctl/io.hpp"
#include "mixctl/mixnorm.hpp"
#include "mixctl/transport.hpp"

namespace mixctl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Object reader that rejects keys it was not asked about.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }
    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + qualify(it.key()) + "'");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    void get(const std::string& key, T& dst) {
        if (!has(key)) return;
        try {
            dst = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("key '" + qualify(key) + "' has the wrong type");
        }
    }
    template <class T>
    void get(const std::string& key, std::optional<T>& dst) {
        if (!has(key)) return;
        if (j_.at(key).is_null()) {
            dst.reset();
            return;
        }
        T v{};
        get(key, v);
        dst = v;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

DescentMode parse_mode(const std::string& s) {
    if (s == "descent") return DescentMode::descent;
    if (s == "picard") return DescentMode::picard;
    throw ConfigError("optimizer.mode must be 'descent' or 'picard', got '" + s + "'");
}

AdjointKind parse_adjoint(const std::string& s) {
    if (s == "discrete") return AdjointKind::discrete;
    if (s == "continuous") return AdjointKind::continuous;
    throw ConfigError("optimizer.adjoint must be 'discrete' or 'continuous', got '" + s + "'");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string hex(std::uint64_t h) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

void write_manifest(const RunSpec& spec, const std::string& subcommand) {
    const std::string cfg = resolved_json(spec);
    std::uint64_t h = fnv1a(subcommand);
    h = fnv1a(cfg, h);
    if (!spec.theta_snapshot.empty()) h = fnv1a(read_file(spec.theta_snapshot), h);
    if (spec.control.type == "file") {
        h = fnv1a(read_file(fs::path(spec.control.path) / "bottom.bin"), h);
        h = fnv1a(read_file(fs::path(spec.control.path) / "top.bin"), h);
    }
    json m{{"subcommand", subcommand}, {"config", json::parse(cfg)}, {"input_hash", hex(h)}};
    write_text(spec.output / "manifest.json", m.dump(2) + "\n");
}

double rel_drift(const ScalarField& a, const ScalarField& b, double p) {
    const double n0 = lp_norm(a, p);
    return n0 > 0.0 ? std::abs(lp_norm(b, p) - n0) / n0 : std::abs(lp_norm(b, p));
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunSpec parse_run_spec(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunSpec s;
    s.lx = 2.0 * std::numbers::pi;
    Section top(root, "");
    if (top.has("grid")) {
        Section g(top.raw("grid"), "grid");
        g.get("nx", s.nx);
        g.get("ny", s.ny);
        g.get("Lx", s.lx);
        g.get("Ly", s.ly);
        g.done();
    }
    if (top.has("physics")) {
        Section p(top.raw("physics"), "physics");
        p.get("k", s.k);
        p.get("epsilon", s.epsilon);
        p.get("gamma", s.gamma);
        p.get("T", s.horizon);
        p.get("cfl", s.cfl);
        p.get("vcap", s.vcap);
        p.get("nt", s.nt);
        p.done();
    }
    if (top.has("initial")) {
        Section in(top.raw("initial"), "initial");
        if (in.has("theta")) {
            const json& t = in.raw("theta");
            if (t.is_string()) {
                s.theta = t.get<std::string>();
            } else {
                Section snap(t, "initial.theta");
                snap.get("snapshot", s.theta_snapshot);
                snap.done();
                require(!s.theta_snapshot.empty(), "initial.theta.snapshot must name a file");
                s.theta.clear();
            }
        }
        in.done();
    }
    if (top.has("control")) {
        Section c(top.raw("control"), "control");
        c.get("type", s.control.type);
        c.get("bottom", s.control.bottom);
        c.get("top", s.control.top);
        c.get("amplitude", s.control.amplitude);
        c.get("path", s.control.path);
        c.get("mode_cap", s.control.mode_cap);
        c.done();
    }
    if (top.has("optimizer")) {
        s.has_optimizer = true;
        Section o(top.raw("optimizer"), "optimizer");
        o.get("max_iters", s.optimizer.max_iters);
        o.get("tol_g", s.optimizer.tol_g);
        o.get("checkpoint_stride", s.optimizer.checkpoint_stride);
        std::string mode = to_string(s.optimizer.mode), adj = to_string(s.optimizer.adjoint);
        o.get("mode", mode);
        o.get("adjoint", adj);
        s.optimizer.mode = parse_mode(mode);
        s.optimizer.adjoint = parse_adjoint(adj);
        o.get("epsilon_schedule", s.epsilon_schedule);
        if (o.has("line_search")) {
            Section l(o.raw("line_search"), "optimizer.line_search");
            l.get("armijo_c1", s.optimizer.line_search.armijo_c1);
            l.get("backtrack", s.optimizer.line_search.backtrack);
            l.get("step0", s.optimizer.line_search.step0);
            l.get("bb", s.optimizer.line_search.bb);
            l.get("max_backtracks", s.optimizer.line_search.max_backtracks);
            l.done();
        }
        o.done();
    }
    if (top.has("sweep")) {
        Section w(top.raw("sweep"), "sweep");
        w.get("epsilons", s.rate_epsilons);
        w.done();
    }
    if (top.has("checks")) {
        Section c(top.raw("checks"), "checks");
        c.get("fd_directions", s.fd_directions);
        c.done();
    }
    if (top.has("output")) {
        Section o(top.raw("output"), "output");
        std::string dir = s.output.string();
        o.get("dir", dir);
        s.output = dir;
        o.get("stride", s.output_stride);
        o.done();
    }
    top.get("seed", s.seed);
    top.get("threads", s.threads);
    top.done();

    require(s.nx >= 4 && s.ny >= 4, "grid: nx and ny must be >= 4");
    require(s.lx > 0.0 && s.ly > 0.0, "grid: Lx and Ly must be > 0");
    require(s.k > 0.0, "physics.k must be > 0");
    require(s.epsilon >= 0.0, "physics.epsilon must be >= 0");
    require(s.gamma > 0.0, "physics.gamma must be > 0");
    require(s.horizon > 0.0, "physics.T must be > 0");
    require(s.cfl > 0.0, "physics.cfl must be > 0");
    require(s.vcap > 0.0, "physics.vcap must be > 0");
    require(!s.nt || *s.nt >= 1, "physics.nt must be >= 1");
    require(s.output_stride >= 0, "output.stride must be >= 0");
    require(s.threads >= 1, "threads must be >= 1");
    require(s.fd_directions >= 1, "checks.fd_directions must be >= 1");
    const std::set<std::string> types{"zero", "constant", "random", "file"};
    require(types.count(s.control.type) > 0, "control.type must be zero, constant, random or file");
    require(s.control.type != "file" || !s.control.path.empty(), "control.path is required for type 'file'");
    require(!s.control.mode_cap || *s.control.mode_cap >= 1, "control.mode_cap must be >= 1");
    s.optimizer.gamma = s.gamma;
    s.optimizer.epsilon = s.epsilon;
    s.optimizer.seed = s.seed;
    s.optimizer.threads = s.threads;
    s.optimizer.validate();
    return s;
}

std::string resolved_json(const RunSpec& s) {
    json j;
    j["grid"] = {{"nx", s.nx}, {"ny", s.ny}, {"Lx", s.lx}, {"Ly", s.ly}};
    j["physics"] = {{"k", s.k},     {"epsilon", s.epsilon}, {"gamma", s.gamma},
                    {"T", s.horizon}, {"cfl", s.cfl},       {"vcap", s.vcap}};
    j["physics"]["nt"] = s.nt ? json(*s.nt) : json(nullptr);
    if (s.theta_snapshot.empty())
        j["initial"] = {{"theta", s.theta}};
    else
        j["initial"] = {{"theta", {{"snapshot", s.theta_snapshot}}}};
    j["control"] = {{"type", s.control.type},
                    {"bottom", s.control.bottom},
                    {"top", s.control.top},
                    {"amplitude", s.control.amplitude},
                    {"path", s.control.path}};
    j["control"]["mode_cap"] = s.control.mode_cap ? json(*s.control.mode_cap) : json(nullptr);
    if (s.has_optimizer) {
        const auto& o = s.optimizer;
        j["optimizer"] = {{"max_iters", o.max_iters},
                          {"tol_g", o.tol_g},
                          {"mode", to_string(o.mode)},
                          {"adjoint", to_string(o.adjoint)},
                          {"checkpoint_stride", o.checkpoint_stride},
                          {"epsilon_schedule", s.epsilon_schedule},
                          {"line_search",
                           {{"armijo_c1", o.line_search.armijo_c1},
                            {"backtrack", o.line_search.backtrack},
                            {"step0", o.line_search.step0},
                            {"bb", o.line_search.bb},
                            {"max_backtracks", o.line_search.max_backtracks}}}};
    }
    j["sweep"] = {{"epsilons", s.rate_epsilons}};
    j["checks"] = {{"fd_directions", s.fd_directions}};
    j["output"] = {{"dir", s.output.string()}, {"stride", s.output_stride}};
    j["seed"] = s.seed;
    j["threads"] = s.threads;
    return j.dump(2);
}

Problem build_problem(const RunSpec& s) {
    Problem p;
    p.grid = make_grid(s.nx, s.ny, s.lx, s.ly);
    if (!s.theta_snapshot.empty()) {
        ScalarField t;
        try {
            t = read_snapshot(s.theta_snapshot, s.lx, s.ly);
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
        require(t.grid == p.grid, "initial.theta.snapshot does not match the grid");
        p.theta0 = std::move(t);
    } else {
        p.theta0 = preset_theta(p.grid, s.theta);
    }
    p.v0 = VectorField(p.grid);
    p.cfl = s.cfl;
    p.stokes.k = s.k;
    p.stokes.nt = s.nt ? *s.nt : nt_for_cfl(p.grid, s.horizon, s.cfl, s.vcap);
    p.stokes.dt = s.horizon / p.stokes.nt;
    p.stokes.validate();
    return p;
}

ControlTrajectory build_control(const RunSpec& s, const Problem& p) {
    const int nt = p.stokes.nt;
    const double dt = p.stokes.dt;
    ControlTrajectory g;
    const ControlSpec& c = s.control;
    if (c.type == "zero") {
        g = ControlTrajectory(p.grid, nt, dt);
    } else if (c.type == "constant") {
        g = constant_control(p.grid, nt, dt, c.bottom, c.top);
    } else if (c.type == "random") {
        g = random_control(p.grid, nt, dt, s.seed, c.amplitude);
    } else {
        try {
            g = read_control(c.path, p.grid, dt);
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
        require(g.nt() == nt, "control file has " + std::to_string(g.nt()) + " steps, expected " + std::to_string(nt));
    }
    g.mode_cap = c.mode_cap;
    apply_mode_cap(g);
    return g;
}

int run_simulate(const RunSpec& s, std::ostream& out) {
    const Problem p = build_problem(s);
    const ControlTrajectory g = build_control(s, p);
    const VelocityTrajectory v = solve_stokes(p.v0, g, p.stokes);
    const int stride = s.output_stride > 0 ? s.output_stride : p.stokes.nt;
    const ScalarTrajectory th = solve_forward(p.theta0, v, s.epsilon, p.cfl, stride);

    fs::create_directories(s.output);
    write_manifest(s, "simulate");
    write_velocity(s.output / "velocity", v, p.stokes.k, stride);
    write_scalar(s.output / "theta", th, p.stokes.k);
    write_diagnostics_csv(s.output / "diagnostics.csv", diagnostics(th));

    double max_div = 0.0;
    for (const auto& snap : v.snapshots) max_div = std::max(max_div, max_divergence(snap));
    const double l1 = lp_norm(p.theta0, 1.0);
    json j{{"nt", p.stokes.nt},
           {"dt", p.stokes.dt},
           {"mixnorm_initial", mix_norm(p.theta0)},
           {"mixnorm_final", mix_norm(th.terminal)},
           {"drift_L1", rel_drift(p.theta0, th.terminal, 1.0)},
           {"drift_L2", rel_drift(p.theta0, th.terminal, 2.0)},
           {"drift_Linf", rel_drift(p.theta0, th.terminal, std::numeric_limits<double>::infinity())},
           {"mass_drift", l1 > 0.0 ? std::abs(mass(th.terminal) - mass(p.theta0)) / l1 : 0.0},
           {"grad_v_infty_integral", grad_v_infty_integral(v)},
           {"max_divergence", max_div}};
    write_text(s.output / "summary.json", j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    return kExitOk;
}

int run_optimize(const RunSpec& s, std::ostream& out) {
    if (!s.has_optimizer) throw ConfigError("optimize requires an 'optimizer' block");
    const Problem p = build_problem(s);
    ControlTrajectory g0 = build_control(s, p);
    fs::create_directories(s.output);
    write_manifest(s, "optimize");

    OptResult r;
    json j;
    if (!s.epsilon_schedule.empty()) {
        const ContinuationReport c = epsilon_continuation(p, s.epsilon_schedule, g0, s.optimizer);
        r = c.results.back();
        j["epsilon_schedule"] = c.schedule;
        j["successive_distances"] = c.successive_distances;
    } else {
        r = descend(p, g0, s.optimizer);
    }
    ControlTrajectory zero(p.grid, p.stokes.nt, p.stokes.dt);
    OptConfig last = s.optimizer;
    if (!s.epsilon_schedule.empty()) last.epsilon = s.epsilon_schedule.back();
    const double j0 = evaluate_cost(p, zero, last).total;
    j["J_zero"] = j0;
    j["result"] = json::parse(to_json(r));
    j["improvement_ratio"] = j0 > 0.0 ? r.final_cost.total / j0 : 1.0;
    write_text(s.output / "result.json", j.dump(2) + "\n");
    write_history_csv(s.output / "history.csv", r.history);
    write_control(s.output / "control", r.g_final);
    out << "status " << r.status << ", iterations " << r.iterations << ", J " << r.final_cost.total
        << ", residual " << r.residual << ", ratio " << j["improvement_ratio"].get<double>() << "\n";
    return kExitOk;
}

int run_sweep_epsilon(const RunSpec& s, std::ostream& out) {
    const Problem p = build_problem(s);
    const ControlTrajectory g = build_control(s, p);
    fs::create_directories(s.output);
    write_manifest(s, "sweep-epsilon");
    const RateReport r = rate_study(p, g, s.rate_epsilons);
    json j{{"epsilons", r.epsilons},
           {"sup_l2_differences", r.sup_l2_differences},
           {"slope", r.slope},
           {"intercept", r.intercept},
           {"fit_valid", r.fit_valid}};
    if (s.has_optimizer) {
        std::vector<double> sched = s.epsilon_schedule.empty() ? s.rate_epsilons : s.epsilon_schedule;
        std::sort(sched.begin(), sched.end(), std::greater<>());
        const ContinuationReport c = epsilon_continuation(p, sched, g, s.optimizer);
        json runs = json::array();
        for (std::size_t i = 0; i < c.results.size(); ++i)
            runs.push_back({{"epsilon", c.schedule[i]},
                            {"J", c.results[i].final_cost.total},
                            {"residual", c.results[i].residual},
                            {"converged", c.results[i].converged}});
        j["continuation"] = {{"runs", runs}, {"successive_distances", c.successive_distances}};
    }
    write_text(s.output / "sweep.json", j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    return kExitOk;
}

int run_checks(const RunSpec& s, std::ostream& out) {
    const Problem p = build_problem(s);
    CheckConfig cc;
    cc.seed = s.seed;
    cc.fd_directions = s.fd_directions;
    cc.rate_epsilons = s.rate_epsilons;
    cc.control_amplitude = s.control.amplitude;
    const CheckReport rep = run_property_checks(p, s.optimizer, cc);
    fs::create_directories(s.output);
    write_manifest(s, "check");
    write_text(s.output / "checks.json", rep.to_json() + "\n");
    out << rep.to_json() << "\n";
    if (rep.passed()) return kExitOk;
    for (const auto& r : rep.results)
        if (!r.passed) out << "FAILED " << r.name << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
    return kExitCheckFailed;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Boundary-controlled optimal mixing in a periodic channel"};
    app.require_subcommand(1);
    std::string config_path, output;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run spec");
        sub->add_option("--output", output, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "RNG seed (overrides seed)");
        sub->add_option("--threads", threads, "maximum worker threads")->check(CLI::PositiveNumber);
    };
    std::vector<CLI::App*> runs;
    for (const char* name : {"simulate", "optimize", "sweep-epsilon", "check"}) runs.push_back(app.add_subcommand(name));
    for (auto* sub : runs) add_common(sub);
    CLI::App* mixnorm_cmd = app.add_subcommand("mixnorm", "mix-norm of a scalar snapshot");
    std::string snapshot;
    mixnorm_cmd->add_option("snapshot", snapshot, "field snapshot file")->required();
    add_common(mixnorm_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunSpec spec = parse_run_spec(config_path.empty() ? "{}" : read_file(config_path));
        if (!output.empty()) spec.output = output;
        if (seed) spec.seed = spec.optimizer.seed = *seed;
        if (threads) spec.threads = spec.optimizer.threads = *threads;

        if (mixnorm_cmd->parsed()) {
            ScalarField f;
            try {
                f = read_snapshot(snapshot, spec.lx, spec.ly);
            } catch (const IoError& e) {
                throw ConfigError(e.what());
            }
            out << std::setprecision(17) << mix_norm(f) << "\n";
            return kExitOk;
        }
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "simulate") return run_simulate(spec, out);
        if (name == "optimize") return run_optimize(spec, out);
        if (name == "sweep-epsilon") return run_sweep_epsilon(spec, out);
        return run_checks(spec, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace mixctl
