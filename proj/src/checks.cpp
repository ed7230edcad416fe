#include "mixctl/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "mixctl/adjoint.hpp"
#include "mixctl/mixnorm.hpp"
#include "mixctl/transport.hpp"

namespace mixctl {

bool CheckReport::passed() const {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

std::string CheckReport::to_json() const {
    nlohmann::json j;
    j["passed"] = passed();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json e{{"name", r.name}, {"passed", r.passed}, {"threshold", r.threshold}, {"detail", r.detail}};
        if (std::isfinite(r.value))
            e["value"] = r.value;
        else
            e["value"] = nullptr;
        arr.push_back(e);
    }
    j["checks"] = arr;
    return j.dump(2);
}

namespace {

double rel(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

template <class F>
CheckResult guarded(const std::string& name, double threshold, F&& body) {
    try {
        return body();
    } catch (const CflError& e) {
        return {name, false, std::numeric_limits<double>::quiet_NaN(), threshold,
                std::string("rejected: ") + e.what()};
    } catch (const NumericalError& e) {
        return {name, false, std::numeric_limits<double>::quiet_NaN(), threshold,
                std::string("numerical failure: ") + e.what()};
    }
}

}  // namespace

CheckReport run_property_checks(const Problem& p, const OptConfig& cfg, const CheckConfig& cc) {
    CheckReport rep;
    const Grid& g = p.grid;
    const int nt = p.stokes.nt;
    const double dt = p.stokes.dt;
    const ControlTrajectory ctrl = random_control(g, nt, dt, cc.seed + 1, cc.control_amplitude);

    rep.results.push_back(guarded("stokes_adjoint_identity", cc.adjoint_tol, [&] {
        const ControlTrajectory h = white_noise_control(g, nt, dt, cc.seed + 2);
        std::vector<VectorField> f;
        for (int n = 0; n <= nt; ++n) f.push_back(white_noise_velocity(g, cc.seed + 1000 + n));
        const double lhs = spacetime_inner(apply_L(h, p.stokes).snapshots, f, dt);
        const double rhs = control_inner(h, apply_L_star(f, p.stokes));
        const double e = rel(lhs, rhs);
        return CheckResult{"stokes_adjoint_identity", e <= cc.adjoint_tol, e, cc.adjoint_tol, ""};
    }));

    const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : 1e-2;

    rep.results.push_back(guarded("transport_duality", cc.adjoint_tol, [&] {
        const VelocityTrajectory v = solve_stokes(p.v0, ctrl, p.stokes);
        const ScalarTrajectory th = solve_forward(p.theta0, v, eps, p.cfl);
        const AdjointSolution adj = solve_adjoint(th.terminal, th, v);
        VelocityTrajectory w;
        w.dt = dt;
        for (int n = 0; n <= nt; ++n) w.snapshots.push_back(leray_project(white_noise_velocity(g, cc.seed + 5000 + n)));
        const ScalarTrajectory z = solve_tangent(w, th, v);
        const double lhs = inner_product(terminal_condition(th.terminal), z.terminal);
        const double rhs = spacetime_inner(adj.velocity_sensitivity, w.snapshots, dt);
        const double e = rel(lhs, rhs);
        return CheckResult{"transport_duality", e <= cc.adjoint_tol, e, cc.adjoint_tol, ""};
    }));

    rep.results.push_back(guarded("gradient_fd", cc.fd_tol, [&] {
        OptConfig c = cfg;
        c.epsilon = eps;
        const ControlTrajectory base = scaled(ctrl, 0.5);
        const Evaluation ev = evaluate(p, base, c);
        double worst = 0.0;
        for (int d = 0; d < cc.fd_directions; ++d) {
            const ControlTrajectory h = random_control(g, nt, dt, cc.seed + 100 + d);
            ControlTrajectory gp = base, gm = base;
            axpy(cc.fd_delta, h, gp);
            axpy(-cc.fd_delta, h, gm);
            const double fd = (evaluate_cost(p, gp, c).total - evaluate_cost(p, gm, c).total) / (2.0 * cc.fd_delta);
            const double ad = control_inner(ev.gradient, h);
            worst = std::max(worst, std::abs(fd - ad) / std::abs(fd));
        }
        return CheckResult{"gradient_fd", worst <= cc.fd_tol, worst, cc.fd_tol,
                           std::to_string(cc.fd_directions) + " directions"};
    }));

    rep.results.push_back(guarded("conservation_lp", cc.drift_tol, [&] {
        const VelocityTrajectory v = solve_stokes(p.v0, ctrl, p.stokes);
        const ScalarTrajectory th = solve_forward(p.theta0, v, 0.0, p.cfl, nt);
        double worst = 0.0;
        for (double q : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
            const double a = lp_norm(p.theta0, q);
            worst = std::max(worst, std::abs(lp_norm(th.terminal, q) - a) / a);
        }
        return CheckResult{"conservation_lp", worst <= cc.drift_tol, worst, cc.drift_tol, "L1, L2, Linf"};
    }));

    rep.results.push_back(guarded("conservation_mass", cc.mass_tol, [&] {
        const VelocityTrajectory v = solve_stokes(p.v0, ctrl, p.stokes);
        const ScalarTrajectory th = solve_forward(p.theta0, v, 0.0, p.cfl, nt);
        const double scale = std::max(lp_norm(p.theta0, 1.0), std::numeric_limits<double>::min());
        const double e = std::abs(mass(th.terminal) - mass(p.theta0)) / scale;
        return CheckResult{"conservation_mass", e <= cc.mass_tol, e, cc.mass_tol, "relative to |theta0|_L1"};
    }));

    rep.results.push_back(guarded("epsilon_rate", cc.rate_min_slope, [&] {
        const RateReport r = rate_study(p, ctrl, cc.rate_epsilons);
        const bool ok = r.fit_valid && r.slope >= cc.rate_min_slope;
        return CheckResult{"epsilon_rate", ok, r.slope, cc.rate_min_slope, r.fit_valid ? "" : "degenerate fit"};
    }));

    return rep;
}

}  // namespace mixctl
