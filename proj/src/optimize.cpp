#include "mixctl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "mixctl/adjoint.hpp"
#include "mixctl/transport.hpp"

namespace mixctl {

const char* to_string(DescentMode m) { return m == DescentMode::descent ? "descent" : "picard"; }
const char* to_string(AdjointKind a) { return a == AdjointKind::discrete ? "discrete" : "continuous"; }

void OptConfig::validate() const {
    if (!(gamma > 0.0)) throw ConfigError("optimizer: gamma must be > 0");
    if (epsilon < 0.0) throw ConfigError("optimizer: epsilon must be >= 0");
    if (!(tol_g > 0.0)) throw ConfigError("optimizer: tol_g must be > 0");
    if (max_iters < 0) throw ConfigError("optimizer: max_iters must be >= 0");
    if (!(line_search.armijo_c1 > 0.0 && line_search.armijo_c1 < 1.0))
        throw ConfigError("optimizer: armijo_c1 must lie in (0,1)");
    if (!(line_search.backtrack > 0.0 && line_search.backtrack < 1.0))
        throw ConfigError("optimizer: backtrack must lie in (0,1)");
    if (!(line_search.step0 > 0.0)) throw ConfigError("optimizer: step0 must be > 0");
    if (checkpoint_stride < 1) throw ConfigError("optimizer: checkpoint_stride must be >= 1");
    if (threads < 1) throw ConfigError("optimizer: threads must be >= 1");
}

namespace {

void check_control(const Problem& p, const ControlTrajectory& g) {
    require_same_grid(p.grid, g.grid, "control");
    if (g.nt() != p.stokes.nt)
        throw ConfigError("control has " + std::to_string(g.nt()) + " steps, problem expects " +
                          std::to_string(p.stokes.nt));
}

}  // namespace

CostReport evaluate_cost(const Problem& p, const ControlTrajectory& g, const OptConfig& cfg) {
    check_control(p, g);
    const VelocityTrajectory v = solve_stokes(p.v0, g, p.stokes);
    const ScalarTrajectory th = solve_forward(p.theta0, v, cfg.epsilon, p.cfl, cfg.checkpoint_stride);
    return cost(g, th.terminal, cfg.gamma, cfg.epsilon);
}

Evaluation evaluate(const Problem& p, const ControlTrajectory& g, const OptConfig& cfg) {
    if (!(cfg.epsilon > 0.0))
        throw ConfigError("gradient requires epsilon > 0: the unregularized problem is reached through "
                          "epsilon_continuation");
    check_control(p, g);
    const VelocityTrajectory v = solve_stokes(p.v0, g, p.stokes);
    const int stride = cfg.adjoint == AdjointKind::continuous ? 1 : cfg.checkpoint_stride;
    const ScalarTrajectory th = solve_forward(p.theta0, v, cfg.epsilon, p.cfl, stride);

    Evaluation e;
    e.cost = cost(g, th.terminal, cfg.gamma, cfg.epsilon);
    e.grad_v_integral = grad_v_infty_integral(v);
    const AdjointSolution adj = cfg.adjoint == AdjointKind::discrete
                                    ? solve_adjoint(th.terminal, th, v)
                                    : solve_adjoint_continuous(th.terminal, th, v, p.cfl);
    e.mix_gradient = apply_L_star(adj.velocity_sensitivity, p.stokes);
    e.mix_gradient.mode_cap = g.mode_cap;
    apply_mode_cap(e.mix_gradient);
    e.gradient = e.mix_gradient;
    axpy(cfg.gamma, g, e.gradient);
    return e;
}

ControlTrajectory gradient(const Problem& p, const ControlTrajectory& g, const OptConfig& cfg) {
    return evaluate(p, g, cfg).gradient;
}

double optimality_residual(const ControlTrajectory& g, const ControlTrajectory& mix_gradient, double gamma) {
    ControlTrajectory r = mix_gradient;
    axpy(gamma, g, r);
    const double denom = gamma * control_norm(g);
    return denom > 0.0 ? control_norm(r) / denom : (control_norm(r) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
}

namespace {

constexpr double kCostResolution = 128.0 * std::numeric_limits<double>::epsilon();

// Objective F = J_eps (+ 1/2 |g - anchor|^2) with its gradient.
struct Objective {
    const Problem& p;
    const OptConfig& cfg;
    const ControlTrajectory* anchor;
    mutable bool hit_cfl = false;

    struct Point {
        ControlTrajectory g;
        Evaluation eval;
        double value = 0.0;
        ControlTrajectory grad;
        double grad_norm = 0.0;
        double residual = 0.0;
    };

    double penalty(const ControlTrajectory& g) const {
        if (!anchor) return 0.0;
        ControlTrajectory d = g;
        axpy(-1.0, *anchor, d);
        const double n = control_norm(d);
        return 0.5 * n * n;
    }

    // Returns +inf if the forward solve fails (CFL or blow-up).
    double value(const ControlTrajectory& g) const {
        try {
            return evaluate_cost(p, g, cfg).total + penalty(g);
        } catch (const CflError&) {
            hit_cfl = true;
            return std::numeric_limits<double>::infinity();
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    Point point(ControlTrajectory g) const {
        Point pt;
        pt.eval = evaluate(p, g, cfg);
        pt.value = pt.eval.cost.total + penalty(g);
        pt.grad = pt.eval.gradient;
        ControlTrajectory control_part = scaled(g, cfg.gamma);
        if (anchor) {
            axpy(1.0, g, pt.grad);
            axpy(-1.0, *anchor, pt.grad);
            axpy(1.0, g, control_part);
            axpy(-1.0, *anchor, control_part);
        }
        pt.grad_norm = control_norm(pt.grad);
        const double denom = control_norm(control_part);
        pt.residual = denom > 0.0 ? pt.grad_norm / denom
                                  : (pt.grad_norm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        pt.g = std::move(g);
        return pt;
    }
};

IterationRecord record(int iter, const Objective::Point& pt, double step) {
    return {iter, pt.value, pt.eval.cost.mix_term, pt.eval.cost.control_term, pt.grad_norm, step, pt.residual};
}

OptResult finish(Objective::Point&& pt, std::vector<IterationRecord>&& hist, int iters, bool converged,
                 std::string status) {
    OptResult r;
    r.final_cost = pt.eval.cost;
    r.residual = pt.residual;
    r.grad_v_integral = pt.eval.grad_v_integral;
    r.g_final = std::move(pt.g);
    r.history = std::move(hist);
    r.iterations = iters;
    r.converged = converged;
    r.status = std::move(status);
    return r;
}

OptResult run_descent(const Problem& p, const ControlTrajectory& g0, const OptConfig& cfg,
                      const ControlTrajectory* anchor) {
    cfg.validate();
    const Objective obj{p, cfg, anchor};
    const LineSearchConfig& ls = cfg.line_search;

    ControlTrajectory start = g0;
    apply_mode_cap(start);
    Objective::Point cur = obj.point(std::move(start));
    const double initial_grad = cur.grad_norm;
    std::vector<IterationRecord> hist{record(0, cur, 0.0)};

    auto stationary = [&](const Objective::Point& pt) {
        return pt.residual <= cfg.tol_g || pt.grad_norm <= 1e-12 * initial_grad;
    };

    double alpha_prev = ls.step0;
    ControlTrajectory s_prev, y_prev;
    bool have_pair = false;

    for (int it = 1; it <= cfg.max_iters; ++it) {
        if (stationary(cur)) return finish(std::move(cur), std::move(hist), it - 1, true, "converged");

        if (cfg.mode == DescentMode::picard) {
            // g_pic = -(1/gamma) L* f; blend toward it, halving on non-decrease
            ControlTrajectory g_pic = scaled(cur.eval.mix_gradient, -1.0 / cfg.gamma);
            double omega = 1.0;
            bool accepted = false;
            for (int b = 0; b <= ls.max_backtracks; ++b, omega *= 0.5) {
                ControlTrajectory trial = scaled(cur.g, 1.0 - omega);
                axpy(omega, g_pic, trial);
                const double f = obj.value(trial);
                if (f < cur.value) {
                    cur = obj.point(std::move(trial));
                    accepted = true;
                    break;
                }
                if (f <= cur.value + kCostResolution * std::abs(cur.value)) {
                    Objective::Point next = obj.point(std::move(trial));
                    if (next.grad_norm < cur.grad_norm) {
                        cur = std::move(next);
                        accepted = true;
                        break;
                    }
                }
            }
            if (!accepted)
                return finish(std::move(cur), std::move(hist), it - 1, false, "picard damping exhausted");
            hist.push_back(record(it, cur, omega));
            continue;
        }

        double alpha = ls.step0;
        if (ls.bb && have_pair) {
            const double sy = control_inner(s_prev, y_prev);
            const double ss = control_inner(s_prev, s_prev);
            // negative curvature along the last step: expand instead
            alpha = sy > 0.0 ? ss / sy : 4.0 * alpha_prev;
            alpha = std::clamp(alpha, 1e-12, 1e12);
        }
        const double slope = cur.grad_norm * cur.grad_norm;
        bool accepted = false;
        obj.hit_cfl = false;
        for (int b = 0; b <= ls.max_backtracks; ++b, alpha *= ls.backtrack) {
            ControlTrajectory trial = cur.g;
            axpy(-alpha, cur.grad, trial);
            const double f = obj.value(trial);
            const bool armijo = f <= cur.value - ls.armijo_c1 * alpha * slope && f < cur.value;
            // Below the resolution of J the decrease test is noise; require a
            // smaller gradient instead.
            const double floor = kCostResolution * std::abs(cur.value);
            const bool unresolved = !armijo && ls.armijo_c1 * alpha * slope <= floor && f <= cur.value + floor;
            if (armijo || unresolved) {
                Objective::Point next = obj.point(std::move(trial));
                if (!armijo && !(next.grad_norm < cur.grad_norm)) continue;
                s_prev = next.g;
                axpy(-1.0, cur.g, s_prev);
                y_prev = next.grad;
                axpy(-1.0, cur.grad, y_prev);
                have_pair = true;
                alpha_prev = alpha;
                cur = std::move(next);
                accepted = true;
                break;
            }
        }
        if (!accepted)
            return finish(std::move(cur), std::move(hist), it - 1, false,
                          obj.hit_cfl ? "line search failed (CFL bound)" : "line search failed");
        hist.push_back(record(it, cur, alpha));
    }
    const bool ok = stationary(cur);
    return finish(std::move(cur), std::move(hist), cfg.max_iters, ok, ok ? "converged" : "max iterations");
}

}  // namespace

OptResult descend(const Problem& p, const ControlTrajectory& g0, const OptConfig& cfg) {
    return run_descent(p, g0, cfg, nullptr);
}

OptResult penalized_descend(const Problem& p, const ControlTrajectory& g0, const ControlTrajectory& anchor,
                            const OptConfig& cfg) {
    if (cfg.mode == DescentMode::picard) throw ConfigError("penalized_descend supports descent mode only");
    ControlTrajectory a = anchor;
    a.mode_cap = g0.mode_cap;
    apply_mode_cap(a);
    return run_descent(p, g0, cfg, &a);
}

ContinuationReport epsilon_continuation(const Problem& p, const std::vector<double>& schedule,
                                        const ControlTrajectory& g0, const OptConfig& cfg) {
    if (schedule.empty()) throw ConfigError("epsilon_continuation: empty schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 0.0)) throw ConfigError("epsilon_continuation: every epsilon must be > 0");
        if (i > 0 && !(schedule[i] < schedule[i - 1]))
            throw ConfigError("epsilon_continuation: schedule must be strictly decreasing");
    }
    ContinuationReport rep;
    rep.schedule = schedule;
    ControlTrajectory warm = g0;
    for (double eps : schedule) {
        OptConfig c = cfg;
        c.epsilon = eps;
        rep.results.push_back(descend(p, warm, c));
        warm = rep.results.back().g_final;
    }
    for (std::size_t i = 0; i + 1 < rep.results.size(); ++i) {
        ControlTrajectory d = rep.results[i].g_final;
        axpy(-1.0, rep.results[i + 1].g_final, d);
        rep.successive_distances.push_back(control_norm(d));
    }
    return rep;
}

RateReport rate_study(const Problem& p, const ControlTrajectory& g, const std::vector<double>& schedule) {
    if (schedule.size() < 3) throw ConfigError("rate_study: need at least 3 epsilon values to fit a slope");
    for (double e : schedule)
        if (!(e > 0.0)) throw ConfigError("rate_study: epsilon values must be > 0");
    check_control(p, g);
    const VelocityTrajectory v = solve_stokes(p.v0, g, p.stokes);
    const ScalarTrajectory pure = solve_forward(p.theta0, v, 0.0, p.cfl);
    RateReport rep;
    rep.epsilons = schedule;
    for (double eps : schedule) {
        const ScalarTrajectory th = solve_forward(p.theta0, v, eps, p.cfl);
        double sup = 0.0;
        for (int n = 0; n <= th.nt; ++n) sup = std::max(sup, lp_norm(th.at(n) - pure.at(n), 2.0));
        rep.sup_l2_differences.push_back(sup);
    }
    rep.fit_valid = std::all_of(rep.sup_l2_differences.begin(), rep.sup_l2_differences.end(),
                                [](double d) { return d > 0.0; });
    if (rep.fit_valid) {
        const double n = static_cast<double>(schedule.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            const double x = std::log(schedule[i]), y = std::log(rep.sup_l2_differences[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.intercept = (sy - rep.slope * sx) / n;
    }
    return rep;
}

UniquenessReport uniqueness_probe(const Problem& p, const OptConfig& cfg, const ControlTrajectory& g0_a,
                                  const ControlTrajectory& g0_b, double tolerance, double gamma_max) {
    UniquenessReport rep;
    for (double gamma = cfg.gamma; gamma <= gamma_max * (1.0 + 1e-12); gamma *= 2.0) {
        OptConfig c = cfg;
        c.gamma = gamma;
        OptResult a, b;
        if (cfg.threads > 1) {
            auto fa = std::async(std::launch::async, [&] { return descend(p, g0_a, c); });
            b = descend(p, g0_b, c);
            a = fa.get();
        } else {
            a = descend(p, g0_a, c);
            b = descend(p, g0_b, c);
        }
        ControlTrajectory d = a.g_final;
        axpy(-1.0, b.g_final, d);
        const double na = control_norm(a.g_final);
        const double dist = na > 0.0 ? control_norm(d) / na : control_norm(d);
        rep.sweep.push_back({gamma, dist, a.converged, b.converged});
        rep.a = std::move(a);
        rep.b = std::move(b);
        if (rep.a.converged && rep.b.converged && dist <= tolerance) {
            rep.passed = true;
            rep.gamma_threshold = gamma;
            break;
        }
    }
    return rep;
}

}  // namespace mixctl
