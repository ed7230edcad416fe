#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixctl/mixnorm.hpp"
#include "mixctl/scenario.hpp"
#include "mixctl/stokes.hpp"

namespace mixctl {

enum class DescentMode { descent, picard };
enum class AdjointKind { discrete, continuous };

struct LineSearchConfig {
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    double step0 = 1.0;
    bool bb = true;  // Barzilai-Borwein seeding of the trial step
    int max_backtracks = 40;
};

struct OptConfig {
    double gamma = 1e-3;
    double epsilon = 1e-3;  // diffusivity used by both the forward solve and the gradient
    int max_iters = 500;
    double tol_g = 1e-6;  // stop when |grad J| <= tol_g |gamma g|
    LineSearchConfig line_search;
    DescentMode mode = DescentMode::descent;
    AdjointKind adjoint = AdjointKind::discrete;
    std::uint64_t seed = 0;
    int checkpoint_stride = 1;
    int threads = 1;

    void validate() const;
};

struct Evaluation {
    CostReport cost;
    ControlTrajectory gradient;      // gamma g + L* f
    ControlTrajectory mix_gradient;  // L* f, f the discrete P(theta grad rho)
    double grad_v_integral = 0.0;
};

/// J_eps(g) from one forward solve.
[[nodiscard]] CostReport evaluate_cost(const Problem& p, const ControlTrajectory& g, const OptConfig& cfg);
/// J_eps(g) and its L^2(0,T;L^2(walls)) gradient. Rejects epsilon = 0.
[[nodiscard]] Evaluation evaluate(const Problem& p, const ControlTrajectory& g, const OptConfig& cfg);
[[nodiscard]] ControlTrajectory gradient(const Problem& p, const ControlTrajectory& g, const OptConfig& cfg);

/// |gamma g + L* f| / |gamma g|.
[[nodiscard]] double optimality_residual(const ControlTrajectory& g, const ControlTrajectory& mix_gradient,
                                         double gamma);

struct IterationRecord {
    int iter = 0;
    double J = 0.0;
    double mix_term = 0.0;
    double control_term = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
    double residual = 0.0;
};

struct OptResult {
    ControlTrajectory g_final;
    CostReport final_cost;
    std::vector<IterationRecord> history;  // entry 0 is the initial iterate
    double residual = 0.0;
    double grad_v_integral = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string status;
};

/// Armijo-backtracked gradient descent (or damped Picard iteration on the
/// optimality condition g = -(1/gamma) L* P(theta grad rho)).
[[nodiscard]] OptResult descend(const Problem& p, const ControlTrajectory& g0, const OptConfig& cfg);

/// Minimizes J_eps(g) + 1/2 |g - anchor|^2.
[[nodiscard]] OptResult penalized_descend(const Problem& p, const ControlTrajectory& g0,
                                          const ControlTrajectory& anchor, const OptConfig& cfg);

struct ContinuationReport {
    std::vector<double> schedule;
    std::vector<OptResult> results;
    std::vector<double> successive_distances;  // |g*_{eps_i} - g*_{eps_{i+1}}|
};

/// Descends for each eps (strictly decreasing, > 0), warm-starting each run
/// from the previous minimizer.
[[nodiscard]] ContinuationReport epsilon_continuation(const Problem& p, const std::vector<double>& schedule,
                                                      const ControlTrajectory& g0, const OptConfig& cfg);

struct RateReport {
    std::vector<double> epsilons;
    std::vector<double> sup_l2_differences;  // sup_t |theta_eps - theta_0|_{L^2}
    double slope = 0.0;
    double intercept = 0.0;
    bool fit_valid = false;  // false when some difference is exactly zero
};

/// Vanishing-diffusivity study at fixed control: compares theta_eps with the
/// eps = 0 solution on the same grid and time step and fits a log-log slope.
[[nodiscard]] RateReport rate_study(const Problem& p, const ControlTrajectory& g, const std::vector<double>& schedule);

struct UniquenessReport {
    struct Trial {
        double gamma;
        double relative_distance;
        bool converged_a;
        bool converged_b;
    };
    std::vector<Trial> sweep;
    double gamma_threshold = 0.0;  // first gamma that passed, 0 if none
    bool passed = false;
    OptResult a;
    OptResult b;
};

/// Runs descend from two initial controls, doubling gamma from cfg.gamma up to
/// gamma_max until the minimizers agree to `tolerance` relative L^2 distance.
[[nodiscard]] UniquenessReport uniqueness_probe(const Problem& p, const OptConfig& cfg, const ControlTrajectory& g0_a,
                                                const ControlTrajectory& g0_b, double tolerance = 1e-3,
                                                double gamma_max = 1e3);

[[nodiscard]] const char* to_string(DescentMode m);
[[nodiscard]] const char* to_string(AdjointKind a);

}  // namespace mixctl
