#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixctl/optimize.hpp"
#include "mixctl/scenario.hpp"

namespace mixctl {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckResult> results;

    [[nodiscard]] bool passed() const;
    /// Deterministic JSON; no timings.
    [[nodiscard]] std::string to_json() const;
};

struct CheckConfig {
    std::uint64_t seed = 0;
    int fd_directions = 4;
    double fd_delta = 1e-5;
    double fd_tol = 1e-6;
    double adjoint_tol = 1e-10;
    double drift_tol = 1e-3;
    double mass_tol = 1e-12;
    double rate_min_slope = 0.4;
    std::vector<double> rate_epsilons{1e-2, 4e-3, 1e-3};
    double control_amplitude = 1.0;
};

/// Adjoint identities, finite-difference gradient, eps = 0 conservation and
/// the vanishing-diffusivity rate, all on the problem's grid and time step.
/// A CFL rejection fails the affected check instead of throwing.
[[nodiscard]] CheckReport run_property_checks(const Problem& p, const OptConfig& cfg, const CheckConfig& cc);

}  // namespace mixctl
