#include "mixctl/mixnorm.hpp"

#include <algorithm>
#include <cmath>

#include "mixctl/spectral.hpp"

namespace mixctl {

ScalarField helmholtz_neumann_solve(const ScalarField& theta) {
    const Grid& g = theta.grid;
    ScalarField phi(g);
    spectral::modal_rational(spectral::neumann_cells(g), spectral::x_symbol(g, false), 1.0, -1.0, 1.0, 0.0,
                             theta.values, phi.values);
    return phi;
}

ScalarField apply_helmholtz(const ScalarField& phi) {
    const Grid& g = phi.grid;
    ScalarField out(g);
    spectral::modal_rational(spectral::neumann_cells(g), spectral::x_symbol(g, false), 1.0, 0.0, 1.0, -1.0,
                             phi.values, out.values);
    return out;
}

double mix_norm(const ScalarField& theta) {
    return std::sqrt(std::max(0.0, inner_product(helmholtz_neumann_solve(theta), theta)));
}

CostReport cost(const ControlTrajectory& g, const ScalarField& theta_T, double gamma, double epsilon) {
    if (!(gamma > 0.0)) throw ConfigError("cost: gamma must be > 0");
    CostReport r;
    const double m = mix_norm(theta_T);
    r.mix_term = 0.5 * m * m;
    r.control_term = 0.5 * gamma * control_inner(g, g);
    r.total = r.mix_term + r.control_term;
    r.gamma = gamma;
    r.epsilon = epsilon;
    return r;
}

}  // namespace mixctl
