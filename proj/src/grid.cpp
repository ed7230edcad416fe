#include "mixctl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mixctl {

Grid make_grid(int nx, int ny, double lx, double ly) {
    if (nx < 4 || ny < 4)
        throw ConfigError("grid dimension too small: nx and ny must be >= 4 (got " +
                          std::to_string(nx) + "x" + std::to_string(ny) + ")");
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw ConfigError("grid lengths must be positive and finite");
    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.lx = lx;
    g.ly = ly;
    g.hx = lx / nx;
    g.hy = ly / ny;
    return g;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw ConfigError(std::string("grid mismatch in ") + what);
}

void VectorField::zero_wall_normal() {
    std::fill_n(v.begin(), grid.nx, 0.0);
    std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(grid.nx) * grid.ny, grid.nx, 0.0);
}

namespace {

void axpy_span(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

bool finite_span(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double t) { return std::isfinite(t); });
}

}  // namespace

ScalarField& axpy(double a, const ScalarField& x, ScalarField& y) {
    require_same_grid(x.grid, y.grid, "axpy");
    axpy_span(a, x.values, y.values);
    return y;
}

VectorField& axpy(double a, const VectorField& x, VectorField& y) {
    require_same_grid(x.grid, y.grid, "axpy");
    axpy_span(a, x.u, y.u);
    axpy_span(a, x.v, y.v);
    return y;
}

BoundarySlice& axpy(double a, const BoundarySlice& x, BoundarySlice& y) {
    require_same_grid(x.grid, y.grid, "axpy");
    axpy_span(a, x.bottom, y.bottom);
    axpy_span(a, x.top, y.top);
    return y;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    ScalarField d = a;
    axpy(-1.0, b, d);
    return d;
}

bool all_finite(const ScalarField& f) { return finite_span(f.values); }
bool all_finite(const VectorField& f) { return finite_span(f.u) && finite_span(f.v); }

double max_abs(const VectorField& f) {
    double m = 0.0;
    for (double t : f.u) m = std::max(m, std::abs(t));
    for (double t : f.v) m = std::max(m, std::abs(t));
    return m;
}

double inner_product(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f.grid, g.grid, "inner_product");
    double s = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) s += f.values[k] * g.values[k];
    return s * f.grid.cell_area();
}

double inner_product(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    double s = 0.0;
    for (std::size_t k = 0; k < a.u.size(); ++k) s += a.u[k] * b.u[k];
    const std::size_t nx = static_cast<std::size_t>(a.grid.nx);
    for (std::size_t k = nx; k < a.v.size() - nx; ++k) s += a.v[k] * b.v[k];
    return s * a.grid.cell_area();
}

double inner_product(const BoundarySlice& a, const BoundarySlice& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    double s = 0.0;
    for (std::size_t k = 0; k < a.bottom.size(); ++k) s += a.bottom[k] * b.bottom[k] + a.top[k] * b.top[k];
    return s * a.grid.hx;
}

double lp_norm(const ScalarField& f, double p) {
    if (std::isinf(p) && p > 0) {
        double m = 0.0;
        for (double t : f.values) m = std::max(m, std::abs(t));
        return m;
    }
    if (!(p >= 1.0)) throw ConfigError("lp_norm requires p >= 1");
    double s = 0.0;
    if (p == 1.0) {
        for (double t : f.values) s += std::abs(t);
        return s * f.grid.cell_area();
    }
    if (p == 2.0) {
        for (double t : f.values) s += t * t;
        return std::sqrt(s * f.grid.cell_area());
    }
    for (double t : f.values) s += std::pow(std::abs(t), p);
    return std::pow(s * f.grid.cell_area(), 1.0 / p);
}

double mass(const ScalarField& f) {
    double s = 0.0;
    for (double t : f.values) s += t;
    return s * f.grid.cell_area();
}

double l2_norm(const VectorField& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid;
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.ux(i, j) = (f.at(i, j) - f.at(g.wrap(i - 1), j)) / g.hx;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.vy(i, j) = (f.at(i, j) - f.at(i, j - 1)) / g.hy;
    const int n = g.ny;
    for (int i = 0; i < g.nx; ++i) {
        out.vy(i, 0) = (-2.0 * f.at(i, 0) + 3.0 * f.at(i, 1) - f.at(i, 2)) / g.hy;
        out.vy(i, n) = (2.0 * f.at(i, n - 1) - 3.0 * f.at(i, n - 2) + f.at(i, n - 3)) / g.hy;
    }
    return out;
}

ScalarField divergence(const VectorField& v) {
    const Grid& g = v.grid;
    ScalarField d(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            d.at(i, j) = (v.ux(g.wrap(i + 1), j) - v.ux(i, j)) / g.hx + (v.vy(i, j + 1) - v.vy(i, j)) / g.hy;
    return d;
}

}  // namespace mixctl
