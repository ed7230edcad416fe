#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixctl {

/// Thrown for malformed problem setup (sizes, lengths, mismatched grids).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a solve produces non-finite values or violates a stability bound.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Periodic channel [0,Lx) x [0,Ly].
 *
 * x is periodic, y = 0 and y = Ly are walls. Cells are uniform; all
 * quadrature weights equal hx*hy.
 *
 * Layout (MAC):
 *   scalar   (i,j) at ((i+1/2)hx, (j+1/2)hy), i < nx, j < ny
 *   u        (i,j) at (i hx,      (j+1/2)hy), i < nx, j < ny
 *   v        (i,j) at ((i+1/2)hx, j hy),      i < nx, j <= ny
 * Row-major with x fastest everywhere.
 */
struct Grid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    double hx = 0.0;
    double hy = 0.0;

    [[nodiscard]] double cell_area() const { return hx * hy; }
    [[nodiscard]] double area() const { return lx * ly; }
    [[nodiscard]] std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
    [[nodiscard]] double xc(int i) const { return (i + 0.5) * hx; }
    [[nodiscard]] double yc(int j) const { return (j + 0.5) * hy; }
    [[nodiscard]] double xface(int i) const { return i * hx; }
    [[nodiscard]] double yface(int j) const { return j * hy; }
    [[nodiscard]] int wrap(int i) const { return ((i % nx) + nx) % nx; }

    bool operator==(const Grid&) const = default;
};

Grid make_grid(int nx, int ny, double lx = 2.0 * std::numbers::pi, double ly = 1.0);

/// Throws ConfigError unless a and b describe the same grid.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(g.cells(), fill) {}

    [[nodiscard]] double& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx + i]; }
    [[nodiscard]] double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx + i]; }

    template <class F>
    static ScalarField sample(const Grid& g, F&& f) {
        ScalarField s(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) s.at(i, j) = f(g.xc(i), g.yc(j));
        return s;
    }
};

/// Staggered velocity. Wall rows of v (j = 0 and j = ny) carry the normal
/// velocity and are held at zero by every solver in this library.
struct VectorField {
    Grid grid;
    std::vector<double> u;  // nx * ny
    std::vector<double> v;  // nx * (ny + 1)

    VectorField() = default;
    explicit VectorField(const Grid& g)
        : grid(g), u(g.cells(), 0.0), v(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0) {}

    [[nodiscard]] double& ux(int i, int j) { return u[static_cast<std::size_t>(j) * grid.nx + i]; }
    [[nodiscard]] double ux(int i, int j) const { return u[static_cast<std::size_t>(j) * grid.nx + i]; }
    [[nodiscard]] double& vy(int i, int j) { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
    [[nodiscard]] double vy(int i, int j) const { return v[static_cast<std::size_t>(j) * grid.nx + i]; }

    void zero_wall_normal();

    template <class FU, class FV>
    static VectorField sample(const Grid& g, FU&& fu, FV&& fv) {
        VectorField w(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) w.ux(i, j) = fu(g.xface(i), g.yc(j));
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) w.vy(i, j) = fv(g.xc(i), g.yface(j));
        return w;
    }
};

/// Tangential wall data at one instant; x samples at the u-face positions i*hx.
struct BoundarySlice {
    Grid grid;
    std::vector<double> bottom;
    std::vector<double> top;

    BoundarySlice() = default;
    explicit BoundarySlice(const Grid& g, double fill = 0.0)
        : grid(g), bottom(static_cast<std::size_t>(g.nx), fill), top(static_cast<std::size_t>(g.nx), fill) {}
};

// Elementwise helpers; all require matching grids.
ScalarField& axpy(double a, const ScalarField& x, ScalarField& y);
VectorField& axpy(double a, const VectorField& x, VectorField& y);
BoundarySlice& axpy(double a, const BoundarySlice& x, BoundarySlice& y);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
[[nodiscard]] bool all_finite(const ScalarField& f);
[[nodiscard]] bool all_finite(const VectorField& f);
[[nodiscard]] double max_abs(const VectorField& f);

[[nodiscard]] double inner_product(const ScalarField& f, const ScalarField& g);
/// Area-weighted sum over u faces and interior v faces.
[[nodiscard]] double inner_product(const VectorField& a, const VectorField& b);
/// Wall inner product: sum over both walls of f*g*hx.
[[nodiscard]] double inner_product(const BoundarySlice& a, const BoundarySlice& b);

/// Quadrature L^p norm; pass p = infinity for the max norm. Throws for p < 1.
[[nodiscard]] double lp_norm(const ScalarField& f, double p);
[[nodiscard]] double mass(const ScalarField& f);
[[nodiscard]] double l2_norm(const VectorField& f);

/// Face-centered gradient: x-faces (f_i - f_{i-1})/hx, interior y-faces
/// (f_j - f_{j-1})/hy, wall faces by the one-sided second-order stencil.
[[nodiscard]] VectorField gradient(const ScalarField& f);

/// Conservative MAC divergence per cell.
[[nodiscard]] ScalarField divergence(const VectorField& v);

}  // namespace mixctl
