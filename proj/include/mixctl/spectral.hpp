#pragma once

// FFT-in-x / tridiagonal-in-y machinery shared by the Stokes, Helmholtz and
// diffusion solvers.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "mixctl/grid.hpp"

namespace mixctl::spectral {

/// Second-difference matrix in y (scaled by 1/hy^2), boundary rows included.
struct Tridiag {
    std::vector<double> lower;  // lower[0] unused
    std::vector<double> diag;
    std::vector<double> upper;  // upper[n-1] unused

    [[nodiscard]] int size() const { return static_cast<int>(diag.size()); }
};

/// Neumann (reflection ghost) second difference on ny cell centers.
Tridiag neumann_cells(const Grid& g);
/// Robin ghost closure for the tangential velocity; diag end entries (alpha-2)/hy^2.
Tridiag robin_cells(const Grid& g, double alpha);
/// Dirichlet-zero second difference on the ny-1 interior y-face rows.
Tridiag dirichlet_faces(const Grid& g);

/// Eigenvalues lambda_m >= 0 of -d^2/dx^2 for m = 0..nx/2.
/// mac: (4/hx^2) sin^2(pi m / nx). Otherwise spectral k^2 when nx is a power
/// of two and the fourth-order centered-difference symbol when it is not.
std::vector<double> x_symbol(const Grid& g, bool mac);

class RowTransform {
public:
    RowTransform(int nx, int nrows);
    ~RowTransform();
    RowTransform(const RowTransform&) = delete;
    RowTransform& operator=(const RowTransform&) = delete;

    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int modes() const { return nx_ / 2 + 1; }

    void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
    /// Normalized inverse; `in` is left untouched.
    void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

private:
    int nx_;
    int rows_;
    void* fwd_ = nullptr;
    void* inv_ = nullptr;
};

/// Process-wide cached transform for (nx, rows).
const RowTransform& transform(int nx, int rows);

/// For each x-mode m, with L_m = T - lambda_m I:
///   out_m = (p I + q L_m)^{-1} (r I + s L_m) in_m.
/// With `pin_zero_mode`, the m = 0 system is treated as singular-compatible:
/// its right-hand side is made mean-free and the first unknown pinned to 0.
void modal_rational(const Tridiag& t, std::span<const double> lambda, double p, double q, double r,
                    double s, std::span<const double> in, std::span<double> out,
                    bool pin_zero_mode = false);

/// Real-coefficient Thomas solve with complex right-hand side, in place.
/// `stride` separates consecutive rows of x.
void thomas(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
            std::complex<double>* x, int n, int stride, std::vector<double>& scratch);

}  // namespace mixctl::spectral
