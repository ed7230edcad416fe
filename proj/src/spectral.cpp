#include "mixctl/spectral.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace mixctl::spectral {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

Tridiag interior_second_difference(int n, double hy) {
    const double c = 1.0 / (hy * hy);
    Tridiag t;
    t.lower.assign(n, c);
    t.diag.assign(n, -2.0 * c);
    t.upper.assign(n, c);
    t.lower[0] = 0.0;
    t.upper[n - 1] = 0.0;
    return t;
}

}  // namespace

Tridiag neumann_cells(const Grid& g) {
    Tridiag t = interior_second_difference(g.ny, g.hy);
    t.diag.front() = -1.0 / (g.hy * g.hy);
    t.diag.back() = -1.0 / (g.hy * g.hy);
    return t;
}

Tridiag robin_cells(const Grid& g, double alpha) {
    Tridiag t = interior_second_difference(g.ny, g.hy);
    t.diag.front() = (alpha - 2.0) / (g.hy * g.hy);
    t.diag.back() = (alpha - 2.0) / (g.hy * g.hy);
    return t;
}

Tridiag dirichlet_faces(const Grid& g) { return interior_second_difference(g.ny - 1, g.hy); }

std::vector<double> x_symbol(const Grid& g, bool mac) {
    const int nm = g.nx / 2 + 1;
    std::vector<double> lam(nm);
    const bool pow2 = std::has_single_bit(static_cast<unsigned>(g.nx));
    for (int m = 0; m < nm; ++m) {
        const double theta = 2.0 * std::numbers::pi * m / g.nx;
        if (mac) {
            const double s = std::sin(0.5 * theta);
            lam[m] = 4.0 * s * s / (g.hx * g.hx);
        } else if (pow2) {
            const double k = 2.0 * std::numbers::pi * m / g.lx;
            lam[m] = k * k;
        } else {
            lam[m] = (30.0 - 32.0 * std::cos(theta) + 2.0 * std::cos(2.0 * theta)) / (12.0 * g.hx * g.hx);
        }
    }
    return lam;
}

RowTransform::RowTransform(int nx, int nrows) : nx_(nx), rows_(nrows) {
    const int nm = modes();
    std::vector<double> real(static_cast<std::size_t>(nx) * nrows);
    std::vector<std::complex<double>> cplx(static_cast<std::size_t>(nm) * nrows);
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    std::lock_guard lock(plan_mutex());
    fwd_ = fftw_plan_many_dft_r2c(1, &nx_, nrows, real.data(), nullptr, 1, nx, c, nullptr, 1, nm,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    inv_ = fftw_plan_many_dft_c2r(1, &nx_, nrows, c, nullptr, 1, nm, real.data(), nullptr, 1, nx,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fwd_ || !inv_) throw NumericalError("FFT plan creation failed");
}

RowTransform::~RowTransform() {
    std::lock_guard lock(plan_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (inv_) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
}

void RowTransform::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void RowTransform::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
    std::vector<std::complex<double>> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.data());
    const double scale = 1.0 / nx_;
    for (double& t : out) t *= scale;
}

const RowTransform& transform(int nx, int rows) {
    static std::mutex cache_mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<RowTransform>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[{nx, rows}];
    if (!slot) slot = std::make_unique<RowTransform>(nx, rows);
    return *slot;
}

void thomas(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
            std::complex<double>* x, int n, int stride, std::vector<double>& scratch) {
    scratch.resize(n);
    double beta = diag[0];
    if (beta == 0.0) throw NumericalError("singular tridiagonal system");
    x[0] /= beta;
    for (int j = 1; j < n; ++j) {
        scratch[j] = upper[j - 1] / beta;
        beta = diag[j] - lower[j] * scratch[j];
        if (beta == 0.0) throw NumericalError("singular tridiagonal system");
        x[j * stride] = (x[j * stride] - lower[j] * x[(j - 1) * stride]) / beta;
    }
    for (int j = n - 2; j >= 0; --j) x[j * stride] -= scratch[j + 1] * x[(j + 1) * stride];
}

void modal_rational(const Tridiag& t, std::span<const double> lambda, double p, double q, double r,
                    double s, std::span<const double> in, std::span<double> out, bool pin_zero_mode) {
    const int n = t.size();
    const int nx = static_cast<int>(in.size()) / n;
    const RowTransform& ft = transform(nx, n);
    const int nm = ft.modes();
    std::vector<std::complex<double>> hat(static_cast<std::size_t>(nm) * n);
    ft.forward(in, hat);

    std::vector<std::complex<double>> col(n);
    std::vector<double> lo(n), di(n), up(n), scratch;
    for (int m = 0; m < nm; ++m) {
        const double lam = lambda[m];
        if (s != 0.0) {
            for (int j = 0; j < n; ++j) col[j] = hat[static_cast<std::size_t>(j) * nm + m];
            for (int j = 0; j < n; ++j) {
                std::complex<double> lx = (t.diag[j] - lam) * col[j];
                if (j > 0) lx += t.lower[j] * col[j - 1];
                if (j + 1 < n) lx += t.upper[j] * col[j + 1];
                hat[static_cast<std::size_t>(j) * nm + m] = r * col[j] + s * lx;
            }
        } else if (r != 1.0) {
            for (int j = 0; j < n; ++j) hat[static_cast<std::size_t>(j) * nm + m] *= r;
        }
        for (int j = 0; j < n; ++j) {
            lo[j] = q * t.lower[j];
            up[j] = q * t.upper[j];
            di[j] = p + q * (t.diag[j] - lam);
        }
        std::complex<double>* x = hat.data() + m;
        if (pin_zero_mode && m == 0) {
            std::complex<double> mean = 0.0;
            for (int j = 0; j < n; ++j) mean += x[static_cast<std::size_t>(j) * nm];
            mean /= static_cast<double>(n);
            for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j) * nm] -= mean;
            di[0] = 1.0;
            up[0] = 0.0;
            x[0] = 0.0;
        }
        thomas(lo, di, up, x, n, nm, scratch);
    }
    ft.inverse(hat, out);
}

}  // namespace mixctl::spectral
