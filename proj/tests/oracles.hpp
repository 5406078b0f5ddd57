#pragma once

// Independent oracles for the test suite. Everything here is deliberately
// written against first principles (integral representations, plain series,
// finite differences, companion matrices) and stays off the library's
// evaluation paths.

#include <array>
#include <cmath>
#include <complex>
#include <functional> // ok
#include <random>

#include <Eigen/Dense>

#include "thermobem/kernels.hpp"
#include "thermobem/material.hpp"

namespace oracles {

using thermobem::cplx;
using thermobem::Vec3;

// --- modified Bessel functions ---------------------------------------------

// K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt. The integrand extends to
// an even function of t with a doubly-exponentially decayed tail, so the
// trapezoid rule converges spectrally; the step is refined adaptively until
// two consecutive refinements agree.
inline cplx integral_bessel_k(int nu, cplx z, double tol = 5e-15) {
    const double T = std::acosh(std::max(2.0, (z.real() + 60.0) / z.real()));
    auto sum = [&](double h) {
        const int n = static_cast<int>(T / h) + 1;
        cplx s = 0.5 * std::exp(-z);
        for (int i = 1; i <= n; ++i) {
            const double t = i * h;
            s += std::exp(-z * std::cosh(t)) * std::cosh(nu * t);
        }
        return s * h;
    };
    cplx prev = sum(0.02);
    for (double h = 0.01; h > 1e-5; h /= 2) {
        const cplx cur = sum(h);
        if (std::abs(cur - prev) <= tol * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

inline cplx series_bessel_i(int nu, cplx z) {
    cplx t = nu == 0 ? cplx(1.0) : z / 2.0;
    cplx s = t;
    const cplx q = z * z / 4.0;
    for (int k = 1; k < 200; ++k) {
        t *= q / (static_cast<double>(k) * (k + nu));
        s += t;
        if (std::norm(t) < 1e-34 * std::norm(s)) break;
    }
    return s;
}

// --- wave-number oracle -----------------------------------------------------

// Roots of z^2 - P z + Q = 0 via the companion-matrix eigenvalues.
inline std::array<cplx, 2> quadratic_roots_companion(cplx P, cplx Q) {
    Eigen::Matrix2cd companion;
    companion << cplx(0), -Q, cplx(1), P;
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(companion);
    return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

// --- finite-difference application of the pseudo-oscillation operator -------

// Samples a (d+1)-vector field at x; returns B(dx,s) applied to it by
// fourth-order central differences. adjoint = true applies B*.
struct OperatorFD {
    int dim;
    thermobem::Material m;
    cplx s;
    bool adjoint = false;
    double h = 1e-3;

    template <typename Field>
    std::array<cplx, 4> apply(const Field& field, const Vec3& x) const {
        const int d = dim;
        auto shift = [&](int c, double delta) {
            Vec3 y = x;
            y[c] += delta;
            return y;
        };
        // value, first and second partials of every component
        std::array<cplx, 4> val = field(x);
        std::array<std::array<cplx, 4>, 3> d1{}, d2{};
        std::array<std::array<std::array<cplx, 4>, 3>, 3> dcross{};
        for (int c = 0; c < d; ++c) {
            auto fp2 = field(shift(c, 2 * h)), fp1 = field(shift(c, h));
            auto fm1 = field(shift(c, -h)), fm2 = field(shift(c, -2 * h));
            for (int q = 0; q <= d; ++q) {
                d1[c][q] = (-fp2[q] + 8.0 * fp1[q] - 8.0 * fm1[q] + fm2[q]) / (12.0 * h);
                d2[c][q] = (-fp2[q] + 16.0 * fp1[q] - 30.0 * val[q] + 16.0 * fm1[q] - fm2[q]) /
                           (12.0 * h * h);
            }
        }
        auto at2 = [&](int a, int b, double da, double db) {
            Vec3 y = x;
            y[a] += da;
            y[b] += db;
            return field(y);
        };
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) {
                std::array<cplx, 4> s1{}, s2{};
                auto pp = at2(a, b, h, h), mm = at2(a, b, -h, -h), pm = at2(a, b, h, -h),
                     mp = at2(a, b, -h, h);
                auto pp2 = at2(a, b, 2 * h, 2 * h), mm2 = at2(a, b, -2 * h, -2 * h),
                     pm2 = at2(a, b, 2 * h, -2 * h), mp2 = at2(a, b, -2 * h, 2 * h);
                for (int q = 0; q <= d; ++q) {
                    s1[q] = pp[q] + mm[q] - pm[q] - mp[q];
                    s2[q] = pp2[q] + mm2[q] - pm2[q] - mp2[q];
                }
                for (int q = 0; q <= d; ++q) {
                    cplx v = (16.0 * s1[q] - s2[q]) / (48.0 * h * h);
                    dcross[a][b][q] = v;
                    dcross[b][a][q] = v;
                }
            }
        auto dij = [&](int a, int b, int q) { return a == b ? d2[a][q] : dcross[a][b][q]; };

        const double gam_row = adjoint ? -1.0 : 1.0; // sign bookkeeping below
        (void)gam_row;
        std::array<cplx, 4> out{};
        const cplx rho_s2 = m.rho * s * s;
        // displacement rows: mu lap u + (lambda+mu) grad div u - rho s^2 u + coupling grad theta
        for (int i = 0; i < d; ++i) {
            cplx lap = 0, graddiv = 0;
            for (int c = 0; c < d; ++c) {
                lap += dij(c, c, i);
                graddiv += dij(i, c, c);
            }
            cplx coup = adjoint ? (s * m.eta) * d1[i][d] : (-m.gamma) * d1[i][d];
            out[i] = m.mu * lap + (m.lambda + m.mu) * graddiv - rho_s2 * val[i] + coup;
        }
        cplx lap_t = 0, div_u = 0;
        for (int c = 0; c < d; ++c) {
            lap_t += dij(c, c, d);
            div_u += d1[c][c];
        }
        const cplx coup_t = adjoint ? m.gamma * div_u : (-s * m.eta) * div_u;
        out[d] = lap_t - (s / m.kappa) * val[d] + coup_t;
        return out;
    }
};

// Deterministic point sampler on a shell r in [rmin, rmax] around the origin.
inline Vec3 random_point(std::mt19937& rng, int dim, double rmin, double rmax) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        Vec3 p = {u(rng), u(rng), dim == 3 ? u(rng) : 0.0};
        const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        if (r < 1e-3 || r > 1.0) continue;
        const double want = rmin + (rmax - rmin) * std::abs(u(rng));
        const double f = want / r;
        return {p[0] * f, p[1] * f, p[2] * f};
    }
}

} // namespace oracles
