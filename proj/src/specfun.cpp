#include "thermobem/specfun.hpp"

#include <cmath>
#include <quadmath.h>

#include "thermobem/errors.hpp"

namespace thermobem {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr double kSeriesAsymptoticCrossover = 18.0;
// Below this |z|+Re z the cancellation of the ascending series stays within
// a few digits and plain doubles suffice.
constexpr double kDoubleSeriesLimit = 9.0;

// Minimal complex arithmetic on __float128. Only what the ascending series
// needs; everything stays in registers.
struct qcplx {
    __float128 re, im;
};

inline qcplx qc(double re, double im = 0.0) { return {re, im}; }
inline qcplx qc(cplx z) { return {z.real(), z.imag()}; }
inline qcplx qcq(__float128 v) { return {v, 0}; }
inline cplx to_cplx(qcplx z) { return cplx(static_cast<double>(z.re), static_cast<double>(z.im)); }
inline qcplx operator+(qcplx a, qcplx b) { return {a.re + b.re, a.im + b.im}; }
inline qcplx operator-(qcplx a, qcplx b) { return {a.re - b.re, a.im - b.im}; }
inline qcplx operator*(qcplx a, qcplx b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline qcplx operator*(qcplx a, __float128 s) { return {a.re * s, a.im * s}; }
inline qcplx operator/(qcplx a, __float128 s) { return {a.re / s, a.im / s}; }
inline __float128 qabs2(qcplx a) { return a.re * a.re + a.im * a.im; }
inline qcplx qlog(qcplx a) {
    return {logq(hypotq(a.re, a.im)), atan2q(a.im, a.re)};
}
inline qcplx qinv(qcplx a) {
    __float128 d = qabs2(a);
    return {a.re / d, -a.im / d};
}

// Ascending series for K0 and K1, accumulated in quad precision:
//   K0(z) = sum_k t_k (H_k - ln(z/2) - gamma),            t_k = (z^2/4)^k/(k!)^2
//   K1(z) = 1/z + sum_k u_k (ln(z/2) + gamma - (H_k+H_{k+1})/2),
//                                     u_k = (z/2)(z^2/4)^k/(k!(k+1)!)
K01 series_k01_quad(cplx zd) {
    static const __float128 gamma_q =
        strtoflt128("0.57721566490153286060651209008240243104215933594", nullptr);
    const qcplx z = qc(zd);
    const qcplx z2q = (z * z) / __float128(4);
    const qcplx lz = qlog(z / __float128(2));
    const qcplx lg = lz + qcplx{gamma_q, 0};

    qcplx t = qc(1.0);              // t_0
    qcplx u = z / __float128(2);    // u_0
    __float128 hk = 0, hk1 = 1;     // H_0, H_1
    qcplx s0 = qc(0.0) - lg;        // k = 0 terms
    qcplx s1 = u * (lg - qc(0.5));
    for (int k = 1; k < 200; ++k) {
        const __float128 kk = k;
        t = t * z2q / (kk * kk);
        u = u * z2q / (kk * (kk + 1));
        hk += 1 / kk;
        hk1 += 1 / (kk + 1);
        const qcplx dt = t * (qcq(hk) - lg);
        const qcplx du = u * (lg - qcq((hk + hk1) / 2));
        s0 = s0 + dt;
        s1 = s1 + du;
        if (qabs2(t) * (4 + qabs2(lg)) < __float128(1e-72) * (qabs2(s0) + __float128(1e-60)))
            break;
    }
    return {to_cplx(s0), to_cplx(qinv(z) + s1)};
}

K01 series_k01_double(cplx z) {
    const cplx z2q = z * z / 4.0;
    const cplx lg = std::log(z / 2.0) + kEulerGamma;
    cplx t = 1.0, u = z / 2.0;
    double hk = 0, hk1 = 1;
    cplx s0 = -lg;
    cplx s1 = u * (lg - 0.5);
    for (int k = 1; k < 120; ++k) {
        const double kk = k;
        t *= z2q / (kk * kk);
        u *= z2q / (kk * (kk + 1));
        hk += 1 / kk;
        hk1 += 1 / (kk + 1);
        s0 += t * (hk - lg);
        s1 += u * (lg - 0.5 * (hk + hk1));
        if (std::norm(t) * (4 + std::norm(lg)) < 1e-36 * std::norm(s0)) break;
    }
    return {s0, 1.0 / z + s1};
}

// Large-|z| expansion K_nu(z) ~ sqrt(pi/2z) e^{-z} sum a_k, truncated at the
// smallest term. Valid here for |z| > 18 where the smallest term is below
// the 1e-13 noise floor for Re z > 0.
cplx asymptotic_k(int nu, cplx z) {
    const double fournu2 = 4.0 * nu * nu;
    cplx term = 1.0, sum = 1.0;
    double prev = 1e300;
    for (int k = 1; k < 60; ++k) {
        term *= (fournu2 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * z);
        const double mag = std::abs(term);
        if (mag >= prev) break; // divergent tail reached
        sum += term;
        prev = mag;
        if (mag < 1e-17 * std::abs(sum)) break;
    }
    const cplx pref = std::sqrt(M_PI / (2.0 * z)) * std::exp(-z);
    return pref * sum;
}

} // namespace

K01 modified_bessel_k01(cplx z) {
    if (!(z.real() > 0.0) || z == cplx(0.0, 0.0))
        throw DomainError("modified_bessel_k requires Re z > 0 and z != 0");
    const double az = std::abs(z);
    if (az > kSeriesAsymptoticCrossover)
        return {asymptotic_k(0, z), asymptotic_k(1, z)};
    if (az + z.real() <= kDoubleSeriesLimit) return series_k01_double(z);
    return series_k01_quad(z);
}

cplx modified_bessel_k(int order, cplx z) {
    if (order != 0 && order != 1) throw DomainError("modified_bessel_k supports orders 0 and 1");
    K01 k = modified_bessel_k01(z);
    return order == 0 ? k.k0 : k.k1;
}

namespace {

// The I series loses e^{|z|} digits to cancellation for oscillatory
// arguments, so the midrange runs in quad precision and beyond |z| = 36 the
// two-exponential asymptotic form takes over.
qcplx series_i_quad(int nu, cplx zd) {
    const qcplx z = qc(zd);
    const qcplx q = (z * z) / __float128(4);
    qcplx t = nu == 0 ? qc(1.0) : z / __float128(2);
    qcplx s = t;
    for (int k = 1; k < 160; ++k) {
        t = t * q / (__float128(k) * (k + nu));
        s = s + t;
        if (qabs2(t) < __float128(1e-76) * qabs2(s)) break;
    }
    return s;
}

cplx asymptotic_i(int nu, cplx z) {
    const double fournu2 = 4.0 * nu * nu;
    cplx sp = 1.0, sm = 1.0, tp = 1.0, tm = 1.0;
    for (int k = 1; k < 40; ++k) {
        const cplx f = (fournu2 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * z);
        tp *= f;
        tm *= -f;
        sp += tp;
        sm += tm;
        if (std::abs(tp) < 1e-17 * std::abs(sp) && std::abs(tm) < 1e-17 * std::abs(sm)) break;
    }
    const cplx pref = 1.0 / std::sqrt(2.0 * M_PI * z);
    const cplx sigma = (z.imag() >= 0 ? cplx(0, 1) : cplx(0, -1)) *
                       (nu == 1 ? -1.0 : 1.0);
    return pref * (std::exp(z) * sm + sigma * std::exp(-z) * sp);
}

cplx stable_i(int nu, cplx z) {
    const double az = std::abs(z);
    if (az <= 14.0) {
        const cplx q = z * z / 4.0;
        cplx t = nu == 0 ? cplx(1.0) : z / 2.0;
        cplx s = t;
        for (int k = 1; k < 80; ++k) {
            t *= q / (static_cast<double>(k) * (k + nu));
            s += t;
            if (std::norm(t) < 1e-36 * std::norm(s)) break;
        }
        return s;
    }
    if (az <= 36.0) return to_cplx(series_i_quad(nu, z));
    return asymptotic_i(nu, z);
}

} // namespace

cplx bessel_i0(cplx z) { return stable_i(0, z); }

cplx bessel_i1(cplx z) { return stable_i(1, z); }

cplx bessel_i1_over_z(cplx z) {
    if (std::abs(z) < 1e-8) {
        // I1(z)/z = 1/2 + z^2/16 + ...
        return 0.5 + z * z / 16.0;
    }
    return stable_i(1, z) / z;
}

cplx bessel_chi(cplx z) {
    // (2 I1(z)/z - I0(z))/z^2; the small-z series avoids the 0/0 limit
    const double az = std::abs(z);
    if (az <= 14.0) {
        const cplx q = z * z / 4.0;
        cplx t = -1.0 / 8.0, s = t; // m = 1
        for (int m = 2; m < 80; ++m) {
            t *= q / (static_cast<double>(m) * (m + 1));
            t *= static_cast<double>(m) / (m - 1);
            s += t;
            if (std::norm(t) < 1e-36 * std::norm(s)) break;
        }
        return s;
    }
    if (az <= 36.0) {
        const qcplx z2 = qc(z) * qc(z);
        const qcplx num = series_i_quad(1, z) * qc(2.0) * qinv(qc(z)) - series_i_quad(0, z);
        return to_cplx(num * qinv(z2));
    }
    return (2.0 * asymptotic_i(1, z) / z - asymptotic_i(0, z)) / (z * z);
}

RadialDerivs radial_derivatives(int dim, cplx lambda, double r) {
    if (!(r > 0.0)) throw DomainError("radial_derivatives requires r > 0");
    if (!(lambda.real() > 0.0)) throw DomainError("radial_derivatives requires Re lambda > 0");
    RadialDerivs d;
    if (dim == 3) {
        const cplx e = std::exp(-lambda * r) / (4.0 * M_PI * r);
        const double ir = 1.0 / r;
        d.f0 = e;
        d.f1 = -(lambda + ir) * e;
        d.f2 = (lambda * lambda + 2.0 * lambda * ir + 2.0 * ir * ir) * e;
        d.f3 = -(lambda * lambda * lambda + 3.0 * lambda * lambda * ir +
                 6.0 * lambda * ir * ir + 6.0 * ir * ir * ir) * e;
    } else if (dim == 2) {
        const cplx z = lambda * r;
        const K01 k = modified_bessel_k01(z);
        const double c = 1.0 / (2.0 * M_PI);
        const cplx l2 = lambda * lambda;
        d.f0 = c * k.k0;
        d.f1 = -c * lambda * k.k1;
        d.f2 = c * l2 * (k.k0 + k.k1 / z);
        d.f3 = -c * l2 * lambda * (k.k1 + k.k0 / z + 2.0 * k.k1 / (z * z));
    } else {
        throw DomainError("radial_derivatives: dim must be 2 or 3");
    }
    return d;
}

} // namespace thermobem
