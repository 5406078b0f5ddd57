#include "thermobem/kernels.hpp"

#include <cmath>

#include "thermobem/errors.hpp"

namespace thermobem {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
// Wave-number terms whose exponential scale e^{Re z} exceeds this are
// treated as smooth in the log split; their singular content is below the
// kernel's own noise floor there.
constexpr double kLogSplitReCut = 12.0;
constexpr double kConfluentFloor = 1e-10;

double dist(const Vec3& x, const Vec3& y, int dim, Vec3& z) {
    double r2 = 0;
    for (int i = 0; i < 3; ++i) {
        z[i] = (i < dim) ? x[i] - y[i] : 0.0;
        r2 += z[i] * z[i];
    }
    return std::sqrt(r2);
}

double point_scale(const Vec3& x, const Vec3& y, int dim) {
    double s = 1.0;
    for (int i = 0; i < dim; ++i) s = std::max({s, std::abs(x[i]), std::abs(y[i])});
    return s;
}

} // namespace

LaplacePoint make_laplace_point(cplx s) {
    if (!(s.real() > 0.0)) throw DomainError("Laplace parameter needs Re s > 0");
    return LaplacePoint{s, s.real(), std::min(1.0, s.real())};
}

WaveNumbers wave_numbers(const Material& m, const LaplacePoint& sp) {
    const cplx s = sp.s;
    const double lp2m = m.lambda + 2.0 * m.mu;
    const double eps = m.gamma * m.eta * m.kappa / lp2m;
    const cplx sk = s / m.kappa;
    const cplx lamp_sq = m.rho * s * s / lp2m;
    const cplx lam3_sq = m.rho * s * s / m.mu;

    const cplx P = sk * (1.0 + eps) + lamp_sq;
    const cplx Q = sk * lamp_sq;
    const cplx disc = std::sqrt(P * P - 4.0 * Q);
    // larger-magnitude root first, partner via the product, avoiding
    // cancellation in (P -+ disc)/2
    const cplx rplus = 0.5 * (P + disc), rminus = 0.5 * (P - disc);
    const cplx big = std::abs(rplus) >= std::abs(rminus) ? rplus : rminus;
    const cplx other = Q / big;

    WaveNumbers w;
    if (std::abs(big - sk) <= std::abs(other - sk)) {
        w.lam_sq = {big, other, lam3_sq};
    } else {
        w.lam_sq = {other, big, lam3_sq};
    }
    w.lamp_sq = lamp_sq;

    const double sep = std::abs(w.lam_sq[0] - w.lam_sq[1]);
    if (sep < kConfluentFloor * std::max(std::abs(w.lam_sq[0]), std::abs(w.lam_sq[1])))
        throw ConfluentRoots("lam1^2 and lam2^2 coincide within the relative floor");

    for (int k = 0; k < 3; ++k) {
        w.lam[k] = std::sqrt(w.lam_sq[k]);
        if (!(w.lam[k].real() > 0.0))
            throw BranchError("principal square root of a squared wave number has Re <= 0");
    }
    w.lamp = std::sqrt(lamp_sq);
    if (!(w.lamp.real() > 0.0)) throw BranchError("Re lamp <= 0");
    return w;
}

PFCoeffs partial_fraction_coeffs(const WaveNumbers& w) {
    const auto& l = w.lam_sq;
    const double scale = std::max({std::abs(l[0]), std::abs(l[1]), std::abs(l[2])});
    for (int k = 0; k < 3; ++k) {
        const cplx d = l[k] - l[(k + 1) % 3];
        if (std::abs(d) < kConfluentFloor * scale)
            throw ConfluentRoots("squared wave numbers not pairwise distinct");
    }
    PFCoeffs c;
    for (int k = 0; k < 3; ++k)
        c.c[k] = 1.0 / ((l[k] - l[(k + 1) % 3]) * (l[k] - l[(k + 2) % 3]));
    return c;
}

std::array<cplx, 3> traction_apply(const Material& m,
                                   const std::array<std::array<cplx, 3>, 3>& grad_u,
                                   cplx div_u, const Vec3& n, int dim) {
    double nn = 0;
    for (int i = 0; i < dim; ++i) nn += n[i] * n[i];
    if (std::abs(nn - 1.0) > 1e-12) throw BadNormal("traction_apply needs a unit normal");
    std::array<cplx, 3> t{};
    for (int i = 0; i < dim; ++i) {
        cplx v = m.lambda * div_u * n[i];
        for (int l = 0; l < dim; ++l) v += m.mu * (grad_u[i][l] + grad_u[l][i]) * n[l];
        t[i] = v;
    }
    return t;
}

// ---------------------------------------------------------------------------

struct KernelEvaluator::Stack {
    int level = 0;
    double r = 0;
    Vec3 rh{};            // unit vector (x-y)/r
    cplx E0[16];          // kernel matrix
    cplx E1[3][16];       // d/dz_l of E
    cplx E2[3][3][16];    // d/dz_l d/dz_m of E
};

KernelEvaluator::KernelEvaluator(int dim, const Material& m, const LaplacePoint& s)
    : dim_(dim), mat_(m), lp_(s) {
    if (dim != 2 && dim != 3) throw DomainError("kernel dimension must be 2 or 3");
    wn_ = wave_numbers(m, s);
    const cplx rss = m.rho * s.s * s.s;
    const cplx d12 = wn_.lam_sq[0] - wn_.lam_sq[1];
    coef_.a[0] = (wn_.lamp_sq - wn_.lam_sq[1]) / (rss * d12);
    coef_.a[1] = (wn_.lamp_sq - wn_.lam_sq[0]) / (rss * -d12);
    coef_.a[2] = -1.0 / rss;
    coef_.cth[0] = (wn_.lam_sq[0] - wn_.lamp_sq) / d12;
    coef_.cth[1] = (wn_.lam_sq[1] - wn_.lamp_sq) / -d12;
    coef_.b_gamma = m.gamma * wn_.lamp_sq / (rss * d12);
    coef_.b_eta = s.s * m.eta * wn_.lamp_sq / (rss * d12);
    coef_.c3 = wn_.lam_sq[2] / rss;
}

void KernelEvaluator::eval_stack(const Vec3& x, const Vec3& y, int level, Stack& st) const {
    const int d = dim_, n = d + 1;
    Vec3 z;
    const double r = dist(x, y, d, z);
    if (r < 1e-14 * point_scale(x, y, d))
        throw CoincidentPoints("kernel evaluation at coincident points");
    st.level = level;
    st.r = r;
    for (int i = 0; i < 3; ++i) st.rh[i] = z[i] / r;
    const double* rh = st.rh.data();

    cplx f[3][5];
    for (int k = 0; k < 3; ++k) {
        const RadialDerivs rd = radial_derivatives(d, wn_.lam[k], r);
        f[k][0] = rd.f0;
        f[k][1] = rd.f1;
        f[k][2] = rd.f2;
        f[k][3] = rd.f3;
        // fourth radial derivative from the Yukawa ODE
        const cplx l2 = wn_.lam_sq[k];
        if (d == 3)
            f[k][4] = l2 * rd.f2 - (2.0 / r) * rd.f3 + (4.0 / (r * r)) * rd.f2 -
                      (4.0 / (r * r * r)) * rd.f1;
        else
            f[k][4] = l2 * rd.f2 - (1.0 / r) * rd.f3 + (2.0 / (r * r)) * rd.f2 -
                      (2.0 / (r * r * r)) * rd.f1;
    }

    cplx h2[3], hd[3], t3[3], tw[3], c4[3], c2[3], c0[3];
    for (int k = 0; k < 3; ++k) {
        hd[k] = f[k][1] / r;
        h2[k] = f[k][2] - hd[k];
        tw[k] = f[k][2] / r - f[k][1] / (r * r);
        t3[k] = f[k][3] - 3.0 * tw[k];
        c2[k] = f[k][3] / r - 3.0 * f[k][2] / (r * r) + 3.0 * f[k][1] / (r * r * r);
        c0[k] = f[k][2] / (r * r) - f[k][1] / (r * r * r);
        c4[k] = f[k][4] - 6.0 * f[k][3] / r + 15.0 * f[k][2] / (r * r) -
                15.0 * f[k][1] / (r * r * r);
    }

    const auto& cf = coef_;
    const cplx df1 = f[0][1] - f[1][1];

    auto at = [n](cplx* m_, int i, int j) -> cplx& { return m_[i * n + j]; };

    // E
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            cplx v = 0;
            for (int k = 0; k < 3; ++k)
                v += cf.a[k] * (h2[k] * rh[i] * rh[j] + (i == j ? hd[k] : cplx(0)));
            if (i == j) v += cf.c3 * f[2][0];
            at(st.E0, i, j) = v;
        }
    for (int i = 0; i < d; ++i) {
        at(st.E0, i, d) = cf.b_gamma * df1 * rh[i];
        at(st.E0, d, i) = cf.b_eta * df1 * rh[i];
    }
    at(st.E0, d, d) = cf.cth[0] * f[0][0] + cf.cth[1] * f[1][0];
    if (level < 1) return;

    auto H = [&](int k, int i, int j) {
        return h2[k] * rh[i] * rh[j] + (i == j ? hd[k] : cplx(0));
    };
    auto T = [&](int k, int i, int j, int l) {
        cplx v = t3[k] * rh[i] * rh[j] * rh[l];
        if (i == j) v += tw[k] * rh[l];
        if (i == l) v += tw[k] * rh[j];
        if (j == l) v += tw[k] * rh[i];
        return v;
    };

    for (int l = 0; l < d; ++l) {
        cplx* e1 = st.E1[l];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                cplx v = 0;
                for (int k = 0; k < 3; ++k) v += cf.a[k] * T(k, i, j, l);
                if (i == j) v += cf.c3 * f[2][1] * rh[l];
                at(e1, i, j) = v;
            }
        for (int i = 0; i < d; ++i) {
            at(e1, i, d) = cf.b_gamma * (H(0, i, l) - H(1, i, l));
            at(e1, d, i) = cf.b_eta * (H(0, i, l) - H(1, i, l));
        }
        at(e1, d, d) = (cf.cth[0] * f[0][1] + cf.cth[1] * f[1][1]) * rh[l];
    }
    if (level < 2) return;

    auto F4 = [&](int k, int i, int j, int l, int m) {
        cplx v = c4[k] * rh[i] * rh[j] * rh[l] * rh[m];
        cplx s2 = 0;
        if (i == j) s2 += rh[l] * rh[m];
        if (i == l) s2 += rh[j] * rh[m];
        if (i == m) s2 += rh[j] * rh[l];
        if (j == l) s2 += rh[i] * rh[m];
        if (j == m) s2 += rh[i] * rh[l];
        if (l == m) s2 += rh[i] * rh[j];
        v += c2[k] * s2;
        double s0 = 0;
        if (i == j && l == m) s0 += 1;
        if (i == l && j == m) s0 += 1;
        if (i == m && j == l) s0 += 1;
        v += c0[k] * s0;
        return v;
    };

    for (int l = 0; l < d; ++l)
        for (int mq = l; mq < d; ++mq) {
            cplx* e2 = st.E2[l][mq];
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    cplx v = 0;
                    for (int k = 0; k < 3; ++k) v += cf.a[k] * F4(k, i, j, l, mq);
                    if (i == j) v += cf.c3 * H(2, l, mq);
                    at(e2, i, j) = v;
                }
            for (int i = 0; i < d; ++i) {
                at(e2, i, d) = cf.b_gamma * (T(0, i, l, mq) - T(1, i, l, mq));
                at(e2, d, i) = cf.b_eta * (T(0, i, l, mq) - T(1, i, l, mq));
            }
            at(e2, d, d) = cf.cth[0] * H(0, l, mq) + cf.cth[1] * H(1, l, mq);
            if (mq != l)
                for (int q = 0; q < n * n; ++q) st.E2[mq][l][q] = e2[q];
        }
}

// Every layer kernel is the same linear pattern in (E, dE); the x-gradient
// reuses it with (dE, ddE).
void KernelEvaluator::assemble_kernel(KernelKind kind, const Stack& st, const Vec3& n_x,
                                      const Vec3& n_y, cplx* out, cplx (*grad)[16]) const {
    const int d = dim_, n = d + 1;
    const double lamL = mat_.lambda, mu = mat_.mu;
    const cplx seta = lp_.s * mat_.eta;
    const double gam = mat_.gamma;

    auto run = [&](const cplx* e0, const cplx* const e1[3], cplx* k_out) {
        auto E0 = [&](int i, int j) { return e0[i * n + j]; };
        auto E1 = [&](int l, int i, int j) { return e1[l][i * n + j]; };
        auto K = [&](int i, int j) -> cplx& { return k_out[i * n + j]; };
        switch (kind) {
            case KernelKind::E:
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) K(i, j) = E0(i, j);
                break;
            case KernelKind::EAdjoint:
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) K(i, j) = E0(j, i);
                break;
            case KernelKind::DL:
                for (int j = 0; j < n; ++j) {
                    cplx tr = 0;
                    for (int a = 0; a < d; ++a) tr += E1(a, j, a);
                    for (int i = 0; i < d; ++i) {
                        cplx v = -lamL * n_y[i] * tr + seta * n_y[i] * E0(j, d);
                        for (int l = 0; l < d; ++l)
                            v -= mu * (E1(l, j, i) + E1(i, j, l)) * n_y[l];
                        K(j, i) = v;
                    }
                    cplx w = 0;
                    for (int l = 0; l < d; ++l) w -= n_y[l] * E1(l, j, d);
                    K(j, d) = w;
                }
                break;
            case KernelKind::KPrime:
                for (int j = 0; j < n; ++j) {
                    cplx tr = 0;
                    for (int a = 0; a < d; ++a) tr += E1(a, a, j);
                    for (int i = 0; i < d; ++i) {
                        cplx v = lamL * n_x[i] * tr - gam * n_x[i] * E0(d, j);
                        for (int l = 0; l < d; ++l)
                            v += mu * (E1(l, i, j) + E1(i, l, j)) * n_x[l];
                        K(i, j) = v;
                    }
                    cplx w = 0;
                    for (int l = 0; l < d; ++l) w += n_x[l] * E1(l, d, j);
                    K(d, j) = w;
                }
                break;
            case KernelKind::QDN:
                for (int m = 0; m < n; ++m) {
                    for (int c = 0; c < d; ++c) K(m, c) = E0(m, c);
                    cplx w = 0;
                    for (int l = 0; l < d; ++l) w -= n_y[l] * E1(l, m, d);
                    K(m, d) = w;
                }
                break;
            case KernelKind::QND:
                for (int m = 0; m < n; ++m) {
                    cplx tr = 0;
                    for (int a = 0; a < d; ++a) tr += E1(a, m, a);
                    for (int i = 0; i < d; ++i) {
                        cplx v = -lamL * n_y[i] * tr + seta * n_y[i] * E0(m, d);
                        for (int l = 0; l < d; ++l)
                            v -= mu * (E1(l, m, i) + E1(i, m, l)) * n_y[l];
                        K(m, i) = v;
                    }
                    K(m, d) = -E0(m, d);
                }
                break;
        }
    };

    {
        const cplx* e1p[3] = {st.E1[0], st.E1[1], st.E1[2]};
        run(st.E0, e1p, out);
    }
    if (grad) {
        for (int l = 0; l < d; ++l) {
            const cplx* e1p[3] = {st.E2[l][0], st.E2[l][1], st.E2[l][2]};
            run(st.E1[l], e1p, grad[l]);
        }
    }
}

KernelMatrix KernelEvaluator::fundamental(const Vec3& x, const Vec3& y) const {
    Stack st;
    eval_stack(x, y, 0, st);
    KernelMatrix k;
    k.dim = dim_;
    k.kind = KernelKind::E;
    for (int q = 0; q < (dim_ + 1) * (dim_ + 1); ++q) k.a[q] = st.E0[q];
    return k;
}

KernelMatrix KernelEvaluator::adjoint_fundamental(const Vec3& x, const Vec3& y) const {
    KernelMatrix e = fundamental(x, y);
    KernelMatrix k;
    k.dim = dim_;
    k.kind = KernelKind::EAdjoint;
    for (int i = 0; i <= dim_; ++i)
        for (int j = 0; j <= dim_; ++j) k(i, j) = e(j, i);
    return k;
}

KernelMatrix KernelEvaluator::layer_kernel(KernelKind kind, const Vec3& x, const Vec3& y,
                                           const Vec3& n_x, const Vec3& n_y) const {
    if (kind == KernelKind::E) return fundamental(x, y);
    if (kind == KernelKind::EAdjoint) return adjoint_fundamental(x, y);
    Stack st;
    eval_stack(x, y, 1, st);
    KernelMatrix k;
    k.dim = dim_;
    k.kind = kind;
    assemble_kernel(kind, st, n_x, n_y, k.a.data(), nullptr);
    return k;
}

void KernelEvaluator::kernel_with_gradient(KernelKind kind, const Vec3& x, const Vec3& y,
                                           const Vec3& n_x, const Vec3& n_y,
                                           KernelMatrix& value,
                                           std::array<KernelMatrix, 3>& grad) const {
    Stack st;
    const int lvl = (kind == KernelKind::E || kind == KernelKind::EAdjoint) ? 1 : 2;
    eval_stack(x, y, lvl, st);
    value.dim = dim_;
    value.kind = kind;
    cplx g[3][16];
    assemble_kernel(kind, st, n_x, n_y, value.a.data(), g);
    for (int l = 0; l < dim_; ++l) {
        grad[l].dim = dim_;
        grad[l].kind = kind;
        for (int q = 0; q < 16; ++q) grad[l].a[q] = g[l][q];
    }
}

KernelMatrix KernelEvaluator::log_coefficient(const Vec3& x, const Vec3& y) const {
    if (dim_ != 2) throw DomainError("log_coefficient is a 2D Nystroem facility");
    Vec3 z;
    const double r = dist(x, y, 2, z);
    const double c = 1.0 / (2.0 * M_PI);

    cplx i0[3], psi[3], chi[3];
    bool live[3];
    for (int k = 0; k < 3; ++k) {
        const cplx zk = wn_.lam[k] * r;
        live[k] = zk.real() <= kLogSplitReCut;
        if (live[k]) {
            i0[k] = bessel_i0(zk);
            psi[k] = bessel_i1_over_z(zk);
            chi[k] = bessel_chi(zk);
        } else {
            i0[k] = psi[k] = chi[k] = 0.0;
        }
    }

    const auto& cf = coef_;
    cplx schi = 0, spsi = 0;
    for (int k = 0; k < 3; ++k) {
        const cplx l2 = wn_.lam_sq[k];
        schi += cf.a[k] * l2 * l2 * chi[k];
        spsi += cf.a[k] * l2 * psi[k];
    }
    const cplx cpl = wn_.lam_sq[0] * psi[0] - wn_.lam_sq[1] * psi[1];

    KernelMatrix A;
    A.dim = 2;
    A.kind = KernelKind::E;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            A(i, j) = c * (schi * z[i] * z[j] - (i == j ? spsi : cplx(0))) -
                      (i == j ? c * cf.c3 * i0[2] : cplx(0));
    for (int i = 0; i < 2; ++i) {
        A(i, 2) = -c * cf.b_gamma * cpl * z[i];
        A(2, i) = -c * cf.b_eta * cpl * z[i];
    }
    A(2, 2) = -c * (cf.cth[0] * i0[0] + cf.cth[1] * i0[1]);
    return A;
}

KernelMatrix KernelEvaluator::diagonal_limit(const Vec3& tangent_unit) const {
    if (dim_ != 2) throw DomainError("diagonal_limit is a 2D Nystroem facility");
    const double c = 1.0 / (2.0 * M_PI);
    const auto& cf = coef_;
    cplx L[3];
    for (int k = 0; k < 3; ++k) L[k] = std::log(wn_.lam[k] / 2.0) + kEulerGamma;

    cplx sdelta = 0, stang = 0;
    for (int k = 0; k < 3; ++k) {
        const cplx l2 = wn_.lam_sq[k];
        sdelta += cf.a[k] * l2 * (0.5 * L[k] - 0.25);
        stang += cf.a[k] * l2;
    }

    KernelMatrix B;
    B.dim = 2;
    B.kind = KernelKind::E;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            B(i, j) = -c * stang * 0.5 * tangent_unit[i] * tangent_unit[j] -
                      (i == j ? c * (sdelta + cf.c3 * L[2]) : cplx(0));
    B(0, 2) = B(1, 2) = B(2, 0) = B(2, 1) = 0.0;
    B(2, 2) = -c * (cf.cth[0] * L[0] + cf.cth[1] * L[1]);
    return B;
}

} // namespace thermobem
