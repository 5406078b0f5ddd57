#pragma once

#include <array>
#include <complex>

#include "thermobem/material.hpp"
#include "thermobem/specfun.hpp"

namespace thermobem {

using Vec3 = std::array<double, 3>;

// Laplace parameter s in the right half plane with its cached real part
// sigma and sigma_under = min{1, sigma}.
struct LaplacePoint {
    cplx s;
    double sigma;
    double sigma_under;
};

LaplacePoint make_laplace_point(cplx s);

// Squared wave numbers and their principal square roots for a given
// (Material, s). lam_sq[0], lam_sq[1] solve
//   z^2 - ((s/kappa)(1+eps) + lamp_sq) z + (s/kappa) lamp_sq = 0,
// labeled so that lam_sq[0] is the root nearest s/kappa (thermal branch);
// lam_sq[2] = rho s^2/mu and lamp_sq = rho s^2/(lambda+2mu).
struct WaveNumbers {
    std::array<cplx, 3> lam_sq;
    std::array<cplx, 3> lam;
    cplx lamp_sq;
    cplx lamp;
};

WaveNumbers wave_numbers(const Material& m, const LaplacePoint& s);

// Partial-fraction coefficients c_k = 1/((lam_k^2-lam_{k+1}^2)(lam_k^2-lam_{k+2}^2))
// with cyclic indices. Satisfy sum c = 0, sum c lam^2 = 0, sum c lam^4 = 1.
struct PFCoeffs {
    std::array<cplx, 3> c;
};

PFCoeffs partial_fraction_coeffs(const WaveNumbers& w);

enum class KernelKind { E, EAdjoint, DL, KPrime, QDN, QND };

// Dense (d+1)x(d+1) pointwise kernel matrix, row-major.
struct KernelMatrix {
    int dim = 3;
    KernelKind kind = KernelKind::E;
    std::array<cplx, 16> a{};
    cplx& operator()(int i, int j) { return a[i * (dim + 1) + j]; }
    cplx operator()(int i, int j) const { return a[i * (dim + 1) + j]; }
    int n() const { return dim + 1; }
};

// Elastic traction T u = lambda (div u) n + mu (J + J^T) n evaluated from the
// displacement Jacobian J_{il} = du_i/dx_l; equals the stated
// lambda(div u)n + 2mu du/dn + mu n x curl u form.
std::array<cplx, 3> traction_apply(const Material& m,
                                   const std::array<std::array<cplx, 3>, 3>& grad_u,
                                   cplx div_u, const Vec3& n, int dim);

// Frequency-dependent kernel evaluator: caches the wave numbers and the
// Hoermander coefficient bundle for one (dim, Material, s) and evaluates all
// pointwise kernels and their x-gradients.
class KernelEvaluator {
  public:
    KernelEvaluator(int dim, const Material& m, const LaplacePoint& s);

    int dim() const { return dim_; }
    const Material& material() const { return mat_; }
    const LaplacePoint& laplace_point() const { return lp_; }
    const WaveNumbers& waves() const { return wn_; }

    KernelMatrix fundamental(const Vec3& x, const Vec3& y) const;
    KernelMatrix adjoint_fundamental(const Vec3& x, const Vec3& y) const;

    // DL and QDN/QND need n_y, KPrime needs n_x; unused normal is ignored.
    KernelMatrix layer_kernel(KernelKind kind, const Vec3& x, const Vec3& y,
                              const Vec3& n_x, const Vec3& n_y) const;

    // Value plus x-gradient of the kernel (grad[l] = d/dx_l of the matrix).
    void kernel_with_gradient(KernelKind kind, const Vec3& x, const Vec3& y,
                              const Vec3& n_x, const Vec3& n_y,
                              KernelMatrix& value,
                              std::array<KernelMatrix, 3>& grad) const;

    // 2D Nystroem support: coefficient A(r) of ln r in the entrywise split
    // E(x,y) = A(r) ln r + smooth, and the diagonal limit of the smooth part
    // (tangent_unit = unit tangent at the coincidence point).
    KernelMatrix log_coefficient(const Vec3& x, const Vec3& y) const;
    KernelMatrix diagonal_limit(const Vec3& tangent_unit) const;

    // Scaled coefficient bundle (exposed for tests).
    struct Coefficients {
        std::array<cplx, 3> a;   // grad grad^T weights per wave number
        std::array<cplx, 2> cth; // theta-theta weights for k = 1,2
        cplx b_gamma;            // displacement-temperature coupling
        cplx b_eta;              // temperature-displacement coupling
        cplx c3;                 // lam3^2/(rho s^2), delta part of uu block
    };
    const Coefficients& coefficients() const { return coef_; }

  private:
    struct Stack;
    void eval_stack(const Vec3& x, const Vec3& y, int level, Stack& st) const;
    void assemble_kernel(KernelKind kind, const Stack& st, const Vec3& n_x,
                         const Vec3& n_y, cplx* out, cplx (*grad)[16]) const;

    int dim_;
    Material mat_;
    LaplacePoint lp_;
    WaveNumbers wn_;
    Coefficients coef_;
};

} // namespace thermobem
