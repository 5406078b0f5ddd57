#pragma once

#include <complex>

namespace thermobem {

using cplx = std::complex<double>;

// Radial kernel e^{-lambda r}/(4 pi r) (3D) or K0(lambda r)/(2 pi) (2D)
// together with its first three radial derivatives.
struct RadialDerivs {
    cplx f0, f1, f2, f3;
};

// Modified Bessel K0/K1 for complex argument with Re z > 0.
// Relative accuracy <= 1e-12 for |z| <= 200 (validated against an
// independent integral oracle in the test suite).
cplx modified_bessel_k(int order, cplx z);

// Both orders in one pass; the kernel stacks always need the pair.
struct K01 {
    cplx k0, k1;
};
K01 modified_bessel_k01(cplx z);

// Regular (entire) Bessel-I helpers used by the log-splitting of the 2D
// kernels: i0(z), i1(z), psi(z) = I1(z)/z, chi(z) = (2 I1(z)/z - I0(z))/z^2.
cplx bessel_i0(cplx z);
cplx bessel_i1(cplx z);
cplx bessel_i1_over_z(cplx z);
cplx bessel_chi(cplx z);

RadialDerivs radial_derivatives(int dim, cplx lambda, double r);

} // namespace thermobem
