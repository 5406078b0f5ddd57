#pragma once

#include <functional>
#include <vector>

#include "thermobem/geometry.hpp"
#include "thermobem/operators.hpp"

namespace thermobem {

struct TimeGrid {
    double dt = 0.0;
    int n_steps = 0;
    double final_time() const { return dt * n_steps; }
};

TimeGrid make_time_grid(double dt, int n_steps);

enum class CQScheme { BDF1, BDF2 };

CQScheme cq_scheme_from_string(const std::string& name);

struct CQConfig {
    CQScheme scheme = CQScheme::BDF2;
    double contour_radius = 0.0; // 0: derived from alias_target and the node count
    int oversampling = 0;        // frequency count; 0: 8x the active step count
    double alias_target = 1e-13;
};

// Samples at t_n = n dt, n = 0..n_steps (channels x (n_steps+1)); exactly
// zero before `onset`.
struct Signal {
    Eigen::MatrixXcd samples;
    int onset = 0;

    int channels() const { return static_cast<int>(samples.rows()); }
    int steps() const { return static_cast<int>(samples.cols()); }
};

Signal make_signal(int channels, int n_samples, int onset = 0);

// BDF generating function delta(zeta).
cplx cq_delta(CQScheme scheme, cplx zeta);

// Contour frequencies s_l = delta(rho e^{2 pi i l / L})/dt; all have Re s > 0.
std::vector<LaplacePoint> cq_nodes(const TimeGrid& grid, const CQConfig& cfg);

// Discrete causal convolution with the operator-valued Laplace symbol:
// transform the (onset-shifted) data along the contour, apply the symbol at
// every node, transform back. Output is exactly zero before the data onset.
using MatrixSymbol = std::function<Eigen::MatrixXcd(const LaplacePoint&, int node_index)>;

Signal cq_convolve(const MatrixSymbol& symbol, int out_channels, const TimeGrid& grid,
                   const CQConfig& cfg, const Signal& data);

// Scalar convenience wrapper.
Signal cq_convolve_scalar(const std::function<cplx(const LaplacePoint&)>& symbol,
                          const TimeGrid& grid, const CQConfig& cfg, const Signal& data);

enum class TDProblem { Dirichlet, Neumann };

struct TDSolveResult {
    Signal density; // (d+1) * M channels
    Signal field;   // (d+1) * P channels at the probe points
};

// Per-frequency assemble-and-solve (V for Dirichlet data, W for Neumann
// data), per-frequency potential evaluation at the probes, inverse transform.
TDSolveResult cq_solve_bvp(TDProblem problem, const Material& m, const BoundaryMesh& mesh,
                           const TimeGrid& grid, const CQConfig& cfg, const Signal& data,
                           const std::vector<Vec3>& probes);

// (P2 g)(t) = g + 2 g' + g''.
std::vector<double> p2_signal(const std::function<double(double)>& g,
                              const std::function<double(double)>& gdot,
                              const std::function<double(double)>& gddot,
                              const std::vector<double>& times);

// Sampled variant: derivatives from a not-a-knot cubic spline.
std::vector<double> p2_signal_sampled(const std::vector<double>& samples, double dt);

// C_eps(t) = (1/(2 sqrt(pi))) (Gamma(eps/2)/Gamma((eps+1)/2)) (t/(1+t))^eps.
double c_eps(double eps, double t);

std::string signal_to_csv(const Signal& s, const TimeGrid& grid);
Signal signal_from_csv(const std::string& text, int* n_steps_out = nullptr,
                       double* dt_out = nullptr);

} // namespace thermobem
