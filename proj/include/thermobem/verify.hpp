#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thermobem/operators.hpp"
#include "thermobem/potentials.hpp"
#include "thermobem/tdcq.hpp"

namespace thermobem {

// One numerical probe outcome: a grid of measurements, fitted constants, and
// a pass flag that is a pure function of the measured values.
struct ProbeReport {
    std::string name;
    unsigned seed = 0;
    bool pass = false;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, double> fitted;
    std::vector<std::string> notes;
};

std::string report_to_json(const ProbeReport& r);
std::string report_to_csv(const ProbeReport& r);

// --- volume energy norms ----------------------------------------------------

// Tensor quadrature on a ball (r_inner = 0) or annulus, 2D disk or 3D ball.
class EnergyNormEvaluator {
  public:
    EnergyNormEvaluator(int dim, double r_inner, double r_outer, int n_radial, int n_angular);

    int dim() const { return dim_; }
    const std::vector<Vec3>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }

    // field callback: value[0..d] and gradient[c][l] at a point
    struct FieldValue {
        std::array<cplx, 4> value{};
        std::array<std::array<cplx, 3>, 4> gradient{};
    };
    using Field = std::function<FieldValue(const Vec3&)>;

    struct Norms {
        double u_s, th_s, pair_s; // |s|-weighted energy norms
        double u_1, th_1, pair_1; // |s| = 1 variants
    };
    Norms norms(const Field& field, const Material& m, const LaplacePoint& s) const;

    // polynomial-exactness self check; throws QuadratureInsufficient
    void check_exactness() const;

  private:
    int dim_;
    double r_inner_, r_outer_;
    std::vector<Vec3> points_;
    std::vector<double> weights_;
};

// --- probes ------------------------------------------------------------------

// Vieta identities of the squared wave numbers, the printed decoupled limit,
// and the partial-fraction moment identities over random (Material, s).
ProbeReport dispersion_probe(int n_samples, unsigned seed);

enum class ResidualKind { Fundamental, Adjoint };

ProbeReport pde_residual_probe(int dim, const Material& m, cplx s, ResidualKind kind,
                               int n_samples, unsigned seed);

ProbeReport jump_probe(const Material& m, cplx s, const std::vector<int>& circle_resolutions);

ProbeReport jump_probe_sphere(const Material& m, cplx s, int refinement);

ProbeReport coercivity_probe(const Material& m, const BoundaryMesh& mesh,
                             const std::vector<cplx>& s_grid);

enum class GrowthTarget { V, W, S, D, Vinv, Winv, SVinv, DWinv, KSecond, KPrimeSecond };

GrowthTarget growth_target_from_string(const std::string& name);
std::string to_string(GrowthTarget t);
double bound_exponent(GrowthTarget t);

struct GrowthOptions {
    double sigma0 = 1.0;
    double omega_max = 64.0;
    int points = 7;
    double exponent_slack = 0.25;
    double envelope_factor = 10.0;
};

ProbeReport norm_growth_probe(GrowthTarget target, const Material& m, const BoundaryMesh& mesh,
                              const GrowthOptions& opt = {});

// All targets in one pass, sharing the per-frequency assemblies and
// factorizations; one report per target.
std::vector<ProbeReport> growth_sweep(const std::vector<GrowthTarget>& targets,
                                      const Material& m, const BoundaryMesh& mesh,
                                      const GrowthOptions& opt = {});

// sweep sigma -> 0+ at fixed |s| to expose the sigma-underbar powers
ProbeReport sigma_sweep_probe(GrowthTarget target, const Material& m, const BoundaryMesh& mesh,
                              double s_abs, int points);

ProbeReport norm_equivalence_probe(const Material& m, const std::vector<cplx>& s_grid,
                                   int n_fields, unsigned seed);

struct ManufacturedOptions {
    Vec3 source{0.3, 0.0, 0.0};
    std::array<cplx, 4> strength{cplx(1, 0), cplx(0.5, 0.25), cplx(0, -0.5), cplx(0.75, 0)};
    double probe_radius_factor = 2.0;
    int n_probes = 4;
};

ProbeReport manufactured_probe(TDProblem problem, const Material& m, const BoundaryMesh& mesh,
                               cplx s, const ManufacturedOptions& opt = {});

// first-kind (V) versus second-kind (-1/2 I + K) interior Dirichlet solve
ProbeReport second_kind_cross_probe(const Material& m, const BoundaryMesh& mesh, cplx s);

// structural time-domain check: causality, modulus of continuity, envelope fit
ProbeReport td_envelope_probe(const Material& m, const BoundaryMesh& mesh, double T,
                              int n_steps, double bound_upper_limit);

// exterior-field oracle used by the manufactured probes and the CLI
std::array<cplx, 4> point_source_field(const KernelEvaluator& ev, const Vec3& x,
                                       const Vec3& source, const std::array<cplx, 4>& strength);

} // namespace thermobem
