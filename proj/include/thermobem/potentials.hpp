#pragma once

#include <vector>

#include "thermobem/operators.hpp"

namespace thermobem {

enum class PotentialKind { S, D, QDN, QND };

PotentialKind potential_kind_from_string(const std::string& name);

// (u, theta) and its spatial gradient at one off-boundary point.
struct FieldSample {
    Vec3 point{};
    std::array<cplx, 4> value{};                // u_0..u_{d-1}, theta
    std::array<std::array<cplx, 3>, 4> gradient{}; // gradient[c][l] = d value_c / dx_l
};

// Quadrature sum of kernel * density * weights; gradients come from the
// closed-form kernel derivative stacks.
std::vector<FieldSample> eval_potential(PotentialKind kind, const Material& m,
                                        const LaplacePoint& s, const BoundaryMesh& mesh,
                                        const Density& density,
                                        const std::vector<Vec3>& points);

enum class TraceWhich { Value, Traction };
enum class TraceSide { Interior, Exterior };

struct TraceOptions {
    int levels = 5;
    double base_offset_factor = 2.0;
    int upsample = 32; // 2D only
};

// Nodewise boundary traces of S(s) or D(s) applied to `density`, obtained by
// Richardson extrapolation of off-surface evaluations at x -+ h n.
Eigen::VectorXcd boundary_trace_extrapolated(PotentialKind kind, TraceWhich which,
                                             TraceSide side, const Material& m,
                                             const LaplacePoint& s, const BoundaryMesh& mesh,
                                             const Density& density,
                                             const TraceOptions& opt = {});

// --- shared machinery (also used by operator assembly and probes) ----------

// Dense map from nodal densities to potential values at the given targets:
// rows are target-major (d+1 per target), columns source-node-major.
Eigen::MatrixXcd potential_value_matrix(const KernelEvaluator& ev, PotentialKind kind,
                                        const BoundaryMesh& source,
                                        const std::vector<Vec3>& targets);

// Same, but rows give the conormal data R_N at the targets: traction rows
// (d per target) followed by the normal temperature derivative row.
Eigen::MatrixXcd potential_traction_matrix(const KernelEvaluator& ev, PotentialKind kind,
                                           const BoundaryMesh& source,
                                           const std::vector<Vec3>& targets,
                                           const std::vector<Vec3>& target_normals);

// Lagrange weights at 0 for nodes h0 / 2^j, j = 0..levels-1.
std::vector<double> richardson_weights(int levels);

// Value or gradient rows for arbitrary targets with 3D near-panel handling.
struct EvalMatrices {
    Eigen::MatrixXcd value;            // (d+1)P x (d+1)M
    std::array<Eigen::MatrixXcd, 3> grad; // per derivative direction
    bool with_grad = false;
};

// self_skip (optional, one entry per target): source index whose block is
// left zero, used when the target sits on that panel.
EvalMatrices potential_eval_matrices(const KernelEvaluator& ev, PotentialKind kind,
                                     const BoundaryMesh& source,
                                     const std::vector<Vec3>& targets, bool with_grad,
                                     const std::vector<int>* self_skip = nullptr);

KernelKind kernel_kind_of(PotentialKind kind);
SpaceTag density_space_of(PotentialKind kind);

// Component-block expansion of a nodal interpolation matrix.
Eigen::MatrixXcd block_prolongation(const Eigen::MatrixXd& p, int comps);

// Oversampling factor so that offset h0/2^level keeps four fine spacings.
int level_upsample(double base_factor, int level, int cap);

// --- block-circulant fast path for circle meshes ----------------------------
// On the uniform circle every target row is a rotation of row 0; kernels are
// rotation-equivariant, so B_{i,q} = R_i B_{0,q-iU} R_i^T.

// One block row (rows = d+1 target components of node 0) against all fine
// sources, for either value or conormal rows.
Eigen::MatrixXcd circle_row0(const KernelEvaluator& ev, PotentialKind kind,
                             const BoundaryMesh& circle_src, const Vec3& target0,
                             const Vec3& normal0, bool traction);

// Expand a combined row (d+1) x (d+1)M into the full block-circulant matrix.
Eigen::MatrixXcd circulant_expand(const Eigen::MatrixXcd& row0, const BoundaryMesh& mesh);

// Apply the block-circulant operator given by row0 (sources = fine circle,
// stride U = fine/coarse ratio) to a fine density; returns one value block
// per coarse node.
Eigen::VectorXcd circulant_apply(const Eigen::MatrixXcd& row0, const Eigen::VectorXcd& rho_fine,
                                 std::size_t coarse_size, int stride);

} // namespace thermobem
