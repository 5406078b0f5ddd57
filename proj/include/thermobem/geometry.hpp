#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermobem/kernels.hpp"

namespace thermobem {

// Boundary discretization: parametrized closed curve (2D, 2N equispaced
// parameter nodes with trapezoid weights) or triangulated sphere (3D, flat
// panels with centroid nodes and area weights).
struct BoundaryMesh {
    int dim = 2;
    std::string shape;      // circle | ellipse | sphere
    double radius = 0.0;    // circle/sphere
    double semi_a = 0.0;    // ellipse
    double semi_b = 0.0;
    int resolution = 0;     // 2D: N (nodes = 2N); 3D: refinement level

    std::vector<Vec3> nodes;
    std::vector<Vec3> normals;
    std::vector<double> weights; // quadrature weights (include arclength/area)

    // 2D parametrization data
    std::vector<double> param_t; // t_i in [0, 2pi)
    std::vector<double> speed;   // |x'(t_i)|
    std::vector<Vec3> tangents;  // unit tangents

    // 3D connectivity
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> panels;

    std::string id;

    std::size_t size() const { return nodes.size(); }
    double local_spacing(std::size_t i) const;
    double diameter() const;
};

BoundaryMesh make_circle(double radius, int n);
BoundaryMesh make_ellipse(double semi_a, double semi_b, int n);
BoundaryMesh make_sphere(double radius, int refinement);

// 2D only: the same curve sampled at factor * (2N) parameter nodes.
BoundaryMesh refine_curve(const BoundaryMesh& mesh, int factor);

// Trigonometric interpolation matrix from the coarse 2D grid to the fine one.
Eigen::MatrixXd prolongation_matrix(const BoundaryMesh& coarse, const BoundaryMesh& fine);

// Quadrature weights R_j(t_i) for the periodic log factor
// ln(4 sin^2((t_i - t_j)/2)) on the 2N-point grid, indexed by (i - j) mod 2N.
std::vector<double> kress_log_weights(int two_n);

// Per-target singular-integration data. 2D: explicit log weights paired with
// the smooth-part trapezoid weight. 3D: Duffy-transformed polar rule over the
// panel that owns the target node.
struct SingularRule {
    std::vector<double> log_weights; // 2D, size = mesh nodes
    double param_weight = 0.0;       // 2D trapezoid weight in parameter space
    std::vector<Vec3> points;        // 3D self-panel quadrature
    std::vector<double> weights;
};

SingularRule singular_quadrature(const BoundaryMesh& mesh, std::size_t target);

// Duffy-type rule for integrands with a point singularity at `sing` located
// inside or on the triangle (a, b, c); exact area measure, clusters toward
// the singular point.
void duffy_triangle_rule(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& sing,
                         int order, std::vector<Vec3>& pts, std::vector<double>& wts);

BoundaryMesh mesh_from_json(const std::string& text);
std::string mesh_to_json(const BoundaryMesh& mesh);

} // namespace thermobem
