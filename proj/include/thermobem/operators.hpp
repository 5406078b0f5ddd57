#pragma once

#include <string>

#include <Eigen/Dense>

#include "thermobem/geometry.hpp"
#include "thermobem/kernels.hpp"

namespace thermobem {

enum class OperatorKind {
    V,
    K,
    KPrime,
    W,
    HalfPlusK,
    HalfMinusK,
    HalfPlusKPrime,
    HalfMinusKPrime
};

OperatorKind operator_kind_from_string(const std::string& name);
std::string to_string(OperatorKind kind);

// H^{-1/2}-type densities carry (lambda, varsigma); H^{+1/2}-type carry
// (phi, varphi). Vectors are node-major: (d+1) components per node.
enum class SpaceTag { MinusHalf, PlusHalf };

struct Density {
    SpaceTag space = SpaceTag::MinusHalf;
    Eigen::VectorXcd values;
};

struct OperatorMatrix {
    OperatorKind kind = OperatorKind::V;
    LaplacePoint s;
    std::string mesh_id;
    Eigen::MatrixXcd entries;

    SpaceTag domain_space() const;
    SpaceTag range_space() const;
};

struct AssemblyOptions {
    int extrapolation_levels = 5; // off-surface trace levels for K, K', W
    double base_offset_factor = 2.0; // h0 = factor * local spacing
    int upsample = 32;               // 2D source oversampling cap for off-surface rows
    int duffy_order = 8;             // 3D self-panel rule
    double near_factor = 2.5;        // 3D near-panel subdivision trigger
};

OperatorMatrix assemble(OperatorKind kind, const Material& m, const LaplacePoint& s,
                        const BoundaryMesh& mesh, const AssemblyOptions& opt = {});

struct SolveResult {
    Density solution;
    double condition_estimate = 0.0; // 1/rcond of the LU factors
};

SolveResult solve_boundary_system(const OperatorMatrix& a, const Density& rhs);

std::string operator_to_json(const OperatorMatrix& a);
OperatorMatrix operator_from_json(const std::string& text);
std::string density_to_json(const Density& d);
Density density_from_json(const std::string& text);

} // namespace thermobem
