#include "thermobem/operators.hpp"

#include <cmath>

#include "thermobem/errors.hpp"
#include "thermobem/parallel.hpp"
#include "thermobem/potentials.hpp"
#include "json.hpp"

namespace thermobem {

OperatorKind operator_kind_from_string(const std::string& name) {
    if (name == "V") return OperatorKind::V;
    if (name == "K") return OperatorKind::K;
    if (name == "KPRIME") return OperatorKind::KPrime;
    if (name == "W") return OperatorKind::W;
    if (name == "HALF_PLUS_K") return OperatorKind::HalfPlusK;
    if (name == "HALF_MINUS_K") return OperatorKind::HalfMinusK;
    if (name == "HALF_PLUS_KP") return OperatorKind::HalfPlusKPrime;
    if (name == "HALF_MINUS_KP") return OperatorKind::HalfMinusKPrime;
    throw UsageError("unknown operator kind \"" + name + "\"");
}

std::string to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::V: return "V";
        case OperatorKind::K: return "K";
        case OperatorKind::KPrime: return "KPRIME";
        case OperatorKind::W: return "W";
        case OperatorKind::HalfPlusK: return "HALF_PLUS_K";
        case OperatorKind::HalfMinusK: return "HALF_MINUS_K";
        case OperatorKind::HalfPlusKPrime: return "HALF_PLUS_KP";
        case OperatorKind::HalfMinusKPrime: return "HALF_MINUS_KP";
    }
    return "?";
}

SpaceTag OperatorMatrix::domain_space() const {
    switch (kind) {
        case OperatorKind::V:
        case OperatorKind::KPrime:
        case OperatorKind::HalfPlusKPrime:
        case OperatorKind::HalfMinusKPrime: return SpaceTag::MinusHalf;
        default: return SpaceTag::PlusHalf;
    }
}

SpaceTag OperatorMatrix::range_space() const {
    switch (kind) {
        case OperatorKind::V:
        case OperatorKind::K:
        case OperatorKind::HalfPlusK:
        case OperatorKind::HalfMinusK: return SpaceTag::PlusHalf;
        default: return SpaceTag::MinusHalf;
    }
}

namespace {

// Spectral Nystroem assembly of the weakly singular operator V in 2D:
// K(t,tau) = A ln(4 sin^2((t-tau)/2)) + B with the analytic log coefficient
// from the kernel's Bessel-I split and the closed-form diagonal of B.
Eigen::MatrixXcd assemble_v_2d(const KernelEvaluator& ev, const BoundaryMesh& mesh) {
    const int n = 3;
    const std::size_t m = mesh.size();
    const std::vector<double> rlog = kress_log_weights(static_cast<int>(m));
    const double wparam = 2.0 * M_PI / static_cast<double>(m);
    const bool circulant = mesh.shape == "circle";
    Eigen::MatrixXcd a(circulant ? n : n * m, n * m);

    const std::size_t row_count = circulant ? 1 : m;
    parallel_for(row_count, [&](std::size_t i) {
        for (std::size_t j = 0; j < m; ++j) {
            cplx block[9];
            if (i == j) {
                KernelMatrix alog = ev.log_coefficient(mesh.nodes[i], mesh.nodes[i]);
                KernelMatrix bdiag = ev.diagonal_limit(mesh.tangents[i]);
                const double sp = mesh.speed[i];
                for (int q = 0; q < 9; ++q) {
                    const cplx atld = 0.5 * alog.a[q] * sp;
                    const cplx btld = 2.0 * atld * std::log(sp) + sp * bdiag.a[q];
                    block[q] = rlog[0] * atld + wparam * btld;
                }
            } else {
                KernelMatrix full = ev.fundamental(mesh.nodes[i], mesh.nodes[j]);
                KernelMatrix alog = ev.log_coefficient(mesh.nodes[i], mesh.nodes[j]);
                const double sp = mesh.speed[j];
                const double dt = mesh.param_t[i] - mesh.param_t[j];
                const double lfac = std::log(4.0 * std::pow(std::sin(0.5 * dt), 2));
                const double rw = rlog[((static_cast<int>(i) - static_cast<int>(j)) % static_cast<int>(m) +
                                        static_cast<int>(m)) % static_cast<int>(m)];
                for (int q = 0; q < 9; ++q) {
                    const cplx atld = 0.5 * alog.a[q] * sp;
                    const cplx btld = full.a[q] * sp - atld * lfac;
                    block[q] = rw * atld + wparam * btld;
                }
            }
            for (int A = 0; A < n; ++A)
                for (int B = 0; B < n; ++B) a(n * i + A, n * j + B) = block[A * n + B];
        }
    });
    if (circulant) return circulant_expand(a, mesh);
    return a;
}

// P0 collocation of V in 3D: far entries by the centroid rule, near entries
// by panel subdivision, the self panel by the Duffy rule.
Eigen::MatrixXcd assemble_v_3d(const KernelEvaluator& ev, const BoundaryMesh& mesh,
                               const AssemblyOptions& opt) {
    const int n = 4;
    const std::size_t m = mesh.size();
    std::vector<int> self(m);
    for (std::size_t i = 0; i < m; ++i) self[i] = static_cast<int>(i);
    EvalMatrices em =
        potential_eval_matrices(ev, PotentialKind::S, mesh, mesh.nodes, false, &self);
    Eigen::MatrixXcd a = std::move(em.value);
    parallel_for(m, [&](std::size_t i) {
        const auto& t = mesh.panels[i];
        std::vector<Vec3> pts;
        std::vector<double> wts;
        duffy_triangle_rule(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]],
                            mesh.nodes[i], opt.duffy_order, pts, wts);
        cplx block[16] = {};
        for (std::size_t q = 0; q < pts.size(); ++q) {
            KernelMatrix e = ev.fundamental(mesh.nodes[i], pts[q]);
            for (int w = 0; w < 16; ++w) block[w] += wts[q] * e.a[w];
        }
        for (int A = 0; A < n; ++A)
            for (int B = 0; B < n; ++B) a(n * i + A, n * i + B) = block[A * n + B];
    });
    return a;
}

// Off-surface two-sided trace construction shared by K, K' and W.
Eigen::MatrixXcd averaged_trace_matrix(const KernelEvaluator& ev, PotentialKind kind,
                                       bool traction, const BoundaryMesh& mesh,
                                       const AssemblyOptions& opt) {
    const int d = mesh.dim, n = d + 1;
    const std::vector<double> w = richardson_weights(opt.extrapolation_levels);
    Eigen::MatrixXcd acc;
    for (int lev = 0; lev < opt.extrapolation_levels; ++lev) {
        const BoundaryMesh* src = &mesh;
        BoundaryMesh fine;
        Eigen::MatrixXcd prol;
        if (d == 2 && opt.upsample > 1) {
            const int factor = level_upsample(opt.base_offset_factor, lev, opt.upsample);
            if (factor > 1) {
                fine = refine_curve(mesh, factor);
                prol = block_prolongation(prolongation_matrix(mesh, fine), n);
                src = &fine;
            }
        }
        const bool circulant = mesh.shape == "circle";
        Eigen::MatrixXcd side_avg;
        for (double sgn : {-1.0, 1.0}) {
            const std::size_t nt = circulant ? 1 : mesh.size();
            std::vector<Vec3> targets(nt);
            std::vector<Vec3> normals(nt);
            for (std::size_t i = 0; i < nt; ++i) {
                const double h =
                    opt.base_offset_factor * mesh.local_spacing(i) / std::ldexp(1.0, lev);
                for (int c = 0; c < 3; ++c)
                    targets[i][c] = mesh.nodes[i][c] + sgn * h * mesh.normals[i][c];
                normals[i] = mesh.normals[i];
            }
            Eigen::MatrixXcd mat =
                traction ? potential_traction_matrix(ev, kind, *src, targets, normals)
                         : potential_value_matrix(ev, kind, *src, targets);
            if (side_avg.size() == 0)
                side_avg = 0.5 * mat;
            else
                side_avg += 0.5 * mat;
        }
        if (prol.size() != 0) side_avg = side_avg * prol;
        if (acc.size() == 0)
            acc = w[lev] * side_avg;
        else
            acc += w[lev] * side_avg;
    }
    if (mesh.shape == "circle") acc = circulant_expand(acc, mesh);
    return acc;
}

} // namespace

OperatorMatrix assemble(OperatorKind kind, const Material& m, const LaplacePoint& s,
                        const BoundaryMesh& mesh, const AssemblyOptions& opt) {
    KernelEvaluator ev(mesh.dim, m, s);
    const int n = mesh.dim + 1;
    OperatorMatrix out;
    out.kind = kind;
    out.s = s;
    out.mesh_id = mesh.id;

    switch (kind) {
        case OperatorKind::V:
            out.entries = mesh.dim == 2 ? assemble_v_2d(ev, mesh) : assemble_v_3d(ev, mesh, opt);
            break;
        case OperatorKind::K:
        case OperatorKind::HalfPlusK:
        case OperatorKind::HalfMinusK:
            out.entries = averaged_trace_matrix(ev, PotentialKind::D, false, mesh, opt);
            break;
        case OperatorKind::KPrime:
        case OperatorKind::HalfPlusKPrime:
        case OperatorKind::HalfMinusKPrime:
            out.entries = averaged_trace_matrix(ev, PotentialKind::S, true, mesh, opt);
            break;
        case OperatorKind::W:
            out.entries = -averaged_trace_matrix(ev, PotentialKind::D, true, mesh, opt);
            break;
    }

    if (kind == OperatorKind::HalfPlusK || kind == OperatorKind::HalfPlusKPrime)
        out.entries += 0.5 * Eigen::MatrixXcd::Identity(n * mesh.size(), n * mesh.size());
    if (kind == OperatorKind::HalfMinusK || kind == OperatorKind::HalfMinusKPrime)
        out.entries -= 0.5 * Eigen::MatrixXcd::Identity(n * mesh.size(), n * mesh.size());

    if (!out.entries.allFinite())
        throw AssemblyOverflow("non-finite entry in assembled " + to_string(kind));
    return out;
}

SolveResult solve_boundary_system(const OperatorMatrix& a, const Density& rhs) {
    if (a.entries.rows() != a.entries.cols()) throw SingularMatrix("operator matrix not square");
    if (rhs.values.size() != a.entries.rows())
        throw TagMismatch("right-hand side length does not match the operator");
    if (rhs.space != a.range_space())
        throw TagMismatch("right-hand side space tag does not match the operator range");

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a.entries);
    const auto& lumat = lu.matrixLU();
    double minpiv = 1e300, maxpiv = 0;
    for (Eigen::Index i = 0; i < lumat.rows(); ++i) {
        const double p = std::abs(lumat(i, i));
        minpiv = std::min(minpiv, p);
        maxpiv = std::max(maxpiv, p);
    }
    if (minpiv < 1e-300) throw SingularMatrix("vanishing pivot in LU factorization");

    SolveResult res;
    res.solution.space = a.domain_space();
    res.solution.values = lu.solve(rhs.values);
    res.condition_estimate = maxpiv / minpiv;
    return res;
}

namespace {

nlohmann::json cvec_to_json(const Eigen::VectorXcd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
    return arr;
}

Eigen::VectorXcd cvec_from_json(const nlohmann::json& arr) {
    Eigen::VectorXcd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i)
        v(i) = cplx(arr[i][0].get<double>(), arr[i][1].get<double>());
    return v;
}

} // namespace

std::string operator_to_json(const OperatorMatrix& a) {
    nlohmann::json j;
    j["kind"] = to_string(a.kind);
    j["s"] = {a.s.s.real(), a.s.s.imag()};
    j["mesh_id"] = a.mesh_id;
    j["m"] = a.entries.rows();
    j["n"] = a.entries.cols();
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.entries.rows(); ++r)
        for (Eigen::Index c = 0; c < a.entries.cols(); ++c)
            entries.push_back({a.entries(r, c).real(), a.entries(r, c).imag()});
    j["entries"] = entries;
    return j.dump();
}

OperatorMatrix operator_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    OperatorMatrix a;
    a.kind = operator_kind_from_string(j.at("kind").get<std::string>());
    a.s = make_laplace_point(cplx(j.at("s")[0].get<double>(), j.at("s")[1].get<double>()));
    a.mesh_id = j.at("mesh_id").get<std::string>();
    const Eigen::Index rows = j.at("m").get<Eigen::Index>();
    const Eigen::Index cols = j.at("n").get<Eigen::Index>();
    const auto& entries = j.at("entries");
    if (static_cast<Eigen::Index>(entries.size()) != rows * cols)
        throw UsageError("operator entry count does not match the declared shape");
    a.entries.resize(rows, cols);
    std::size_t q = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c, ++q)
            a.entries(r, c) = cplx(entries[q][0].get<double>(), entries[q][1].get<double>());
    return a;
}

std::string density_to_json(const Density& d) {
    nlohmann::json j;
    j["space"] = d.space == SpaceTag::MinusHalf ? "minus_half" : "plus_half";
    j["values"] = cvec_to_json(d.values);
    return j.dump();
}

Density density_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Density d;
    const std::string tag = j.at("space").get<std::string>();
    if (tag == "minus_half")
        d.space = SpaceTag::MinusHalf;
    else if (tag == "plus_half")
        d.space = SpaceTag::PlusHalf;
    else
        throw TagMismatch("unknown density space tag \"" + tag + "\"");
    d.values = cvec_from_json(j.at("values"));
    return d;
}

} // namespace thermobem
