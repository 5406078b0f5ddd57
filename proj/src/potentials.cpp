#include "thermobem/potentials.hpp"

#include <cmath>

#include "thermobem/errors.hpp"
#include "thermobem/parallel.hpp"

namespace thermobem {

KernelKind kernel_kind_of(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::S: return KernelKind::E;
        case PotentialKind::D: return KernelKind::DL;
        case PotentialKind::QDN: return KernelKind::QDN;
        case PotentialKind::QND: return KernelKind::QND;
    }
    throw DomainError("unknown potential kind");
}

SpaceTag density_space_of(PotentialKind kind) {
    return (kind == PotentialKind::S || kind == PotentialKind::QDN) ? SpaceTag::MinusHalf
                                                                    : SpaceTag::PlusHalf;
}

PotentialKind potential_kind_from_string(const std::string& name) {
    if (name == "S") return PotentialKind::S;
    if (name == "D") return PotentialKind::D;
    if (name == "QDN") return PotentialKind::QDN;
    if (name == "QND") return PotentialKind::QND;
    throw UsageError("unknown potential kind \"" + name + "\"");
}

std::vector<double> richardson_weights(int levels) {
    std::vector<double> h(levels), w(levels);
    for (int j = 0; j < levels; ++j) h[j] = std::ldexp(1.0, -j);
    for (int j = 0; j < levels; ++j) {
        double num = 1, den = 1;
        for (int k = 0; k < levels; ++k) {
            if (k == j) continue;
            num *= h[k];
            den *= h[k] - h[j];
        }
        w[j] = num / den;
    }
    return w;
}

namespace {

// Panel integral of the kernel block against a constant density, with
// recursive 4-way subdivision until the panel is small relative to the
// target distance. Flat panels, centroid samples.
struct PanelIntegrator {
    const KernelEvaluator& ev;
    KernelKind kind;
    Vec3 target;
    Vec3 n_y;
    bool with_grad;

    void accumulate(const Vec3& a, const Vec3& b, const Vec3& c, int depth, cplx* val,
                    cplx (*grad)[16]) {
        const Vec3 cen = {(a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3,
                          (a[2] + b[2] + c[2]) / 3};
        const double dx = target[0] - cen[0], dy = target[1] - cen[1], dz = target[2] - cen[2];
        const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
        double diam = 0;
        const Vec3* v[3] = {&a, &b, &c};
        for (int e = 0; e < 3; ++e) {
            const Vec3 &p = *v[e], &q = *v[(e + 1) % 3];
            const double ex = p[0] - q[0], ey = p[1] - q[1], ez = p[2] - q[2];
            diam = std::max(diam, std::sqrt(ex * ex + ey * ey + ez * ez));
        }
        if (depth < 8 && diam > 0.6 * dist) {
            const Vec3 ab = {(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2};
            const Vec3 bc = {(b[0] + c[0]) / 2, (b[1] + c[1]) / 2, (b[2] + c[2]) / 2};
            const Vec3 ca = {(c[0] + a[0]) / 2, (c[1] + a[1]) / 2, (c[2] + a[2]) / 2};
            accumulate(a, ab, ca, depth + 1, val, grad);
            accumulate(b, bc, ab, depth + 1, val, grad);
            accumulate(c, ca, bc, depth + 1, val, grad);
            accumulate(ab, bc, ca, depth + 1, val, grad);
            return;
        }
        const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
        const double wx = c[0] - a[0], wy = c[1] - a[1], wz = c[2] - a[2];
        const double cxx = uy * wz - uz * wy, cyy = uz * wx - ux * wz, czz = ux * wy - uy * wx;
        const double area = 0.5 * std::sqrt(cxx * cxx + cyy * cyy + czz * czz);
        if (with_grad) {
            KernelMatrix kv;
            std::array<KernelMatrix, 3> kg;
            ev.kernel_with_gradient(kind, target, cen, {0, 0, 0}, n_y, kv, kg);
            for (int q = 0; q < 16; ++q) val[q] += area * kv.a[q];
            for (int l = 0; l < 3; ++l)
                for (int q = 0; q < 16; ++q) grad[l][q] += area * kg[l].a[q];
        } else {
            KernelMatrix kv = ev.layer_kernel(kind, target, cen, {0, 0, 0}, n_y);
            for (int q = 0; q < 16; ++q) val[q] += area * kv.a[q];
        }
    }
};

} // namespace

EvalMatrices potential_eval_matrices(const KernelEvaluator& ev, PotentialKind kind,
                                     const BoundaryMesh& source, const std::vector<Vec3>& targets,
                                     bool with_grad, const std::vector<int>* self_skip) {
    const int d = ev.dim(), n = d + 1;
    const KernelKind kk = kernel_kind_of(kind);
    const std::size_t mp = targets.size(), ms = source.size();
    EvalMatrices out;
    out.with_grad = with_grad;
    out.value.setZero(n * mp, n * ms);
    if (with_grad)
        for (int l = 0; l < d; ++l) out.grad[l].setZero(n * mp, n * ms);

    parallel_for(mp, [&](std::size_t p) {
        for (std::size_t j = 0; j < ms; ++j) {
            if (self_skip && (*self_skip)[p] == static_cast<int>(j)) continue;
            cplx val[16] = {};
            cplx grad[3][16] = {};
            bool near3d = false;
            if (source.dim == 3) {
                const double dxp = targets[p][0] - source.nodes[j][0];
                const double dyp = targets[p][1] - source.nodes[j][1];
                const double dzp = targets[p][2] - source.nodes[j][2];
                const double dn = std::sqrt(dxp * dxp + dyp * dyp + dzp * dzp);
                near3d = dn < 2.5 * source.local_spacing(j);
            }
            if (near3d) {
                PanelIntegrator pi{ev, kk, targets[p], source.normals[j], with_grad};
                const auto& t = source.panels[j];
                pi.accumulate(source.vertices[t[0]], source.vertices[t[1]],
                              source.vertices[t[2]], 0, val, grad);
            } else {
                const double w = source.weights[j];
                if (with_grad) {
                    KernelMatrix kv;
                    std::array<KernelMatrix, 3> kg;
                    ev.kernel_with_gradient(kk, targets[p], source.nodes[j], {0, 0, 0},
                                            source.normals[j], kv, kg);
                    for (int q = 0; q < 16; ++q) val[q] = w * kv.a[q];
                    for (int l = 0; l < d; ++l)
                        for (int q = 0; q < 16; ++q) grad[l][q] = w * kg[l].a[q];
                } else {
                    KernelMatrix kv = ev.layer_kernel(kk, targets[p], source.nodes[j],
                                                      {0, 0, 0}, source.normals[j]);
                    for (int q = 0; q < 16; ++q) val[q] = w * kv.a[q];
                }
            }
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    out.value(n * p + a, n * j + b) = val[a * n + b];
                    if (with_grad)
                        for (int l = 0; l < d; ++l)
                            out.grad[l](n * p + a, n * j + b) = grad[l][a * n + b];
                }
        }
    });
    return out;
}

Eigen::MatrixXcd potential_value_matrix(const KernelEvaluator& ev, PotentialKind kind,
                                        const BoundaryMesh& source,
                                        const std::vector<Vec3>& targets) {
    return potential_eval_matrices(ev, kind, source, targets, false).value;
}

Eigen::MatrixXcd potential_traction_matrix(const KernelEvaluator& ev, PotentialKind kind,
                                           const BoundaryMesh& source,
                                           const std::vector<Vec3>& targets,
                                           const std::vector<Vec3>& target_normals) {
    const int d = ev.dim(), n = d + 1;
    EvalMatrices em = potential_eval_matrices(ev, kind, source, targets, true);
    const Material& mat = ev.material();
    Eigen::MatrixXcd out(em.value.rows(), em.value.cols());
    for (std::size_t p = 0; p < targets.size(); ++p) {
        const Vec3& nn = target_normals[p];
        for (Eigen::Index col = 0; col < em.value.cols(); ++col) {
            cplx div = 0;
            for (int a = 0; a < d; ++a) div += em.grad[a](n * p + a, col);
            for (int i = 0; i < d; ++i) {
                cplx v = mat.lambda * div * nn[i] - mat.gamma * nn[i] * em.value(n * p + d, col);
                for (int l = 0; l < d; ++l)
                    v += mat.mu * (em.grad[l](n * p + i, col) + em.grad[i](n * p + l, col)) *
                         nn[l];
                out(n * p + i, col) = v;
            }
            cplx dn = 0;
            for (int l = 0; l < d; ++l) dn += nn[l] * em.grad[l](n * p + d, col);
            out(n * p + d, col) = dn;
        }
    }
    return out;
}

std::vector<FieldSample> eval_potential(PotentialKind kind, const Material& m,
                                        const LaplacePoint& s, const BoundaryMesh& mesh,
                                        const Density& density, const std::vector<Vec3>& points) {
    if (density.space != density_space_of(kind))
        throw TagMismatch("density space tag does not match the potential kind");
    const int d = mesh.dim, n = d + 1;
    if (density.values.size() != static_cast<Eigen::Index>(n * mesh.size()))
        throw TagMismatch("density length does not match the mesh");
    for (const auto& x : points) {
        for (std::size_t j = 0; j < mesh.size(); ++j) {
            double r2 = 0;
            for (int c = 0; c < d; ++c)
                r2 += (x[c] - mesh.nodes[j][c]) * (x[c] - mesh.nodes[j][c]);
            if (std::sqrt(r2) < mesh.local_spacing(j))
                throw PointTooClose("evaluation point closer than one mesh spacing");
        }
    }
    KernelEvaluator ev(d, m, s);
    EvalMatrices em = potential_eval_matrices(ev, kind, mesh, points, true);
    Eigen::VectorXcd vals = em.value * density.values;
    std::array<Eigen::VectorXcd, 3> grads;
    for (int l = 0; l < d; ++l) grads[l] = em.grad[l] * density.values;

    std::vector<FieldSample> out(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        out[p].point = points[p];
        for (int c = 0; c < n; ++c) {
            out[p].value[c] = vals(n * p + c);
            for (int l = 0; l < d; ++l) out[p].gradient[c][l] = grads[l](n * p + c);
        }
    }
    return out;
}

// Source oversampling needed so that an offset h0/2^level stays at least
// four fine spacings away from the curve.
int level_upsample(double base_factor, int level, int cap) {
    int u = 1;
    while (u < cap && base_factor / std::ldexp(1.0, level) * u < 4.0) u *= 2;
    return u;
}

Eigen::MatrixXcd block_prolongation(const Eigen::MatrixXd& p, int comps) {
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(p.rows() * comps, p.cols() * comps);
    for (Eigen::Index q = 0; q < p.rows(); ++q)
        for (Eigen::Index j = 0; j < p.cols(); ++j)
            for (int c = 0; c < comps; ++c) big(comps * q + c, comps * j + c) = p(q, j);
    return big;
}

Eigen::VectorXcd boundary_trace_extrapolated(PotentialKind kind, TraceWhich which,
                                             TraceSide side, const Material& m,
                                             const LaplacePoint& s, const BoundaryMesh& mesh,
                                             const Density& density, const TraceOptions& opt) {
    if (kind != PotentialKind::S && kind != PotentialKind::D)
        throw DomainError("boundary traces are provided for the S and D potentials");
    if (density.space != density_space_of(kind))
        throw TagMismatch("density space tag does not match the potential kind");
    const int d = mesh.dim, n = d + 1;
    KernelEvaluator ev(d, m, s);

    const double sgn = side == TraceSide::Interior ? -1.0 : 1.0;
    const std::vector<double> w = richardson_weights(opt.levels);
    std::vector<Eigen::VectorXcd> levels(opt.levels);
    for (int j = 0; j < opt.levels; ++j) {
        // evaluation sources only need to out-resolve the target offset
        const BoundaryMesh* src = &mesh;
        BoundaryMesh fine;
        Eigen::VectorXcd rho = density.values;
        if (d == 2 && opt.upsample > 1) {
            const int factor = level_upsample(opt.base_offset_factor, j, opt.upsample);
            if (factor > 1) {
                fine = refine_curve(mesh, factor);
                rho = block_prolongation(prolongation_matrix(mesh, fine), n) * density.values;
                src = &fine;
            }
        }
        const bool circulant = mesh.shape == "circle";
        const std::size_t nt = circulant ? 1 : mesh.size();
        std::vector<Vec3> targets(nt);
        std::vector<Vec3> normals(nt);
        for (std::size_t i = 0; i < nt; ++i) {
            const double h = opt.base_offset_factor * mesh.local_spacing(i) / std::ldexp(1.0, j);
            for (int c = 0; c < 3; ++c)
                targets[i][c] = mesh.nodes[i][c] + sgn * h * mesh.normals[i][c];
            normals[i] = mesh.normals[i];
        }
        Eigen::MatrixXcd mat =
            which == TraceWhich::Value
                ? potential_value_matrix(ev, kind, *src, targets)
                : potential_traction_matrix(ev, kind, *src, targets, normals);
        if (circulant)
            levels[j] = circulant_apply(mat, rho, mesh.size(),
                                        static_cast<int>(src->size() / mesh.size()));
        else
            levels[j] = mat * rho;
    }

    if (opt.levels >= 3) {
        const double d1 = (levels[1] - levels[0]).norm();
        const double d2 = (levels[opt.levels - 1] - levels[opt.levels - 2]).norm();
        const double scale = levels[opt.levels - 1].norm() + 1e-300;
        if (d2 > 4.0 * d1 && d2 > 1e-6 * scale)
            throw ExtrapolationDiverged("off-surface trace levels are not contracting");
    }
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n * mesh.size());
    for (int j = 0; j < opt.levels; ++j) out += w[j] * levels[j];
    return out;
}

namespace {

// R~ B R~^T for one (d+1)x(d+1) block, rotation by angle in the xy-plane
void rotate_block(const cplx* b, int n, double c, double s, cplx* out) {
    // left multiply
    cplx tmp[16];
    for (int j = 0; j < n; ++j) {
        tmp[0 * n + j] = c * b[0 * n + j] - s * b[1 * n + j];
        tmp[1 * n + j] = s * b[0 * n + j] + c * b[1 * n + j];
        for (int i = 2; i < n; ++i) tmp[i * n + j] = b[i * n + j];
    }
    for (int i = 0; i < n; ++i) {
        out[i * n + 0] = c * tmp[i * n + 0] - s * tmp[i * n + 1];
        out[i * n + 1] = s * tmp[i * n + 0] + c * tmp[i * n + 1];
        for (int j = 2; j < n; ++j) out[i * n + j] = tmp[i * n + j];
    }
}

} // namespace

Eigen::MatrixXcd circle_row0(const KernelEvaluator& ev, PotentialKind kind,
                             const BoundaryMesh& circle_src, const Vec3& target0,
                             const Vec3& normal0, bool traction) {
    std::vector<Vec3> t = {target0};
    if (traction)
        return potential_traction_matrix(ev, kind, circle_src, t, {normal0});
    return potential_value_matrix(ev, kind, circle_src, t);
}

Eigen::MatrixXcd circulant_expand(const Eigen::MatrixXcd& row0, const BoundaryMesh& mesh) {
    const int n = mesh.dim + 1;
    const std::size_t m = mesh.size();
    const std::size_t mcols = row0.cols() / n;
    Eigen::MatrixXcd full(n * m, row0.cols());
    parallel_for(m, [&](std::size_t i) {
        const double ang = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(m);
        const double c = std::cos(ang), s = std::sin(ang);
        const std::size_t stride = mcols / m;
        cplx b[16], r[16];
        for (std::size_t q = 0; q < mcols; ++q) {
            const std::size_t qsrc = (q + mcols - ((i * stride) % mcols)) % mcols;
            for (int a = 0; a < n; ++a)
                for (int bcol = 0; bcol < n; ++bcol) b[a * n + bcol] = row0(a, n * qsrc + bcol);
            rotate_block(b, n, c, s, r);
            for (int a = 0; a < n; ++a)
                for (int bcol = 0; bcol < n; ++bcol) full(n * i + a, n * q + bcol) = r[a * n + bcol];
        }
    });
    return full;
}

Eigen::VectorXcd circulant_apply(const Eigen::MatrixXcd& row0, const Eigen::VectorXcd& rho_fine,
                                 std::size_t coarse_size, int stride) {
    const int n = static_cast<int>(row0.rows());
    const std::size_t mf = row0.cols() / n;
    Eigen::VectorXcd out(n * coarse_size);
    parallel_for(coarse_size, [&](std::size_t i) {
        const double ang = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(coarse_size);
        const double c = std::cos(ang), s = std::sin(ang);
        const std::size_t shift = (i * stride) % mf;
        // rho'_q = R^T rho_{q+shift}; acc = row0 * rho'; out_i = R acc
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n);
        for (std::size_t q = 0; q < mf; ++q) {
            const std::size_t qs = (q + shift) % mf;
            cplx rp[4];
            rp[0] = c * rho_fine(n * qs + 0) + s * rho_fine(n * qs + 1);
            rp[1] = -s * rho_fine(n * qs + 0) + c * rho_fine(n * qs + 1);
            for (int a = 2; a < n; ++a) rp[a] = rho_fine(n * qs + a);
            for (int a = 0; a < n; ++a)
                for (int bcol = 0; bcol < n; ++bcol) acc(a) += row0(a, n * q + bcol) * rp[bcol];
        }
        out(n * i + 0) = c * acc(0) - s * acc(1);
        out(n * i + 1) = s * acc(0) + c * acc(1);
        for (int a = 2; a < n; ++a) out(n * i + a) = acc(a);
    });
    return out;
}

} // namespace thermobem
