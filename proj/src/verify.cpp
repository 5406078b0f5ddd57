#include "thermobem/verify.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "thermobem/errors.hpp"
#include "thermobem/io.hpp"
#include "thermobem/parallel.hpp"
#include "json.hpp"

namespace thermobem {

namespace {

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
        w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
}

double fit_slope(const std::vector<double>& logx, const std::vector<double>& logy) {
    const std::size_t n = logx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += logx[i];
        sy += logy[i];
        sxx += logx[i] * logx[i];
        sxy += logx[i] * logy[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

std::string report_to_json(const ProbeReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["seed"] = r.seed;
    j["pass"] = r.pass;
    j["columns"] = r.columns;
    j["rows"] = r.rows;
    j["fitted"] = r.fitted;
    j["notes"] = r.notes;
    return j.dump(2);
}

std::string report_to_csv(const ProbeReport& r) {
    std::ostringstream os;
    for (std::size_t c = 0; c < r.columns.size(); ++c)
        os << (c ? "," : "") << r.columns[c];
    os << "\n";
    for (const auto& row : r.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_g17(row[c]);
        os << "\n";
    }
    return os.str();
}

// --- EnergyNormEvaluator -----------------------------------------------------

EnergyNormEvaluator::EnergyNormEvaluator(int dim, double r_inner, double r_outer, int n_radial,
                                         int n_angular)
    : dim_(dim), r_inner_(r_inner), r_outer_(r_outer) {
    std::vector<double> gx, gw;
    gauss_legendre_01(n_radial, gx, gw);
    if (dim == 2) {
        for (int i = 0; i < n_radial; ++i) {
            const double r = r_inner + (r_outer - r_inner) * gx[i];
            const double wr = (r_outer - r_inner) * gw[i] * r;
            for (int a = 0; a < n_angular; ++a) {
                const double phi = 2.0 * M_PI * a / n_angular;
                points_.push_back({r * std::cos(phi), r * std::sin(phi), 0});
                weights_.push_back(wr * 2.0 * M_PI / n_angular);
            }
        }
    } else if (dim == 3) {
        std::vector<double> cx, cw;
        gauss_legendre_01(n_angular, cx, cw);
        for (int i = 0; i < n_radial; ++i) {
            const double r = r_inner + (r_outer - r_inner) * gx[i];
            const double wr = (r_outer - r_inner) * gw[i] * r * r;
            for (int t = 0; t < n_angular; ++t) {
                const double ct = 2.0 * cx[t] - 1.0; // cos(theta) in [-1,1]
                const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                const double wt = 2.0 * cw[t];
                for (int a = 0; a < 2 * n_angular; ++a) {
                    const double phi = 2.0 * M_PI * a / (2 * n_angular);
                    points_.push_back({r * st * std::cos(phi), r * st * std::sin(phi), r * ct});
                    weights_.push_back(wr * wt * 2.0 * M_PI / (2 * n_angular));
                }
            }
        }
    } else {
        throw DomainError("energy norms support dim 2 or 3");
    }
}

void EnergyNormEvaluator::check_exactness() const {
    double vol = 0, quad = 0;
    for (std::size_t q = 0; q < points_.size(); ++q) {
        vol += weights_[q];
        const auto& p = points_[q];
        if (dim_ == 2)
            quad += weights_[q] * p[0] * p[0] * p[1] * p[1];
        else
            quad += weights_[q] * p[0] * p[0] * p[1] * p[1] * p[2] * p[2];
    }
    const double ro = r_outer_, ri = r_inner_;
    const double vol_exact = dim_ == 2 ? M_PI * (ro * ro - ri * ri)
                                       : 4.0 / 3.0 * M_PI * (ro * ro * ro - ri * ri * ri);
    if (std::abs(vol - vol_exact) > 1e-12 * vol_exact)
        throw QuadratureInsufficient("volume not reproduced");
    if (ri == 0.0) {
        const double deg6 = dim_ == 2 ? M_PI / 24.0 * std::pow(ro, 6)
                                      : 4.0 * M_PI / 945.0 * std::pow(ro, 9);
        if (std::abs(quad - deg6) > 1e-10 * deg6)
            throw QuadratureInsufficient("degree-6 moment not reproduced");
    }
}

EnergyNormEvaluator::Norms EnergyNormEvaluator::norms(const Field& field, const Material& m,
                                                      const LaplacePoint& s) const {
    const int d = dim_;
    double strain = 0, l2u = 0, gradth = 0, l2th = 0;
    for (std::size_t q = 0; q < points_.size(); ++q) {
        const FieldValue f = field(points_[q]);
        cplx div = 0;
        for (int c = 0; c < d; ++c) div += f.gradient[c][c];
        double eps2 = 0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const cplx e = 0.5 * (f.gradient[i][j] + f.gradient[j][i]);
                eps2 += std::norm(e);
            }
        strain += weights_[q] * (m.lambda * std::norm(div) + 2.0 * m.mu * eps2);
        double uu = 0;
        for (int c = 0; c < d; ++c) uu += std::norm(f.value[c]);
        l2u += weights_[q] * uu;
        double gth = 0;
        for (int l = 0; l < d; ++l) gth += std::norm(f.gradient[d][l]);
        gradth += weights_[q] * gth;
        l2th += weights_[q] * std::norm(f.value[d]);
    }
    const double s2 = std::norm(s.s);
    Norms nn;
    nn.u_s = std::sqrt(std::max(0.0, strain + m.rho * s2 * l2u));
    nn.th_s = std::sqrt(std::max(0.0, gradth + std::abs(s.s) / m.kappa * l2th));
    nn.pair_s = std::sqrt(nn.u_s * nn.u_s + nn.th_s * nn.th_s);
    nn.u_1 = std::sqrt(std::max(0.0, strain + m.rho * l2u));
    nn.th_1 = std::sqrt(std::max(0.0, gradth + 1.0 / m.kappa * l2th));
    nn.pair_1 = std::sqrt(nn.u_1 * nn.u_1 + nn.th_1 * nn.th_1);
    return nn;
}

// --- dispersion ---------------------------------------------------------------

ProbeReport dispersion_probe(int n_samples, unsigned seed) {
    ProbeReport rep;
    rep.name = "dispersion";
    rep.seed = seed;
    rep.columns = {"sample", "vieta_sum_rel", "vieta_prod_rel", "pf_sum0", "pf_sum2",
                   "pf_sum4_err"};
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.2, 3.0), ure(0.1, 10.0), uim(-100.0, 100.0);
    double worst_vieta = 0, worst_pf = 0;
    int kept = 0;
    for (int t = 0; t < n_samples; ++t) {
        double lambda = u(rng) - 1.0;
        const double mu = u(rng);
        if (3 * lambda + 2 * mu <= 0.1) lambda = 0.1;
        const Material m{u(rng), lambda, mu, u(rng), u(rng), u(rng)};
        const cplx s(ure(rng), uim(rng));
        WaveNumbers w;
        PFCoeffs pf;
        try {
            w = wave_numbers(m, make_laplace_point(s));
            pf = partial_fraction_coeffs(w);
        } catch (const ConfluentRoots&) {
            continue;
        }
        ++kept;
        const double eps = m.gamma * m.eta * m.kappa / (m.lambda + 2 * m.mu);
        const cplx sk = s / m.kappa;
        const cplx sum = w.lam_sq[0] + w.lam_sq[1];
        const cplx prod = w.lam_sq[0] * w.lam_sq[1];
        const double e_sum = std::abs(sum - (sk * (1.0 + eps) + w.lamp_sq)) / std::abs(sum);
        const double e_prod = std::abs(prod - sk * w.lamp_sq) / std::abs(prod);
        cplx s0 = 0, s2 = 0, s4 = 0;
        double mag4 = 0;
        for (int k = 0; k < 3; ++k) {
            s0 += pf.c[k];
            s2 += pf.c[k] * w.lam_sq[k];
            s4 += pf.c[k] * w.lam_sq[k] * w.lam_sq[k];
            mag4 += std::abs(pf.c[k] * w.lam_sq[k] * w.lam_sq[k]);
        }
        const double e0 = std::abs(s0) * std::norm(w.lam_sq[2]) / std::max(mag4, 1e-300);
        const double e2 = std::abs(s2) / std::max(mag4 / std::abs(w.lam_sq[2]), 1e-300);
        const double e4 = std::abs(s4 - 1.0) / std::max(mag4, 1.0);
        rep.rows.push_back({static_cast<double>(t), e_sum, e_prod, e0, e2, e4});
        worst_vieta = std::max({worst_vieta, e_sum, e_prod});
        worst_pf = std::max({worst_pf, e0, e2, e4});
    }
    // printed decoupled limit at unit material, s = 1
    const Material dec{1, 1, 1, 0, 0, 1};
    auto w0 = wave_numbers(dec, make_laplace_point(cplx(1, 0)));
    const double e_dec = std::abs(w0.lam_sq[0] - 1.0) + std::abs(w0.lam_sq[1] - 1.0 / 3.0) +
                         std::abs(w0.lam_sq[2] - 1.0);
    rep.fitted["samples_kept"] = kept;
    rep.fitted["worst_vieta_rel"] = worst_vieta;
    rep.fitted["worst_pf_moment"] = worst_pf;
    rep.fitted["decoupled_limit_err"] = e_dec;
    rep.pass = worst_vieta <= 1e-12 && worst_pf <= 1e-10 && e_dec <= 1e-14;
    return rep;
}

// --- residual probe ----------------------------------------------------------

namespace {

// fourth-order FD application of B (or B*) to a kernel column
struct FDOperator {
    int dim;
    Material m;
    cplx s;
    bool adjoint;
    double h;

    template <typename F>
    std::array<cplx, 4> apply(const F& field, const Vec3& x) const {
        const int d = dim;
        auto shift = [&](const Vec3& p, int c, double delta) {
            Vec3 y = p;
            y[c] += delta;
            return y;
        };
        std::array<cplx, 4> val = field(x);
        std::array<std::array<cplx, 4>, 3> d1{}, d2{};
        std::array<std::array<std::array<cplx, 4>, 3>, 3> dc{};
        for (int c = 0; c < d; ++c) {
            auto fp2 = field(shift(x, c, 2 * h)), fp1 = field(shift(x, c, h));
            auto fm1 = field(shift(x, c, -h)), fm2 = field(shift(x, c, -2 * h));
            for (int q = 0; q <= d; ++q) {
                d1[c][q] = (-fp2[q] + 8.0 * fp1[q] - 8.0 * fm1[q] + fm2[q]) / (12 * h);
                d2[c][q] =
                    (-fp2[q] + 16.0 * fp1[q] - 30.0 * val[q] + 16.0 * fm1[q] - fm2[q]) /
                    (12 * h * h);
            }
        }
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) {
                auto at2 = [&](double da, double db) {
                    Vec3 y = x;
                    y[a] += da;
                    y[b] += db;
                    return field(y);
                };
                auto pp = at2(h, h), mm = at2(-h, -h), pm = at2(h, -h), mp = at2(-h, h);
                auto pp2 = at2(2 * h, 2 * h), mm2 = at2(-2 * h, -2 * h), pm2 = at2(2 * h, -2 * h),
                     mp2 = at2(-2 * h, 2 * h);
                for (int q = 0; q <= d; ++q) {
                    const cplx s1 = pp[q] + mm[q] - pm[q] - mp[q];
                    const cplx s2v = pp2[q] + mm2[q] - pm2[q] - mp2[q];
                    const cplx v = (16.0 * s1 - s2v) / (48 * h * h);
                    dc[a][b][q] = v;
                    dc[b][a][q] = v;
                }
            }
        auto dij = [&](int a, int b, int q) { return a == b ? d2[a][q] : dc[a][b][q]; };
        std::array<cplx, 4> out{};
        const cplx rho_s2 = m.rho * s * s;
        for (int i = 0; i < d; ++i) {
            cplx lap = 0, graddiv = 0;
            for (int c = 0; c < d; ++c) {
                lap += dij(c, c, i);
                graddiv += dij(i, c, c);
            }
            const cplx coup = adjoint ? (s * m.eta) * d1[i][d] : (-m.gamma) * d1[i][d];
            out[i] = m.mu * lap + (m.lambda + m.mu) * graddiv - rho_s2 * val[i] + coup;
        }
        cplx lapt = 0, divu = 0;
        for (int c = 0; c < d; ++c) {
            lapt += dij(c, c, d);
            divu += d1[c][c];
        }
        out[d] = lapt - (s / m.kappa) * val[d] + (adjoint ? m.gamma : (-s * m.eta)) * divu;
        return out;
    }
};

} // namespace

ProbeReport pde_residual_probe(int dim, const Material& m, cplx s, ResidualKind kind,
                               int n_samples, unsigned seed) {
    ProbeReport rep;
    rep.name = kind == ResidualKind::Fundamental ? "pde_residual_E" : "pde_residual_E_adjoint";
    rep.seed = seed;
    rep.columns = {"sample", "radius", "rel_residual"};
    KernelEvaluator ev(dim, m, make_laplace_point(s));
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uang(0.0, 2 * M_PI), urad(0.3, 3.0), uu(-1.0, 1.0);
    const Vec3 y = {0.03, -0.07, dim == 3 ? 0.11 : 0.0};
    double worst = 0;
    for (int t = 0; t < n_samples; ++t) {
        Vec3 x{};
        const double rad = urad(rng);
        if (dim == 2) {
            const double a = uang(rng);
            x = {rad * std::cos(a), rad * std::sin(a), 0};
        } else {
            Vec3 dir = {uu(rng), uu(rng), uu(rng)};
            const double nn = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]) + 1e-9;
            x = {rad * dir[0] / nn, rad * dir[1] / nn, rad * dir[2] / nn};
        }
        FDOperator fd{dim, m, s, kind == ResidualKind::Adjoint, 2.5e-3 * std::max(0.3, rad)};
        double rel = 0;
        for (int col = 0; col <= dim; ++col) {
            std::array<cplx, 4> base{};
            auto field = [&](const Vec3& p) {
                KernelMatrix e = kind == ResidualKind::Fundamental
                                     ? ev.fundamental(p, y)
                                     : ev.adjoint_fundamental(x, p);
                std::array<cplx, 4> v{};
                for (int i = 0; i <= dim; ++i) v[i] = e(i, col);
                return v;
            };
            const Vec3 at = kind == ResidualKind::Fundamental ? x : y;
            auto res = fd.apply(field, at);
            base = field(at);
            double scale = 0, rn = 0;
            for (int i = 0; i <= dim; ++i) {
                scale = std::max(scale, std::abs(base[i]) * std::abs(m.rho * s * s));
                rn = std::max(rn, std::abs(res[i]));
            }
            rel = std::max(rel, rn / scale);
        }
        rep.rows.push_back({static_cast<double>(t), rad, rel});
        worst = std::max(worst, rel);
    }
    rep.fitted["max_rel_residual"] = worst;
    rep.pass = worst <= 1e-5;
    return rep;
}

// --- jump probe ----------------------------------------------------------------

namespace {

Density three_mode_density(const BoundaryMesh& mesh, SpaceTag tag) {
    Density d;
    d.space = tag;
    d.values.resize(3 * mesh.size());
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        const double t = mesh.param_t[j];
        d.values(3 * j + 0) = std::cos(t) + cplx(0, 0.3) * std::sin(3 * t);
        d.values(3 * j + 1) = 0.5 * std::sin(2 * t) - 0.2;
        d.values(3 * j + 2) = std::cos(2 * t) + 0.1;
    }
    return d;
}

} // namespace

ProbeReport jump_probe(const Material& m, cplx s, const std::vector<int>& circle_resolutions) {
    ProbeReport rep;
    rep.name = "jump_relations_circle";
    rep.columns = {"N", "S_value_jump", "S_traction_jump_err", "D_value_jump_err",
                   "D_traction_jump"};
    const LaplacePoint sp = make_laplace_point(s);
    for (int n : circle_resolutions) {
        BoundaryMesh mesh = make_circle(1.0, n);
        Density lam = three_mode_density(mesh, SpaceTag::MinusHalf);
        Density phi = three_mode_density(mesh, SpaceTag::PlusHalf);
        auto svi = boundary_trace_extrapolated(PotentialKind::S, TraceWhich::Value,
                                               TraceSide::Interior, m, sp, mesh, lam);
        auto sve = boundary_trace_extrapolated(PotentialKind::S, TraceWhich::Value,
                                               TraceSide::Exterior, m, sp, mesh, lam);
        auto sti = boundary_trace_extrapolated(PotentialKind::S, TraceWhich::Traction,
                                               TraceSide::Interior, m, sp, mesh, lam);
        auto ste = boundary_trace_extrapolated(PotentialKind::S, TraceWhich::Traction,
                                               TraceSide::Exterior, m, sp, mesh, lam);
        auto dvi = boundary_trace_extrapolated(PotentialKind::D, TraceWhich::Value,
                                               TraceSide::Interior, m, sp, mesh, phi);
        auto dve = boundary_trace_extrapolated(PotentialKind::D, TraceWhich::Value,
                                               TraceSide::Exterior, m, sp, mesh, phi);
        auto dti = boundary_trace_extrapolated(PotentialKind::D, TraceWhich::Traction,
                                               TraceSide::Interior, m, sp, mesh, phi);
        auto dte = boundary_trace_extrapolated(PotentialKind::D, TraceWhich::Traction,
                                               TraceSide::Exterior, m, sp, mesh, phi);
        rep.rows.push_back({static_cast<double>(n),
                            (svi - sve).lpNorm<Eigen::Infinity>(),
                            (sti - ste - lam.values).lpNorm<Eigen::Infinity>(),
                            (dvi - dve + phi.values).lpNorm<Eigen::Infinity>(),
                            (dti - dte).lpNorm<Eigen::Infinity>()});
    }
    // fitted convergence order per identity, min over identities
    double min_order = 1e9;
    for (int c = 1; c <= 4; ++c) {
        std::vector<double> lx, ly;
        for (const auto& row : rep.rows) {
            lx.push_back(std::log(row[0]));
            ly.push_back(std::log(std::max(row[c], 1e-300)));
        }
        const double order = -fit_slope(lx, ly);
        rep.fitted["order_" + rep.columns[c]] = order;
        min_order = std::min(min_order, order);
    }
    rep.fitted["min_order"] = min_order;
    double last_worst = 0;
    for (int c = 1; c <= 4; ++c) last_worst = std::max(last_worst, rep.rows.back()[c]);
    rep.fitted["finest_worst_error"] = last_worst;
    rep.pass = min_order >= 2.0 && last_worst <= 1e-5;
    rep.notes.push_back("D value jump carries the double-layer orientation: interior minus "
                        "exterior trace equals minus the density");
    return rep;
}

ProbeReport jump_probe_sphere(const Material& m, cplx s, int refinement) {
    ProbeReport rep;
    rep.name = "jump_relations_sphere";
    rep.columns = {"refinement", "S_value_jump", "D_value_jump_err"};
    const LaplacePoint sp = make_laplace_point(s);
    BoundaryMesh mesh = make_sphere(1.0, refinement);
    Density lam, phi;
    lam.space = SpaceTag::MinusHalf;
    phi.space = SpaceTag::PlusHalf;
    lam.values.resize(4 * mesh.size());
    phi.values.resize(4 * mesh.size());
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        const auto& p = mesh.nodes[j];
        for (int c = 0; c < 4; ++c) {
            const cplx v = cplx(0.3 + 0.7 * p[c % 3], 0.2 * p[(c + 1) % 3]);
            lam.values(4 * j + c) = v;
            phi.values(4 * j + c) = v;
        }
    }
    TraceOptions opt;
    opt.levels = 3;
    auto svi = boundary_trace_extrapolated(PotentialKind::S, TraceWhich::Value,
                                           TraceSide::Interior, m, sp, mesh, lam, opt);
    auto sve = boundary_trace_extrapolated(PotentialKind::S, TraceWhich::Value,
                                           TraceSide::Exterior, m, sp, mesh, lam, opt);
    auto dvi = boundary_trace_extrapolated(PotentialKind::D, TraceWhich::Value,
                                           TraceSide::Interior, m, sp, mesh, phi, opt);
    auto dve = boundary_trace_extrapolated(PotentialKind::D, TraceWhich::Value,
                                           TraceSide::Exterior, m, sp, mesh, phi, opt);
    const double sj = (svi - sve).lpNorm<Eigen::Infinity>() /
                      std::max(1e-300, svi.lpNorm<Eigen::Infinity>());
    const double dj = (dvi - dve + phi.values).lpNorm<Eigen::Infinity>() /
                      phi.values.lpNorm<Eigen::Infinity>();
    rep.rows.push_back({static_cast<double>(refinement), sj, dj});
    rep.fitted["S_value_jump_rel"] = sj;
    rep.fitted["D_value_jump_rel"] = dj;
    rep.pass = sj < 0.1 && dj < 0.1; // P0 panels: qualitative check only
    return rep;
}

// --- coercivity ---------------------------------------------------------------

ProbeReport coercivity_probe(const Material& m, const BoundaryMesh& mesh,
                             const std::vector<cplx>& s_grid) {
    ProbeReport rep;
    rep.name = "coercivity";
    rep.columns = {"re_s",   "im_s",    "min_eig_V", "min_eig_W",
                   "ratio_V", "ratio_W", "raw_min_V", "raw_min_W"};
    const int n = mesh.dim + 1;
    const std::size_t mdof = n * mesh.size();
    Eigen::VectorXd wq(mdof);
    for (std::size_t i = 0; i < mesh.size(); ++i)
        for (int c = 0; c < n; ++c) wq(n * i + c) = mesh.weights[i];

    // Positivity is asserted on the resolved Fourier band |mode| <= M/4: the
    // true pairing value of near-Nyquist densities vanishes faster than their
    // assembly error, so the raw minimum carries no information about the
    // operator (the raw values are still recorded).
    Eigen::MatrixXcd band;
    if (mesh.dim == 2) {
        const std::size_t mm = mesh.size();
        const int mmax = static_cast<int>(mm) / 4;
        const int nb = 2 * mmax + 1;
        band = Eigen::MatrixXcd::Zero(mdof, n * nb);
        for (int comp = 0; comp < n; ++comp)
            for (int k = 0; k < nb; ++k)
                for (std::size_t j = 0; j < mm; ++j)
                    band(n * j + comp, n * k + comp) = std::polar(
                        1.0 / std::sqrt(static_cast<double>(mm)),
                        (k - mmax) * mesh.param_t[j]);
        rep.notes.push_back("positivity asserted on the resolved band |mode| <= M/4");
    }

    bool all_positive = true;
    const bool decoupled = m.gamma == 0.0 && m.eta == 0.0;
    for (cplx s : s_grid) {
        const LaplacePoint sp = make_laplace_point(s);
        Eigen::VectorXcd zdiag(mdof);
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            for (int c = 0; c < n - 1; ++c) zdiag(n * i + c) = std::conj(s);
            zdiag(n * i + n - 1) = decoupled ? 1.0 : m.gamma / m.eta;
        }
        OperatorMatrix v = assemble(OperatorKind::V, m, sp, mesh);
        OperatorMatrix w = assemble(OperatorKind::W, m, sp, mesh);
        // Re <Z rho, conj(V rho)> = rho^H Herm(V^H W Z) rho
        Eigen::MatrixXcd av =
            v.entries.adjoint() * wq.asDiagonal() * Eigen::MatrixXcd(zdiag.asDiagonal());
        Eigen::MatrixXcd aw = wq.cast<cplx>().asDiagonal() * Eigen::MatrixXcd(zdiag.asDiagonal()) *
                              w.entries;
        Eigen::MatrixXcd hv = 0.5 * (av + av.adjoint());
        Eigen::MatrixXcd hw = 0.5 * (aw + aw.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ev(hv), ew(hw);
        const double rawv = ev.eigenvalues().minCoeff();
        const double raww = ew.eigenvalues().minCoeff();
        double minv = rawv, minw = raww;
        if (band.size() != 0) {
            Eigen::MatrixXcd hvp = band.adjoint() * hv * band;
            Eigen::MatrixXcd hwp = band.adjoint() * hw * band;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> evp(0.5 * (hvp + hvp.adjoint()));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ewp(0.5 * (hwp + hwp.adjoint()));
            minv = evp.eigenvalues().minCoeff();
            minw = ewp.eigenvalues().minCoeff();
        }
        const double shape = sp.sigma * sp.sigma_under / std::abs(s);
        rep.rows.push_back(
            {s.real(), s.imag(), minv, minw, minv / shape, minw / shape, rawv, raww});
        all_positive = all_positive && minv > 0 && minw > 0;
    }
    // envelope spread of the ratio against the reference point
    double rv0 = rep.rows.front()[4], rw0 = rep.rows.front()[5];
    double spread_v = 0, spread_w = 0;
    for (const auto& row : rep.rows) {
        spread_v = std::max(spread_v, std::max(row[4] / rv0, rv0 / row[4]));
        spread_w = std::max(spread_w, std::max(row[5] / rw0, rw0 / row[5]));
    }
    rep.fitted["ratio_spread_V"] = spread_v;
    rep.fitted["ratio_spread_W"] = spread_w;
    // positivity is the assertion; the ratio spreads are recorded envelope
    // fits (the L2 surrogate norm folds norm-equivalence factors into them)
    rep.pass = all_positive;
    return rep;
}

// --- norm growth ----------------------------------------------------------------

GrowthTarget growth_target_from_string(const std::string& name) {
    if (name == "V") return GrowthTarget::V;
    if (name == "W") return GrowthTarget::W;
    if (name == "S") return GrowthTarget::S;
    if (name == "D") return GrowthTarget::D;
    if (name == "Vinv") return GrowthTarget::Vinv;
    if (name == "Winv") return GrowthTarget::Winv;
    if (name == "SVinv") return GrowthTarget::SVinv;
    if (name == "DWinv") return GrowthTarget::DWinv;
    if (name == "K2nd") return GrowthTarget::KSecond;
    if (name == "KP2nd") return GrowthTarget::KPrimeSecond;
    throw UsageError("unknown growth target \"" + name + "\"");
}

std::string to_string(GrowthTarget t) {
    switch (t) {
        case GrowthTarget::V: return "V";
        case GrowthTarget::W: return "W";
        case GrowthTarget::S: return "S";
        case GrowthTarget::D: return "D";
        case GrowthTarget::Vinv: return "Vinv";
        case GrowthTarget::Winv: return "Winv";
        case GrowthTarget::SVinv: return "SVinv";
        case GrowthTarget::DWinv: return "DWinv";
        case GrowthTarget::KSecond: return "K2nd";
        case GrowthTarget::KPrimeSecond: return "KP2nd";
    }
    return "?";
}

double bound_exponent(GrowthTarget t) {
    switch (t) {
        case GrowthTarget::V: return 2;
        case GrowthTarget::W: return 4;
        case GrowthTarget::S: return 2;
        case GrowthTarget::D: return 3;
        case GrowthTarget::Vinv: return 4;
        case GrowthTarget::Winv: return 2;
        case GrowthTarget::SVinv: return 3;
        case GrowthTarget::DWinv: return 2;
        case GrowthTarget::KSecond: return 3;
        case GrowthTarget::KPrimeSecond: return 4;
    }
    return 0;
}

namespace {

// rows mapping field values/gradients at volume points to the |1|-energy
// inner product factor: ||T x||_2^2 = |||field(x)|||_1^2
Eigen::MatrixXcd energy_rows(const Material& m, int d,
                             const std::vector<double>& wq, const EvalMatrices& em) {
    const int n = d + 1;
    const int per_point = 1 + d + d * (d - 1) / 2 + d + d + 1;
    const std::size_t npts = wq.size();
    Eigen::MatrixXcd t(per_point * npts, em.value.cols());
    const double c_div = std::sqrt(std::max(1e-300, m.lambda + 2.0 * m.mu / d));
    const double c_dev = std::sqrt(2.0 * m.mu);
    const double c_off = std::sqrt(4.0 * m.mu);
    const double c_u = std::sqrt(m.rho);
    const double c_th = std::sqrt(1.0 / m.kappa);
    for (std::size_t q = 0; q < npts; ++q) {
        const double sw = std::sqrt(wq[q]);
        int r = per_point * static_cast<int>(q);
        for (Eigen::Index col = 0; col < em.value.cols(); ++col) {
            cplx div = 0;
            for (int a = 0; a < d; ++a) div += em.grad[a](n * q + a, col);
            t(r, col) = sw * c_div * div;
            for (int i = 0; i < d; ++i)
                t(r + 1 + i, col) =
                    sw * c_dev * (em.grad[i](n * q + i, col) - div / static_cast<double>(d));
            int off = r + 1 + d;
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j, ++off)
                    t(off, col) = sw * c_off * 0.5 *
                                  (em.grad[j](n * q + i, col) + em.grad[i](n * q + j, col));
            for (int c = 0; c < d; ++c) t(off + c, col) = sw * c_u * em.value(n * q + c, col);
            off += d;
            for (int l = 0; l < d; ++l) t(off + l, col) = sw * em.grad[l](n * q + d, col);
            off += d;
            t(off, col) = sw * c_th * em.value(n * q + d, col);
        }
    }
    return t;
}

struct VolumeGrid {
    std::vector<Vec3> points;
    std::vector<double> weights;
};

VolumeGrid volume_grid_around(const BoundaryMesh& mesh) {
    VolumeGrid g;
    const double R = mesh.radius > 0 ? mesh.radius : std::max(mesh.semi_a, mesh.semi_b);
    const double h = mesh.local_spacing(0);
    std::vector<double> gx, gw;
    gauss_legendre_01(12, gx, gw);
    auto ring = [&](double r0, double r1, int na) {
        for (int i = 0; i < 12; ++i) {
            const double r = r0 + (r1 - r0) * gx[i];
            const double wr = (r1 - r0) * gw[i];
            for (int a = 0; a < na; ++a) {
                const double phi = 2 * M_PI * (a + 0.5) / na;
                g.points.push_back({r * std::cos(phi), r * std::sin(phi), 0});
                g.weights.push_back(wr * r * 2 * M_PI / na);
            }
        }
    };
    // interior disk and exterior annulus, keeping clear of the near-field band
    ring(0.05 * R, R - 2.0 * h, 24);
    ring(R + 2.0 * h, R + 3.0, 24);
    return g;
}

// largest singular value by power iteration on A^H A, given the action of A
// and A^H
double largest_sv_op(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply,
                     const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply_h,
                     Eigen::Index n) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1, 1);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = cplx(u(rng), u(rng));
    x.normalize();
    double prev = 0;
    for (int it = 0; it < 400; ++it) {
        Eigen::VectorXcd y = apply(x);
        const double sv = y.norm();
        x = apply_h(y);
        const double nx = x.norm();
        if (nx == 0) return 0;
        x /= nx;
        if (it > 4 && std::abs(sv - prev) <= 1e-9 * sv) return sv;
        prev = sv;
    }
    return prev;
}

double weighted_bb_norm(const Eigen::MatrixXcd& a, const Eigen::VectorXd& w, bool smallest) {
    Eigen::VectorXcd sq = w.array().sqrt().cast<cplx>();
    Eigen::VectorXcd isq = sq.array().inverse();
    if (!smallest) {
        auto fwd = [&](const Eigen::VectorXcd& x) {
            return (sq.array() * (a * (isq.array() * x.array()).matrix()).array()).matrix().eval();
        };
        auto adj = [&](const Eigen::VectorXcd& x) {
            return (isq.conjugate().array() *
                    (a.adjoint() * (sq.conjugate().array() * x.array()).matrix()).array())
                .matrix()
                .eval();
        };
        return largest_sv_op(fwd, adj, a.cols());
    }
    // smallest singular value: power iteration on the inverse through the LU
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_h(a.adjoint().eval());
    auto fwd = [&](const Eigen::VectorXcd& x) {
        return (sq.array() * lu.solve((isq.array() * x.array()).matrix()).array())
            .matrix()
            .eval();
    };
    auto adj = [&](const Eigen::VectorXcd& x) {
        return (isq.conjugate().array() *
                lu_h.solve((sq.conjugate().array() * x.array()).matrix()).array())
            .matrix()
            .eval();
    };
    // note: weighted inverse is Dw^{1/2} A^{-1} Dw^{-1/2} with the same weights
    const double inv_norm = largest_sv_op(fwd, adj, a.rows());
    return 1.0 / inv_norm;
}

} // namespace

ProbeReport norm_growth_probe(GrowthTarget target, const Material& m, const BoundaryMesh& mesh,
                              const GrowthOptions& opt) {
    ProbeReport rep;
    rep.name = "norm_growth_" + to_string(target);
    rep.columns = {"omega", "abs_s", "norm", "bound_shape"};
    rep.notes.push_back("discrete H^{+-1/2} norms realized as quadrature-weighted l2 "
                        "(L2-surrogate): s-exponents meaningful, constants mesh-dependent");
    const int n = mesh.dim + 1;
    const std::size_t mdof = n * mesh.size();
    Eigen::VectorXd wq(mdof);
    for (std::size_t i = 0; i < mesh.size(); ++i)
        for (int c = 0; c < n; ++c) wq(n * i + c) = mesh.weights[i];

    AssemblyOptions aopt;
    aopt.extrapolation_levels = 4;
    aopt.upsample = 16;

    VolumeGrid vg;
    const bool needs_volume = target == GrowthTarget::S || target == GrowthTarget::D ||
                              target == GrowthTarget::SVinv || target == GrowthTarget::DWinv;
    if (needs_volume) vg = volume_grid_around(mesh);

    std::vector<double> lx, ly;
    for (int j = 0; j < opt.points; ++j) {
        const double omega =
            opt.points == 1 ? 1.0
                            : std::pow(opt.omega_max, static_cast<double>(j) / (opt.points - 1));
        const cplx s(opt.sigma0, omega);
        const LaplacePoint sp = make_laplace_point(s);
        double norm = 0;
        switch (target) {
            case GrowthTarget::V:
                norm = weighted_bb_norm(assemble(OperatorKind::V, m, sp, mesh).entries, wq, false);
                break;
            case GrowthTarget::Vinv:
                norm = 1.0 / weighted_bb_norm(assemble(OperatorKind::V, m, sp, mesh).entries, wq,
                                              true);
                break;
            case GrowthTarget::W:
                norm = weighted_bb_norm(assemble(OperatorKind::W, m, sp, mesh, aopt).entries, wq,
                                        false);
                break;
            case GrowthTarget::Winv:
                norm = 1.0 / weighted_bb_norm(assemble(OperatorKind::W, m, sp, mesh, aopt).entries,
                                              wq, true);
                break;
            case GrowthTarget::KSecond: {
                const double a = weighted_bb_norm(
                    assemble(OperatorKind::HalfPlusK, m, sp, mesh, aopt).entries, wq, false);
                const double b = weighted_bb_norm(
                    assemble(OperatorKind::HalfMinusK, m, sp, mesh, aopt).entries, wq, false);
                norm = std::max(a, b);
                break;
            }
            case GrowthTarget::KPrimeSecond: {
                const double a = weighted_bb_norm(
                    assemble(OperatorKind::HalfPlusKPrime, m, sp, mesh, aopt).entries, wq, false);
                const double b = weighted_bb_norm(
                    assemble(OperatorKind::HalfMinusKPrime, m, sp, mesh, aopt).entries, wq,
                    false);
                norm = std::max(a, b);
                break;
            }
            case GrowthTarget::S:
            case GrowthTarget::D:
            case GrowthTarget::SVinv:
            case GrowthTarget::DWinv: {
                KernelEvaluator ev(mesh.dim, m, sp);
                const PotentialKind pk =
                    (target == GrowthTarget::S || target == GrowthTarget::SVinv)
                        ? PotentialKind::S
                        : PotentialKind::D;
                EvalMatrices em = potential_eval_matrices(ev, pk, mesh, vg.points, true);
                Eigen::MatrixXcd t = energy_rows(m, mesh.dim, vg.weights, em);
                Eigen::VectorXcd sq = wq.array().sqrt().cast<cplx>();
                Eigen::VectorXcd isq = sq.array().inverse();
                Eigen::MatrixXcd ts = t * Eigen::MatrixXcd(isq.asDiagonal());
                if (target == GrowthTarget::S || target == GrowthTarget::D) {
                    auto fwd = [&](const Eigen::VectorXcd& x) { return (ts * x).eval(); };
                    auto adj = [&](const Eigen::VectorXcd& x) {
                        return (ts.adjoint() * x).eval();
                    };
                    norm = largest_sv_op(fwd, adj, ts.cols());
                } else {
                    const OperatorKind ok =
                        target == GrowthTarget::SVinv ? OperatorKind::V : OperatorKind::W;
                    OperatorMatrix a = assemble(ok, m, sp, mesh, aopt);
                    Eigen::MatrixXcd aw = sq.asDiagonal() * a.entries *
                                          Eigen::MatrixXcd(isq.asDiagonal());
                    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(aw);
                    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_h(aw.adjoint().eval());
                    auto fwd = [&](const Eigen::VectorXcd& x) {
                        return (ts * lu.solve(x)).eval();
                    };
                    auto adj = [&](const Eigen::VectorXcd& x) {
                        return lu_h.solve((ts.adjoint() * x).eval()).eval();
                    };
                    norm = largest_sv_op(fwd, adj, aw.cols());
                }
                break;
            }
        }
        const double abss = std::abs(s);
        const double shape = std::pow(abss, bound_exponent(target)) / sp.sigma;
        rep.rows.push_back({omega, abss, norm, shape});
        lx.push_back(std::log(abss));
        ly.push_back(std::log(norm));
    }
    const double phat = fit_slope(lx, ly);
    rep.fitted["fitted_exponent"] = phat;
    rep.fitted["bound_exponent"] = bound_exponent(target);
    const double cref = rep.rows.front()[2] / rep.rows.front()[3];
    rep.fitted["c_ref"] = cref;
    bool envelope_ok = true;
    for (const auto& row : rep.rows)
        envelope_ok = envelope_ok && row[2] <= opt.envelope_factor * cref * row[3];
    rep.fitted["envelope_ok"] = envelope_ok ? 1.0 : 0.0;
    rep.pass = phat <= bound_exponent(target) + opt.exponent_slack && envelope_ok;
    return rep;
}

std::vector<ProbeReport> growth_sweep(const std::vector<GrowthTarget>& targets,
                                      const Material& m, const BoundaryMesh& mesh,
                                      const GrowthOptions& opt) {
    const int n = mesh.dim + 1;
    const std::size_t mdof = n * mesh.size();
    Eigen::VectorXd wq(mdof);
    for (std::size_t i = 0; i < mesh.size(); ++i)
        for (int c = 0; c < n; ++c) wq(n * i + c) = mesh.weights[i];
    Eigen::VectorXcd sq = wq.array().sqrt().cast<cplx>();
    Eigen::VectorXcd isq = sq.array().inverse();

    AssemblyOptions aopt;
    aopt.extrapolation_levels = 4;
    aopt.upsample = 16;

    bool needs_v = false, needs_w = false, needs_vlu = false, needs_wlu = false,
         needs_s = false, needs_d = false, needs_k = false, needs_kp = false;
    for (GrowthTarget t : targets) {
        needs_v |= t == GrowthTarget::V || t == GrowthTarget::Vinv || t == GrowthTarget::SVinv;
        needs_vlu |= t == GrowthTarget::Vinv || t == GrowthTarget::SVinv;
        needs_w |= t == GrowthTarget::W || t == GrowthTarget::Winv || t == GrowthTarget::DWinv;
        needs_wlu |= t == GrowthTarget::Winv || t == GrowthTarget::DWinv;
        needs_s |= t == GrowthTarget::S || t == GrowthTarget::SVinv;
        needs_d |= t == GrowthTarget::D || t == GrowthTarget::DWinv;
        needs_k |= t == GrowthTarget::KSecond;
        needs_kp |= t == GrowthTarget::KPrimeSecond;
    }
    VolumeGrid vg;
    if (needs_s || needs_d) vg = volume_grid_around(mesh);

    std::vector<ProbeReport> reports(targets.size());
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        reports[ti].name = "norm_growth_" + to_string(targets[ti]);
        reports[ti].columns = {"omega", "abs_s", "norm", "bound_shape"};
        reports[ti].notes.push_back(
            "discrete H^{+-1/2} norms realized as quadrature-weighted l2 (L2 surrogate)");
    }

    for (int j = 0; j < opt.points; ++j) {
        const double omega =
            opt.points == 1 ? 1.0
                            : std::pow(opt.omega_max, static_cast<double>(j) / (opt.points - 1));
        const cplx s(opt.sigma0, omega);
        const LaplacePoint sp = make_laplace_point(s);
        const double abss = std::abs(s);

        Eigen::MatrixXcd vw, ww; // weighted operators
        std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXcd>> vlu, vlu_h, wlu, wlu_h;
        if (needs_v) {
            OperatorMatrix a = assemble(OperatorKind::V, m, sp, mesh);
            vw = sq.asDiagonal() * a.entries * Eigen::MatrixXcd(isq.asDiagonal());
            if (needs_vlu) {
                vlu = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXcd>>(vw);
                vlu_h = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXcd>>(
                    vw.adjoint().eval());
            }
        }
        if (needs_w) {
            OperatorMatrix a = assemble(OperatorKind::W, m, sp, mesh, aopt);
            ww = sq.asDiagonal() * a.entries * Eigen::MatrixXcd(isq.asDiagonal());
            if (needs_wlu) {
                wlu = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXcd>>(ww);
                wlu_h = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXcd>>(
                    ww.adjoint().eval());
            }
        }
        Eigen::MatrixXcd ts_s, ts_d;
        if (needs_s || needs_d) {
            KernelEvaluator ev(mesh.dim, m, sp);
            if (needs_s) {
                EvalMatrices em = potential_eval_matrices(ev, PotentialKind::S, mesh, vg.points,
                                                          true);
                ts_s = energy_rows(m, mesh.dim, vg.weights, em) *
                       Eigen::MatrixXcd(isq.asDiagonal());
            }
            if (needs_d) {
                EvalMatrices em = potential_eval_matrices(ev, PotentialKind::D, mesh, vg.points,
                                                          true);
                ts_d = energy_rows(m, mesh.dim, vg.weights, em) *
                       Eigen::MatrixXcd(isq.asDiagonal());
            }
        }

        auto mat_norm = [&](const Eigen::MatrixXcd& a) {
            auto fwd = [&](const Eigen::VectorXcd& x) { return (a * x).eval(); };
            auto adj = [&](const Eigen::VectorXcd& x) { return (a.adjoint() * x).eval(); };
            return largest_sv_op(fwd, adj, a.cols());
        };
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            double norm = 0;
            switch (targets[ti]) {
                case GrowthTarget::V: norm = mat_norm(vw); break;
                case GrowthTarget::W: norm = mat_norm(ww); break;
                case GrowthTarget::S: norm = mat_norm(ts_s); break;
                case GrowthTarget::D: norm = mat_norm(ts_d); break;
                case GrowthTarget::Vinv:
                case GrowthTarget::Winv: {
                    auto& lu = targets[ti] == GrowthTarget::Vinv ? vlu : wlu;
                    auto& luh = targets[ti] == GrowthTarget::Vinv ? vlu_h : wlu_h;
                    auto fwd = [&](const Eigen::VectorXcd& x) { return lu->solve(x).eval(); };
                    auto adj = [&](const Eigen::VectorXcd& x) { return luh->solve(x).eval(); };
                    norm = largest_sv_op(fwd, adj, mdof);
                    break;
                }
                case GrowthTarget::SVinv:
                case GrowthTarget::DWinv: {
                    auto& lu = targets[ti] == GrowthTarget::SVinv ? vlu : wlu;
                    auto& luh = targets[ti] == GrowthTarget::SVinv ? vlu_h : wlu_h;
                    const Eigen::MatrixXcd& t =
                        targets[ti] == GrowthTarget::SVinv ? ts_s : ts_d;
                    auto fwd = [&](const Eigen::VectorXcd& x) {
                        return (t * lu->solve(x)).eval();
                    };
                    auto adj = [&](const Eigen::VectorXcd& x) {
                        return luh->solve((t.adjoint() * x).eval()).eval();
                    };
                    norm = largest_sv_op(fwd, adj, mdof);
                    break;
                }
                case GrowthTarget::KSecond:
                case GrowthTarget::KPrimeSecond: {
                    const bool kk = targets[ti] == GrowthTarget::KSecond;
                    OperatorMatrix a = assemble(kk ? OperatorKind::HalfPlusK
                                                   : OperatorKind::HalfPlusKPrime,
                                                m, sp, mesh, aopt);
                    OperatorMatrix b = assemble(kk ? OperatorKind::HalfMinusK
                                                   : OperatorKind::HalfMinusKPrime,
                                                m, sp, mesh, aopt);
                    norm = std::max(
                        mat_norm(sq.asDiagonal() * a.entries *
                                 Eigen::MatrixXcd(isq.asDiagonal())),
                        mat_norm(sq.asDiagonal() * b.entries *
                                 Eigen::MatrixXcd(isq.asDiagonal())));
                    break;
                }
            }
            const double shape = std::pow(abss, bound_exponent(targets[ti])) / sp.sigma;
            reports[ti].rows.push_back({omega, abss, norm, shape});
        }
    }

    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        auto& rep = reports[ti];
        std::vector<double> lx, ly;
        for (const auto& row : rep.rows) {
            lx.push_back(std::log(row[1]));
            ly.push_back(std::log(row[2]));
        }
        const double phat = fit_slope(lx, ly);
        rep.fitted["fitted_exponent"] = phat;
        rep.fitted["bound_exponent"] = bound_exponent(targets[ti]);
        const double cref = rep.rows.front()[2] / rep.rows.front()[3];
        rep.fitted["c_ref"] = cref;
        bool envelope_ok = true;
        for (const auto& row : rep.rows)
            envelope_ok = envelope_ok && row[2] <= opt.envelope_factor * cref * row[3];
        rep.fitted["envelope_ok"] = envelope_ok ? 1.0 : 0.0;
        rep.pass = phat <= bound_exponent(targets[ti]) + opt.exponent_slack && envelope_ok;
    }
    return reports;
}

ProbeReport sigma_sweep_probe(GrowthTarget target, const Material& m, const BoundaryMesh& mesh,
                              double s_abs, int points) {
    ProbeReport rep;
    rep.name = "sigma_sweep_" + to_string(target);
    rep.columns = {"sigma", "norm"};
    const int n = mesh.dim + 1;
    Eigen::VectorXd wq(n * mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i)
        for (int c = 0; c < n; ++c) wq(n * i + c) = mesh.weights[i];
    std::vector<double> lx, ly;
    for (int j = 0; j < points; ++j) {
        const double sigma = std::pow(0.5, j) * 0.8;
        const double omega = std::sqrt(std::max(0.0, s_abs * s_abs - sigma * sigma));
        const cplx s(sigma, omega);
        const LaplacePoint sp = make_laplace_point(s);
        double norm;
        if (target == GrowthTarget::Vinv)
            norm = 1.0 /
                   weighted_bb_norm(assemble(OperatorKind::V, m, sp, mesh).entries, wq, true);
        else if (target == GrowthTarget::Winv)
            norm = 1.0 /
                   weighted_bb_norm(assemble(OperatorKind::W, m, sp, mesh).entries, wq, true);
        else
            norm = weighted_bb_norm(
                assemble(target == GrowthTarget::V ? OperatorKind::V : OperatorKind::W, m, sp,
                         mesh)
                    .entries,
                wq, false);
        rep.rows.push_back({sigma, norm});
        lx.push_back(std::log(sigma));
        ly.push_back(std::log(norm));
    }
    rep.fitted["fitted_sigma_exponent"] = fit_slope(lx, ly);
    rep.pass = true; // diagnostic sweep; only upper bounds are asserted
    return rep;
}

// --- norm equivalence ------------------------------------------------------------

ProbeReport norm_equivalence_probe(const Material& m, const std::vector<cplx>& s_grid,
                                   int n_fields, unsigned seed) {
    ProbeReport rep;
    rep.name = "norm_equivalence_ball";
    rep.seed = seed;
    rep.columns = {"field", "re_s", "im_s", "worst_violation"};
    EnergyNormEvaluator en(3, 0.0, 1.0, 14, 14);
    en.check_exactness();
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    struct TestField {
        EnergyNormEvaluator::Field fn;
    };
    std::vector<TestField> fields;
    // constant displacement (upper u-inequality is tight for sigma >= 1)
    fields.push_back({[](const Vec3&) {
        EnergyNormEvaluator::FieldValue f;
        f.value = {cplx(1, 0.5), cplx(-0.25, 0), cplx(0, 1), cplx(0)};
        return f;
    }});
    while (static_cast<int>(fields.size()) < n_fields) {
        // random low-degree polynomial field with analytic gradient
        std::array<std::array<cplx, 10>, 4> coef{};
        for (int c = 0; c < 4; ++c)
            for (int k = 0; k < 10; ++k) coef[c][k] = cplx(u(rng), u(rng));
        auto fn = [coef](const Vec3& p) {
            EnergyNormEvaluator::FieldValue f;
            const double x = p[0], y = p[1], z = p[2];
            const double mono[10] = {1, x, y, z, x * x, y * y, z * z, x * y, y * z, x * z};
            const double dmono[10][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                         {2 * x, 0, 0}, {0, 2 * y, 0}, {0, 0, 2 * z},
                                         {y, x, 0},  {0, z, y},  {z, 0, x}};
            for (int c = 0; c < 4; ++c) {
                f.value[c] = 0;
                for (int k = 0; k < 10; ++k) f.value[c] += coef[c][k] * mono[k];
                for (int l = 0; l < 3; ++l) {
                    f.gradient[c][l] = 0;
                    for (int k = 0; k < 10; ++k) f.gradient[c][l] += coef[c][k] * dmono[k][l];
                }
            }
            return f;
        };
        fields.push_back({fn});
    }

    bool all_ok = true;
    int idx = 0;
    for (const auto& tf : fields) {
        for (cplx s : s_grid) {
            const LaplacePoint sp = make_laplace_point(s);
            auto nn = en.norms(tf.fn, m, sp);
            const double su = sp.sigma_under, as = std::abs(s);
            const double slack = 1e-10;
            double worst = 0;
            auto check = [&](double lhs, double rhs) {
                const double scale = std::max({lhs, rhs, 1e-300});
                worst = std::max(worst, (lhs - rhs) / scale);
            };
            check(su * nn.u_1, nn.u_s * (1 + slack));
            check(nn.u_s, as / su * nn.u_1 * (1 + slack));
            check(std::sqrt(su) * nn.th_1, nn.th_s * (1 + slack));
            check(nn.th_s, std::sqrt(as / su) * nn.th_1 * (1 + slack));
            check(su * nn.pair_1, nn.pair_s * (1 + slack));
            check(nn.pair_s, as / std::pow(su, 1.5) * nn.pair_1 * (1 + slack));
            rep.rows.push_back({static_cast<double>(idx), s.real(), s.imag(), worst});
            all_ok = all_ok && worst <= 0;
        }
        ++idx;
    }

    // scalar facts over random s
    std::uniform_real_distribution<double> usig(0.01, 10.0), uom(-100.0, 100.0);
    bool scalars_ok = true;
    for (int t = 0; t < 1000; ++t) {
        const cplx s(usig(rng), uom(rng));
        const double su = std::min(1.0, s.real()), as = std::abs(s);
        scalars_ok = scalars_ok && su <= std::min(1.0, as) + 1e-15 &&
                     su * std::max(1.0, as) <= as * (1 + 1e-15);
    }
    rep.fitted["scalar_facts_ok"] = scalars_ok ? 1 : 0;

    // constant-field closed form
    {
        const LaplacePoint sp = make_laplace_point(cplx(2, 1));
        auto nn = en.norms(fields[0].fn, m, sp);
        const double vol = 4.0 / 3.0 * M_PI;
        const double want = std::sqrt(m.rho * std::norm(sp.s) * vol *
                                      (std::norm(cplx(1, 0.5)) + std::norm(cplx(-0.25, 0)) +
                                       std::norm(cplx(0, 1))));
        rep.fitted["const_field_rel_err"] = std::abs(nn.u_s - want) / want;
        all_ok = all_ok && rep.fitted["const_field_rel_err"] < 1e-12;
    }
    rep.pass = all_ok && scalars_ok;
    return rep;
}

// --- manufactured solves --------------------------------------------------------

std::array<cplx, 4> point_source_field(const KernelEvaluator& ev, const Vec3& x,
                                       const Vec3& source, const std::array<cplx, 4>& strength) {
    KernelMatrix e = ev.fundamental(x, source);
    std::array<cplx, 4> out{};
    for (int i = 0; i <= ev.dim(); ++i)
        for (int j = 0; j <= ev.dim(); ++j) out[i] += e(i, j) * strength[j];
    return out;
}

ProbeReport manufactured_probe(TDProblem problem, const Material& m, const BoundaryMesh& mesh,
                               cplx s, const ManufacturedOptions& opt) {
    ProbeReport rep;
    rep.name = std::string("manufactured_") +
               (problem == TDProblem::Dirichlet ? "dirichlet" : "neumann") +
               (mesh.dim == 2 ? "_2d" : "_3d");
    const int d = mesh.dim, n = d + 1;
    const LaplacePoint sp = make_laplace_point(s);
    KernelEvaluator ev(d, m, sp);

    // boundary data from the interior point source
    Density data;
    data.values.resize(n * mesh.size());
    if (problem == TDProblem::Dirichlet) {
        data.space = SpaceTag::PlusHalf;
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            auto f = point_source_field(ev, mesh.nodes[i], opt.source, opt.strength);
            for (int c = 0; c < n; ++c) data.values(n * i + c) = f[c];
        }
    } else {
        data.space = SpaceTag::MinusHalf;
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            KernelMatrix kp = ev.layer_kernel(KernelKind::KPrime, mesh.nodes[i], opt.source,
                                              mesh.normals[i], {0, 0, 0});
            for (int c = 0; c < n; ++c) {
                cplx g = 0;
                for (int j = 0; j < n; ++j) g += kp(c, j) * opt.strength[j];
                data.values(n * i + c) = g;
            }
        }
    }

    OperatorMatrix a = assemble(problem == TDProblem::Dirichlet ? OperatorKind::V
                                                                : OperatorKind::W,
                                m, sp, mesh);
    Density rhs = data;
    if (problem == TDProblem::Neumann) rhs.values = -rhs.values; // W phi = -g
    SolveResult sol = solve_boundary_system(a, rhs);

    // exterior probes
    const double R = mesh.radius > 0 ? mesh.radius : std::max(mesh.semi_a, mesh.semi_b);
    std::vector<Vec3> probes;
    for (int p = 0; p < opt.n_probes; ++p) {
        const double ang = 2 * M_PI * (p + 0.35) / opt.n_probes;
        if (d == 2)
            probes.push_back({opt.probe_radius_factor * R * std::cos(ang),
                              opt.probe_radius_factor * R * std::sin(ang), 0});
        else
            probes.push_back({opt.probe_radius_factor * R * std::cos(ang) * 0.8,
                              opt.probe_radius_factor * R * std::sin(ang) * 0.8,
                              opt.probe_radius_factor * R * 0.6 * (p % 2 ? 1 : -1)});
    }
    auto field = eval_potential(problem == TDProblem::Dirichlet ? PotentialKind::S
                                                                : PotentialKind::D,
                                m, sp, mesh, sol.solution, probes);
    rep.columns = {"probe", "rel_err"};
    double worst = 0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        auto exact = point_source_field(ev, probes[p], opt.source, opt.strength);
        double num = 0, den = 0;
        for (int c = 0; c < n; ++c) {
            num += std::norm(field[p].value[c] - exact[c]);
            den += std::norm(exact[c]);
        }
        const double rel = std::sqrt(num / den);
        rep.rows.push_back({static_cast<double>(p), rel});
        worst = std::max(worst, rel);
    }
    rep.fitted["max_rel_field_error"] = worst;
    rep.fitted["condition_estimate"] = sol.condition_estimate;
    // 3D: the 1e-2 target applies from refinement 3 up; coarser spheres get
    // a proportionally relaxed smoke tolerance
    double tol = problem == TDProblem::Dirichlet ? 1e-6 : 1e-3;
    if (d == 3) tol = 1e-2 * std::max(1.0, std::pow(2.0, 3.0 - mesh.resolution));
    rep.pass = worst <= tol;
    rep.fitted["tolerance"] = tol;
    return rep;
}

ProbeReport second_kind_cross_probe(const Material& m, const BoundaryMesh& mesh, cplx s) {
    ProbeReport rep;
    rep.name = "second_kind_cross_check";
    const int d = mesh.dim, n = d + 1;
    const LaplacePoint sp = make_laplace_point(s);
    KernelEvaluator ev(d, m, sp);
    const double R = mesh.radius;
    const Vec3 y0 = {1.5 * R, 0.2 * R, 0};
    const std::array<cplx, 4> c = {cplx(1, 0), cplx(0, 0.5), cplx(-0.5, 0.25), cplx(0)};

    Density f;
    f.space = SpaceTag::PlusHalf;
    f.values.resize(n * mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        auto v = point_source_field(ev, mesh.nodes[i], y0, c);
        for (int q = 0; q < n; ++q) f.values(n * i + q) = v[q];
    }

    // route 1: first kind, u = S V^{-1} f
    OperatorMatrix v = assemble(OperatorKind::V, m, sp, mesh);
    SolveResult r1 = solve_boundary_system(v, f);
    // route 2: second kind, u = D phi with (-1/2 I + K) phi = f
    OperatorMatrix k = assemble(OperatorKind::HalfMinusK, m, sp, mesh);
    SolveResult r2 = solve_boundary_system(k, f);

    std::vector<Vec3> probes;
    for (int p = 0; p < 5; ++p) {
        const double ang = 2 * M_PI * (p + 0.2) / 5;
        probes.push_back({0.4 * R * std::cos(ang), 0.4 * R * std::sin(ang), 0});
    }
    auto f1 = eval_potential(PotentialKind::S, m, sp, mesh, r1.solution, probes);
    auto f2 = eval_potential(PotentialKind::D, m, sp, mesh, r2.solution, probes);
    rep.columns = {"probe", "route_diff_rel", "route1_vs_exact", "route2_vs_exact"};
    double worst = 0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        auto exact = point_source_field(ev, probes[p], y0, c);
        double diff = 0, den = 0, e1 = 0, e2 = 0;
        for (int q = 0; q < n; ++q) {
            diff += std::norm(f1[p].value[q] - f2[p].value[q]);
            den += std::norm(exact[q]);
            e1 += std::norm(f1[p].value[q] - exact[q]);
            e2 += std::norm(f2[p].value[q] - exact[q]);
        }
        const double rd = std::sqrt(diff / den);
        rep.rows.push_back({static_cast<double>(p), rd, std::sqrt(e1 / den),
                            std::sqrt(e2 / den)});
        worst = std::max(worst, rd);
    }
    rep.fitted["max_route_difference"] = worst;
    rep.pass = worst <= 1e-3; // ten times the extrapolated second-kind tolerance
    return rep;
}

// --- time-domain envelope ---------------------------------------------------------

ProbeReport td_envelope_probe(const Material& m, const BoundaryMesh& mesh, double T,
                              int n_steps, double bound_upper_limit) {
    ProbeReport rep;
    rep.name = "td_envelope";
    const int d = mesh.dim, n = d + 1;
    TimeGrid grid = make_time_grid(T / n_steps, n_steps);
    CQConfig cfg;

    // causal boundary data: interior point-source spatial shape, polynomial
    // onset in time
    const Vec3 y0 = {0.3 * mesh.radius, 0.0, 0.0};
    const int onset = n_steps / 4;
    auto window = [&](double t) { return t > 0 ? std::pow(t, 6) * std::exp(-2.0 * t) : 0.0; };
    Eigen::VectorXcd shape(n * mesh.size());
    {
        KernelEvaluator ev(d, m, make_laplace_point(cplx(1.0, 0.0)));
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            auto v = point_source_field(ev, mesh.nodes[i], y0,
                                        {cplx(1), cplx(0.5), cplx(0), cplx(0.25)});
            for (int c = 0; c < n; ++c) shape(n * i + c) = v[c];
        }
    }
    Signal data = make_signal(n * static_cast<int>(mesh.size()), n_steps + 1, onset);
    for (int nt = onset; nt <= n_steps; ++nt)
        data.samples.col(nt) = shape * window((nt - onset) * grid.dt);

    std::vector<Vec3> probes = {{2.0 * mesh.radius, 0.3, 0}};
    TDSolveResult sol = cq_solve_bvp(TDProblem::Dirichlet, m, mesh, grid, cfg, data, probes);

    // causality is exact by construction; verify anyway
    double pre = 0, peak = 0, modulus = 0;
    for (int nt = 0; nt <= n_steps; ++nt) {
        const double mag = sol.density.samples.col(nt).norm();
        peak = std::max(peak, mag);
        if (nt < onset) pre = std::max(pre, mag);
        if (nt > 0)
            modulus = std::max(modulus,
                               (sol.density.samples.col(nt) - sol.density.samples.col(nt - 1))
                                   .norm());
    }

    // envelope fit for the density bound: c(t) = ||dens(t)|| / (C1(t) t max(1,t^5) I(t))
    // where I(t) integrates ||P2 F^{(4)}|| up to bound_upper_limit (0 = the
    // proposition's fixed upper limit 1, otherwise t itself)
    auto deriv = [&](int order, double t) {
        // derivatives of t^6 e^{-2t}
        double acc = 0;
        for (int j = 0; j <= std::min(order, 6); ++j) {
            double binom = 1;
            for (int q = 0; q < j; ++q) binom *= static_cast<double>(order - q) / (q + 1);
            double fall = 1;
            for (int q = 0; q < j; ++q) fall *= (6 - q);
            acc += binom * fall * std::pow(t, 6 - j) * std::pow(-2.0, order - j);
        }
        return acc * std::exp(-2.0 * t);
    };
    const double shape_norm = shape.norm();
    auto p2f4 = [&](double tau) {
        return shape_norm *
               std::abs(deriv(4, tau) + 2.0 * deriv(5, tau) + deriv(6, tau));
    };
    rep.columns = {"t", "density_norm", "bound_shape"};
    double cmax = 0;
    for (int nt = onset + 1; nt <= n_steps; ++nt) {
        const double t = (nt - onset) * grid.dt;
        const double upper = bound_upper_limit > 0 ? t : std::min(1.0, t);
        double integral = 0;
        const int nq = 64;
        for (int q = 0; q < nq; ++q) integral += p2f4(upper * (q + 0.5) / nq) * upper / nq;
        const double bound = c_eps(1.0, t) * 2.0 * t * std::max(1.0, std::pow(t, 5)) * integral;
        const double dn = sol.density.samples.col(nt).norm();
        rep.rows.push_back({t, dn, bound});
        if (bound > 0) cmax = std::max(cmax, dn / bound);
    }
    rep.fitted["pre_onset_over_peak"] = peak > 0 ? pre / peak : 0.0;
    rep.fitted["modulus_of_continuity"] = modulus;
    rep.fitted["fitted_envelope_constant"] = cmax;
    rep.pass = (peak == 0 || pre <= 1e-10 * peak) && std::isfinite(cmax);
    rep.notes.push_back("envelope constant is fitted, not a theoretical value");
    return rep;
}

} // namespace thermobem
