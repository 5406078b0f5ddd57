#include "thermobem/tdcq.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>

#include "thermobem/errors.hpp"
#include "thermobem/fft.hpp"
#include "thermobem/io.hpp"
#include "thermobem/parallel.hpp"
#include "thermobem/potentials.hpp"

namespace thermobem {

TimeGrid make_time_grid(double dt, int n_steps) {
    if (!(dt > 0) || n_steps < 1) throw DomainError("time grid needs dt > 0 and n_steps >= 1");
    return TimeGrid{dt, n_steps};
}

CQScheme cq_scheme_from_string(const std::string& name) {
    if (name == "bdf1" || name == "BDF1") return CQScheme::BDF1;
    if (name == "bdf2" || name == "BDF2") return CQScheme::BDF2;
    throw UsageError("unknown CQ scheme \"" + name + "\"");
}

Signal make_signal(int channels, int n_samples, int onset) {
    Signal s;
    s.samples = Eigen::MatrixXcd::Zero(channels, n_samples);
    s.onset = onset;
    return s;
}

cplx cq_delta(CQScheme scheme, cplx zeta) {
    const cplx omz = 1.0 - zeta;
    return scheme == CQScheme::BDF1 ? omz : omz + 0.5 * omz * omz;
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

struct ContourSetup {
    std::size_t big_l;
    double rho;
};

ContourSetup contour_setup(const CQConfig& cfg, int active_steps) {
    ContourSetup c;
    const std::size_t want = cfg.oversampling > 0
                                 ? static_cast<std::size_t>(cfg.oversampling)
                                 : 8 * static_cast<std::size_t>(active_steps + 1);
    c.big_l = next_pow2(
        std::max<std::size_t>({want, static_cast<std::size_t>(active_steps + 1), 64}));
    c.rho = cfg.contour_radius > 0
                ? cfg.contour_radius
                : std::pow(cfg.alias_target, 1.0 / static_cast<double>(c.big_l));
    if (!(c.rho > 0) || !(c.rho < 1)) throw DomainError("contour radius must lie in (0,1)");
    return c;
}

void check_causal(const Signal& data) {
    for (int n = 0; n < std::min(data.onset, data.steps()); ++n)
        if (data.samples.col(n).norm() != 0.0)
            throw DomainError("signal has nonzero samples before its onset");
}

std::vector<LaplacePoint> contour_nodes(const TimeGrid& grid, CQScheme scheme,
                                        const ContourSetup& c) {
    std::vector<LaplacePoint> nodes;
    nodes.reserve(c.big_l);
    // the forward FFT pairs sample m with e^{-2 pi i m l/L}, so the contour
    // is traversed clockwise: zeta_l = rho e^{-2 pi i l/L}
    for (std::size_t l = 0; l < c.big_l; ++l) {
        const double ang = -2.0 * M_PI * static_cast<double>(l) / static_cast<double>(c.big_l);
        const cplx zeta = c.rho * cplx(std::cos(ang), std::sin(ang));
        nodes.push_back(make_laplace_point(cq_delta(scheme, zeta) / grid.dt));
    }
    return nodes;
}

} // namespace

std::vector<LaplacePoint> cq_nodes(const TimeGrid& grid, const CQConfig& cfg) {
    return contour_nodes(grid, cfg.scheme, contour_setup(cfg, grid.n_steps));
}

Signal cq_convolve(const MatrixSymbol& symbol, int out_channels, const TimeGrid& grid,
                   const CQConfig& cfg, const Signal& data) {
    check_causal(data);
    const int nt = data.steps();
    const int n0 = std::min(data.onset, nt);
    const int active = nt - n0;
    Signal out = make_signal(out_channels, nt, n0);
    if (active <= 0) return out;

    const ContourSetup c = contour_setup(cfg, active);
    const std::size_t L = c.big_l;
    const double rho = c.rho;
    const int channels = data.channels();

    std::vector<std::vector<cplx>> dhat(channels, std::vector<cplx>(L, cplx(0)));
    for (int ch = 0; ch < channels; ++ch) {
        double damp = 1.0;
        for (int mq = 0; mq < active; ++mq) {
            dhat[ch][mq] = data.samples(ch, n0 + mq) * damp;
            damp *= rho;
        }
        fft_pow2(dhat[ch], false);
    }

    std::vector<LaplacePoint> nodes = contour_nodes(grid, cfg.scheme, c);
    std::vector<std::vector<cplx>> yhat(out_channels, std::vector<cplx>(L));
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    parallel_for(L, [&](std::size_t l) {
        if (failed.load()) return;
        try {
            Eigen::VectorXcd din(channels);
            for (int ch = 0; ch < channels; ++ch) din(ch) = dhat[ch][l];
            Eigen::MatrixXcd a = symbol(nodes[l], static_cast<int>(l));
            if (a.rows() != out_channels || a.cols() != channels)
                throw SymbolEvaluationFailed("symbol shape mismatch");
            Eigen::VectorXcd y = a * din;
            for (int ch = 0; ch < out_channels; ++ch) yhat[ch][l] = y(ch);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            failed = true;
            failure = std::string("node ") + std::to_string(l) + ": " + e.what();
        }
    });
    if (failed) throw SymbolEvaluationFailed(failure);

    for (int ch = 0; ch < out_channels; ++ch) {
        fft_pow2(yhat[ch], true);
        double damp = 1.0;
        for (int mq = 0; mq < active; ++mq) {
            out.samples(ch, n0 + mq) = yhat[ch][mq] / damp;
            damp *= rho;
        }
    }
    return out;
}

Signal cq_convolve_scalar(const std::function<cplx(const LaplacePoint&)>& symbol,
                          const TimeGrid& grid, const CQConfig& cfg, const Signal& data) {
    MatrixSymbol ms = [&](const LaplacePoint& s, int) {
        Eigen::MatrixXcd a(1, 1);
        a(0, 0) = symbol(s);
        return a;
    };
    return cq_convolve(ms, 1, grid, cfg, data);
}

TDSolveResult cq_solve_bvp(TDProblem problem, const Material& m, const BoundaryMesh& mesh,
                           const TimeGrid& grid, const CQConfig& cfg, const Signal& data,
                           const std::vector<Vec3>& probes) {
    check_causal(data);
    const int d = mesh.dim, n = d + 1;
    const int mdof = n * static_cast<int>(mesh.size());
    if (data.channels() != mdof) throw TagMismatch("boundary data channels do not match mesh");
    const int nt = data.steps();
    const int n0 = std::min(data.onset, nt);
    const int active = nt - n0;
    TDSolveResult res;
    res.density = make_signal(mdof, nt, n0);
    res.field = make_signal(n * static_cast<int>(probes.size()), nt, n0);
    if (active <= 0) return res;

    const ContourSetup c = contour_setup(cfg, active);
    const std::size_t L = c.big_l;
    const double rho = c.rho;

    std::vector<std::vector<cplx>> dhat(mdof, std::vector<cplx>(L, cplx(0)));
    for (int ch = 0; ch < mdof; ++ch) {
        double damp = 1.0;
        for (int mq = 0; mq < active; ++mq) {
            dhat[ch][mq] = data.samples(ch, n0 + mq) * damp;
            damp *= rho;
        }
        fft_pow2(dhat[ch], false);
    }
    const bool real_data = data.samples.imag().cwiseAbs().maxCoeff() == 0.0;

    const int pdof = n * static_cast<int>(probes.size());
    std::vector<std::vector<cplx>> denshat(mdof, std::vector<cplx>(L));
    std::vector<std::vector<cplx>> fieldhat(pdof, std::vector<cplx>(L));

    const std::size_t l_max = real_data ? L / 2 : L - 1;
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    parallel_for(l_max + 1, [&](std::size_t l) {
        if (failed.load()) return;
        try {
            const double ang = -2.0 * M_PI * static_cast<double>(l) / static_cast<double>(L);
            const cplx zeta = rho * cplx(std::cos(ang), std::sin(ang));
            const LaplacePoint sl = make_laplace_point(cq_delta(cfg.scheme, zeta) / grid.dt);

            const OperatorKind kind =
                problem == TDProblem::Dirichlet ? OperatorKind::V : OperatorKind::W;
            OperatorMatrix a = assemble(kind, m, sl, mesh);
            Eigen::VectorXcd rhs(mdof);
            for (int ch = 0; ch < mdof; ++ch) rhs(ch) = dhat[ch][l];
            // traction trace of D is -W phi, so Neumann data g solves W phi = -g
            if (problem == TDProblem::Neumann) rhs = -rhs;
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a.entries);
            Eigen::VectorXcd dens = lu.solve(rhs);

            KernelEvaluator ev(d, m, sl);
            const PotentialKind pk =
                problem == TDProblem::Dirichlet ? PotentialKind::S : PotentialKind::D;
            Eigen::VectorXcd field = potential_value_matrix(ev, pk, mesh, probes) * dens;

            for (int ch = 0; ch < mdof; ++ch) denshat[ch][l] = dens(ch);
            for (int ch = 0; ch < pdof; ++ch) fieldhat[ch][l] = field(ch);
            if (real_data && l > 0 && 2 * l != L) {
                for (int ch = 0; ch < mdof; ++ch) denshat[ch][L - l] = std::conj(dens(ch));
                for (int ch = 0; ch < pdof; ++ch) fieldhat[ch][L - l] = std::conj(field(ch));
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            failed = true;
            failure = std::string("frequency ") + std::to_string(l) + ": " + e.what();
        }
    });
    if (failed) throw SymbolEvaluationFailed(failure);

    auto back = [&](std::vector<std::vector<cplx>>& hat, Signal& sig) {
        for (std::size_t ch = 0; ch < hat.size(); ++ch) {
            fft_pow2(hat[ch], true);
            double damp = 1.0;
            for (int mq = 0; mq < active; ++mq) {
                sig.samples(static_cast<int>(ch), n0 + mq) = hat[ch][mq] / damp;
                damp *= rho;
            }
        }
    };
    back(denshat, res.density);
    back(fieldhat, res.field);
    return res;
}

std::vector<double> p2_signal(const std::function<double(double)>& g,
                              const std::function<double(double)>& gdot,
                              const std::function<double(double)>& gddot,
                              const std::vector<double>& times) {
    std::vector<double> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        out[i] = g(times[i]) + 2.0 * gdot(times[i]) + gddot(times[i]);
    return out;
}

namespace {

// not-a-knot cubic spline: returns second derivatives at the nodes
std::vector<double> spline_second_derivatives(const std::vector<double>& y, double h) {
    const int n = static_cast<int>(y.size());
    if (n < 4) throw DomainError("spline differentiation needs at least 4 samples");
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    mat(0, 0) = 1;
    mat(0, 1) = -2;
    mat(0, 2) = 1;
    for (int i = 1; i < n - 1; ++i) {
        mat(i, i - 1) = 1;
        mat(i, i) = 4;
        mat(i, i + 1) = 1;
        rhs(i) = 6.0 * (y[i - 1] - 2 * y[i] + y[i + 1]) / (h * h);
    }
    mat(n - 1, n - 3) = 1;
    mat(n - 1, n - 2) = -2;
    mat(n - 1, n - 1) = 1;
    Eigen::VectorXd sol = mat.partialPivLu().solve(rhs);
    return std::vector<double>(sol.data(), sol.data() + n);
}

} // namespace

std::vector<double> p2_signal_sampled(const std::vector<double>& samples, double dt) {
    const int n = static_cast<int>(samples.size());
    std::vector<double> m2 = spline_second_derivatives(samples, dt);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double d1;
        if (i < n - 1)
            d1 = (samples[i + 1] - samples[i]) / dt - dt / 6.0 * (2 * m2[i] + m2[i + 1]);
        else
            d1 = (samples[i] - samples[i - 1]) / dt + dt / 6.0 * (2 * m2[i] + m2[i - 1]);
        out[i] = samples[i] + 2.0 * d1 + m2[i];
    }
    return out;
}

double c_eps(double eps, double t) {
    if (!(eps > 0.0) || eps > 1.0 || t < 0.0)
        throw DomainError("c_eps needs eps in (0,1] and t >= 0");
    const double ratio = std::tgamma(eps / 2.0) / std::tgamma((eps + 1.0) / 2.0);
    return 0.5 / std::sqrt(M_PI) * ratio * std::pow(t / (1.0 + t), eps);
}

std::string signal_to_csv(const Signal& s, const TimeGrid& grid) {
    std::ostringstream os;
    os << "t";
    for (int ch = 0; ch < s.channels(); ++ch) os << ",re" << ch << ",im" << ch;
    os << "\n";
    for (int nstep = 0; nstep < s.steps(); ++nstep) {
        os << format_g17(grid.dt * nstep);
        for (int ch = 0; ch < s.channels(); ++ch)
            os << "," << format_g17(s.samples(ch, nstep).real()) << ","
               << format_g17(s.samples(ch, nstep).imag());
        os << "\n";
    }
    return os.str();
}

Signal signal_from_csv(const std::string& text, int* n_steps_out, double* dt_out) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw UsageError("empty signal CSV");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    if (rows.empty()) throw UsageError("signal CSV has no data rows");
    const int cols = static_cast<int>(rows[0].size());
    if (cols < 3 || (cols - 1) % 2 != 0) throw UsageError("signal CSV needs t,re,im columns");
    const int channels = (cols - 1) / 2;
    Signal s = make_signal(channels, static_cast<int>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int ch = 0; ch < channels; ++ch)
            s.samples(ch, static_cast<int>(r)) = cplx(rows[r][1 + 2 * ch], rows[r][2 + 2 * ch]);
    s.onset = s.steps();
    for (int nstep = 0; nstep < s.steps(); ++nstep)
        if (s.samples.col(nstep).norm() != 0.0) {
            s.onset = nstep;
            break;
        }
    if (n_steps_out) *n_steps_out = static_cast<int>(rows.size()) - 1;
    if (dt_out && rows.size() > 1) *dt_out = rows[1][0] - rows[0][0];
    return s;
}

} // namespace thermobem
