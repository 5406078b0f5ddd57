#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "thermobem/errors.hpp"
#include "thermobem/io.hpp"
#include "thermobem/material.hpp"
#include "thermobem/operators.hpp"
#include "thermobem/parallel.hpp"
#include "thermobem/potentials.hpp"
#include "thermobem/tdcq.hpp"
#include "thermobem/verify.hpp"
#include "json.hpp"

using namespace thermobem;

namespace {

Vec3 parse_point(const std::string& text, int dim) {
    Vec3 p{};
    std::istringstream in(text);
    std::string cell;
    int c = 0;
    while (std::getline(in, cell, ',') && c < 3) p[c++] = std::stod(cell);
    if (c < dim) throw UsageError("point \"" + text + "\" needs " + std::to_string(dim) +
                                  " coordinates");
    return p;
}

std::array<cplx, 4> parse_strength(const std::string& text) {
    std::array<cplx, 4> s{};
    std::istringstream in(text);
    std::string cell;
    int c = 0;
    while (std::getline(in, cell, ';') && c < 4) s[c++] = parse_complex(cell);
    return s;
}

std::string kernel_matrix_json(const KernelMatrix& k) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i <= k.dim; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j <= k.dim; ++j) row.push_back({k(i, j).real(), k(i, j).imag()});
        rows.push_back(row);
    }
    return rows.dump();
}

std::string field_csv(const std::vector<FieldSample>& fields, int dim) {
    std::ostringstream os;
    os << "x,y";
    if (dim == 3) os << ",z";
    for (int c = 0; c <= dim; ++c) os << ",re" << c << ",im" << c;
    os << "\n";
    for (const auto& f : fields) {
        os << format_g17(f.point[0]) << "," << format_g17(f.point[1]);
        if (dim == 3) os << "," << format_g17(f.point[2]);
        for (int c = 0; c <= dim; ++c)
            os << "," << format_g17(f.value[c].real()) << "," << format_g17(f.value[c].imag());
        os << "\n";
    }
    return os.str();
}

void write_report(const ProbeReport& rep, const std::string& outdir) {
    if (outdir.empty()) {
        std::cout << report_to_json(rep) << "\n";
        return;
    }
    std::filesystem::create_directories(outdir);
    write_file(outdir + "/" + rep.name + ".json", report_to_json(rep));
    write_file(outdir + "/" + rep.name + ".csv", report_to_csv(rep));
    std::cout << rep.name << ": " << (rep.pass ? "pass" : "FAIL") << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplace-domain boundary integral solver for linear thermoelasticity "
                 "with convolution-quadrature time stepping"};
    app.require_subcommand(1);
    int threads = 0;
    unsigned seed = 1234;
    app.add_option("--threads", threads, "worker thread cap (default: machine cores)");
    app.add_option("--seed", seed, "seed recorded in outputs and used by probes");

    // mesh make
    auto* mesh_cmd = app.add_subcommand("mesh", "mesh operations");
    auto* mesh_make = mesh_cmd->add_subcommand("make", "generate a boundary mesh");
    std::string shape = "circle", mesh_out;
    double radius = 1.0, semi_a = 2.0, semi_b = 1.0;
    int resolution = 32;
    mesh_make->add_option("shape", shape, "circle | ellipse | sphere")->required();
    mesh_make->add_option("--radius", radius, "circle/sphere radius");
    mesh_make->add_option("--a", semi_a, "ellipse semi-axis a");
    mesh_make->add_option("--b", semi_b, "ellipse semi-axis b");
    mesh_make->add_option("--n", resolution, "resolution (2D: N, sphere: refinement)");
    mesh_make->add_option("--out", mesh_out, "output mesh JSON")->required();

    // kernel eval / residual
    auto* kernel_cmd = app.add_subcommand("kernel", "pointwise kernel operations");
    auto* kernel_eval = kernel_cmd->add_subcommand("eval", "evaluate a kernel matrix");
    int kdim = 3;
    std::string mat_path, s_text = "1", x_text, y_text, kkind = "E", nx_text = "1,0,0",
                ny_text = "1,0,0";
    kernel_eval->add_option("--dim", kdim, "2 or 3");
    kernel_eval->add_option("--config", mat_path, "material JSON")->required();
    kernel_eval->add_option("--s", s_text, "Laplace parameter, e.g. 2+1i");
    kernel_eval->add_option("--x", x_text, "target point x1,x2[,x3]")->required();
    kernel_eval->add_option("--y", y_text, "source point")->required();
    kernel_eval->add_option("--kind", kkind, "E | EADJ | DL | KPRIME | QDN | QND");
    kernel_eval->add_option("--nx", nx_text, "normal at x (KPRIME)");
    kernel_eval->add_option("--ny", ny_text, "normal at y (DL/QDN/QND)");

    auto* kernel_res = kernel_cmd->add_subcommand("residual", "finite-difference PDE residual");
    int rdim = 3, rsamples = 20;
    std::string rmat, rs = "1.5+2i";
    bool radjoint = false;
    kernel_res->add_option("--dim", rdim, "2 or 3");
    kernel_res->add_option("--config", rmat, "material JSON")->required();
    kernel_res->add_option("--s", rs, "Laplace parameter");
    kernel_res->add_option("--samples", rsamples, "number of sample points");
    kernel_res->add_flag("--adjoint", radjoint, "probe B* on the transposed kernel");

    // assemble
    auto* asm_cmd = app.add_subcommand("assemble", "assemble a boundary operator");
    std::string akind = "V", amat, amesh, aout, as_text = "1";
    asm_cmd->add_option("--kind", akind,
                        "V|K|KPRIME|W|HALF_PLUS_K|HALF_MINUS_K|HALF_PLUS_KP|HALF_MINUS_KP");
    asm_cmd->add_option("--config", amat, "material JSON")->required();
    asm_cmd->add_option("--mesh", amesh, "mesh JSON")->required();
    asm_cmd->add_option("--s", as_text, "Laplace parameter");
    asm_cmd->add_option("--out", aout, "output operator JSON")->required();

    // solve laplace / td
    auto* solve_cmd = app.add_subcommand("solve", "boundary value solves");
    auto* solve_lap = solve_cmd->add_subcommand("laplace", "fixed-frequency solve");
    std::string lproblem = "dirichlet", lmat, lmesh, ls_text = "1", lout = "solution",
                lsource = "0.3,0", lstrength = "1;0.5;0.5i;0.25", ldata;
    std::vector<std::string> lprobes;
    solve_lap->add_option("--problem", lproblem, "dirichlet | neumann");
    solve_lap->add_option("--config", lmat, "material JSON")->required();
    solve_lap->add_option("--mesh", lmesh, "mesh JSON")->required();
    solve_lap->add_option("--s", ls_text, "Laplace parameter");
    solve_lap->add_option("--data", ldata, "density JSON with boundary data (default: "
                                           "manufactured point-source data)");
    solve_lap->add_option("--source", lsource, "manufactured source point");
    solve_lap->add_option("--strength", lstrength, "source strength c0;c1;...");
    solve_lap->add_option("--probe", lprobes, "field evaluation point (repeatable)");
    solve_lap->add_option("--out-prefix", lout, "output prefix");

    auto* solve_td = solve_cmd->add_subcommand("td", "time-domain CQ solve");
    std::string tproblem = "dirichlet", tmat, tmesh, tdata, tout = "td", tscheme = "bdf2",
                ttimecfg;
    double tdt = 0.1;
    int tsteps = 64, toversample = 0;
    std::vector<std::string> tprobes;
    solve_td->add_option("--problem", tproblem, "dirichlet | neumann");
    solve_td->add_option("--config", tmat, "material JSON")->required();
    solve_td->add_option("--mesh", tmesh, "mesh JSON")->required();
    solve_td->add_option("--data", tdata, "boundary data signal CSV")->required();
    solve_td->add_option("--time-config", ttimecfg,
                         "JSON {\"scheme\":...,\"dt\":...,\"n_steps\":...}");
    solve_td->add_option("--dt", tdt, "time step");
    solve_td->add_option("--steps", tsteps, "number of steps");
    solve_td->add_option("--scheme", tscheme, "bdf1 | bdf2");
    solve_td->add_option("--oversampling", toversample, "CQ frequency count (0 = auto)");
    solve_td->add_option("--probe", tprobes, "field probe point (repeatable)");
    solve_td->add_option("--out-prefix", tout, "output prefix");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "numerical verification probes");
    std::string vwhich = "all", vmat, vmesh, vout;
    verify_cmd->add_option("which", vwhich,
                           "dispersion|jumps|coercivity|growth|normequiv|manufactured|all")
        ->required();
    verify_cmd->add_option("--config", vmat, "material JSON")->required();
    verify_cmd->add_option("--mesh", vmesh, "mesh JSON (for coercivity/growth/manufactured)");
    verify_cmd->add_option("--out", vout, "report output directory");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) thread_cap() = threads;

    try {
        if (*mesh_make) {
            BoundaryMesh m;
            if (shape == "circle")
                m = make_circle(radius, resolution);
            else if (shape == "ellipse")
                m = make_ellipse(semi_a, semi_b, resolution);
            else if (shape == "sphere")
                m = make_sphere(radius, resolution);
            else
                throw UsageError("unknown shape \"" + shape + "\"");
            write_file(mesh_out, mesh_to_json(m));
            double sum = 0;
            for (double w : m.weights) sum += w;
            std::cout << "nodes " << m.size() << ", sum of weights " << format_g17(sum) << "\n";
            return 0;
        }
        if (*kernel_eval) {
            Material mt = material_from_json(read_file(mat_path));
            KernelEvaluator ev(kdim, mt, make_laplace_point(parse_complex(s_text)));
            const Vec3 x = parse_point(x_text, kdim), y = parse_point(y_text, kdim);
            KernelMatrix k;
            if (kkind == "E")
                k = ev.fundamental(x, y);
            else if (kkind == "EADJ")
                k = ev.adjoint_fundamental(x, y);
            else {
                KernelKind kk;
                if (kkind == "DL")
                    kk = KernelKind::DL;
                else if (kkind == "KPRIME")
                    kk = KernelKind::KPrime;
                else if (kkind == "QDN")
                    kk = KernelKind::QDN;
                else if (kkind == "QND")
                    kk = KernelKind::QND;
                else
                    throw UsageError("unknown kernel kind \"" + kkind + "\"");
                k = ev.layer_kernel(kk, x, y, parse_point(nx_text, kdim),
                                    parse_point(ny_text, kdim));
            }
            std::cout << kernel_matrix_json(k) << "\n";
            return 0;
        }
        if (*kernel_res) {
            Material mt = material_from_json(read_file(rmat));
            ProbeReport rep = pde_residual_probe(
                rdim, mt, parse_complex(rs),
                radjoint ? ResidualKind::Adjoint : ResidualKind::Fundamental, rsamples, seed);
            std::cout << report_to_json(rep) << "\n";
            return rep.pass ? 0 : 2;
        }
        if (*asm_cmd) {
            Material mt = material_from_json(read_file(amat));
            BoundaryMesh mesh = mesh_from_json(read_file(amesh));
            OperatorMatrix op = assemble(operator_kind_from_string(akind), mt,
                                         make_laplace_point(parse_complex(as_text)), mesh);
            write_file(aout, operator_to_json(op));
            std::cout << to_string(op.kind) << " " << op.entries.rows() << "x"
                      << op.entries.cols() << " written to " << aout << "\n";
            return 0;
        }
        if (*solve_lap) {
            Material mt = material_from_json(read_file(lmat));
            BoundaryMesh mesh = mesh_from_json(read_file(lmesh));
            const LaplacePoint sp = make_laplace_point(parse_complex(ls_text));
            const int n = mesh.dim + 1;
            const TDProblem prob =
                lproblem == "dirichlet" ? TDProblem::Dirichlet : TDProblem::Neumann;
            KernelEvaluator ev(mesh.dim, mt, sp);
            Density data;
            if (!ldata.empty()) {
                data = density_from_json(read_file(ldata));
            } else {
                const Vec3 src = parse_point(lsource, mesh.dim);
                const auto c = parse_strength(lstrength);
                data.space = prob == TDProblem::Dirichlet ? SpaceTag::PlusHalf
                                                          : SpaceTag::MinusHalf;
                data.values.resize(n * mesh.size());
                for (std::size_t i = 0; i < mesh.size(); ++i) {
                    if (prob == TDProblem::Dirichlet) {
                        auto f = point_source_field(ev, mesh.nodes[i], src, c);
                        for (int q = 0; q < n; ++q) data.values(n * i + q) = f[q];
                    } else {
                        KernelMatrix kp = ev.layer_kernel(KernelKind::KPrime, mesh.nodes[i],
                                                          src, mesh.normals[i], {0, 0, 0});
                        for (int q = 0; q < n; ++q) {
                            cplx g = 0;
                            for (int j = 0; j < n; ++j) g += kp(q, j) * c[j];
                            data.values(n * i + q) = g;
                        }
                    }
                }
            }
            OperatorMatrix a = assemble(
                prob == TDProblem::Dirichlet ? OperatorKind::V : OperatorKind::W, mt, sp, mesh);
            Density rhs = data;
            if (prob == TDProblem::Neumann) rhs.values = -rhs.values;
            SolveResult sol = solve_boundary_system(a, rhs);
            write_file(lout + "_density.json", density_to_json(sol.solution));
            if (!lprobes.empty()) {
                std::vector<Vec3> pts;
                for (const auto& p : lprobes) pts.push_back(parse_point(p, mesh.dim));
                auto fields = eval_potential(
                    prob == TDProblem::Dirichlet ? PotentialKind::S : PotentialKind::D, mt, sp,
                    mesh, sol.solution, pts);
                write_file(lout + "_field.csv", field_csv(fields, mesh.dim));
            }
            std::cout << "condition estimate " << format_g17(sol.condition_estimate) << "\n";
            return 0;
        }
        if (*solve_td) {
            Material mt = material_from_json(read_file(tmat));
            BoundaryMesh mesh = mesh_from_json(read_file(tmesh));
            Signal data = signal_from_csv(read_file(tdata));
            if (!ttimecfg.empty()) {
                nlohmann::json tc = nlohmann::json::parse(read_file(ttimecfg));
                tscheme = tc.value("scheme", tscheme);
                tdt = tc.value("dt", tdt);
                tsteps = tc.value("n_steps", tsteps);
            }
            TimeGrid grid = make_time_grid(tdt, tsteps);
            if (data.steps() != tsteps + 1)
                throw UsageError("data rows do not match --steps + 1");
            CQConfig cfg;
            cfg.scheme = cq_scheme_from_string(tscheme);
            cfg.oversampling = toversample;
            std::vector<Vec3> pts;
            for (const auto& p : tprobes) pts.push_back(parse_point(p, mesh.dim));
            TDSolveResult sol = cq_solve_bvp(
                tproblem == "dirichlet" ? TDProblem::Dirichlet : TDProblem::Neumann, mt, mesh,
                grid, cfg, data, pts);
            write_file(tout + "_density.csv", signal_to_csv(sol.density, grid));
            if (!pts.empty()) write_file(tout + "_field.csv", signal_to_csv(sol.field, grid));
            std::cout << "time-domain solve complete, onset step " << sol.density.onset << "\n";
            return 0;
        }
        if (*verify_cmd) {
            Material mt = material_from_json(read_file(vmat));
            BoundaryMesh mesh =
                vmesh.empty() ? make_circle(1.0, 32) : mesh_from_json(read_file(vmesh));
            bool all_pass = true;
            auto run = [&](const ProbeReport& rep) {
                write_report(rep, vout);
                all_pass = all_pass && rep.pass;
            };
            const bool all = vwhich == "all";
            if (all || vwhich == "dispersion") run(dispersion_probe(1000, seed));
            if (all || vwhich == "jumps") run(jump_probe(mt, cplx(2, 1), {32, 64, 128}));
            if (all || vwhich == "coercivity") {
                std::vector<cplx> grid;
                for (double sg : {0.5, 1.0, 2.0})
                    for (double om : {0.0, 1.0, 10.0, 50.0}) grid.push_back({sg, om});
                run(coercivity_probe(mt, mesh, grid));
            }
            if (all || vwhich == "growth") {
                const std::vector<GrowthTarget> targets = {
                    GrowthTarget::V,    GrowthTarget::Vinv,  GrowthTarget::S,
                    GrowthTarget::D,    GrowthTarget::W,     GrowthTarget::Winv,
                    GrowthTarget::SVinv, GrowthTarget::DWinv};
                for (const auto& rep : growth_sweep(targets, mt, mesh)) run(rep);
            }
            if (all || vwhich == "normequiv") {
                std::vector<cplx> grid;
                for (double sg : {0.5, 1.0, 2.0})
                    for (double om : {0.0, 1.0, 10.0}) grid.push_back({sg, om});
                run(norm_equivalence_probe(mt, grid, 20, seed));
            }
            if (all || vwhich == "manufactured") {
                run(manufactured_probe(TDProblem::Dirichlet, mt, mesh, cplx(2, 1)));
                if (mesh.dim == 2)
                    run(manufactured_probe(TDProblem::Neumann, mt, mesh, cplx(2, 1)));
                if (mesh.dim == 2) run(second_kind_cross_probe(mt, mesh, cplx(2, 1)));
            }
            return all_pass ? 0 : 2;
        }
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const ConstraintViolation& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const TagMismatch& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}
