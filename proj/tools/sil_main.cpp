// sil: command-line driver for the sharp-interface laboratory.
#include <cmath>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sil/approx.hpp"
#include "sil/errors.hpp"
#include "sil/halfplane.hpp"
#include "sil/harness.hpp"
#include "sil/pdesolver.hpp"
#include "sil/report.hpp"
#include "sil/spectral2d.hpp"

using namespace sil;
using nlohmann::json;

namespace {

Config load_cfg(const std::string& path) {
    return path.empty() ? Config{} : Config::load(path);
}

int cmd_profile(const Config& cfg, const std::string& out) {
    const bool vec = cfg.flag("vector", false);
    const double L = cfg.num("L", 12.0);
    std::vector<std::vector<double>> rows;
    json j;
    if (!vec) {
        const auto f = potential_from_config(cfg);
        const auto p = solve_scalar_profile(f, L, cfg.integer("n", 16385));
        for (int i = 0; i < p.grid.n; ++i)
            rows.push_back({p.grid.node(i), p.comp[0][i], p.dcomp[0][i]});
        write_csv(out + "/profile.csv", {"z", "theta0", "dtheta0"}, rows);
        for (int k = 1; k <= 6; ++k) j["d" + std::to_string(k)] = p.d[k];
        j["beta"] = p.beta;
        j["residual"] = p.ode_residual;
    } else {
        const auto W = make_twowell();
        const auto p = solve_vector_profile(W, L, cfg.integer("n", 4097));
        for (int i = 0; i < p.grid.n; ++i)
            rows.push_back({p.grid.node(i), p.comp[0][i], p.comp[1][i], p.dcomp[0][i],
                            p.dcomp[1][i]});
        write_csv(out + "/profile.csv", {"z", "theta1", "theta2", "dtheta1", "dtheta2"}, rows);
        for (int k = 1; k <= 6; ++k) j["d" + std::to_string(k)] = p.d[k];
        j["beta"] = p.beta;
        j["residual"] = p.ode_residual;
        j["energy"] = p.energy;
    }
    j["run_id"] = cfg.run_id();
    write_text(out + "/profile.json", j.dump(2) + "\n");
    return 0;
}

int cmd_linode(const Config& cfg, const std::string& out) {
    const auto f = potential_from_config(cfg);
    const auto p = solve_scalar_profile(f, cfg.num("L", 12.0), cfg.integer("n", 16385));
    const std::string which = cfg.str("A", "theta0pp");
    std::vector<double> A(p.grid.n);
    for (int i = 0; i < p.grid.n; ++i) {
        const double z = p.grid.node(i);
        if (which == "theta0pp")
            A[i] = p.f.d1(p.comp[0][i]);
        else if (which == "theta0p")
            A[i] = p.dcomp[0][i];
        else if (which == "gauss")
            A[i] = p.dcomp[0][i] * std::exp(-z * z);
        else
            A[i] = 0.0;
    }
    json j;
    const auto comp = check_compatibility(A, p, cfg.num("tol", 1e-7));
    j["compat_value"] = comp.value;
    j["compatible"] = comp.compatible;
    if (comp.compatible) {
        LinodeInfo info;
        const auto w = solve_scalar_linode(A, p, &info);
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < p.grid.n; ++i) rows.push_back({p.grid.node(i), A[i], w[i]});
        write_csv(out + "/linode.csv", {"z", "A", "w"}, rows);
        j["residual"] = info.residual;
        j["anchor_defect"] = info.anchor_defect;
        j["kernel_lambda1"] = info.kernel_lambda1;
        j["kernel_lambda2"] = info.kernel_lambda2;
    }
    j["run_id"] = cfg.run_id();
    write_text(out + "/linode.json", j.dump(2) + "\n");
    return comp.compatible || which == "theta0p" ? 0 : 1;
}

int cmd_halfplane(const Config& cfg, const std::string& out) {
    const auto f = potential_from_config(cfg);
    const auto p = solve_scalar_profile(f, cfg.num("L", 12.0), 16385);
    const double LR = cfg.num("LR", 9.0), LH = cfg.num("LH", 18.0);
    const int nR = cfg.integer("nR", 129), nH = cfg.integer("nH", 129);
    const std::string preset = cfg.str("preset", "manufactured");
    std::function<double(double, double)> Gfn = [&](double R, double H) {
        return -std::exp(-H) * p.theta_d1(R);
    };
    std::function<double(double)> gfn = [&](double R) { return p.theta_d1(R); };
    if (preset == "incompatible") Gfn = [](double, double) { return 0.0; };
    const auto prob = make_halfplane_problem(p, LR, LH, nR, nH, Gfn, gfn);
    json j;
    const auto comp = compatibility(prob);
    j["compat_value"] = comp.value;
    j["compatible"] = comp.compatible;
    HPSolveOptions so;
    so.deflate_incompatible = true;
    const auto sol = solve_full(prob, so);
    j["flux_error"] = sol.flux_error;
    j["interior_residual"] = sol.interior_residual;
    j["gamma_star"] = sol.gamma_star;
    j["kernel_rq"] = sol.kernel_rq;
    j["deflated"] = sol.deflated;
    j["defect_discrete"] = sol.defect_discrete;
    if (preset == "manufactured") {
        double err = 0;
        for (int jj = 0; jj < nH; ++jj)
            for (int i = 0; i < nR; ++i)
                err = std::max(err, std::abs(sol.u[(size_t)jj * nR + i] -
                                             std::exp(-prob.gridH.node(jj)) *
                                                 p.theta_d1(prob.gridR.node(i))));
        j["manufactured_sup_error"] = err;
    }
    std::vector<std::vector<double>> rows;
    for (int jj = 0; jj < nH; ++jj)
        for (int i = 0; i < nR; ++i)
            rows.push_back({prob.gridR.node(i), prob.gridH.node(jj), sol.u[(size_t)jj * nR + i]});
    write_csv(out + "/halfplane.csv", {"R", "H", "u"}, rows);
    j["run_id"] = cfg.run_id();
    write_text(out + "/halfplane.json", j.dump(2) + "\n");
    return 0;
}

int cmd_mcf(const Config& cfg, const std::string& out) {
    const auto g0 = initial_graph(cfg);
    const double T = cfg.num("T", 0.05);
    const auto traj = mcf_evolve(g0, T, cfg.num("dt", T / 1024));
    std::vector<std::vector<double>> rows;
    const int nsamp = cfg.integer("samples", 6);
    for (int k = 0; k < nsamp; ++k) {
        const double t = T * k / (nsamp - 1);
        const auto g = traj.at_time(t);
        for (int i = 0; i < g.xgrid.n; ++i)
            rows.push_back({g.t, g.xgrid.node(i), g.gamma[i]});
    }
    write_csv(out + "/mcf.csv", {"t", "x", "gamma"}, rows);
    const auto fr = build_frame(traj, 0.5 * T, cfg.num("delta", 0.15), cfg.num("eps", 0.1));
    const auto diag = coordinate_diagnostics(fr);
    json j;
    j["V_vs_H"] = diag.max_V_vs_H;
    j["H_vs_graph"] = diag.max_H_vs_graph;
    j["eikonal"] = diag.max_eikonal;
    j["split_defect"] = diag.max_split_defect;
    j["run_id"] = cfg.run_id();
    write_text(out + "/mcf.json", j.dump(2) + "\n");
    return 0;
}

int cmd_evolve(const Config& cfg, const std::string& out) {
    const auto f = potential_from_config(cfg);
    const double eps = cfg.num("eps", 0.1), T = cfg.num("T", 0.01);
    const int N = cfg.integer("grid", 256);
    const int nx = N + 1, ny = N + 1;
    const auto g0 = initial_graph(cfg);
    const auto traj = mcf_evolve(g0, T, T / 512);
    const auto prof = solve_scalar_profile(f, 12.0, 8193);
    BuildOptions bo;
    bo.T = T;
    bo.n_times = 3;
    const auto uA = build_uA(traj, eps, cfg.integer("M", 0), f, prof, cfg.num("delta", 0.15), bo);
    const auto u0 = uA.sample_grid(nx, ny, 0.0);
    EvolveConfig ec;
    ec.eps = eps;
    ec.T = T;
    ec.scheme = cfg.str("scheme", "semi") == "explicit" ? Scheme::Explicit : Scheme::SemiImplicit;
    const auto tr = ac_evolve(u0, nx, ny, f, ec);
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < tr.instr.t.size(); ++k)
        rows.push_back({tr.instr.t[k], tr.instr.energy[k], tr.instr.supnorm[k]});
    write_csv(out + "/evolve_instr.csv", {"t", "energy", "supnorm"}, rows);
    // final snapshot
    std::vector<std::vector<double>> snap;
    const auto& uf = tr.snapshots.back();
    for (int jj = 0; jj < ny; ++jj)
        for (int i = 0; i < nx; ++i)
            snap.push_back({i * tr.hx, jj * tr.hy, uf[(size_t)jj * nx + i]});
    write_csv(out + "/evolve_final.csv", {"x", "y", "u"}, snap);
    const auto br = bounds_check(tr, u0, f.radial_radius);
    bool energy_ok = true;
    for (size_t k = 1; k < tr.instr.energy.size(); ++k)
        if (tr.instr.energy[k] > tr.instr.energy[k - 1] + 1e-10 * tr.instr.energy[0])
            energy_ok = false;
    json j;
    j["energy_monotone"] = energy_ok;
    j["bound"] = br.bound;
    j["bound_excess"] = br.worst_excess;
    j["neumann_defect"] = tr.instr.neumann_defect;
    j["run_id"] = cfg.run_id();
    write_text(out + "/evolve.json", j.dump(2) + "\n");
    return energy_ok && br.pass ? 0 : 1;
}

int cmd_approx(const Config& cfg, const std::string& out) {
    const auto f = potential_from_config(cfg);
    const double eps = cfg.num("eps", 0.1), T = cfg.num("T", 0.01);
    const auto g0 = initial_graph(cfg);
    const auto traj = mcf_evolve(g0, T, T / 512);
    const auto prof = solve_scalar_profile(f, 12.0, 16385);
    BuildOptions bo;
    bo.T = T;
    bo.n_times = cfg.integer("samples", 5);
    const auto uA =
        build_uA(traj, eps, cfg.integer("M", 2), f, prof, cfg.num("delta", 0.15), bo);
    const auto rep = remainder_report(uA);
    json j;
    j["C_fit"] = rep.C_fit;
    j["max_rA"] = rep.max_rA;
    j["max_sA"] = rep.max_sA;
    j["c_rate"] = rep.c_rate;
    j["far_field_max"] = rep.far_field_max;
    j["compat_worst"] = uA.compat_worst;
    j["wall_nr_worst"] = uA.wall_nr_worst;
    j["zero_level_distance"] = zero_level_distance(uA, 0.5 * T);
    j["h2_max"] = uA.h2.h.empty() ? 0.0 : uA.h2.max_abs();
    const int N = cfg.integer("grid", 128);
    const auto field = uA.sample_grid(N + 1, N + 1, 0.5 * T);
    std::vector<std::vector<double>> rows;
    for (int jj = 0; jj <= N; ++jj)
        for (int i = 0; i <= N; ++i)
            rows.push_back({(double)i / N, (double)jj / N, field[(size_t)jj * (N + 1) + i]});
    write_csv(out + "/approx_field.csv", {"x", "y", "uA"}, rows);
    j["run_id"] = cfg.run_id();
    write_text(out + "/approx.json", j.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sharp-interface limit laboratory"};
    app.require_subcommand(1);
    std::string config_path, outdir = ".";
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--out", outdir, "output directory");

    auto* profile = app.add_subcommand("profile", "transition profile and moments");
    auto* linode = app.add_subcommand("linode", "linearized profile ODE solve");
    auto* halfplane = app.add_subcommand("halfplane", "half-plane model problem");
    auto* spectrum1d = app.add_subcommand("spectrum1d", "1D spectral sweeps");
    auto* spectrum2d = app.add_subcommand("spectrum2d", "2D spectral floor probe");
    auto* mcf = app.add_subcommand("mcf", "mean curvature flow of the graph");
    auto* evolve = app.add_subcommand("evolve", "Allen-Cahn evolution");
    auto* approx = app.add_subcommand("approx", "approximate solution and remainder");
    auto* converge = app.add_subcommand("converge", "convergence study");
    auto* report = app.add_subcommand("report", "merge convergence reports");
    std::vector<std::string> merge_paths;
    report->add_option("files", merge_paths, "converge.csv files to merge");

    CLI11_PARSE(app, argc, argv);

    try {
        const Config cfg = load_cfg(config_path);
        if (profile->parsed()) return cmd_profile(cfg, outdir);
        if (linode->parsed()) return cmd_linode(cfg, outdir);
        if (halfplane->parsed()) return cmd_halfplane(cfg, outdir);
        if (spectrum1d->parsed()) {
            Config c2 = cfg;
            c2.kv["floor2d"] = "0";
            const auto r = run_spectral_sweep(c2);
            return emit_spectral(r, c2, outdir) ? 0 : 1;
        }
        if (spectrum2d->parsed()) {
            Config c2 = cfg;
            c2.kv["floor2d"] = "1";
            const auto r = run_spectral_sweep(c2);
            return emit_spectral(r, c2, outdir) ? 0 : 1;
        }
        if (mcf->parsed()) return cmd_mcf(cfg, outdir);
        if (evolve->parsed()) return cmd_evolve(cfg, outdir);
        if (approx->parsed()) return cmd_approx(cfg, outdir);
        if (converge->parsed()) {
            const auto r = run_convergence(cfg);
            return emit_convergence(r, cfg, outdir) ? 0 : 1;
        }
        if (report->parsed()) {
            const auto r = merge_convergence_csv(merge_paths);
            json j;
            j["experiment"] = "report_merge";
            j["order_sup"] = r.order_sup.order;
            j["order_tau"] = r.order_tau.order;
            j["rows"] = r.rows.size();
            write_text(outdir + "/report_merged.json", j.dump(2) + "\n");
            std::vector<std::vector<double>> rows;
            for (const auto& row : r.rows)
                rows.push_back({row.eps, row.norms.sup_l2, row.norms.grad_off,
                                row.norms.grad_tau, row.norms.eps_grad_n, row.runtime_s});
            write_csv(outdir + "/converge_merged.csv",
                      {"eps", "sup_l2", "grad_off", "grad_tau", "eps_grad_n", "runtime_s"}, rows);
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
