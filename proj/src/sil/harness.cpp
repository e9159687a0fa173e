#include "sil/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"
#include "sil/errors.hpp"
#include "sil/pdesolver.hpp"
#include "sil/spectral2d.hpp"

namespace sil {

namespace {
double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}
} // namespace

InterfaceGraph initial_graph(const Config& cfg) {
    InterfaceGraph g;
    g.xgrid = Grid1D{0.0, 1.0, cfg.integer("mcf_nodes", 513)};
    g.gamma.resize(g.xgrid.n);
    const double base = cfg.num("gamma0_base", 0.5);
    const double amp = cfg.num("gamma0_amp", 0.1);
    const double mode = cfg.num("gamma0_mode", 1.0);
    for (int i = 0; i < g.xgrid.n; ++i)
        g.gamma[i] = base + amp * std::cos(mode * M_PI * g.xgrid.node(i));
    return g;
}

ScalarPotential potential_from_config(const Config& cfg) {
    const std::string name = cfg.str("potential", "quartic");
    if (name == "quartic") return make_quartic();
    if (name == "twowell_reduced" || name == "quartic_quarter")
        return make_polynomial({0.25, 0.0, -0.5, 0.0, 0.25}, 1.0);
    if (name == "polynomial") {
        auto c = cfg.list("potential_coeffs");
        require(!c.empty(), "BadInput", "polynomial potential needs potential_coeffs");
        return make_polynomial(c, cfg.num("potential_radius", 1.0));
    }
    throw Error("BadInput", "unknown potential " + name);
}

ConvergenceResult run_convergence(const Config& cfg) {
    ConvergenceResult res;
    res.M = cfg.integer("M", 2);
    res.vector_case = cfg.flag("vector", false);
    res.order_min = cfg.num("order_min", 2.0);
    auto eps_list = cfg.list("eps");
    if (eps_list.empty()) eps_list = {0.12, 0.085, 0.06};
    auto grid_list = cfg.list("grids");
    if (grid_list.empty()) grid_list = {256, 384, 512};
    require(grid_list.size() == eps_list.size(), "BadInput", "grids must match eps list");
    for (size_t i = 1; i < eps_list.size(); ++i)
        require(eps_list[i] < eps_list[i - 1], "BadInput", "eps list must decrease strictly");

    const double T = cfg.num("T", 0.01);
    const double delta = cfg.num("delta", 0.15);
    const int n_samples = cfg.integer("samples", 5);

    // vector case runs on the exact well-line reduction of the two-well W
    const ScalarPotential f = res.vector_case
                                  ? make_polynomial({0.25, 0.0, -0.5, 0.0, 0.25}, 1.0)
                                  : potential_from_config(cfg);
    const VectorPotential W = make_twowell();
    const Profile1D prof = solve_scalar_profile(f, 12.0, cfg.integer("profile_n", 16385));

    const InterfaceGraph g0 = initial_graph(cfg);
    const double dt_mcf = T / cfg.integer("mcf_steps", 1024);
    const McfTrajectory traj = mcf_evolve(g0, T, dt_mcf);

    for (size_t k = 0; k < eps_list.size(); ++k) {
        const double t0 = now_s();
        const double eps = eps_list[k];
        const int N = (int)grid_list[k];
        const int nx = N + 1, ny = N + 1;
        require(eps * N >= 8.0, "UnresolvedInterface",
                "fewer than 8 cells per eps at eps=" + std::to_string(eps));

        BuildOptions bo;
        bo.T = T;
        bo.n_times = n_samples;
        bo.field_nx = nx;
        bo.field_ny = ny;
        bo.s_nodes = cfg.integer("s_nodes", 65);
        ApproxSolution uA = build_uA(traj, eps, res.M, f, prof, delta, bo);
        res.h2_max = std::max(res.h2_max, uA.h2.h.empty() ? 0.0 : uA.h2.max_abs());

        EvolveConfig ec;
        ec.eps = eps;
        ec.T = T;
        ec.dt_safety = cfg.num("dt_safety", 0.05);
        ec.sample_times = uA.times;

        NormSet norms;
        if (!res.vector_case) {
            const auto u0 = uA.sample_grid(nx, ny, 0.0);
            const auto traj_u = ac_evolve(u0, nx, ny, f, ec);
            norms = difference_norms(traj_u.snapshots, traj_u.sample_times, nx, ny, 1, uA, delta);
        } else {
            const auto u0r = uA.sample_grid(nx, ny, 0.0);
            std::vector<double> u0(2 * u0r.size(), 0.0);
            std::copy(u0r.begin(), u0r.end(), u0.begin());
            const auto traj_u = vac_evolve(u0, nx, ny, 2, W, ec);
            norms = difference_norms(traj_u.snapshots, traj_u.sample_times, nx, ny, 2, uA, delta,
                                     {0.0, 0.0}, {1.0, 0.0});
        }
        res.rows.push_back(ConvRow{eps, norms, now_s() - t0});
    }

    std::vector<double> es, sup, tau;
    for (const auto& r : res.rows) {
        es.push_back(r.eps);
        sup.push_back(r.norms.sup_l2);
        tau.push_back(r.norms.grad_tau);
    }
    res.order_sup = fit_order_report(es, sup);
    res.order_tau = fit_order_report(es, tau);
    res.monotone = true;
    for (size_t i = 1; i < res.rows.size(); ++i) {
        const auto& a = res.rows[i - 1].norms;
        const auto& b = res.rows[i].norms;
        if (!(b.sup_l2 <= a.sup_l2 && b.grad_off <= a.grad_off && b.grad_tau <= a.grad_tau &&
              b.eps_grad_n <= a.eps_grad_n))
            res.monotone = false;
    }
    res.pass = res.monotone && res.order_sup.order >= res.order_min &&
               res.order_tau.order >= res.order_min;
    return res;
}

SpectralSweepResult run_spectral_sweep(const Config& cfg) {
    SpectralSweepResult res;
    const ScalarPotential f = potential_from_config(cfg);
    const Profile1D prof = solve_scalar_profile(f, 12.0, cfg.integer("profile_n", 16385));
    auto eps_list = cfg.list("eps");
    if (eps_list.empty()) eps_list = {0.1, 0.07, 0.05};
    const double dt = cfg.num("delta_tilde", 1.0);

    // unperturbed sweep
    double l2min = 1e300, l2max = -1e300;
    std::vector<double> l1abs;
    for (double eps : eps_list) {
        const auto rep = eig_unperturbed(f, prof, eps, dt);
        res.unpert.push_back({eps, rep.lambda1, rep.lambda2, rep.psi_defect});
        l2min = std::min(l2min, rep.lambda2);
        l2max = std::max(l2max, rep.lambda2);
        l1abs.push_back(std::abs(rep.lambda1));
    }
    res.nu1 = l2min;
    res.lambda2_spread = l2max - l2min;
    res.worst_ratio = 0;
    for (size_t i = 1; i < l1abs.size(); ++i)
        res.worst_ratio = std::max(res.worst_ratio, l1abs[i] / std::max(l1abs[i - 1], 1e-300));
    res.pass_unpert = res.lambda2_spread < 0.1 && res.worst_ratio < 0.05;

    // perturbed sweep with the default weight J = 1 + r/4
    WeightSpec w;
    w.J = [](double r) { return 1.0 + 0.25 * r; };
    std::vector<double> es, l1;
    for (double eps : eps_list) {
        const auto rep = eig_perturbed(f, prof, eps, dt, w, PerturbationSpec{});
        res.pert.push_back({eps, rep.lambda1, rep.lambda2, rep.psi_defect});
        es.push_back(eps);
        l1.push_back(std::max(std::abs(rep.lambda1), 1e-300));
    }
    res.pert_slope = fit_order_report(es, l1);
    res.nu2 = nu2_from_nu1(f, res.nu1);
    bool l2ok = true;
    for (const auto& r : res.pert) l2ok = l2ok && r.lambda2 >= res.nu2;
    res.pass_pert = res.pert_slope.order >= 1.8 && l2ok;

    // vector analogs
    if (cfg.flag("vector", true)) {
        const VectorPotential W = make_twowell();
        const Profile1D vprof = solve_vector_profile(W, 12.0, cfg.integer("vprofile_n", 4097));
        res.kernel_dim = kernel_dimension(vprof).dim;
        std::vector<double> vl1;
        for (double eps : eps_list) {
            const auto rep = eig_vector(W, vprof, eps, dt, w);
            res.vect.push_back({eps, rep.lambda1, rep.lambda2, rep.psi_defect});
            vl1.push_back(std::max(std::abs(rep.lambda1), 1e-300));
        }
        res.vect_slope = fit_order_report(es, vl1);
        res.pass_vect = res.kernel_dim == 1 && res.vect_slope.order >= 1.8;
    } else {
        res.pass_vect = true;
    }

    // 2D floor probe on built approximate-solution fields
    if (cfg.flag("floor2d", false)) {
        auto feps = cfg.list("floor_eps");
        if (feps.empty()) feps = {0.1, 0.05, 0.025};
        const int N = cfg.integer("floor_grid", 192);
        const double T = cfg.num("T", 0.01);
        const double delta = cfg.num("delta", 0.15);
        const InterfaceGraph g0 = initial_graph(cfg);
        const McfTrajectory traj = mcf_evolve(g0, T, T / 512);
        const double cap = cfg.num("floor_cap", 10.0);
        bool ok = true;
        for (double eps : feps) {
            BuildOptions bo;
            bo.T = T;
            bo.n_times = 3;
            ApproxSolution uA = build_uA(traj, eps, cfg.integer("floor_M", 2), f, prof, delta, bo);
            const int nx = N + 1, ny = N + 1;
            const auto field = uA.sample_grid(nx, ny, 0.5 * T);
            std::vector<double> q(field.size());
            for (size_t p = 0; p < field.size(); ++p) q[p] = f.d2(field[p]) / (eps * eps);
            const auto fl = rayleigh_floor_2d(q, nx, ny, 1.0 / N, 1.0 / N);
            res.floor2d.push_back({eps, fl.lambda_min, fl.residual});
            ok = ok && std::abs(fl.lambda_min) <= cap;
        }
        res.pass_floor = ok;
    } else {
        res.pass_floor = true;
    }

    res.pass = res.pass_unpert && res.pass_pert && res.pass_vect && res.pass_floor;
    return res;
}

bool emit_convergence(const ConvergenceResult& r, const Config& cfg, const std::string& outdir) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : r.rows)
        rows.push_back({row.eps, row.norms.sup_l2, row.norms.grad_off, row.norms.grad_tau,
                        row.norms.eps_grad_n, row.runtime_s});
    write_csv(outdir + "/converge.csv",
              {"eps", "sup_l2", "grad_off", "grad_tau", "eps_grad_n", "runtime_s"}, rows);
    nlohmann::json j;
    j["experiment"] = "converge";
    j["pass"] = r.pass;
    j["M"] = r.M;
    j["vector"] = r.vector_case;
    j["fitted_orders"] = {{"sup_l2", r.order_sup.order},
                          {"sup_l2_residual", r.order_sup.residual},
                          {"grad_tau", r.order_tau.order},
                          {"grad_tau_residual", r.order_tau.residual}};
    j["thresholds"] = {{"order_min", r.order_min}};
    j["monotone"] = r.monotone;
    j["h2_max"] = r.h2_max;
    j["run_id"] = cfg.run_id();
    write_text(outdir + "/converge.json", j.dump(2) + "\n");
    return r.pass;
}

bool emit_spectral(const SpectralSweepResult& r, const Config& cfg, const std::string& outdir) {
    auto dump_rows = [&](const std::vector<SpectralRow>& v, const std::string& name) {
        if (v.empty()) return;
        std::vector<std::vector<double>> rows;
        for (const auto& row : v)
            rows.push_back({row.eps, row.lambda1, row.lambda2, row.psi_defect});
        write_csv(outdir + "/" + name, {"eps", "lambda1", "lambda2", "psi_defect"}, rows);
    };
    dump_rows(r.unpert, "spectrum1d.csv");
    dump_rows(r.pert, "spectrum1d_perturbed.csv");
    dump_rows(r.vect, "spectrum1d_vector.csv");
    if (!r.floor2d.empty()) {
        std::vector<std::vector<double>> rows;
        for (const auto& row : r.floor2d) rows.push_back({row[0], row[1], row[2]});
        write_csv(outdir + "/spectrum2d.csv", {"eps", "lambda_min", "residual"}, rows);
    }
    nlohmann::json j;
    j["experiment"] = "spectrum";
    j["pass"] = r.pass;
    j["nu1"] = r.nu1;
    j["nu2"] = r.nu2;
    j["lambda2_spread"] = r.lambda2_spread;
    j["lambda1_ratio_worst"] = r.worst_ratio;
    j["pert_slope"] = r.pert_slope.order;
    j["vect_slope"] = r.vect_slope.order;
    j["kernel_dim"] = r.kernel_dim;
    j["checks"] = {{"unpert", r.pass_unpert},
                   {"pert", r.pass_pert},
                   {"vector", r.pass_vect},
                   {"floor2d", r.pass_floor}};
    j["run_id"] = cfg.run_id();
    write_text(outdir + "/spectrum.json", j.dump(2) + "\n");
    return r.pass;
}

ConvergenceResult merge_convergence_csv(const std::vector<std::string>& paths) {
    require(!paths.empty(), "IoError", "no reports to merge");
    ConvergenceResult res;
    for (const auto& p : paths) {
        std::vector<std::string> cols;
        std::vector<std::vector<double>> rows;
        require(read_csv(p, cols, rows), "IoError", "cannot read " + p);
        require(cols.size() >= 6 && cols[0] == "eps", "IoError", "unexpected schema in " + p);
        for (const auto& row : rows) {
            ConvRow cr;
            cr.eps = row[0];
            cr.norms.sup_l2 = row[1];
            cr.norms.grad_off = row[2];
            cr.norms.grad_tau = row[3];
            cr.norms.eps_grad_n = row[4];
            cr.runtime_s = row[5];
            res.rows.push_back(cr);
        }
    }
    std::sort(res.rows.begin(), res.rows.end(),
              [](const ConvRow& a, const ConvRow& b) { return a.eps > b.eps; });
    res.rows.erase(std::unique(res.rows.begin(), res.rows.end(),
                               [](const ConvRow& a, const ConvRow& b) { return a.eps == b.eps; }),
                   res.rows.end());
    require(res.rows.size() >= 3, "BadFit", "merged report needs >= 3 distinct eps");
    std::vector<double> es, sup, tau;
    for (const auto& r : res.rows) {
        es.push_back(r.eps);
        sup.push_back(r.norms.sup_l2);
        tau.push_back(r.norms.grad_tau);
    }
    res.order_sup = fit_order_report(es, sup);
    res.order_tau = fit_order_report(es, tau);
    return res;
}

} // namespace sil
