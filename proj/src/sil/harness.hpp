#pragma once
#include <array>
#include <string>
#include <vector>

#include "sil/approx.hpp"
#include "sil/report.hpp"
#include "sil/spectral1d.hpp"

namespace sil {

struct ConvRow {
    double eps = 0;
    NormSet norms;
    double runtime_s = 0;
};

struct ConvergenceResult {
    int M = 2;
    bool vector_case = false;
    std::vector<ConvRow> rows;
    OrderFit order_sup, order_tau;
    bool monotone = true;
    bool pass = false;
    double h2_max = 0;
    double order_min = 2.0;
};

ConvergenceResult run_convergence(const Config& cfg);

struct SpectralRow {
    double eps = 0, lambda1 = 0, lambda2 = 0, psi_defect = 0;
};

struct SpectralSweepResult {
    std::vector<SpectralRow> unpert, pert, vect;
    double nu1 = 0, nu2 = 0;
    OrderFit pert_slope, vect_slope;
    int kernel_dim = 1;
    double lambda2_spread = 0;
    double worst_ratio = 0; // successive |lambda1| ratios (unperturbed)
    std::vector<std::array<double, 3>> floor2d; // {eps, lambda_min, residual}
    bool pass = false;
    bool pass_unpert = false, pass_pert = false, pass_vect = false, pass_floor = false;
};

SpectralSweepResult run_spectral_sweep(const Config& cfg);

// emit_report: deterministic CSV + JSON summary; returns overall pass.
bool emit_convergence(const ConvergenceResult& r, const Config& cfg, const std::string& outdir);
bool emit_spectral(const SpectralSweepResult& r, const Config& cfg, const std::string& outdir);

// Merge convergence CSVs (union of eps rows) and refit the orders.
ConvergenceResult merge_convergence_csv(const std::vector<std::string>& paths);

// Shared builders.
InterfaceGraph initial_graph(const Config& cfg);
ScalarPotential potential_from_config(const Config& cfg);

} // namespace sil
