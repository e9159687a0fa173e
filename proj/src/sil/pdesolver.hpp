#pragma once
#include <vector>

#include "sil/potentials.hpp"

namespace sil {

enum class Scheme { SemiImplicit, Explicit };

struct EvolveConfig {
    double eps = 0.1;
    double dt = 0.0; // 0: pick dt = safety * eps^2 / max|f''| (and <= h^2/4 if explicit)
    double dt_safety = 0.2;
    double T = 0.01;
    Scheme scheme = Scheme::SemiImplicit;
    std::vector<double> sample_times; // empty: {0, T}
};

struct Instrumentation {
    std::vector<double> t, energy, supnorm;
    double neumann_defect = 0.0; // mirrored-ghost normal quotient (0 by construction)
};

struct Trajectory {
    int nx = 0, ny = 0, m = 1;
    double hx = 0, hy = 0, eps = 0, dt = 0;
    std::vector<double> sample_times;
    std::vector<std::vector<double>> snapshots; // per sample, planar components
    Instrumentation instr;

    const std::vector<double>& at(int k) const { return snapshots[k]; }
};

// Scalar Allen-Cahn on [0,1]^2 with homogeneous Neumann walls; u0 node-major.
Trajectory ac_evolve(const std::vector<double>& u0, int nx, int ny, const ScalarPotential& f,
                     const EvolveConfig& cfg);

// Vector variant; u0 planar per component (size m*nx*ny).
Trajectory vac_evolve(const std::vector<double>& u0, int nx, int ny, int m,
                      const VectorPotential& W, const EvolveConfig& cfg);

struct BoundsReport {
    double bound = 0;        // max{R0, ||u0||_inf}
    double worst_excess = 0; // max over samples of (sup|u| - bound)
    bool pass = false;
};
BoundsReport bounds_check(const Trajectory& traj, const std::vector<double>& u0, double R0,
                          double slack = 1e-10);

// Scheme-consistent discrete energy (trapezoid nodes, edge-midpoint gradient).
double discrete_energy(const std::vector<double>& u, int nx, int ny, double hx, double hy,
                       double eps, const ScalarPotential& f);
double discrete_energy_vec(const std::vector<double>& u, int nx, int ny, int m, double hx,
                           double hy, double eps, const VectorPotential& W);

// Mirrored-ghost 5-point Neumann Laplacian (shared stencil of the solvers).
std::vector<double> apply_neumann_laplacian(const std::vector<double>& u, int nx, int ny,
                                            double hx, double hy);

} // namespace sil
