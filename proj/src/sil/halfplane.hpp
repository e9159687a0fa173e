#pragma once
#include <functional>
#include <vector>

#include "sil/profile1d.hpp"

namespace sil {

// Truncated model problem on [-LR,LR] x [0,LH]:
//   [-Laplace + f''(theta0(R))] u = G,   -dH u|_{H=0} = g,
// Dirichlet 0 on the three far edges. Vector case uses the Hessian block
// D^2 W(theta0(R)).
struct HalfPlaneProblem {
    Grid1D gridR, gridH; // gridH.a == 0
    int m = 1;
    bool vector = false;

    std::vector<double> theta0p; // theta0'(R_i), component-major: [c*nR + i]
    std::vector<double> qblock;  // potential blocks: [i*m*m + c*m + c2]
    std::vector<double> G;       // [(j*nR + i)*m + c]
    std::vector<double> g;       // [i*m + c]
    double d1 = 0;               // ||theta0'||_{L2(R-grid)}^2

    double edge_data_G = 0, edge_data_g = 0; // max |data| on truncation edges

    int nR() const { return gridR.n; }
    int nH() const { return gridH.n; }
};

HalfPlaneProblem make_halfplane_problem(
    const Profile1D& prof, double LR, double LH, int nR, int nH,
    const std::function<double(double, double)>& Gfn, const std::function<double(double)>& gfn);

HalfPlaneProblem make_halfplane_problem_vec(
    const Profile1D& prof, double LR, double LH, int nR, int nH,
    const std::function<std::vector<double>(double, double)>& Gfn,
    const std::function<std::vector<double>(double)>& gfn);

struct HPCompatibility {
    double value = 0, scale = 1;
    bool compatible = false;
};
HPCompatibility compatibility(const HalfPlaneProblem& prob, double tol = 1e-4);

struct HPDecomposition {
    std::vector<double> G_tilde; // (G(.,H), theta0') per H-node [j*m... scalar: nH]
    double g_par_coef = 0;       // (g, theta0')
    std::vector<double> G_par, G_perp; // same layout as prob.G
    std::vector<double> g_par, g_perp; // same layout as prob.g
    double max_perp_projection = 0;    // max_H |(G_perp(.,H), theta0')|
};
HPDecomposition decompose(const HalfPlaneProblem& prob);

struct HalfPlaneSolution {
    std::vector<double> u; // full grid incl. boundary nodes, [(j*nR+i)*m+c]
    double interior_residual = 0; // discrete-system residual max-norm
    double flux_error = 0;        // one-sided 2nd-order check of -dH u = g
    double compat_value = 0, compat_scale = 0;
    double defect_discrete = 0; // <v0, b>_D, v0 = measured kernel mode
    double mu = 0;              // deflation multiplier
    double kernel_rq = 0;       // Rayleigh quotient of v0
    double rcond = 0;           // reciprocal condition estimate of the system
    double gamma_star = 0;      // measured H-decay rate of u on the upper half
    bool deflated = false;
    std::vector<double> kernel_mode; // full-grid embedding of v0
};

// Closed-form parallel solve via nested quadrature with exponential tail
// extrapolation; data must be parallel (G = Gtilde(H) theta0'/d1 type).
HalfPlaneSolution solve_parallel(const HalfPlaneProblem& prob, double compat_tol = 1e-4);

struct HPSolveOptions {
    double compat_tol = 1e-4;
    double cond_cap = 1e12;
    bool deflate_incompatible = false; // diagnostic path instead of throwing
};
HalfPlaneSolution solve_full(const HalfPlaneProblem& prob, const HPSolveOptions& opt = {});

} // namespace sil
