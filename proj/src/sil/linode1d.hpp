#pragma once
#include <vector>

#include "sil/profile1d.hpp"

namespace sil {

// Fredholm compatibility of a right-hand side against the profile kernel:
// value = int A . theta0' dz, compatible iff |value| <= tol ||A|| ||theta0'||.
struct Compatibility {
    double value = 0.0;
    double scale = 1.0; // ||A||_L2 ||theta0'||_L2
    bool compatible = false;
};
Compatibility check_compatibility(const std::vector<double>& A, const Profile1D& p, double tol);
Compatibility check_compatibility(const std::vector<std::vector<double>>& A, const Profile1D& p,
                                  double tol);

struct LinodeInfo {
    double residual = 0.0;        // interior FD residual of the solve
    double anchor_defect = 0.0;   // |w(0)| resp. |B u|
    double compat_value = 0.0;
    double kernel_lambda1 = 0.0;  // two smallest Neumann eigenvalues of the
    double kernel_lambda2 = 0.0;  // discrete operator (kernel diagnostics)
};

// Solve L0 w = A with Neumann truncation; the near-kernel is deflated with the
// measured kernel vector and the solution re-anchored so that w(0) = 0.
std::vector<double> solve_scalar_linode(const std::vector<double>& A, const Profile1D& p,
                                        LinodeInfo* info = nullptr, double compat_tol = 1e-7);

// Reusable pieces for many solves against the same profile.
struct ScalarLinodeWorkspace {
    std::vector<double> kernel; // measured, D-normalized, aligned with theta0'
    double lambda1 = 0, lambda2 = 0;
};
ScalarLinodeWorkspace make_scalar_linode_workspace(const Profile1D& p);
std::vector<double> solve_scalar_linode_ws(const std::vector<double>& A, const Profile1D& p,
                                           const ScalarLinodeWorkspace& ws,
                                           LinodeInfo* info = nullptr, double compat_tol = 1e-7);

enum class BFunctional { Midpoint, L2 };

// Vector analog: solve L0check u = A, normalized so that B u = 0.
std::vector<std::vector<double>> solve_vector_linode(const std::vector<std::vector<double>>& A,
                                                     const Profile1D& p,
                                                     BFunctional B = BFunctional::Midpoint,
                                                     LinodeInfo* info = nullptr,
                                                     double compat_tol = 1e-7);

struct KernelReport {
    int dim = 0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double threshold = 0.0;
};
// Number of eigenvalues of the truncated Neumann operator below the threshold
// (default 0.05 * smallest well-Hessian eigenvalue).
KernelReport kernel_dimension(const Profile1D& p, double threshold = -2.0);

// Discrete Neumann operator tooling shared with the spectral module.
// Builds the symmetrized tridiagonal (scalar) of -d^2/dz^2 + q(z) with
// mirrored-ghost Neumann ends on a uniform grid.
void neumann_symtri(const std::vector<double>& q, double h, std::vector<double>& diag,
                    std::vector<double>& off);

} // namespace sil
