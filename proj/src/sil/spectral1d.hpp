#pragma once
#include <functional>
#include <vector>

#include "sil/profile1d.hpp"

namespace sil {

// Weight/perturbation specification for the interval operators
//   L_eps = -J_eps^{-1} d/dz (J_eps d/dz) + f''(phi_eps(eps .))
// on I = (-dt/eps, dt/eps) with Neumann closure, where
//   phi_eps(r) = theta0(r/eps) + eps p_eps theta1(r/eps) + eps^2 q_eps(r).
struct WeightSpec {
    std::function<double(double)> J = [](double) { return 1.0; };   // J(r) on [-delta,delta]
    std::function<double(double)> h = [](double) { return 0.0; };   // h_eps(r); enters r_eps
};

struct PerturbationSpec {
    double p_eps = 0.0;
    std::function<double(double)> theta1 = [](double) { return 0.0; }; // theta1(rho)
    std::function<double(double)> q_eps = [](double) { return 0.0; };  // q_eps(r)
};

struct SpectrumReport {
    double eps = 0, delta_tilde = 1;
    double lambda1 = 0, lambda2 = 0;         // Richardson-extrapolated
    double lambda1_raw = 0, lambda2_raw = 0; // finest raw values
    Grid1D grid;                             // finest grid used
    std::vector<double> psi1;                // ground eigenfunction (finest, m*n)
    double beta_eps = 0;                     // ||theta0'||_{L2(I)}^{-1}
    double psi_defect = 0;  // ||Psi1 - J(0)^{-1/2} beta_eps theta0'||_J
    double dpsi_defect = 0; // same for the derivative
    double min_psi1 = 0;    // min of the (sign-fixed) ground state
    int sign_c = 1;         // sign selector applied to Psi1
    int n = 0;              // finest grid size
    double residual1 = 0;   // ||(L - lambda1) Psi1||_J
};

// Scalar eigensolve; the unperturbed operator is the trivial-spec case.
SpectrumReport eig_perturbed(const ScalarPotential& f, const Profile1D& p, double eps,
                             double delta_tilde, const WeightSpec& w, const PerturbationSpec& pert,
                             int n_base = 0);
SpectrumReport eig_unperturbed(const ScalarPotential& f, const Profile1D& p, double eps,
                               double delta_tilde, int n_base = 0);

// Vector analog with the D^2 W(phi_eps) block potential.
SpectrumReport eig_vector(const VectorPotential& W, const Profile1D& p, double eps,
                          double delta_tilde, const WeightSpec& w, int n_base = 0);

// nu2 = min{nu1/2, min f''(+-1)/4} given a measured nu1.
double nu2_from_nu1(const ScalarPotential& f, double nu1);

} // namespace sil
