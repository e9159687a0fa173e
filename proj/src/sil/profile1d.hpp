#pragma once
#include <array>
#include <vector>

#include "sil/grid.hpp"
#include "sil/potentials.hpp"

namespace sil {

// Transition profile connecting the wells, sampled on a symmetric grid.
// Scalar profiles keep the exact ODE identities available through the
// potential: theta' = sqrt(2(f(theta)-f(-1))), theta'' = f'(theta).
struct Profile1D {
    Grid1D grid;
    int m = 1; // 1 = scalar
    bool is_vector = false;
    std::vector<std::vector<double>> comp;  // per-component values
    std::vector<std::vector<double>> dcomp; // per-component derivative samples

    std::array<double, 7> d{}; // moments d1..d6 live in d[1]..d[6]
    double beta = 0.0;         // fitted tail decay rate
    double beta_fit_residual = 0.0;
    double ode_residual = 0.0; // max interior FD residual of the profile ODE
    double energy = 0.0;       // discrete 1D energy (vector minimizer)

    ScalarPotential f;
    VectorPotential W;

    // Clamped evaluation: exact well values outside [-L, L].
    double theta(double z) const;
    double theta_d1(double z) const; // via the first-order ODE identity
    double theta_d2(double z) const; // via f'(theta)
    std::vector<double> vtheta(double z) const;
    std::vector<double> vtheta_d1(double z) const;
    std::vector<double> vtheta_d2(double z) const; // via grad W(theta)

    // Midpoint functional B of the linearized vector theory:
    // (u_- - u_+)^T [R - I] u(0).
    double midpoint_functional(const std::vector<double>& u0) const;

    std::vector<Spline> spl, dspl; // vector-case interpolants
};

Profile1D solve_scalar_profile(const ScalarPotential& f, double L, int n);

struct VectorProfileOptions {
    double grad_tol = 1e-10;
    int max_iters = 20000;
};
Profile1D solve_vector_profile(const VectorPotential& W, double L, int n,
                               const VectorProfileOptions& opt = {});

// Simpson moments d1..d6 on the profile's own grid (returned as in Profile1D::d).
std::array<double, 7> profile_moments(const Profile1D& p);

struct DecayFit {
    double beta = 0.0;
    double fit_residual = 0.0;
    int samples = 0;
};
DecayFit estimate_decay_rate(const Profile1D& p);

} // namespace sil
