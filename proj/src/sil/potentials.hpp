#pragma once
#include <array>
#include <functional>
#include <string>
#include <vector>

namespace sil {

// Scalar double-well f with wells at -1 and +1 of equal depth.
struct ScalarPotential {
    std::string name;
    std::function<double(double)> eval, d1, d2, d3;
    double well_minus = -1.0, well_plus = 1.0;
    double radial_radius = 1.0; // R0: u f'(u) >= 0 for |u| >= R0

    double min_wells_d2() const; // min{f''(-1), f''(+1)}
};

ScalarPotential make_quartic();
// Polynomial f from coefficients c0 + c1 u + ... (for config-supplied potentials).
ScalarPotential make_polynomial(const std::vector<double>& coeffs, double radial_radius);

// Vector well W on R^m with two global minima and reflection symmetry across
// the mid-hyperplane of the wells.
struct VectorPotential {
    std::string name;
    int dim = 2;
    std::function<double(const std::vector<double>&)> eval;
    std::function<std::vector<double>(const std::vector<double>&)> grad;
    // Hessian, row-major m*m.
    std::function<std::vector<double>(const std::vector<double>&)> hess;
    std::vector<double> well_minus, well_plus;
    double radial_radius = 2.0;

    // Affine reflection across the midplane of the wells.
    std::vector<double> reflect(const std::vector<double>& v) const;
    double well_hessian_min_eig() const; // lambda > 0 at the wells
};

// W(u) = 1/4 (|u|^2-1)^2 + u2^2 with wells (+-1, 0).
VectorPotential make_twowell();
// Block-doubled W (+) W on R^{2m}; used to exercise kernel-dimension counting.
VectorPotential make_block_doubled(const VectorPotential& W);

struct CheckResult {
    std::string name;
    bool pass = false;
    double slack = 0.0; // measured margin (sign convention per check)
};

struct ValidationReport {
    bool pass = false;
    std::vector<CheckResult> checks;
    double well_hessian_min_eig = 0.0; // vector case; f''(+-1) min for scalar
    const CheckResult* find(const std::string& name) const;
};

ValidationReport validate(const ScalarPotential& f, double tol);
ValidationReport validate(const VectorPotential& W, double tol);

} // namespace sil
