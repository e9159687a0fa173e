#pragma once
#include <vector>

namespace sil {

// Smallest eigenvalue of the Neumann discretization of -Laplace + q on a
// rectangle grid (block potential q for the vector case), by shifted inverse
// iteration with a coarse-grid bootstrap shift and a deterministic start.
struct Floor2DOptions {
    int max_iters = 400;
    int max_refactor = 4;
    double residual_tol = 1e-8; // ||(L - lambda) v|| / ||v||
    bool verify_count = true;   // Sturm check that nothing lies below
};

struct Floor2DReport {
    double lambda_min = 0;
    double residual = 0;
    int iters = 0;
    int factorizations = 0;
    double coarse_estimate = 0;
    int count_below = 1; // eigenvalues <= lambda_min + tol (should be >= 1)
    std::vector<double> eigvec; // D-normalized, node-major (m per node)
};

// potential: node-major blocks [ (j*nx+i)*m*m + c*m + c2 ].
Floor2DReport rayleigh_floor_2d(const std::vector<double>& potential, int nx, int ny, double hx,
                                double hy, int m = 1, const Floor2DOptions& opt = {});

} // namespace sil
