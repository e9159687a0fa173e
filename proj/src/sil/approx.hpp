#pragma once
#include <array>
#include <vector>

#include "sil/geometry.hpp"
#include "sil/linode1d.hpp"
#include "sil/profile1d.hpp"

namespace sil {

// Height function h(s,t) on the interface parameter grid [0,1].
struct HeightFunction {
    Grid1D sgrid;
    double dt = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> h;    // per time step
    std::vector<std::vector<double>> dhdt; // time derivative per step
    double max_pde_residual = 0, max_bc_residual = 0;

    int index_at(double t) const;
    double eval(double s, double t) const;
    Spline spline_at(double t) const; // even-end spline of h(., t)
    double dt_at(double s, double t) const;
    double max_abs() const;
};

// Coefficients of the 1D interface parabolic equation
//   dt h - Aprin h_ss + a1 h_s + a0 h = f
// with Robin end conditions b1 h_s + b0 h = fB, sampled per (s, t).
struct HeightCoeffs {
    Grid1D sgrid;
    std::vector<double> times;
    std::vector<std::vector<double>> Aprin, a1, a0, f;
    std::vector<std::array<double, 2>> b1e, b0e, fBe; // per time, ends {s=0, s=1}
};

HeightFunction solve_height(const HeightCoeffs& C, const std::vector<double>& h0 = {});

// Geometry coefficient samples along the interface at one time.
struct FrameCoeffs {
    std::vector<double> m1, m2;     // d_r, d_r^2 of (dt r - lap r) on Gamma
    std::vector<double> q2, q3;     // d_r^2, d_r^3 of |grad r|^2 (measured ~0)
    std::vector<double> p1, p0;     // d_r, value of grad r . grad s (measured ~0)
    std::vector<double> Aprin;      // |grad s|^2 on Gamma
    std::vector<double> drift;      // (dt s - lap s) on Gamma
    std::array<double, 2> b1{}, b0{}, fB{}, nr1{}; // wall data per end
};
FrameCoeffs sample_frame_coeffs(const Frame2D& fr, const Grid1D& sgrid, double stencil = 0.02);

struct BuildOptions {
    int s_nodes = 65;
    int rho_table_n = 1025;
    double rho_L = 12.0;
    int n_times = 5;         // u-table sample times over [0, T]
    double T = 0.0;          // 0: single-time build at traj start
    double height_dt = 0.0;  // 0: T/96
    double compat_tol = 1e-6;
    double coeff_stencil = 0.02;
    int field_nx = 0, field_ny = 0; // frame field cache sizes (0: skip)
};

// Assembled approximate solution over the flat-wall geometry.
struct ApproxSolution {
    double eps = 0.1, delta = 0.15;
    int M = 0;
    ScalarPotential f;
    Profile1D prof; // owned copy at work resolution

    std::vector<double> times;
    std::vector<Frame2D> frames;
    Grid1D sgrid, rho_grid;
    HeightFunction h2;
    std::vector<FrameCoeffs> coeffs; // per time
    // tables [ti][si] -> values on the rho grid
    std::vector<std::vector<std::vector<double>>> u2, u3, du2, du3;

    double compat_worst = 0;     // max |int R1 theta0'| over samples
    double wall_nr_worst = 0;    // measured max |N . grad r| on the side walls
    double beta = 2.0;           // profile decay rate (envelope exponent source)

    const Frame2D& frame_at(double t) const;
    int tindex(double t) const;

    double eval(double x, double y, double t) const;
    struct EvalDerivs {
        double u = 0, ut = 0, lap = 0, ux = 0, uy = 0, rho = 0;
    };
    EvalDerivs eval_derivs(double x, double y, double t) const;
    std::vector<double> sample_grid(int nx, int ny, double t) const;

    // inner tables evaluated at (rho, s) for a given time index
    void inner_at(int ti, double rho, double s, double& v, double& vr, double& vs, double& vrr,
                  double& vrs, double& vss) const;
};

ApproxSolution build_uA(const McfTrajectory& traj, double eps, int M, const ScalarPotential& f,
                        const Profile1D& prof, double delta, const BuildOptions& opt = {});

struct RemainderReport {
    double C_fit = 0;     // smallest C with |r^A| <= C (eps^M e^{-c|rho|} + eps^{M+1})
    double max_rA = 0;    // over the sampling
    double max_sA = 0;    // wall-normal derivative on the side walls
    double c_rate = 0;    // envelope rate used (beta/2)
    double far_field_max = 0;
};
RemainderReport remainder_report(const ApproxSolution& uA, int ns = 33, int nr = 41, int nt = 3);

// Distance from the zero level set of u^A to Gamma, by root finding along
// interface normals.
double zero_level_distance(const ApproxSolution& uA, double t, int ns = 65);

struct NormSet {
    double sup_l2 = 0;     // sup over sample times of ||d(t)||_L2
    double grad_off = 0;   // ||grad d||_{L2(QT \ Gamma(delta))}
    double grad_tau = 0;   // ||grad_tau d||_{L2(QT cap Gamma(delta))}
    double eps_grad_n = 0; // eps ||dn d||_{L2(QT cap Gamma(delta))}
};

// Difference norms of eq (sup-t L2, off-tube gradient, tangential, normal)
// between evolved snapshots and u^A at the matching sample times.
// `uexact` holds per-sample planar component fields (m components).
// The approximate field is embedded componentwise as off_c + dir_c * uA
// (scalar case: off = {0}, dir = {1}).
NormSet difference_norms(const std::vector<std::vector<double>>& uexact,
                         const std::vector<double>& sample_times, int nx, int ny, int m,
                         const ApproxSolution& uA, double delta,
                         const std::vector<double>& embed_off = {0.0},
                         const std::vector<double>& embed_dir = {1.0});

} // namespace sil
