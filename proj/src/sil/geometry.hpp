#pragma once
#include <array>
#include <vector>

#include "sil/grid.hpp"

namespace sil {

// Interface as a Neumann graph y = gamma(x) over [0,1].
struct InterfaceGraph {
    Grid1D xgrid;
    std::vector<double> gamma;
    double t = 0;

    // endpoint slope in the scheme's own (mirrored-ghost) convention
    double end_slope() const { return 0.0; }
    double end_slope_onesided() const;
    double max_slope() const;
};

struct McfOptions {
    bool explicit_scheme = false;
    double graph_cap = 10.0; // BlowUp if max |gamma_x| exceeds this
};

struct McfTrajectory {
    Grid1D xgrid;
    double dt = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> gammas;

    int index_at(double t) const;
    InterfaceGraph at_index(int k) const;
    InterfaceGraph at_time(double t) const { return at_index(index_at(t)); }
};

McfTrajectory mcf_evolve(const InterfaceGraph& g0, double T, double dt,
                         const McfOptions& opt = {});

// Smooth curve (u, gamma(u)) from the evenly reflected samples on [-1,2],
// with exact foot-point projection.
class CurveSpline {
public:
    CurveSpline() = default;
    CurveSpline(const Grid1D& xgrid, const std::vector<double>& gamma);
    double gam(double u) const { return spl_(u); }
    double gam_u(double u) const { return spl_.deriv(u); }
    double gam_uu(double u) const { return spl_.deriv2(u); }
    // Signed distance (positive above the graph) and foot parameter.
    void project(double x, double y, double& u, double& r) const;
    std::array<double, 2> point(double u) const { return {u, spl_(u)}; }
    std::array<double, 2> normal(double u) const;
    double curvature(double u) const;
    double max_curvature() const;
    bool valid() const { return ok_; }

private:
    Spline spl_;
    bool ok_ = false;
};

// Flat-boundary curvilinear frame at a fixed time, with the time-stencil
// neighbors needed for dt-derivatives of the coordinate fields.
struct Frame2D {
    double delta = 0.15, eps = 0.1, t = 0, tau = 0;
    double stencil_a = 1e-3; // spatial step of the local coordinate stencils
    CurveSpline curve, curve_m, curve_p;
    bool has_time_stencil = false;
    Spline h_shift; // height shift h_eps(s) on [0,1] (even ends); may be empty
    bool has_h = false;
    double max_kappa = 0;

    static double fold(double s); // even fold of the foot parameter into [0,1]

    double r_at(double x, double y) const;
    double s_at(double x, double y) const;
    void rs_at(double x, double y, double& r, double& s) const;
    std::array<double, 2> grad_r(double x, double y) const; // exact foot normal
    double dt_r(double x, double y) const;
    double lap_r(double x, double y) const;
    std::array<double, 2> grad_s(double x, double y) const;
    double dt_s(double x, double y) const;
    double lap_s(double x, double y) const;
    double rho_at(double x, double y) const; // r/eps - h_eps(fold(s))

    std::array<double, 2> point_on_normal(double s, double rr) const;
    // fields along the normal line through the interface point at parameter s
    double m_on_normal(double s, double rr) const; // (dt r - lap r)
    double q_on_normal(double s, double rr) const; // |grad r|^2
    double p_on_normal(double s, double rr) const; // grad r . grad s
    double nr_on_wall(int wall, double rr) const;  // N_wall . grad r on the wall line

    // cached node fields on a rectangle grid over [0,1]^2
    int nx = 0, ny = 0;
    std::vector<double> r_field, s_field, grx_field, gry_field;
    void cache_fields(int nx, int ny);
};

Frame2D build_frame(const McfTrajectory& traj, double tquery, double delta, double eps,
                    const std::vector<double>& h_samples = {}, const Grid1D& h_grid = {});
// Single-graph variant (stationary; no time stencil).
Frame2D build_frame(const InterfaceGraph& g, double delta, double eps,
                    const std::vector<double>& h_samples = {}, const Grid1D& h_grid = {});

struct CoordDiagnostics {
    double max_V_vs_H = 0;     // |(-dt r) - (-lap r)| over interface samples
    double max_H_vs_graph = 0; // |(-lap r) - gamma_xx/(1+gamma_x^2)^{3/2}|
    double max_eikonal = 0;    // ||grad r| - 1| via local stencils off the interface
    double max_split_defect = 0;
};
CoordDiagnostics coordinate_diagnostics(const Frame2D& fr, int nsamples = 65);

} // namespace sil
