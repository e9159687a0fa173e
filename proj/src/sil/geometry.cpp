#include "sil/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/lin.hpp"

namespace sil {

double InterfaceGraph::end_slope_onesided() const {
    const int n = xgrid.n;
    const double h = xgrid.h();
    const double l = (-3 * gamma[0] + 4 * gamma[1] - gamma[2]) / (2 * h);
    const double r = (3 * gamma[n - 1] - 4 * gamma[n - 2] + gamma[n - 3]) / (2 * h);
    return std::max(std::abs(l), std::abs(r));
}

double InterfaceGraph::max_slope() const {
    const int n = xgrid.n;
    const double h = xgrid.h();
    double s = 0;
    for (int i = 1; i < n - 1; ++i)
        s = std::max(s, std::abs(gamma[i + 1] - gamma[i - 1]) / (2 * h));
    return s;
}

int McfTrajectory::index_at(double t) const {
    int k = (int)std::llround(t / dt);
    return std::max(0, std::min((int)times.size() - 1, k));
}

InterfaceGraph McfTrajectory::at_index(int k) const {
    return InterfaceGraph{xgrid, gammas[k], times[k]};
}

McfTrajectory mcf_evolve(const InterfaceGraph& g0, double T, double dt, const McfOptions& opt) {
    const int n = g0.xgrid.n;
    const double h = g0.xgrid.h();
    require(dt > 0 && T >= 0, "BadInput", "mcf_evolve needs dt > 0");
    if (opt.explicit_scheme)
        require(dt <= 0.5 * h * h, "BadInput", "explicit MCF step needs dt <= h^2/2");

    McfTrajectory traj;
    traj.xgrid = g0.xgrid;
    traj.dt = dt;
    const int steps = (int)std::llround(T / dt);
    traj.times.reserve(steps + 1);
    traj.gammas.reserve(steps + 1);
    std::vector<double> g = g0.gamma;
    traj.times.push_back(0.0);
    traj.gammas.push_back(g);

    std::vector<double> D(n), dl(n), dd(n), du(n), rhs(n);
    for (int k = 0; k < steps; ++k) {
        // gamma_x with mirrored ghosts (zero at the Neumann ends)
        for (int i = 0; i < n; ++i) {
            double gx = 0;
            if (i > 0 && i < n - 1) gx = (g[i + 1] - g[i - 1]) / (2 * h);
            D[i] = 1.0 / (1.0 + gx * gx);
            require(std::abs(gx) <= opt.graph_cap, "BlowUp", "graph condition cap exceeded");
        }
        if (opt.explicit_scheme) {
            std::vector<double> gn = g;
            for (int i = 0; i < n; ++i) {
                const int il = i > 0 ? i - 1 : 1, ir = i < n - 1 ? i + 1 : n - 2;
                gn[i] = g[i] + dt * D[i] * (g[il] - 2 * g[i] + g[ir]) / (h * h);
            }
            g.swap(gn);
        } else {
            const double c = dt / (h * h);
            for (int i = 0; i < n; ++i) {
                dd[i] = 1.0 + 2.0 * c * D[i];
                dl[i] = du[i] = -c * D[i];
                rhs[i] = g[i];
            }
            du[0] = -2.0 * c * D[0];
            dl[n - 1] = -2.0 * c * D[n - 1];
            g = thomas_solve(dl, dd, du, rhs);
        }
        traj.times.push_back((k + 1) * dt);
        traj.gammas.push_back(g);
    }
    return traj;
}

CurveSpline::CurveSpline(const Grid1D& xgrid, const std::vector<double>& gamma) {
    // Even reflection across x = 0 and x = 1 onto [-1, 2].
    const int n = xgrid.n;
    const int N = 3 * (n - 1) + 1;
    Grid1D ext{-1.0, 2.0, N};
    std::vector<double> y(N);
    for (int k = 0; k < N; ++k) {
        int i = k - (n - 1); // index relative to [0,1] block
        if (i < 0) i = -i;
        if (i > n - 1) i = 2 * (n - 1) - i;
        y[k] = gamma[i];
    }
    spl_ = Spline(ext, y);
    ok_ = true;
}

std::array<double, 2> CurveSpline::normal(double u) const {
    const double gu = spl_.deriv(u);
    const double l = std::sqrt(1.0 + gu * gu);
    return {-gu / l, 1.0 / l};
}

double CurveSpline::curvature(double u) const {
    const double gu = spl_.deriv(u), guu = spl_.deriv2(u);
    return guu / std::pow(1.0 + gu * gu, 1.5);
}

double CurveSpline::max_curvature() const {
    double k = 0;
    for (int i = 0; i <= 400; ++i) k = std::max(k, std::abs(curvature(i / 400.0)));
    return k;
}

void CurveSpline::project(double x, double y, double& u, double& r) const {
    u = std::clamp(x, -0.95, 1.95);
    for (int it = 0; it < 60; ++it) {
        const double g = spl_(u), gu = spl_.deriv(u), guu = spl_.deriv2(u);
        const double dx = x - u, dy = y - g;
        const double phi = -dx - dy * gu; // d/du of |P - C(u)|^2 / 2 with sign flip
        const double dphi = 1.0 + gu * gu - dy * guu;
        double step = phi / std::max(dphi, 0.25);
        step = std::clamp(step, -0.05, 0.05);
        u -= step;
        u = std::clamp(u, -1.0, 2.0);
        if (std::abs(step) < 1e-15) break;
    }
    const auto nrm = normal(u);
    r = (x - u) * nrm[0] + (y - spl_(u)) * nrm[1];
}

double Frame2D::fold(double s) {
    if (s < 0) s = -s;
    if (s > 1) s = 2.0 - s;
    return std::clamp(s, 0.0, 1.0);
}

double Frame2D::r_at(double x, double y) const {
    double u, r;
    curve.project(x, y, u, r);
    return r;
}

double Frame2D::s_at(double x, double y) const {
    double u, r;
    curve.project(x, y, u, r);
    return u;
}

void Frame2D::rs_at(double x, double y, double& r, double& s) const { curve.project(x, y, s, r); }

std::array<double, 2> Frame2D::grad_r(double x, double y) const {
    double u, r;
    curve.project(x, y, u, r);
    return curve.normal(u);
}

double Frame2D::dt_r(double x, double y) const {
    if (!has_time_stencil) return 0.0;
    double u, rp, rm;
    curve_p.project(x, y, u, rp);
    curve_m.project(x, y, u, rm);
    return (rp - rm) / (2.0 * tau);
}

double Frame2D::lap_r(double x, double y) const {
    const double a = stencil_a;
    return (r_at(x + a, y) + r_at(x - a, y) + r_at(x, y + a) + r_at(x, y - a) -
            4.0 * r_at(x, y)) /
           (a * a);
}

std::array<double, 2> Frame2D::grad_s(double x, double y) const {
    const double a = stencil_a;
    return {(s_at(x + a, y) - s_at(x - a, y)) / (2 * a),
            (s_at(x, y + a) - s_at(x, y - a)) / (2 * a)};
}

double Frame2D::dt_s(double x, double y) const {
    if (!has_time_stencil) return 0.0;
    double up, um, r;
    curve_p.project(x, y, up, r);
    curve_m.project(x, y, um, r);
    return (up - um) / (2.0 * tau);
}

double Frame2D::lap_s(double x, double y) const {
    const double a = stencil_a;
    return (s_at(x + a, y) + s_at(x - a, y) + s_at(x, y + a) + s_at(x, y - a) -
            4.0 * s_at(x, y)) /
           (a * a);
}

double Frame2D::rho_at(double x, double y) const {
    double r, s;
    rs_at(x, y, r, s);
    double hshift = 0;
    if (has_h) hshift = h_shift(fold(s));
    return r / eps - hshift;
}

std::array<double, 2> Frame2D::point_on_normal(double s, double rr) const {
    const auto p = curve.point(s);
    const auto n = curve.normal(s);
    return {p[0] + rr * n[0], p[1] + rr * n[1]};
}

double Frame2D::m_on_normal(double s, double rr) const {
    const auto p = point_on_normal(s, rr);
    return dt_r(p[0], p[1]) - lap_r(p[0], p[1]);
}

double Frame2D::q_on_normal(double s, double rr) const {
    const auto p0 = point_on_normal(s, rr - stencil_a);
    const auto p1 = point_on_normal(s, rr + stencil_a);
    const double dr = (r_at(p1[0], p1[1]) - r_at(p0[0], p0[1])) / (2 * stencil_a);
    return dr * dr;
}

double Frame2D::p_on_normal(double s, double rr) const {
    const auto p = point_on_normal(s, rr);
    const auto gr = grad_r(p[0], p[1]);
    const auto gs = grad_s(p[0], p[1]);
    return gr[0] * gs[0] + gr[1] * gs[1];
}

double Frame2D::nr_on_wall(int wall, double rr) const {
    // N . grad r on the wall line through the contact point (s = 0 or 1).
    const double s = wall == 0 ? 0.0 : 1.0;
    const auto p = point_on_normal(s, rr);
    const auto gr = grad_r(p[0], p[1]);
    return wall == 0 ? -gr[0] : gr[0];
}

void Frame2D::cache_fields(int nx_, int ny_) {
    nx = nx_;
    ny = ny_;
    r_field.assign((size_t)nx * ny, 0.0);
    s_field.assign((size_t)nx * ny, 0.0);
    grx_field.assign((size_t)nx * ny, 0.0);
    gry_field.assign((size_t)nx * ny, 0.0);
    const double hx = 1.0 / (nx - 1), hy = 1.0 / (ny - 1);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double r, s;
            rs_at(i * hx, j * hy, r, s);
            r_field[(size_t)j * nx + i] = r;
            s_field[(size_t)j * nx + i] = s;
            const auto n = curve.normal(s);
            grx_field[(size_t)j * nx + i] = n[0];
            gry_field[(size_t)j * nx + i] = n[1];
        }
}

namespace {

Frame2D make_frame(const CurveSpline& cm, const CurveSpline& c0, const CurveSpline& cp,
                   bool has_time, double tau, double t, double delta, double eps,
                   const std::vector<double>& h_samples, const Grid1D& h_grid) {
    Frame2D fr;
    fr.delta = delta;
    fr.eps = eps;
    fr.t = t;
    fr.tau = tau;
    fr.curve = c0;
    fr.curve_m = cm;
    fr.curve_p = cp;
    fr.has_time_stencil = has_time;
    fr.max_kappa = c0.max_curvature();
    require(delta * fr.max_kappa < 0.5, "TubularOverlap",
            "tubular neighborhood not embedded: delta*max|kappa| = " +
                std::to_string(delta * fr.max_kappa));
    if (!h_samples.empty()) {
        fr.h_shift = Spline(h_grid, h_samples, /*even_ends=*/true);
        fr.has_h = true;
    }
    return fr;
}

} // namespace

Frame2D build_frame(const McfTrajectory& traj, double tquery, double delta, double eps,
                    const std::vector<double>& h_samples, const Grid1D& h_grid) {
    const int k = traj.index_at(tquery);
    const int k0 = std::max(1, std::min((int)traj.times.size() - 2, k));
    const bool has_time = traj.times.size() >= 3;
    const CurveSpline c0(traj.xgrid, traj.gammas[has_time ? k0 : k]);
    const CurveSpline cm(traj.xgrid, traj.gammas[has_time ? k0 - 1 : k]);
    const CurveSpline cp(traj.xgrid, traj.gammas[has_time ? k0 + 1 : k]);
    return make_frame(cm, c0, cp, has_time, traj.dt, traj.times[has_time ? k0 : k], delta, eps,
                      h_samples, h_grid);
}

Frame2D build_frame(const InterfaceGraph& g, double delta, double eps,
                    const std::vector<double>& h_samples, const Grid1D& h_grid) {
    const CurveSpline c(g.xgrid, g.gamma);
    return make_frame(c, c, c, false, 0.0, g.t, delta, eps, h_samples, h_grid);
}

CoordDiagnostics coordinate_diagnostics(const Frame2D& fr, int nsamples) {
    CoordDiagnostics d;
    for (int k = 0; k < nsamples; ++k) {
        const double s = (k + 0.5) / nsamples;
        const auto p = fr.point_on_normal(s, 0.0);
        const double V = -fr.dt_r(p[0], p[1]);
        const double H = -fr.lap_r(p[0], p[1]);
        const double Hg = fr.curve.curvature(s);
        d.max_V_vs_H = std::max(d.max_V_vs_H, std::abs(V - H));
        d.max_H_vs_graph = std::max(d.max_H_vs_graph, std::abs(H - Hg));
        // eikonal and split defect slightly off the interface
        for (double rr : {-0.5 * fr.delta, 0.5 * fr.delta}) {
            const auto pp = fr.point_on_normal(s, rr);
            const double a = fr.stencil_a;
            const double rx = (fr.r_at(pp[0] + a, pp[1]) - fr.r_at(pp[0] - a, pp[1])) / (2 * a);
            const double ry = (fr.r_at(pp[0], pp[1] + a) - fr.r_at(pp[0], pp[1] - a)) / (2 * a);
            d.max_eikonal = std::max(d.max_eikonal, std::abs(std::hypot(rx, ry) - 1.0));
            // |grad psi|^2 = |dn psi|^2 + |grad_tau psi|^2 for psi = sin(2x+y)
            auto psi = [](double x, double y) { return std::sin(2 * x + y); };
            const double px_ = (psi(pp[0] + a, pp[1]) - psi(pp[0] - a, pp[1])) / (2 * a);
            const double py_ = (psi(pp[0], pp[1] + a) - psi(pp[0], pp[1] - a)) / (2 * a);
            const auto gr = fr.grad_r(pp[0], pp[1]);
            const double dn = px_ * gr[0] + py_ * gr[1];
            const double tx = px_ - dn * gr[0], ty = py_ - dn * gr[1];
            const double lhs = px_ * px_ + py_ * py_;
            const double rhs = dn * dn + tx * tx + ty * ty;
            d.max_split_defect = std::max(d.max_split_defect, std::abs(lhs - rhs));
        }
    }
    return d;
}

} // namespace sil
