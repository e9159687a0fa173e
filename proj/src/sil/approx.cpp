#include "sil/approx.hpp"

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/lin.hpp"

namespace sil {

int HeightFunction::index_at(double t) const {
    if (times.size() <= 1) return 0;
    int k = (int)std::llround(t / dt);
    return std::max(0, std::min((int)times.size() - 1, k));
}

double HeightFunction::eval(double s, double t) const {
    const auto& hv = h[index_at(t)];
    // local cubic through the s-grid (Catmull-Rom with even ends)
    const int n = sgrid.n;
    const double hs = sgrid.h();
    double u = (Frame2D::fold(s) - sgrid.a) / hs;
    int i = std::max(0, std::min(n - 2, (int)std::floor(u)));
    const double x = u - i;
    auto at = [&](int j) {
        if (j < 0) j = -j;
        if (j > n - 1) j = 2 * (n - 1) - j;
        return hv[j];
    };
    const double m0 = 0.5 * (at(i + 1) - at(i - 1));
    const double m1 = 0.5 * (at(i + 2) - at(i));
    const double x2 = x * x, x3 = x2 * x;
    return at(i) * (2 * x3 - 3 * x2 + 1) + at(i + 1) * (-2 * x3 + 3 * x2) + m0 * (x3 - 2 * x2 + x) +
           m1 * (x3 - x2);
}

Spline HeightFunction::spline_at(double t) const {
    return Spline(sgrid, h[index_at(t)], /*even_ends=*/true);
}

double HeightFunction::dt_at(double s, double t) const {
    const auto& dv = dhdt[index_at(t)];
    const int n = sgrid.n;
    const double hs = sgrid.h();
    double u = (Frame2D::fold(s) - sgrid.a) / hs;
    int i = std::max(0, std::min(n - 1, (int)std::llround(u)));
    return dv[i];
}

double HeightFunction::max_abs() const {
    double m = 0;
    for (const auto& hv : h)
        for (double x : hv) m = std::max(m, std::abs(x));
    return m;
}

HeightFunction solve_height(const HeightCoeffs& C, const std::vector<double>& h0) {
    const int n = C.sgrid.n;
    const int nt = (int)C.times.size();
    require(nt >= 2, "BadInput", "solve_height needs at least two time samples");
    const double hs = C.sgrid.h();

    HeightFunction H;
    H.sgrid = C.sgrid;
    H.times = C.times;
    H.dt = C.times[1] - C.times[0];
    H.h.assign(nt, std::vector<double>(n, 0.0));
    H.dhdt.assign(nt, std::vector<double>(n, 0.0));
    if (!h0.empty()) H.h[0] = h0;

    std::vector<double> dl(n), dd(n), du(n), rhs(n);
    for (int k = 1; k < nt; ++k) {
        const double dt = C.times[k] - C.times[k - 1];
        // backward Euler with the ghost-eliminated Robin closure
        for (int i = 0; i < n; ++i) {
            const double A = C.Aprin[k][i];
            require(A > 0, "NonParabolic", "principal coefficient non-positive");
            const double a1 = C.a1[k][i], a0 = C.a0[k][i];
            dd[i] = 1.0 / dt + 2.0 * A / (hs * hs) + a0;
            dl[i] = -A / (hs * hs) - a1 / (2.0 * hs);
            du[i] = -A / (hs * hs) + a1 / (2.0 * hs);
            rhs[i] = H.h[k - 1][i] / dt + C.f[k][i];
        }
        // Robin: b1 h_s + b0 h = fB; ghost h_{-1} = h_1 - 2 hs (fB - b0 h_0)/b1
        for (int e : {0, 1}) {
            const int i = e == 0 ? 0 : n - 1;
            const double sgn = e == 0 ? 1.0 : -1.0; // outward is -s at left end
            const double b1 = C.b1e[k][e], b0 = C.b0e[k][e], fB = C.fBe[k][e];
            require(std::abs(b1) > 1e-12, "NonParabolic", "degenerate Robin coefficient b1");
            const double A = C.Aprin[k][i], a1 = C.a1[k][i];
            // eliminate the ghost from the interior stencil at the end row
            const double cg = (e == 0 ? dl[i] : du[i]); // ghost coefficient
            const double alpha = 2.0 * hs * sgn / b1;   // h_ghost = h_in - alpha (fB - b0 h_i)
            (void)A;
            (void)a1;
            if (e == 0) {
                du[i] += cg;
                dd[i] += cg * alpha * b0;
                rhs[i] += cg * alpha * fB;
                dl[i] = 0.0;
            } else {
                dl[i] += cg;
                dd[i] += cg * alpha * b0;
                rhs[i] += cg * alpha * fB;
                du[i] = 0.0;
            }
        }
        H.h[k] = thomas_solve(dl, dd, du, rhs);
        for (int i = 0; i < n; ++i) H.dhdt[k][i] = (H.h[k][i] - H.h[k - 1][i]) / dt;
    }
    if (nt >= 2) H.dhdt[0] = H.dhdt[1];

    // centered-in-time residual diagnostics of the continuous equation
    double pres = 0, bres = 0;
    for (int k = 1; k + 1 < nt; ++k) {
        const double dt2 = C.times[k + 1] - C.times[k - 1];
        for (int i = 1; i < n - 1; ++i) {
            const double ht = (H.h[k + 1][i] - H.h[k - 1][i]) / dt2;
            const double hss = (H.h[k][i + 1] - 2 * H.h[k][i] + H.h[k][i - 1]) / (hs * hs);
            const double hsd = (H.h[k][i + 1] - H.h[k][i - 1]) / (2 * hs);
            pres = std::max(pres, std::abs(ht - C.Aprin[k][i] * hss + C.a1[k][i] * hsd +
                                           C.a0[k][i] * H.h[k][i] - C.f[k][i]));
        }
        for (int e : {0, 1}) {
            const int i = e == 0 ? 0 : n - 1;
            const double one =
                e == 0 ? (-3 * H.h[k][0] + 4 * H.h[k][1] - H.h[k][2]) / (2 * hs)
                       : (3 * H.h[k][n - 1] - 4 * H.h[k][n - 2] + H.h[k][n - 3]) / (2 * hs);
            bres = std::max(bres,
                            std::abs(C.b1e[k][e] * one + C.b0e[k][e] * H.h[k][i] - C.fBe[k][e]));
        }
    }
    H.max_pde_residual = pres;
    H.max_bc_residual = bres;
    return H;
}

FrameCoeffs sample_frame_coeffs(const Frame2D& fr, const Grid1D& sgrid, double a) {
    const int n = sgrid.n;
    FrameCoeffs C;
    C.m1.resize(n);
    C.m2.resize(n);
    C.q2.resize(n);
    C.q3.resize(n);
    C.p1.resize(n);
    C.p0.resize(n);
    C.Aprin.resize(n);
    C.drift.resize(n);
    for (int i = 0; i < n; ++i) {
        const double s = sgrid.node(i);
        double mv[5], qv[5], pv[5];
        for (int k = -2; k <= 2; ++k) {
            mv[k + 2] = fr.m_on_normal(s, k * a);
            qv[k + 2] = fr.q_on_normal(s, k * a);
            pv[k + 2] = fr.p_on_normal(s, k * a);
        }
        auto d1 = [&](const double* v) { return (-v[4] + 8 * v[3] - 8 * v[1] + v[0]) / (12 * a); };
        auto d2 = [&](const double* v) {
            return (-v[4] + 16 * v[3] - 30 * v[2] + 16 * v[1] - v[0]) / (12 * a * a);
        };
        auto d3 = [&](const double* v) {
            return (v[4] - 2 * v[3] + 2 * v[1] - v[0]) / (2 * a * a * a);
        };
        C.m1[i] = d1(mv);
        C.m2[i] = d2(mv);
        C.q2[i] = d2(qv);
        C.q3[i] = d3(qv);
        C.p1[i] = d1(pv);
        C.p0[i] = pv[2];
        const auto p = fr.point_on_normal(s, 0.0);
        const auto gs = fr.grad_s(p[0], p[1]);
        C.Aprin[i] = gs[0] * gs[0] + gs[1] * gs[1];
        C.drift[i] = fr.dt_s(p[0], p[1]) - fr.lap_s(p[0], p[1]);
    }
    // wall data: flat vertical walls x = 0, 1 with outward normals -+e_x, so
    // |grad b| / (N . grad b) = -1 at both contact points.
    for (int e : {0, 1}) {
        const double s = e == 0 ? 0.0 : 1.0;
        const double ratio = -1.0;
        double nr[5];
        for (int k = -2; k <= 2; ++k) nr[k + 2] = fr.nr_on_wall(e, k * a);
        const double nr1 = (-nr[4] + 8 * nr[3] - 8 * nr[1] + nr[0]) / (12 * a);
        const double nr2 = (-nr[4] + 16 * nr[3] - 30 * nr[2] + 16 * nr[1] - nr[0]) / (12 * a * a);
        C.nr1[e] = nr1;
        // b1 = ratio * (D_x s N); one-sided x-stencil into the domain
        const auto p = fr.point_on_normal(s, 0.0);
        const double ax = 1e-4;
        double dsx;
        if (e == 0)
            dsx = (-3 * fr.s_at(p[0], p[1]) + 4 * fr.s_at(p[0] + ax, p[1]) -
                   fr.s_at(p[0] + 2 * ax, p[1])) /
                  (2 * ax);
        else
            dsx = (3 * fr.s_at(p[0], p[1]) - 4 * fr.s_at(p[0] - ax, p[1]) +
                   fr.s_at(p[0] - 2 * ax, p[1])) /
                  (2 * ax);
        const double NdotDs = e == 0 ? -dsx : dsx;
        C.b1[e] = ratio * NdotDs;
        C.b0[e] = -ratio * nr1;
        C.fB[e] = ratio * nr2 * 0.0; // assembled below by the caller with d3/d1
    }
    return C;
}

namespace {

struct CoeffSplines {
    Spline m1, m2, q2, q3, p1;
};

} // namespace

const Frame2D& ApproxSolution::frame_at(double t) const { return frames[tindex(t)]; }

int ApproxSolution::tindex(double t) const {
    if (times.size() <= 1) return 0;
    const double dt = times[1] - times[0];
    int k = (int)std::llround((t - times[0]) / dt);
    return std::max(0, std::min((int)times.size() - 1, k));
}

namespace {

// Catmull-Rom weights and derivatives on a uniform grid with even ends.
struct CR {
    int i0;
    double w[4], dw[4], ddw[4];
};

CR cr_weights(const Grid1D& g, double x) {
    CR c;
    const double hs = g.h();
    double u = (x - g.a) / hs;
    int i = std::max(0, std::min(g.n - 2, (int)std::floor(u)));
    const double t = u - i;
    c.i0 = i - 1;
    const double t2 = t * t, t3 = t2 * t;
    // value basis
    c.w[0] = 0.5 * (-t3 + 2 * t2 - t);
    c.w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    c.w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    c.w[3] = 0.5 * (t3 - t2);
    c.dw[0] = 0.5 * (-3 * t2 + 4 * t - 1) / hs;
    c.dw[1] = 0.5 * (9 * t2 - 10 * t) / hs;
    c.dw[2] = 0.5 * (-9 * t2 + 8 * t + 1) / hs;
    c.dw[3] = 0.5 * (3 * t2 - 2 * t) / hs;
    c.ddw[0] = 0.5 * (-6 * t + 4) / (hs * hs);
    c.ddw[1] = 0.5 * (18 * t - 10) / (hs * hs);
    c.ddw[2] = 0.5 * (-18 * t + 8) / (hs * hs);
    c.ddw[3] = 0.5 * (6 * t - 2) / (hs * hs);
    return c;
}

int reflect_index(int j, int n) {
    if (j < 0) j = -j;
    if (j > n - 1) j = 2 * (n - 1) - j;
    return j;
}

} // namespace

void ApproxSolution::inner_at(int ti, double rho, double s, double& v, double& vr, double& vs,
                              double& vrr, double& vrs, double& vss) const {
    v = prof.theta(rho);
    vr = prof.theta_d1(rho);
    vrr = prof.theta_d2(rho);
    vs = vrs = vss = 0;
    if (M < 2) return;
    const double e2 = eps * eps, e3 = e2 * eps;
    const Grid1D& rg = rho_grid;
    if (rho <= rg.a || rho >= rg.b) return; // corrections clamp to zero in the tails

    // s-interpolation (Catmull-Rom, even ends) of the rho-Hermite values
    const double sf = Frame2D::fold(s);
    const double sgn = (s < 0.0 || s > 1.0) ? -1.0 : 1.0;
    const auto cw = cr_weights(sgrid, sf);

    const double hr = rg.h();
    int ir = std::max(0, std::min(rg.n - 2, (int)std::floor((rho - rg.a) / hr)));
    const double tr = (rho - rg.node(ir)) / hr;
    const double t2 = tr * tr, t3 = t2 * tr;
    const double hv0 = 2 * t3 - 3 * t2 + 1, hv1 = -2 * t3 + 3 * t2;
    const double hd0 = t3 - 2 * t2 + tr, hd1 = t3 - t2;
    const double gv0 = (6 * t2 - 6 * tr) / hr, gv1 = (-6 * t2 + 6 * tr) / hr;
    const double gd0 = (3 * t2 - 4 * tr + 1), gd1 = (3 * t2 - 2 * tr);

    double u2v = 0, u3v = 0, u2r = 0, u3r = 0;
    double u2v_s = 0, u3v_s = 0, u2r_s = 0, u3r_s = 0, u2v_ss = 0, u3v_ss = 0;
    for (int k = 0; k < 4; ++k) {
        const int sj = reflect_index(cw.i0 + k, sgrid.n);
        const auto& a2 = u2[ti][sj];
        const auto& a3 = u3[ti][sj];
        const auto& b2 = du2[ti][sj];
        const auto& b3 = du3[ti][sj];
        const double v2 = a2[ir] * hv0 + a2[ir + 1] * hv1 + hr * (b2[ir] * hd0 + b2[ir + 1] * hd1);
        const double v3 = a3[ir] * hv0 + a3[ir + 1] * hv1 + hr * (b3[ir] * hd0 + b3[ir + 1] * hd1);
        const double r2 = a2[ir] * gv0 + a2[ir + 1] * gv1 + b2[ir] * gd0 + b2[ir + 1] * gd1;
        const double r3 = a3[ir] * gv0 + a3[ir + 1] * gv1 + b3[ir] * gd0 + b3[ir + 1] * gd1;
        u2v += cw.w[k] * v2;
        u3v += cw.w[k] * v3;
        u2r += cw.w[k] * r2;
        u3r += cw.w[k] * r3;
        u2v_s += cw.dw[k] * v2;
        u3v_s += cw.dw[k] * v3;
        u2r_s += cw.dw[k] * r2;
        u3r_s += cw.dw[k] * r3;
        u2v_ss += cw.ddw[k] * v2;
        u3v_ss += cw.ddw[k] * v3;
    }
    v += e2 * u2v + e3 * u3v;
    vr += e2 * u2r + e3 * u3r;
    vs += sgn * (e2 * u2v_s + e3 * u3v_s);
    vrs += sgn * (e2 * u2r_s + e3 * u3r_s);
    vss += e2 * u2v_ss + e3 * u3v_ss;
    // second rho-derivative via the solved ODEs: u'' = f''(theta0) u + R
    const double th = prof.theta(rho), thp = prof.theta_d1(rho), thpp = prof.theta_d2(rho);
    const auto& C = coeffs[ti];
    auto interp_even = [&](const std::vector<double>& arr) {
        double val = 0;
        for (int k = 0; k < 4; ++k) val += cw.w[k] * arr[reflect_index(cw.i0 + k, sgrid.n)];
        return val;
    };
    const double m1 = interp_even(C.m1), m2v = interp_even(C.m2);
    const double q2 = interp_even(C.q2), q3 = interp_even(C.q3), p1 = interp_even(C.p1);
    const double d1m = prof.d[1], d3m = prof.d[3], d4m = prof.d[4], d6m = prof.d[6];
    const double f1 = (d3m * m2v / 2.0 - d6m * q3 / 6.0) / d1m;
    double h2v = 0, h2p = 0;
    if (!h2.h.empty()) {
        const Spline sp = h2.spline_at(times[ti]);
        h2v = sp(sf);
        h2p = sgn * sp.deriv(sf);
    }
    const double R1 = thp * rho * m1 - 0.5 * thpp * rho * rho * q2;
    const double R2 = thp * (0.5 * rho * rho * m2v - f1 + (d4m / d1m) * q2 * h2v -
                             2.0 * (d4m / d1m) * p1 * h2p) +
                      thpp * (-rho * rho * rho * q3 / 6.0 - rho * h2v * q2 + 2.0 * rho * p1 * h2p);
    const double fpp = f.d2(th);
    vrr += e2 * (fpp * u2v + R1) + e3 * (fpp * u3v + R2);
}

double ApproxSolution::eval(double x, double y, double t) const {
    const int ti = tindex(t);
    const Frame2D& fr = frames[ti];
    double r, s;
    fr.rs_at(x, y, r, s);
    const double sg = r >= 0 ? 1.0 : -1.0;
    const double F = cutoff_eta(r / delta);
    if (F == 0.0) return sg;
    double h2v = 0;
    if (M >= 2 && !h2.h.empty()) h2v = h2.eval(s, times[ti]);
    const double rho = r / eps - eps * h2v;
    double v, vr, vs, vrr, vrs, vss;
    inner_at(ti, rho, s, v, vr, vs, vrr, vrs, vss);
    return sg + F * (v - sg);
}

ApproxSolution::EvalDerivs ApproxSolution::eval_derivs(double x, double y, double t) const {
    const int ti = tindex(t);
    const Frame2D& fr = frames[ti];
    EvalDerivs out;
    double r, s;
    fr.rs_at(x, y, r, s);
    const double sg = r >= 0 ? 1.0 : -1.0;
    const double F = cutoff_eta(r / delta);
    if (F == 0.0) {
        out.u = sg;
        out.rho = r / eps;
        return out;
    }
    const auto gr = fr.grad_r(x, y);
    const double dtr = fr.dt_r(x, y);
    const double lapr = fr.lap_r(x, y);
    const auto gs = fr.grad_s(x, y);
    const double dts = fr.dt_s(x, y);
    const double laps = fr.lap_s(x, y);

    const double sf = Frame2D::fold(s);
    const double sgn = (s < 0.0 || s > 1.0) ? -1.0 : 1.0;
    double h2v = 0, h2p = 0, h2pp = 0, h2t = 0;
    if (M >= 2 && !h2.h.empty()) {
        const Spline sp = h2.spline_at(times[ti]);
        h2v = sp(sf);
        h2p = sgn * sp.deriv(sf);
        h2pp = sp.deriv2(sf);
        h2t = h2.dt_at(s, times[ti]);
    }
    const double rho = r / eps - eps * h2v;
    out.rho = rho;

    double v, vr, vs, vrr, vrs, vss;
    inner_at(ti, rho, s, v, vr, vs, vrr, vrs, vss);

    // v_t from the table time-stencil (the theta0 part carries no explicit t)
    double vt = 0;
    if (M >= 2 && times.size() >= 2) {
        const int tm = std::max(0, ti - 1), tp = std::min((int)times.size() - 1, ti + 1);
        if (tp > tm) {
            double va, vb, d_;
            double w1, w2, w3, w4, w5;
            inner_at(tm, rho, s, va, w1, w2, w3, w4, w5);
            inner_at(tp, rho, s, vb, w1, w2, w3, w4, w5);
            d_ = times[tp] - times[tm];
            vt = (vb - va) / d_;
        }
    }

    const double grho_x = gr[0] / eps - eps * h2p * gs[0];
    const double grho_y = gr[1] / eps - eps * h2p * gs[1];
    const double gs2 = gs[0] * gs[0] + gs[1] * gs[1];
    const double lap_rho = lapr / eps - eps * (h2pp * gs2 + h2p * laps);
    const double dt_rho = dtr / eps - eps * (h2t + h2p * dts);

    const double w = v - sg;
    const double Fp = cutoff_eta_d1(r / delta) / delta;
    const double Fpp = cutoff_eta_d2(r / delta) / (delta * delta);
    const double gr2 = gr[0] * gr[0] + gr[1] * gr[1];

    const double wx = vr * grho_x + vs * gs[0];
    const double wy = vr * grho_y + vs * gs[1];
    const double wt = vr * dt_rho + vs * dts + vt;
    const double grho2 = grho_x * grho_x + grho_y * grho_y;
    const double grho_gs = grho_x * gs[0] + grho_y * gs[1];
    const double lap_w =
        vrr * grho2 + 2.0 * vrs * grho_gs + vss * gs2 + vr * lap_rho + vs * laps;

    out.u = sg + F * w;
    out.ut = Fp * dtr * w + F * wt;
    out.ux = Fp * gr[0] * w + F * wx;
    out.uy = Fp * gr[1] * w + F * wy;
    out.lap = Fpp * gr2 * w + Fp * (lapr * w + 2.0 * (gr[0] * wx + gr[1] * wy)) + F * lap_w;
    return out;
}

std::vector<double> ApproxSolution::sample_grid(int nx, int ny, double t) const {
    std::vector<double> u((size_t)nx * ny);
    const double hx = 1.0 / (nx - 1), hy = 1.0 / (ny - 1);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) u[(size_t)j * nx + i] = eval(i * hx, j * hy, t);
    return u;
}

ApproxSolution build_uA(const McfTrajectory& traj, double eps, int M, const ScalarPotential& f,
                        const Profile1D& prof_in, double delta, const BuildOptions& opt) {
    require(M == 0 || M == 2, "BadInput", "build_uA supports M in {0, 2}");
    ApproxSolution uA;
    uA.eps = eps;
    uA.delta = delta;
    uA.M = M;
    uA.f = f;
    uA.beta = prof_in.beta;

    // work profile at moderate resolution for the per-sample linode solves
    const int n_work = 8193;
    uA.prof = solve_scalar_profile(f, opt.rho_L, n_work);

    const double T = opt.T > 0 ? opt.T : 0.0;
    const int nt = T > 0 ? std::max(2, opt.n_times) : 1;
    uA.times.resize(nt);
    for (int k = 0; k < nt; ++k) uA.times[k] = nt == 1 ? traj.times.front() : T * k / (nt - 1);
    uA.sgrid = Grid1D{0.0, 1.0, opt.s_nodes};
    uA.rho_grid = Grid1D::symmetric(opt.rho_L, opt.rho_table_n);

    for (double t : uA.times) {
        uA.frames.push_back(build_frame(traj, t, delta, eps));
        if (opt.field_nx > 0) uA.frames.back().cache_fields(opt.field_nx, opt.field_ny);
    }
    for (size_t k = 0; k < uA.frames.size(); ++k) {
        uA.coeffs.push_back(sample_frame_coeffs(uA.frames[k], uA.sgrid, opt.coeff_stencil));
        for (int e : {0, 1})
            uA.wall_nr_worst =
                std::max(uA.wall_nr_worst, std::abs(uA.frames[k].nr_on_wall(e, 0.25 * delta)));
    }

    if (M == 0) return uA;

    // h2 from the interface parabolic equation with measured coefficients
    {
        const double dth = opt.height_dt > 0 ? opt.height_dt : std::max(T, 1e-6) / 96.0;
        const int nth = T > 0 ? std::max(2, (int)std::llround(T / dth) + 1) : 2;
        HeightCoeffs C;
        C.sgrid = uA.sgrid;
        C.times.resize(nth);
        for (int k = 0; k < nth; ++k) C.times[k] = T > 0 ? T * k / (nth - 1) : k * 1e-6;
        const int ns = uA.sgrid.n;
        C.Aprin.assign(nth, std::vector<double>(ns, 1.0));
        C.a1.assign(nth, std::vector<double>(ns, 0.0));
        C.a0.assign(nth, std::vector<double>(ns, 0.0));
        C.f.assign(nth, std::vector<double>(ns, 0.0));
        C.b1e.assign(nth, {1.0, 1.0});
        C.b0e.assign(nth, {0.0, 0.0});
        C.fBe.assign(nth, {0.0, 0.0});
        const double d1m = uA.prof.d[1], d3m = uA.prof.d[3], d4m = uA.prof.d[4],
                     d6m = uA.prof.d[6];
        for (int k = 0; k < nth; ++k) {
            const Frame2D frk = build_frame(traj, C.times[k], delta, eps);
            const FrameCoeffs fc = sample_frame_coeffs(frk, uA.sgrid, opt.coeff_stencil);
            for (int i = 0; i < ns; ++i) {
                C.Aprin[k][i] = fc.Aprin[i];
                C.a1[k][i] = fc.drift[i] - 2.0 * (d4m / d1m) * fc.p1[i];
                C.a0[k][i] = -fc.m1[i] + (d4m / d1m) * fc.q2[i];
                C.f[k][i] = (d3m * fc.m2[i] / 2.0 - d6m * fc.q3[i] / 6.0) / d1m;
            }
            for (int e : {0, 1}) {
                C.b1e[k][e] = fc.b1[e];
                C.b0e[k][e] = fc.b0[e];
                // f^B from the measured wall stencils (vanishes on flat walls)
                C.fBe[k][e] = -fc.nr1[e] * (uA.prof.d[2] / d1m);
            }
        }
        uA.h2 = solve_height(C);
    }

    // per-(s,t)-sample linearized solves for the inner corrections
    const auto ws = make_scalar_linode_workspace(uA.prof);
    const int nw = uA.prof.grid.n;
    const double hw = uA.prof.grid.h();
    const int stride = (nw - 1) / (uA.rho_grid.n - 1);
    require(stride * (uA.rho_grid.n - 1) == nw - 1, "BadGrid", "rho table must subsample the work grid");
    const int ns = uA.sgrid.n;
    uA.u2.assign(nt, std::vector<std::vector<double>>(ns));
    uA.u3.assign(nt, std::vector<std::vector<double>>(ns));
    uA.du2.assign(nt, std::vector<std::vector<double>>(ns));
    uA.du3.assign(nt, std::vector<std::vector<double>>(ns));
    const double d1m = uA.prof.d[1], d3m = uA.prof.d[3], d4m = uA.prof.d[4], d6m = uA.prof.d[6];
    std::vector<double> A2(nw), A3(nw);
    auto downsample = [&](const std::vector<double>& w) {
        std::vector<double> out(uA.rho_grid.n);
        for (int i = 0; i < uA.rho_grid.n; ++i) out[i] = w[(size_t)i * stride];
        return out;
    };
    auto fd4 = [&](const std::vector<double>& w) {
        std::vector<double> d(nw, 0.0);
        for (int i = 2; i < nw - 2; ++i)
            d[i] = (-w[i + 2] + 8 * w[i + 1] - 8 * w[i - 1] + w[i - 2]) / (12 * hw);
        d[0] = (w[1] - w[0]) / hw;
        d[1] = (w[2] - w[0]) / (2 * hw);
        d[nw - 2] = (w[nw - 1] - w[nw - 3]) / (2 * hw);
        d[nw - 1] = (w[nw - 1] - w[nw - 2]) / hw;
        return d;
    };
    for (int k = 0; k < nt; ++k) {
        const auto& fc = uA.coeffs[k];
        const Spline h2s = uA.h2.spline_at(uA.times[k]);
        for (int i = 0; i < ns; ++i) {
            const double s = uA.sgrid.node(i);
            const double f1 = (d3m * fc.m2[i] / 2.0 - d6m * fc.q3[i] / 6.0) / d1m;
            const double h2v = h2s(s), h2p = h2s.deriv(s);
            for (int j = 0; j < nw; ++j) {
                const double rho = uA.prof.grid.node(j);
                const double thp = uA.prof.dcomp[0][j];
                const double thpp = uA.prof.f.d1(uA.prof.comp[0][j]);
                const double R1 = thp * rho * fc.m1[i] - 0.5 * thpp * rho * rho * fc.q2[i];
                const double R2 =
                    thp * (0.5 * rho * rho * fc.m2[i] - f1 + (d4m / d1m) * fc.q2[i] * h2v -
                           2.0 * (d4m / d1m) * fc.p1[i] * h2p) +
                    thpp * (-rho * rho * rho * fc.q3[i] / 6.0 - rho * h2v * fc.q2[i] +
                            2.0 * rho * fc.p1[i] * h2p);
                A2[j] = -R1;
                A3[j] = -R2;
            }
            const auto c2 = check_compatibility(A2, uA.prof, 1.0);
            uA.compat_worst = std::max(uA.compat_worst, std::abs(c2.value));
            require(std::abs(c2.value) <= opt.compat_tol, "CompatibilityDefect",
                    "R1 compatibility defect " + std::to_string(c2.value));
            LinodeInfo info2, info3;
            const auto w2 = solve_scalar_linode_ws(A2, uA.prof, ws, &info2, 1e-4);
            const auto w3 = solve_scalar_linode_ws(A3, uA.prof, ws, &info3, 1e-4);
            uA.u2[k][i] = downsample(w2);
            uA.u3[k][i] = downsample(w3);
            uA.du2[k][i] = downsample(fd4(w2));
            uA.du3[k][i] = downsample(fd4(w3));
        }
    }
    return uA;
}

RemainderReport remainder_report(const ApproxSolution& uA, int ns, int nr, int nt) {
    RemainderReport rep;
    rep.c_rate = 0.5 * uA.beta;
    const double eps = uA.eps;
    const double eM = uA.M == 0 ? 1.0 : eps * eps;          // eps^M
    const double eM1 = uA.M == 0 ? eps : eps * eps * eps;   // eps^{M+1}
    const int ntimes = std::max(1, std::min(nt, (int)uA.times.size()));
    for (int kt = 0; kt < ntimes; ++kt) {
        const int ti = (int)((uA.times.size() - 1) * (kt + 0.5) / ntimes);
        const double t = uA.times[ti];
        const Frame2D& fr = uA.frames[ti];
        for (int is = 0; is < ns; ++is) {
            const double s = (is + 0.5) / ns;
            for (int ir = 0; ir < nr; ++ir) {
                const double rr = -1.8 * uA.delta + 3.6 * uA.delta * ir / (nr - 1);
                const auto p = fr.point_on_normal(s, rr);
                if (p[0] < 1e-3 || p[0] > 1 - 1e-3 || p[1] < 1e-3 || p[1] > 1 - 1e-3) continue;
                const auto d = uA.eval_derivs(p[0], p[1], t);
                const double rA = d.ut - d.lap + uA.f.d1(d.u) / (eps * eps);
                rep.max_rA = std::max(rep.max_rA, std::abs(rA));
                const double env = eM * std::exp(-rep.c_rate * std::abs(d.rho)) + eM1;
                rep.C_fit = std::max(rep.C_fit, std::abs(rA) / env);
            }
        }
        // side-wall normal derivative (x-walls)
        for (int iy = 1; iy < 33; ++iy) {
            const double y = iy / 33.0;
            for (double x : {0.0, 1.0}) {
                const auto d = uA.eval_derivs(x, y, t);
                rep.max_sA = std::max(rep.max_sA, std::abs(d.ux));
            }
        }
        // far field is exactly +-1
        for (int iy = 0; iy < 9; ++iy) {
            const double x = 0.1 + 0.8 * iy / 8.0;
            for (double y : {0.02, 0.98}) {
                const double u = uA.eval(x, y, t);
                const double target = y > 0.5 ? 1.0 : -1.0;
                if (std::abs(fr.r_at(x, y)) > 2.0 * uA.delta)
                    rep.far_field_max = std::max(rep.far_field_max, std::abs(u - target));
            }
        }
    }
    return rep;
}

double zero_level_distance(const ApproxSolution& uA, double t, int ns) {
    const int ti = uA.tindex(t);
    const Frame2D& fr = uA.frames[ti];
    double worst = 0;
    for (int is = 0; is < ns; ++is) {
        const double s = (is + 0.5) / ns;
        double lo = -0.5 * uA.delta, hi = 0.5 * uA.delta;
        auto val = [&](double rr) {
            const auto p = fr.point_on_normal(s, rr);
            return uA.eval(p[0], p[1], uA.times[ti]);
        };
        double flo = val(lo), fhi = val(hi);
        if (flo > 0 || fhi < 0) continue;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = val(mid);
            if (fm >= 0)
                hi = mid, fhi = fm;
            else
                lo = mid, flo = fm;
        }
        worst = std::max(worst, std::abs(0.5 * (lo + hi)));
    }
    return worst;
}

NormSet difference_norms(const std::vector<std::vector<double>>& uexact,
                         const std::vector<double>& sample_times, int nx, int ny, int m,
                         const ApproxSolution& uA, double delta,
                         const std::vector<double>& embed_off,
                         const std::vector<double>& embed_dir) {
    NormSet out;
    require(uexact.size() == sample_times.size(), "BadInput", "sample count mismatch");
    const double hx = 1.0 / (nx - 1), hy = 1.0 / (ny - 1);
    const size_t plane = (size_t)nx * ny;
    std::vector<double> grad_off_t(sample_times.size(), 0.0), grad_tau_t(sample_times.size(), 0.0),
        grad_n_t(sample_times.size(), 0.0);

    for (size_t kt = 0; kt < sample_times.size(); ++kt) {
        const double t = sample_times[kt];
        const int ti = uA.tindex(t);
        Frame2D fr = uA.frames[ti];
        if (fr.nx != nx || fr.ny != ny) fr.cache_fields(nx, ny);
        const auto uAfield = uA.sample_grid(nx, ny, t);

        double l2 = 0;
        std::vector<double> d(m * plane);
        for (int c = 0; c < m; ++c)
            for (size_t p = 0; p < plane; ++p)
                d[c * plane + p] =
                    uexact[kt][c * plane + p] - (embed_off[c] + embed_dir[c] * uAfield[p]);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double wq = ((i == 0 || i == nx - 1) ? 0.5 : 1.0) *
                                  ((j == 0 || j == ny - 1) ? 0.5 : 1.0) * hx * hy;
                for (int c = 0; c < m; ++c) {
                    const double dd = d[c * plane + (size_t)j * nx + i];
                    l2 += wq * dd * dd;
                }
            }
        out.sup_l2 = std::max(out.sup_l2, std::sqrt(l2));

        double go = 0, gt = 0, gn = 0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const size_t p = (size_t)j * nx + i;
                const double wq = ((i == 0 || i == nx - 1) ? 0.5 : 1.0) *
                                  ((j == 0 || j == ny - 1) ? 0.5 : 1.0) * hx * hy;
                const int il = i > 0 ? i - 1 : 1, ir2 = i < nx - 1 ? i + 1 : nx - 2;
                const int jd = j > 0 ? j - 1 : 1, ju = j < ny - 1 ? j + 1 : ny - 2;
                const bool tube = std::abs(fr.r_field[p]) < delta;
                for (int c = 0; c < m; ++c) {
                    const double dx =
                        (d[c * plane + (size_t)j * nx + ir2] - d[c * plane + (size_t)j * nx + il]) /
                        (2 * hx);
                    const double dy =
                        (d[c * plane + (size_t)ju * nx + i] - d[c * plane + (size_t)jd * nx + i]) /
                        (2 * hy);
                    if (!tube) {
                        go += wq * (dx * dx + dy * dy);
                    } else {
                        const double nxv = fr.grx_field[p], nyv = fr.gry_field[p];
                        const double dn = dx * nxv + dy * nyv;
                        const double tx = dx - dn * nxv, ty = dy - dn * nyv;
                        gt += wq * (tx * tx + ty * ty);
                        gn += wq * dn * dn;
                    }
                }
            }
        grad_off_t[kt] = go;
        grad_tau_t[kt] = gt;
        grad_n_t[kt] = gn;
    }
    // time integration (trapezoid over the sample times)
    double Go = 0, Gt = 0, Gn = 0;
    for (size_t k = 0; k < sample_times.size(); ++k) {
        double w = 0;
        if (k > 0) w += 0.5 * (sample_times[k] - sample_times[k - 1]);
        if (k + 1 < sample_times.size()) w += 0.5 * (sample_times[k + 1] - sample_times[k]);
        Go += w * grad_off_t[k];
        Gt += w * grad_tau_t[k];
        Gn += w * grad_n_t[k];
    }
    out.grad_off = std::sqrt(Go);
    out.grad_tau = std::sqrt(Gt);
    out.eps_grad_n = uA.eps * std::sqrt(Gn);
    return out;
}

} // namespace sil
