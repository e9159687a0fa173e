#include "sil/halfplane.hpp"

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/lin.hpp"

namespace sil {

namespace {

std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(n, 0.0);
    w[0] = w[n - 1] = h / 3.0;
    for (int i = 1; i < n - 1; i += 2) w[i] = 4.0 * h / 3.0;
    for (int i = 2; i < n - 1; i += 2) w[i] = 2.0 * h / 3.0;
    return w;
}

void fill_common(HalfPlaneProblem& pr, const Profile1D& prof) {
    const int nR = pr.nR(), m = pr.m;
    pr.theta0p.assign((size_t)m * nR, 0.0);
    pr.qblock.assign((size_t)nR * m * m, 0.0);
    for (int i = 0; i < nR; ++i) {
        const double R = pr.gridR.node(i);
        if (!pr.vector) {
            pr.theta0p[i] = prof.theta_d1(R);
            pr.qblock[i] = prof.f.d2(prof.theta(R));
        } else {
            const auto tp = prof.vtheta_d1(R);
            const auto H = prof.W.hess(prof.vtheta(R));
            for (int c = 0; c < m; ++c) {
                pr.theta0p[(size_t)c * nR + i] = tp[c];
                for (int c2 = 0; c2 < m; ++c2)
                    pr.qblock[(size_t)i * m * m + c * m + c2] = H[(size_t)c * m + c2];
            }
        }
    }
    const auto wR = simpson_weights(nR, pr.gridR.h());
    pr.d1 = 0;
    for (int i = 0; i < nR; ++i)
        for (int c = 0; c < m; ++c)
            pr.d1 += wR[i] * pr.theta0p[(size_t)c * nR + i] * pr.theta0p[(size_t)c * nR + i];
    // measured data size at the truncation edges
    const int nH = pr.nH();
    double eg = 0;
    for (int j = 0; j < nH; ++j)
        for (int c = 0; c < m; ++c) {
            eg = std::max(eg, std::abs(pr.G[((size_t)j * nR + 0) * m + c]));
            eg = std::max(eg, std::abs(pr.G[((size_t)j * nR + nR - 1) * m + c]));
        }
    for (int i = 0; i < nR; ++i)
        for (int c = 0; c < m; ++c)
            eg = std::max(eg, std::abs(pr.G[(((size_t)nH - 1) * nR + i) * m + c]));
    pr.edge_data_G = eg;
    double egg = 0;
    for (int c = 0; c < m; ++c)
        egg = std::max({egg, std::abs(pr.g[(size_t)0 * m + c]),
                        std::abs(pr.g[(size_t)(nR - 1) * m + c])});
    pr.edge_data_g = egg;
}

} // namespace

HalfPlaneProblem make_halfplane_problem(const Profile1D& prof, double LR, double LH, int nR,
                                        int nH, const std::function<double(double, double)>& Gfn,
                                        const std::function<double(double)>& gfn) {
    require(nR % 2 == 1 && nH % 2 == 1, "BadGrid", "halfplane grids must be odd");
    HalfPlaneProblem pr;
    pr.gridR = Grid1D::symmetric(LR, nR);
    pr.gridH = Grid1D{0.0, LH, nH};
    pr.m = 1;
    pr.vector = false;
    pr.G.assign((size_t)nR * nH, 0.0);
    pr.g.assign(nR, 0.0);
    for (int j = 0; j < nH; ++j)
        for (int i = 0; i < nR; ++i)
            pr.G[(size_t)j * nR + i] = Gfn(pr.gridR.node(i), pr.gridH.node(j));
    for (int i = 0; i < nR; ++i) pr.g[i] = gfn(pr.gridR.node(i));
    fill_common(pr, prof);
    return pr;
}

HalfPlaneProblem make_halfplane_problem_vec(
    const Profile1D& prof, double LR, double LH, int nR, int nH,
    const std::function<std::vector<double>(double, double)>& Gfn,
    const std::function<std::vector<double>(double)>& gfn) {
    require(nR % 2 == 1 && nH % 2 == 1, "BadGrid", "halfplane grids must be odd");
    HalfPlaneProblem pr;
    pr.gridR = Grid1D::symmetric(LR, nR);
    pr.gridH = Grid1D{0.0, LH, nH};
    pr.m = prof.m;
    pr.vector = true;
    const int m = pr.m;
    pr.G.assign((size_t)nR * nH * m, 0.0);
    pr.g.assign((size_t)nR * m, 0.0);
    for (int j = 0; j < nH; ++j)
        for (int i = 0; i < nR; ++i) {
            const auto v = Gfn(pr.gridR.node(i), pr.gridH.node(j));
            for (int c = 0; c < m; ++c) pr.G[((size_t)j * nR + i) * m + c] = v[c];
        }
    for (int i = 0; i < nR; ++i) {
        const auto v = gfn(pr.gridR.node(i));
        for (int c = 0; c < m; ++c) pr.g[(size_t)i * m + c] = v[c];
    }
    fill_common(pr, prof);
    return pr;
}

HPCompatibility compatibility(const HalfPlaneProblem& prob, double tol) {
    const int nR = prob.nR(), nH = prob.nH(), m = prob.m;
    const auto wR = simpson_weights(nR, prob.gridR.h());
    const auto wH = simpson_weights(nH, prob.gridH.h());
    double val = 0, nG = 0, ng = 0, nt = 0;
    for (int j = 0; j < nH; ++j)
        for (int i = 0; i < nR; ++i)
            for (int c = 0; c < m; ++c) {
                const double Gc = prob.G[((size_t)j * nR + i) * m + c];
                val += wR[i] * wH[j] * Gc * prob.theta0p[(size_t)c * nR + i];
                nG += wR[i] * wH[j] * Gc * Gc;
            }
    for (int i = 0; i < nR; ++i)
        for (int c = 0; c < m; ++c) {
            const double gc = prob.g[(size_t)i * m + c];
            val += wR[i] * gc * prob.theta0p[(size_t)c * nR + i];
            ng += wR[i] * gc * gc;
            nt += wR[i] * prob.theta0p[(size_t)c * nR + i] * prob.theta0p[(size_t)c * nR + i];
        }
    HPCompatibility r;
    r.value = val;
    r.scale = (std::sqrt(nG) + std::sqrt(ng)) * std::sqrt(nt);
    r.compatible = std::abs(val) <= tol * std::max(r.scale, 1e-300);
    return r;
}

HPDecomposition decompose(const HalfPlaneProblem& prob) {
    const int nR = prob.nR(), nH = prob.nH(), m = prob.m;
    const auto wR = simpson_weights(nR, prob.gridR.h());
    HPDecomposition d;
    d.G_tilde.assign(nH, 0.0);
    d.G_par.assign(prob.G.size(), 0.0);
    d.G_perp.assign(prob.G.size(), 0.0);
    d.g_par.assign(prob.g.size(), 0.0);
    d.g_perp.assign(prob.g.size(), 0.0);
    for (int j = 0; j < nH; ++j) {
        double t = 0;
        for (int i = 0; i < nR; ++i)
            for (int c = 0; c < m; ++c)
                t += wR[i] * prob.G[((size_t)j * nR + i) * m + c] *
                     prob.theta0p[(size_t)c * nR + i];
        d.G_tilde[j] = t;
        for (int i = 0; i < nR; ++i)
            for (int c = 0; c < m; ++c) {
                const size_t ix = ((size_t)j * nR + i) * m + c;
                d.G_par[ix] = t * prob.theta0p[(size_t)c * nR + i] / prob.d1;
                d.G_perp[ix] = prob.G[ix] - d.G_par[ix];
            }
    }
    double gp = 0;
    for (int i = 0; i < nR; ++i)
        for (int c = 0; c < m; ++c)
            gp += wR[i] * prob.g[(size_t)i * m + c] * prob.theta0p[(size_t)c * nR + i];
    d.g_par_coef = gp;
    for (int i = 0; i < nR; ++i)
        for (int c = 0; c < m; ++c) {
            const size_t ix = (size_t)i * m + c;
            d.g_par[ix] = gp * prob.theta0p[(size_t)c * nR + i] / prob.d1;
            d.g_perp[ix] = prob.g[ix] - d.g_par[ix];
        }
    // residual projections of the perpendicular parts
    double worst = 0;
    for (int j = 0; j < nH; ++j) {
        double t = 0;
        for (int i = 0; i < nR; ++i)
            for (int c = 0; c < m; ++c)
                t += wR[i] * d.G_perp[((size_t)j * nR + i) * m + c] *
                     prob.theta0p[(size_t)c * nR + i];
        worst = std::max(worst, std::abs(t));
    }
    d.max_perp_projection = worst;
    return d;
}

namespace {

// Cumulative integral from the top node downward, 4th order, with an
// exponential tail correction fitted on the last samples.
std::vector<double> cumulative_from_top(const std::vector<double>& f, double h) {
    const int n = (int)f.size();
    std::vector<double> I(n, 0.0);
    // tail beyond the last node
    double tail = 0;
    {
        int k0 = std::max(0, n - 9);
        std::vector<double> zs, ls;
        for (int i = k0; i < n; ++i)
            if (std::abs(f[i]) > 1e-300) {
                zs.push_back(i * h);
                ls.push_back(std::log(std::abs(f[i])));
            }
        if ((int)zs.size() >= 4) {
            const auto fit = fit_line(zs, ls);
            const double lam = -fit.slope;
            if (lam > 0.05) tail = f[n - 1] / lam;
        }
    }
    I[n - 1] = tail;
    auto seg = [&](int j) {
        // integral over [x_j, x_{j+1}] by a cubic through 4 nearby nodes
        if (j >= 1 && j + 2 < n)
            return h * (-f[j - 1] + 13 * f[j] + 13 * f[j + 1] - f[j + 2]) / 24.0;
        if (j + 3 < n) return h * (9 * f[j] + 19 * f[j + 1] - 5 * f[j + 2] + f[j + 3]) / 24.0;
        if (j >= 2) return h * (9 * f[j + 1] + 19 * f[j] - 5 * f[j - 1] + f[j - 2]) / 24.0;
        return h * 0.5 * (f[j] + f[j + 1]);
    };
    for (int j = n - 2; j >= 0; --j) I[j] = I[j + 1] + seg(j);
    return I;
}

struct HPSystem {
    int nRu = 0, nHu = 0, m = 1, N = 0, kd = 0;
    double hR = 0, hH = 0;
    GenBand A;
    std::vector<double> b, D; // D: trapezoid weight in H (0.5 on the Neumann row)
    size_t pidx(int iu, int ju, int c) const { return ((size_t)ju * nRu + iu) * m + c; }
};

HPSystem assemble(const HalfPlaneProblem& prob) {
    const int nR = prob.nR(), nH = prob.nH(), m = prob.m;
    HPSystem S;
    S.nRu = nR - 2;
    S.nHu = nH - 1;
    S.m = m;
    S.N = S.nRu * S.nHu * m;
    S.kd = S.nRu * m; // y-neighbor distance dominates (>= in-node coupling m-1)
    S.hR = prob.gridR.h();
    S.hH = prob.gridH.h();
    S.A = GenBand(S.N, S.kd);
    S.b.assign(S.N, 0.0);
    S.D.assign(S.N, 1.0);
    const double ihR2 = 1.0 / (S.hR * S.hR), ihH2 = 1.0 / (S.hH * S.hH);
    for (int ju = 0; ju < S.nHu; ++ju)
        for (int iu = 0; iu < S.nRu; ++iu) {
            const int i = iu + 1;
            for (int c = 0; c < m; ++c) {
                const size_t p = S.pidx(iu, ju, c);
                S.A.at((int)p, (int)p) = 2.0 * ihR2 + 2.0 * ihH2 +
                                         prob.qblock[(size_t)i * m * m + c * m + c];
                for (int c2 = 0; c2 < m; ++c2)
                    if (c2 != c)
                        S.A.at((int)p, (int)S.pidx(iu, ju, c2)) =
                            prob.qblock[(size_t)i * m * m + c * m + c2];
                if (iu > 0) S.A.at((int)p, (int)S.pidx(iu - 1, ju, c)) = -ihR2;
                if (iu + 1 < S.nRu) S.A.at((int)p, (int)S.pidx(iu + 1, ju, c)) = -ihR2;
                if (ju > 0) S.A.at((int)p, (int)S.pidx(iu, ju - 1, c)) = -ihH2;
                if (ju + 1 < S.nHu)
                    S.A.at((int)p, (int)S.pidx(iu, ju + 1, c)) = (ju == 0 ? -2.0 : -1.0) * ihH2;
                S.b[p] = prob.G[((size_t)ju * nR + i) * m + c];
                if (ju == 0) {
                    S.b[p] += 2.0 * prob.g[(size_t)i * m + c] / S.hH;
                    S.D[p] = 0.5;
                }
            }
        }
    return S;
}

double dotD(const HPSystem& S, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += S.D[i] * a[i] * b[i];
    return s * S.hR * S.hH;
}

} // namespace

HalfPlaneSolution solve_parallel(const HalfPlaneProblem& prob, double compat_tol) {
    const auto comp = compatibility(prob, compat_tol);
    require(comp.compatible, "Incompatible",
            "halfplane data incompatible (" + std::to_string(comp.value) + ")");
    const int nR = prob.nR(), nH = prob.nH(), m = prob.m;
    const auto dec = decompose(prob);
    const auto I1 = cumulative_from_top(dec.G_tilde, prob.gridH.h());
    const auto I2 = cumulative_from_top(I1, prob.gridH.h());
    HalfPlaneSolution sol;
    sol.u.assign((size_t)nR * nH * m, 0.0);
    for (int j = 0; j < nH; ++j)
        for (int i = 0; i < nR; ++i)
            for (int c = 0; c < m; ++c)
                sol.u[((size_t)j * nR + i) * m + c] =
                    -I2[j] * prob.theta0p[(size_t)c * nR + i] / prob.d1;
    sol.compat_value = comp.value;
    sol.compat_scale = comp.scale;
    // flux consistency: -dH u|_0 = I1(0) * (-theta0'/d1) vs g_par
    double tmax = 0;
    for (int i = 0; i < nR; ++i)
        for (int c = 0; c < m; ++c)
            tmax = std::max(tmax, std::abs(prob.theta0p[(size_t)c * nR + i]));
    sol.flux_error = std::abs(-I1[0] - dec.g_par_coef) * tmax / prob.d1;
    return sol;
}

HalfPlaneSolution solve_full(const HalfPlaneProblem& prob, const HPSolveOptions& opt) {
    const auto comp = compatibility(prob, opt.compat_tol);
    if (!comp.compatible && !opt.deflate_incompatible)
        throw Error("Incompatible",
                    "halfplane data incompatible (" + std::to_string(comp.value) + ")");
    const int nR = prob.nR(), nH = prob.nH(), m = prob.m;
    auto S = assemble(prob);
    BandLU lu;
    lu.factor(S.N, S.kd, S.A.band);

    // Measured kernel mode: inverse iteration seeded with the affine-in-H
    // continuation of theta0'.
    std::vector<double> v(S.N, 0.0);
    for (int ju = 0; ju < S.nHu; ++ju)
        for (int iu = 0; iu < S.nRu; ++iu)
            for (int c = 0; c < m; ++c)
                v[S.pidx(iu, ju, c)] = prob.theta0p[(size_t)c * nR + (iu + 1)] *
                                       (1.0 - prob.gridH.node(ju) / prob.gridH.b);
    const std::vector<double> seed = v;
    double theta = 0;
    for (int it = 0; it < 50; ++it) {
        const double nv = std::sqrt(dotD(S, v, v));
        for (double& x : v) x /= nv;
        auto Av = S.A.apply(v);
        theta = dotD(S, v, Av);
        double rr = 0;
        for (size_t i = 0; i < v.size(); ++i) {
            const double e = Av[i] - theta * v[i];
            rr += S.D[i] * e * e;
        }
        if (std::sqrt(rr * S.hR * S.hH) < 1e-12 * std::max(1.0, std::abs(theta)) && it > 3) break;
        v = lu.solve(v);
    }
    {
        double nv = std::sqrt(dotD(S, v, v));
        if (dotD(S, seed, v) < 0) nv = -nv; // align with the analytic seed direction
        for (double& x : v) x /= nv;
        auto Av = S.A.apply(v);
        theta = dotD(S, v, Av);
    }

    HalfPlaneSolution sol;
    sol.kernel_rq = theta;
    sol.compat_value = comp.value;
    sol.compat_scale = comp.scale;
    sol.rcond = lu.rcond();
    require(1.0 / std::max(lu.rcond(), 1e-300) <= opt.cond_cap, "IllConditioned",
            "condition estimate exceeds the configured cap");
    sol.defect_discrete = dotD(S, v, S.b);

    std::vector<double> x;
    if (!comp.compatible) {
        // bordered solve: project the load onto the complement of the kernel mode
        auto y = lu.solve(S.b);
        auto z = lu.solve(v);
        sol.mu = dotD(S, v, y) / dotD(S, v, z);
        x.resize(S.N);
        for (int p = 0; p < S.N; ++p) x[p] = y[p] - sol.mu * z[p];
        sol.deflated = true;
    } else {
        x = lu.solve(S.b);
    }

    // residual of the discrete system
    {
        auto Ax = S.A.apply(x);
        double r = 0;
        for (int p = 0; p < S.N; ++p) r = std::max(r, std::abs(S.b[p] - Ax[p]));
        sol.interior_residual = r;
    }

    // embed into the full grid
    sol.u.assign((size_t)nR * nH * m, 0.0);
    sol.kernel_mode.assign((size_t)nR * nH * m, 0.0);
    for (int ju = 0; ju < S.nHu; ++ju)
        for (int iu = 0; iu < S.nRu; ++iu)
            for (int c = 0; c < m; ++c) {
                sol.u[((size_t)ju * nR + (iu + 1)) * m + c] = x[S.pidx(iu, ju, c)];
                sol.kernel_mode[((size_t)ju * nR + (iu + 1)) * m + c] = v[S.pidx(iu, ju, c)];
            }

    // one-sided flux check at H = 0
    double fe = 0;
    for (int i = 1; i < nR - 1; ++i)
        for (int c = 0; c < m; ++c) {
            const double du =
                (-3.0 * sol.u[((size_t)0 * nR + i) * m + c] +
                 4.0 * sol.u[((size_t)1 * nR + i) * m + c] -
                 sol.u[((size_t)2 * nR + i) * m + c]) /
                (2.0 * S.hH);
            fe = std::max(fe, std::abs(-du - prob.g[(size_t)i * m + c]));
        }
    sol.flux_error = fe;

    // measured H-decay of the solution on the upper half
    {
        std::vector<double> zs, ls;
        for (int j = 0; j < nH; ++j) {
            if (prob.gridH.node(j) < 0.5 * prob.gridH.b) continue;
            double mx = 0;
            for (int i = 0; i < nR; ++i)
                for (int c = 0; c < m; ++c)
                    mx = std::max(mx, std::abs(sol.u[((size_t)j * nR + i) * m + c]));
            if (mx > 1e-250) {
                zs.push_back(prob.gridH.node(j));
                ls.push_back(std::log(mx));
            }
        }
        if (zs.size() >= 4) sol.gamma_star = -fit_line(zs, ls).slope;
    }
    return sol;
}

} // namespace sil
