#include "sil/profile1d.hpp"

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/lin.hpp"

namespace sil {

namespace {

// Hermite cubic on a uniform grid from values y and derivatives dy.
double hermite(const Grid1D& g, const std::vector<double>& y, const std::vector<double>& dy,
               double z) {
    const double h = g.h();
    int i = (int)std::floor((z - g.a) / h);
    i = std::max(0, std::min(g.n - 2, i));
    const double t = (z - g.node(i)) / h;
    const double t2 = t * t, t3 = t2 * t;
    return y[i] * (2 * t3 - 3 * t2 + 1) + y[i + 1] * (-2 * t3 + 3 * t2) +
           h * (dy[i] * (t3 - 2 * t2 + t) + dy[i + 1] * (t3 - t2));
}

} // namespace

double Profile1D::theta(double z) const {
    if (z <= grid.a) return -1.0;
    if (z >= grid.b) return 1.0;
    return hermite(grid, comp[0], dcomp[0], z);
}

double Profile1D::theta_d1(double z) const {
    const double v = 2.0 * (f.eval(theta(z)) - f.eval(-1.0));
    return std::sqrt(std::max(0.0, v));
}

double Profile1D::theta_d2(double z) const { return f.d1(theta(z)); }

std::vector<double> Profile1D::vtheta(double z) const {
    std::vector<double> u(m);
    if (z <= grid.a) return W.well_minus;
    if (z >= grid.b) return W.well_plus;
    for (int c = 0; c < m; ++c) u[c] = spl[c](z);
    return u;
}

std::vector<double> Profile1D::vtheta_d1(double z) const {
    std::vector<double> u(m, 0.0);
    if (z <= grid.a || z >= grid.b) return u;
    for (int c = 0; c < m; ++c) u[c] = dspl[c](z);
    return u;
}

std::vector<double> Profile1D::vtheta_d2(double z) const { return W.grad(vtheta(z)); }

double Profile1D::midpoint_functional(const std::vector<double>& u0) const {
    const auto Ru = W.reflect(u0);
    // reflect() is affine; its linear part applied to u is reflect(u) - reflect(0).
    const auto R0 = W.reflect(std::vector<double>(m, 0.0));
    double s = 0;
    for (int c = 0; c < m; ++c)
        s += (W.well_minus[c] - W.well_plus[c]) * ((Ru[c] - R0[c]) - u0[c]);
    return s;
}

Profile1D solve_scalar_profile(const ScalarPotential& f, double L, int n) {
    require(L >= 6.0, "BadGrid", "profile needs L >= 6");
    require(n >= 513 && n % 2 == 1, "BadGrid", "profile needs odd n >= 513");
    require(validate(f, 1e-8).pass, "InvalidPotential", "scalar potential failed validation");

    Profile1D p;
    p.grid = Grid1D::symmetric(L, n);
    p.m = 1;
    p.f = f;
    p.comp.assign(1, std::vector<double>(n, 0.0));
    p.dcomp.assign(1, std::vector<double>(n, 0.0));

    const double fmin = f.eval(-1.0);
    auto g = [&](double w) {
        const double v = 2.0 * (f.eval(w) - fmin);
        require(v > -1e-13, "NonMonotone", "first-order profile ODE integrand negative");
        if (v <= 0.0 && std::abs(w) < 1.0 - 1e-8)
            throw Error("NonMonotone", "integrand vanishes away from the wells");
        return std::sqrt(std::max(0.0, v));
    };

    const int mid = (n - 1) / 2;
    const double h = p.grid.h();
    const int nsub = 8;
    auto rk4_step = [&](double w, double dz) {
        const double k1 = g(w);
        const double k2 = g(w + 0.5 * dz * k1);
        const double k3 = g(w + 0.5 * dz * k2);
        const double k4 = g(w + dz * k3);
        return w + dz / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    };
    p.comp[0][mid] = 0.0;
    for (int dir : {+1, -1}) {
        double w = 0.0;
        for (int i = mid + dir; i >= 0 && i < n; i += dir) {
            for (int s = 0; s < nsub; ++s) w = rk4_step(w, dir * h / nsub);
            w = std::clamp(w, -1.0, 1.0);
            p.comp[0][i] = w;
        }
    }
    for (int i = 0; i < n; ++i)
        p.dcomp[0][i] = std::sqrt(std::max(0.0, 2.0 * (f.eval(p.comp[0][i]) - fmin)));

    // Second-order residual at interior nodes.
    double res = 0;
    for (int i = 1; i < n - 1; ++i) {
        const double lap = (p.comp[0][i + 1] - 2 * p.comp[0][i] + p.comp[0][i - 1]) / (h * h);
        res = std::max(res, std::abs(-lap + f.d1(p.comp[0][i])));
    }
    p.ode_residual = res;
    p.d = profile_moments(p);
    const auto df = estimate_decay_rate(p);
    p.beta = df.beta;
    p.beta_fit_residual = df.fit_residual;
    return p;
}

namespace {

double vec_energy(const VectorPotential& W, const std::vector<std::vector<double>>& u, double h) {
    const int n = (int)u[0].size(), m = (int)u.size();
    double E = 0;
    std::vector<double> v(m);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < m; ++c) v[c] = u[c][i];
        E += trap_weight(i, n, h) * W.eval(v);
        if (i + 1 < n) {
            double gsq = 0;
            for (int c = 0; c < m; ++c) {
                const double d = (u[c][i + 1] - u[c][i]) / h;
                gsq += d * d;
            }
            E += 0.5 * h * gsq;
        }
    }
    return E;
}

// Energy gradient w.r.t. interior nodes (ends clamped).
void vec_energy_grad(const VectorPotential& W, const std::vector<std::vector<double>>& u, double h,
                     std::vector<std::vector<double>>& grad) {
    const int n = (int)u[0].size(), m = (int)u.size();
    std::vector<double> v(m);
    for (int c = 0; c < m; ++c) std::fill(grad[c].begin(), grad[c].end(), 0.0);
    for (int i = 1; i < n - 1; ++i) {
        for (int c = 0; c < m; ++c) v[c] = u[c][i];
        const auto gW = W.grad(v);
        for (int c = 0; c < m; ++c) {
            const double lap = (u[c][i + 1] - 2 * u[c][i] + u[c][i - 1]) / (h * h);
            grad[c][i] = h * (-lap + gW[c]);
        }
    }
}

} // namespace

Profile1D solve_vector_profile(const VectorPotential& W, double L, int n,
                               const VectorProfileOptions& opt) {
    require(n >= 513 && n % 2 == 1, "BadGrid", "profile needs odd n >= 513");
    require(validate(W, 1e-8).pass, "InvalidPotential", "vector potential failed validation");
    const int m = W.dim;

    Profile1D p;
    p.grid = Grid1D::symmetric(L, n);
    p.m = m;
    p.is_vector = true;
    p.W = W;
    const double h = p.grid.h();

    // Initializer Xi along the segment between the wells, odd cubic ramp.
    std::vector<std::vector<double>> u(m, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        const double xi = odd_ramp(p.grid.node(i));
        for (int c = 0; c < m; ++c)
            u[c][i] = 0.5 * (W.well_minus[c] + W.well_plus[c]) +
                      0.5 * xi * (W.well_plus[c] - W.well_minus[c]);
    }
    const double E_init = vec_energy(W, u, h);

    // H1-preconditioned gradient descent with Armijo backtracking. The
    // preconditioner (I - d^2/dz^2 with clamped ends) keeps the step count
    // resolution-independent.
    std::vector<double> dl(n, -1.0 / (h * h)), dd(n, 1.0 + 2.0 / (h * h)), du(n, -1.0 / (h * h));
    dd[0] = dd[n - 1] = 1.0;
    du[0] = dl[n - 1] = 0.0;
    std::vector<std::vector<double>> grad(m, std::vector<double>(n, 0.0)),
        dir(m, std::vector<double>(n, 0.0)), trial(m, std::vector<double>(n, 0.0));
    double E = E_init;
    double step = 1.0;
    for (int it = 0; it < opt.max_iters; ++it) {
        vec_energy_grad(W, u, h, grad);
        double gnorm = 0;
        for (int c = 0; c < m; ++c)
            for (int i = 0; i < n; ++i) gnorm += grad[c][i] * grad[c][i] / h;
        gnorm = std::sqrt(gnorm); // discrete L2 norm of the variational gradient
        if (gnorm < opt.grad_tol) break;
        double descent = 0;
        for (int c = 0; c < m; ++c) {
            auto rhs = grad[c];
            rhs[0] = rhs[n - 1] = 0.0;
            dir[c] = thomas_solve(dl, dd, du, rhs);
            for (int i = 0; i < n; ++i) descent += grad[c][i] * dir[c][i];
        }
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (int c = 0; c < m; ++c)
                for (int i = 0; i < n; ++i) trial[c][i] = u[c][i] - step * dir[c][i];
            const double Et = vec_energy(W, trial, h);
            if (Et <= E - 1e-4 * step * descent) {
                u.swap(trial);
                E = Et;
                ok = true;
                step *= 1.6;
                break;
            }
            step *= 0.5;
        }
        require(ok, "NoDescent", "line search failed to decrease the energy");
    }
    require(E <= E_init + 1e-12, "NoDescent", "energy above the initializer");

    // Project onto R-odd functions: u(z) <- (u(z) + R u(-z)) / 2.
    std::vector<double> v(m), rv(m);
    for (int i = 0; i <= (n - 1) / 2; ++i) {
        const int j = n - 1 - i;
        for (int c = 0; c < m; ++c) v[c] = u[c][j];
        rv = W.reflect(v);
        for (int c = 0; c < m; ++c) {
            const double a = 0.5 * (u[c][i] + rv[c]);
            u[c][i] = a;
        }
        for (int c = 0; c < m; ++c) v[c] = u[c][i];
        rv = W.reflect(v);
        for (int c = 0; c < m; ++c) u[c][j] = rv[c];
    }

    p.comp = u;
    p.energy = vec_energy(W, u, h);
    require(p.energy <= E_init + 1e-12, "NoDescent", "projection increased energy beyond initializer");

    // Derivative samples: 4th-order central differences, one-sided at ends.
    p.dcomp.assign(m, std::vector<double>(n, 0.0));
    for (int c = 0; c < m; ++c) {
        for (int i = 2; i < n - 2; ++i)
            p.dcomp[c][i] =
                (-u[c][i + 2] + 8 * u[c][i + 1] - 8 * u[c][i - 1] + u[c][i - 2]) / (12 * h);
        p.dcomp[c][0] = (u[c][1] - u[c][0]) / h;
        p.dcomp[c][1] = (u[c][2] - u[c][0]) / (2 * h);
        p.dcomp[c][n - 2] = (u[c][n - 1] - u[c][n - 3]) / (2 * h);
        p.dcomp[c][n - 1] = (u[c][n - 1] - u[c][n - 2]) / h;
    }

    // Interior ODE residual.
    double res = 0;
    for (int i = 1; i < n - 1; ++i) {
        for (int c = 0; c < m; ++c) v[c] = u[c][i];
        const auto gW = W.grad(v);
        for (int c = 0; c < m; ++c) {
            const double lap = (u[c][i + 1] - 2 * u[c][i] + u[c][i - 1]) / (h * h);
            res = std::max(res, std::abs(-lap + gW[c]));
        }
    }
    p.ode_residual = res;

    p.spl.clear();
    p.dspl.clear();
    for (int c = 0; c < m; ++c) {
        p.spl.emplace_back(p.grid, p.comp[c]);
        p.dspl.emplace_back(p.grid, p.dcomp[c]);
    }

    p.d = profile_moments(p);
    const auto df = estimate_decay_rate(p);
    p.beta = df.beta;
    p.beta_fit_residual = df.fit_residual;
    return p;
}

std::array<double, 7> profile_moments(const Profile1D& p) {
    const int n = p.grid.n;
    const double h = p.grid.h();
    std::array<double, 7> d{};
    std::vector<double> f1(n), f2(n);
    // f1 = |theta'|^2, f2 = theta' . theta''  (theta'' via the potential identity)
    for (int i = 0; i < n; ++i) {
        double a = 0, b = 0;
        if (!p.is_vector) {
            const double t1 = p.dcomp[0][i];
            const double t2 = p.f.d1(p.comp[0][i]);
            a = t1 * t1;
            b = t1 * t2;
        } else {
            std::vector<double> v(p.m);
            for (int c = 0; c < p.m; ++c) v[c] = p.comp[c][i];
            const auto gW = p.W.grad(v);
            for (int c = 0; c < p.m; ++c) {
                a += p.dcomp[c][i] * p.dcomp[c][i];
                b += p.dcomp[c][i] * gW[c];
            }
        }
        f1[i] = a;
        f2[i] = b;
    }
    auto weighted = [&](const std::vector<double>& base, int pw) {
        std::vector<double> g(n);
        for (int i = 0; i < n; ++i) g[i] = base[i] * std::pow(p.grid.node(i), pw);
        return simpson(g, h);
    };
    d[1] = weighted(f1, 0);
    d[2] = weighted(f1, 1);
    d[3] = weighted(f1, 2);
    d[4] = weighted(f2, 1);
    d[5] = weighted(f2, 2);
    d[6] = weighted(f2, 3);
    return d;
}

DecayFit estimate_decay_rate(const Profile1D& p) {
    const int n = p.grid.n;
    const double L = p.grid.b;
    std::vector<double> zs, ls;
    for (int i = 0; i < n; ++i) {
        const double z = p.grid.node(i);
        if (std::abs(z) < L / 2) continue;
        double dist = 0;
        if (!p.is_vector) {
            dist = std::abs(p.comp[0][i] - (z > 0 ? 1.0 : -1.0));
        } else {
            const auto& well = z > 0 ? p.W.well_plus : p.W.well_minus;
            for (int c = 0; c < p.m; ++c) {
                const double e = p.comp[c][i] - well[c];
                dist += e * e;
            }
            dist = std::sqrt(dist);
        }
        if (dist > 0.2 || dist < 1e-14) continue;
        zs.push_back(std::abs(z));
        ls.push_back(std::log(dist));
    }
    require((int)zs.size() >= 16, "TailTooShort", "fewer than 16 usable tail samples");
    const auto fit = fit_line(zs, ls);
    return DecayFit{-fit.slope, fit.residual, (int)zs.size()};
}

} // namespace sil
