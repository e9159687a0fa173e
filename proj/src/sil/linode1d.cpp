#include "sil/linode1d.hpp"

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/lin.hpp"

namespace sil {

namespace {

double l2norm(const std::vector<double>& v, double h, int n) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += trap_weight(i, n, h) * v[i] * v[i];
    return std::sqrt(s);
}

} // namespace

Compatibility check_compatibility(const std::vector<double>& A, const Profile1D& p, double tol) {
    const int n = p.grid.n;
    require((int)A.size() == n, "BadGrid", "A not sampled on the profile grid");
    const double h = p.grid.h();
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = A[i] * p.dcomp[0][i];
    Compatibility c;
    c.value = simpson(f, h);
    c.scale = l2norm(A, h, n) * l2norm(p.dcomp[0], h, n);
    c.compatible = std::abs(c.value) <= tol * std::max(c.scale, 1e-300);
    return c;
}

Compatibility check_compatibility(const std::vector<std::vector<double>>& A, const Profile1D& p,
                                  double tol) {
    const int n = p.grid.n, m = p.m;
    require((int)A.size() == m && (int)A[0].size() == n, "BadGrid", "A shape mismatch");
    const double h = p.grid.h();
    std::vector<double> f(n, 0.0);
    double na = 0, nt = 0;
    for (int i = 0; i < n; ++i) {
        double s = 0, a2 = 0, t2 = 0;
        for (int c = 0; c < m; ++c) {
            s += A[c][i] * p.dcomp[c][i];
            a2 += A[c][i] * A[c][i];
            t2 += p.dcomp[c][i] * p.dcomp[c][i];
        }
        f[i] = s;
        na += trap_weight(i, n, h) * a2;
        nt += trap_weight(i, n, h) * t2;
    }
    Compatibility c;
    c.value = simpson(f, h);
    c.scale = std::sqrt(na) * std::sqrt(nt);
    c.compatible = std::abs(c.value) <= tol * std::max(c.scale, 1e-300);
    return c;
}

void neumann_symtri(const std::vector<double>& q, double h, std::vector<double>& diag,
                    std::vector<double>& off) {
    // Symmetrized M = D^{-1/2} S D^{-1/2} of the mirrored-ghost Neumann
    // operator -d^2/dz^2 + q with trapezoid weights D.
    const int n = (int)q.size();
    diag.assign(n, 0.0);
    off.assign(n - 1, 0.0);
    const double ih2 = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) diag[i] = 2.0 * ih2 + q[i];
    for (int i = 0; i < n - 1; ++i) {
        const double di = trap_weight(i, n, h), dj = trap_weight(i + 1, n, h);
        off[i] = -ih2 * h / std::sqrt(di * dj);
    }
}

namespace {

// Discrete kernel pair of the scalar Neumann operator on the profile grid.
void scalar_kernel(const Profile1D& p, std::vector<double>& k, double& lam1, double& lam2) {
    const int n = p.grid.n;
    const double h = p.grid.h();
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) q[i] = p.f.d2(p.comp[0][i]);
    std::vector<double> diag, off;
    neumann_symtri(q, h, diag, off);
    auto e = symtri_smallest(diag, off, 2);
    lam1 = e.values[0];
    lam2 = e.values.size() > 1 ? e.values[1] : 0.0;
    k.assign(n, 0.0);
    for (int i = 0; i < n; ++i) k[i] = e.vectors[0][i] / std::sqrt(trap_weight(i, n, h));
    // sign convention: kernel aligned with theta0' > 0
    double s = 0;
    for (int i = 0; i < n; ++i) s += trap_weight(i, n, h) * k[i] * p.dcomp[0][i];
    if (s < 0)
        for (double& x : k) x = -x;
}

} // namespace

ScalarLinodeWorkspace make_scalar_linode_workspace(const Profile1D& p) {
    ScalarLinodeWorkspace ws;
    scalar_kernel(p, ws.kernel, ws.lambda1, ws.lambda2);
    return ws;
}

std::vector<double> solve_scalar_linode(const std::vector<double>& A, const Profile1D& p,
                                        LinodeInfo* info, double compat_tol) {
    return solve_scalar_linode_ws(A, p, make_scalar_linode_workspace(p), info, compat_tol);
}

std::vector<double> solve_scalar_linode_ws(const std::vector<double>& A, const Profile1D& p,
                                           const ScalarLinodeWorkspace& ws, LinodeInfo* info,
                                           double compat_tol) {
    const int n = p.grid.n;
    const double h = p.grid.h();
    const auto compat = check_compatibility(A, p, compat_tol);
    require(compat.compatible, "Incompatible",
            "right-hand side not orthogonal to theta0' (defect " + std::to_string(compat.value) +
                ")");

    const std::vector<double>& k = ws.kernel;
    const double lam1 = ws.lambda1, lam2 = ws.lambda2;
    require(lam2 > 1e-8, "SingularSolve", "rank deficiency beyond the 1D kernel");

    // S w = D b with the kernel component of b removed; S assembled as the
    // (symmetric) weighted form of the Neumann operator.
    std::vector<double> dw(n);
    for (int i = 0; i < n; ++i) dw[i] = trap_weight(i, n, h);
    double kb = 0;
    for (int i = 0; i < n; ++i) kb += dw[i] * k[i] * A[i];
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = dw[i] * (A[i] - kb * k[i]);

    const double ih2 = 1.0 / (h * h);
    std::vector<double> dl(n, 0.0), dd(n, 0.0), du(n, 0.0);
    for (int i = 0; i < n; ++i) dd[i] = dw[i] * (2.0 * ih2 + p.f.d2(p.comp[0][i]));
    for (int i = 0; i < n - 1; ++i) {
        du[i] = -h * ih2;
        dl[i + 1] = -h * ih2;
    }
    std::vector<double> w = thomas_solve(dl, dd, du, rhs);

    // Remove the (amplified) kernel component, then re-anchor with theta0'.
    double kw = 0;
    for (int i = 0; i < n; ++i) kw += dw[i] * k[i] * w[i];
    for (int i = 0; i < n; ++i) w[i] -= kw * k[i];
    const int mid = (n - 1) / 2;
    const double t0p0 = p.dcomp[0][mid];
    const double c = w[mid] / t0p0;
    for (int i = 0; i < n; ++i) w[i] -= c * p.dcomp[0][i];

    if (info) {
        double res = 0;
        for (int i = 1; i < n - 1; ++i) {
            const double lap = (w[i + 1] - 2 * w[i] + w[i - 1]) * ih2;
            res = std::max(res, std::abs(-lap + p.f.d2(p.comp[0][i]) * w[i] - A[i]));
        }
        info->residual = res;
        info->anchor_defect = std::abs(w[mid]);
        info->compat_value = compat.value;
        info->kernel_lambda1 = lam1;
        info->kernel_lambda2 = lam2;
    }
    return w;
}

namespace {

// Block-tridiagonal symmetric band of the vector Neumann operator, in the
// D^{-1/2} S D^{-1/2} form (node-major layout, bandwidth m).
SymBand vector_symband(const Profile1D& p) {
    const int n = p.grid.n, m = p.m;
    const double h = p.grid.h(), ih2 = 1.0 / (h * h);
    SymBand M(n * m, m);
    std::vector<double> v(m);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < m; ++c) v[c] = p.comp[c][i];
        const auto H = p.W.hess(v);
        for (int c = 0; c < m; ++c) {
            M.at(i * m + c, i * m + c) = 2.0 * ih2 + H[(size_t)c * m + c];
            for (int c2 = c + 1; c2 < m; ++c2)
                M.at(i * m + c2, i * m + c) = 0.5 * (H[(size_t)c2 * m + c] + H[(size_t)c * m + c2]);
        }
        if (i + 1 < n) {
            const double di = trap_weight(i, n, h), dj = trap_weight(i + 1, n, h);
            const double o = -ih2 * h / std::sqrt(di * dj);
            for (int c = 0; c < m; ++c) M.at((i + 1) * m + c, i * m + c) = o;
        }
    }
    return M;
}

} // namespace

KernelReport kernel_dimension(const Profile1D& p, double threshold) {
    require(p.is_vector, "BadInput", "kernel_dimension expects a vector profile");
    KernelReport r;
    r.threshold = threshold <= -1.5 ? 0.05 * p.W.well_hessian_min_eig() : threshold;
    const auto M = vector_symband(p);
    r.dim = symband_count_below(M, r.threshold);
    const auto vals = symband_values_smallest(M, 2);
    r.lambda1 = vals.size() > 0 ? vals[0] : 0.0;
    r.lambda2 = vals.size() > 1 ? vals[1] : 0.0;
    return r;
}

std::vector<std::vector<double>> solve_vector_linode(const std::vector<std::vector<double>>& A,
                                                     const Profile1D& p, BFunctional B,
                                                     LinodeInfo* info, double compat_tol) {
    const int n = p.grid.n, m = p.m;
    const double h = p.grid.h(), ih2 = 1.0 / (h * h);
    const auto compat = check_compatibility(A, p, compat_tol);
    require(compat.compatible, "Incompatible",
            "right-hand side not orthogonal to theta0' (defect " + std::to_string(compat.value) +
                ")");
    const auto kr = kernel_dimension(p);
    require(kr.dim == 1, "KernelNotSimple",
            "dim ker = " + std::to_string(kr.dim) + ", need 1");

    // Discrete kernel vector in u-space, D-normalized.
    const auto M = vector_symband(p);
    auto ep = symband_smallest(M, 1);
    std::vector<double> k(n * (size_t)m);
    for (int i = 0; i < n; ++i) {
        const double di = trap_weight(i, n, h);
        for (int c = 0; c < m; ++c) k[(size_t)i * m + c] = ep.vectors[0][(size_t)i * m + c] / std::sqrt(di);
    }
    {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < m; ++c)
                s += trap_weight(i, n, h) * k[(size_t)i * m + c] * p.dcomp[c][i];
        if (s < 0)
            for (double& x : k) x = -x;
    }

    // Assemble S (= D * A_op) as a general band and deflate the RHS.
    GenBand S(n * m, m);
    std::vector<double> v(m);
    for (int i = 0; i < n; ++i) {
        const double di = trap_weight(i, n, h);
        for (int c = 0; c < m; ++c) v[c] = p.comp[c][i];
        const auto H = p.W.hess(v);
        for (int c = 0; c < m; ++c) {
            for (int c2 = 0; c2 < m; ++c2)
                S.at(i * m + c, i * m + c2) =
                    di * (c == c2 ? 2.0 * ih2 : 0.0) + di * H[(size_t)c * m + c2];
            if (i + 1 < n) {
                S.at(i * m + c, (i + 1) * m + c) = -h * ih2;
                S.at((i + 1) * m + c, i * m + c) = -h * ih2;
            }
        }
    }
    double kb = 0;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < m; ++c)
            kb += trap_weight(i, n, h) * k[(size_t)i * m + c] * A[c][i];
    std::vector<double> rhs(n * (size_t)m);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < m; ++c)
            rhs[(size_t)i * m + c] =
                trap_weight(i, n, h) * (A[c][i] - kb * k[(size_t)i * m + c]);

    BandLU lu;
    lu.factor(n * m, m, S.band);
    std::vector<double> u = lu.solve(rhs);
    double ku = 0;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < m; ++c)
            ku += trap_weight(i, n, h) * k[(size_t)i * m + c] * u[(size_t)i * m + c];
    for (size_t ix = 0; ix < u.size(); ++ix) u[ix] -= ku * k[ix];

    // Normalize with the selected functional.
    const int mid = (n - 1) / 2;
    std::vector<std::vector<double>> out(m, std::vector<double>(n));
    for (int c = 0; c < m; ++c)
        for (int i = 0; i < n; ++i) out[c][i] = u[(size_t)i * m + c];
    auto Bof = [&](const std::vector<std::vector<double>>& w) {
        if (B == BFunctional::Midpoint) {
            std::vector<double> w0(m);
            for (int c = 0; c < m; ++c) w0[c] = w[c][mid];
            return p.midpoint_functional(w0);
        }
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < m; ++c) s += trap_weight(i, n, h) * w[c][i] * p.dcomp[c][i];
        return s;
    };
    std::vector<std::vector<double>> theta_p(m);
    for (int c = 0; c < m; ++c) theta_p[c] = p.dcomp[c];
    const double Bt = Bof(theta_p);
    require(std::abs(Bt) > 1e-12, "SingularSolve", "B theta0' = 0; functional unusable");
    const double coef = Bof(out) / Bt;
    for (int c = 0; c < m; ++c)
        for (int i = 0; i < n; ++i) out[c][i] -= coef * p.dcomp[c][i];

    if (info) {
        double res = 0;
        for (int i = 1; i < n - 1; ++i) {
            for (int c = 0; c < m; ++c) v[c] = p.comp[c][i];
            const auto H = p.W.hess(v);
            for (int c = 0; c < m; ++c) {
                double hv = 0;
                for (int c2 = 0; c2 < m; ++c2) hv += H[(size_t)c * m + c2] * out[c2][i];
                const double lap = (out[c][i + 1] - 2 * out[c][i] + out[c][i - 1]) * ih2;
                res = std::max(res, std::abs(-lap + hv - A[c][i]));
            }
        }
        info->residual = res;
        info->anchor_defect = std::abs(Bof(out));
        info->compat_value = compat.value;
        info->kernel_lambda1 = kr.lambda1;
        info->kernel_lambda2 = kr.lambda2;
    }
    return out;
}

} // namespace sil
