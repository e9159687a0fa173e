#include "sil/spectral1d.hpp"

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/lin.hpp"

namespace sil {

namespace {

// Invert r_eps(r) = r - eps h(r) at r-tilde = eps z (Newton; h is O(1)).
double F_eps(const WeightSpec& w, double eps, double z) {
    const double target = eps * z;
    double r = target;
    for (int it = 0; it < 30; ++it) {
        const double g = r - eps * w.h(r) - target;
        const double hp = (w.h(r + 1e-6) - w.h(r - 1e-6)) / 2e-6;
        const double step = g / (1.0 - eps * hp);
        r -= step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(r))) break;
    }
    return r;
}

struct Assembled {
    std::vector<double> diag, off; // symmetrized tridiagonal (scalar)
    std::vector<double> Dw;        // J-weighted trapezoid node weights
    std::vector<double> Jn;        // J at nodes
};

// Finite-volume weighted operator with zero-flux ends; symmetric under the
// J-weighted trapezoid inner product.
Assembled assemble_weighted(const Grid1D& g, const std::vector<double>& q,
                            const std::vector<double>& Jn, const std::vector<double>& Jh) {
    const int n = g.n;
    const double h = g.h();
    Assembled A;
    A.Jn = Jn;
    A.Dw.resize(n);
    for (int i = 0; i < n; ++i) A.Dw[i] = trap_weight(i, n, h) * Jn[i];
    std::vector<double> S_diag(n), S_off(n - 1);
    for (int i = 0; i < n; ++i) {
        const double fl = (i > 0) ? Jh[i - 1] / h : 0.0;
        const double fr = (i < n - 1) ? Jh[i] / h : 0.0;
        S_diag[i] = fl + fr + A.Dw[i] * q[i];
    }
    for (int i = 0; i < n - 1; ++i) S_off[i] = -Jh[i] / h;
    A.diag.resize(n);
    A.off.resize(n - 1);
    for (int i = 0; i < n; ++i) A.diag[i] = S_diag[i] / A.Dw[i];
    for (int i = 0; i < n - 1; ++i) A.off[i] = S_off[i] / std::sqrt(A.Dw[i] * A.Dw[i + 1]);
    return A;
}

struct Level {
    Grid1D g;
    double l1 = 0, l2 = 0;
    std::vector<double> psi1;     // D-normalized ground state (u-space)
    std::vector<double> Dw, Jn;
    double residual1 = 0;
};

Level solve_level(const ScalarPotential& f, const Profile1D& p, double eps, double dt, int n,
                  const WeightSpec& w, const PerturbationSpec& pert) {
    Level L;
    L.g = Grid1D::symmetric(dt / eps, n);
    const double h = L.g.h();
    std::vector<double> q(n), Jn(n), Jh(n - 1);
    auto phi = [&](double r) {
        return p.theta(r / eps) + eps * pert.p_eps * pert.theta1(r / eps) +
               eps * eps * pert.q_eps(r);
    };
    for (int i = 0; i < n; ++i) {
        const double z = L.g.node(i);
        q[i] = f.d2(phi(eps * z));
        Jn[i] = w.J(F_eps(w, eps, z));
    }
    for (int i = 0; i < n - 1; ++i) {
        const double z = 0.5 * (L.g.node(i) + L.g.node(i + 1));
        Jh[i] = w.J(F_eps(w, eps, z));
    }
    auto A = assemble_weighted(L.g, q, Jn, Jh);
    auto e = symtri_smallest(A.diag, A.off, 2);
    L.l1 = e.values[0];
    L.l2 = e.values.size() > 1 ? e.values[1] : 0.0;
    L.psi1.resize(n);
    for (int i = 0; i < n; ++i) L.psi1[i] = e.vectors[0][i] / std::sqrt(A.Dw[i]);
    L.Dw = A.Dw;
    L.Jn = Jn;
    // residual of the eigenpair in the weighted norm
    {
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) y[i] = e.vectors[0][i];
        double rr = 0;
        for (int i = 0; i < n; ++i) {
            double Av = A.diag[i] * y[i];
            if (i > 0) Av += A.off[i - 1] * y[i - 1];
            if (i < n - 1) Av += A.off[i] * y[i + 1];
            const double r = Av - L.l1 * y[i];
            rr += r * r;
        }
        L.residual1 = std::sqrt(rr);
    }
    return L;
}

} // namespace

SpectrumReport eig_perturbed(const ScalarPotential& f, const Profile1D& p, double eps,
                             double delta_tilde, const WeightSpec& w,
                             const PerturbationSpec& pert, int n_base) {
    require(eps > 0 && eps <= 0.2, "BadInput", "eps must be in (0, 0.2]");
    require(delta_tilde > 0 && delta_tilde <= 1.0, "BadInput", "delta_tilde must be in (0,1]");
    const double len = 2.0 * delta_tilde / eps;
    int n = n_base > 0 ? n_base : (int)std::ceil(40.0 * len) + 1;
    if (n % 2 == 0) ++n;
    require((n - 1) / len >= 20.0, "GridTooCoarse", "fewer than 20 points per unit z");

    // Perturbation class check (the f''' form used in the proofs).
    if (pert.p_eps != 0.0) {
        const int nn = p.grid.n;
        std::vector<double> fint(nn);
        for (int i = 0; i < nn; ++i) {
            const double z = p.grid.node(i);
            const double tp = p.dcomp[0][i];
            fint[i] = f.d3(p.comp[0][i]) * pert.theta1(z) * tp * tp;
        }
        const double val = simpson(fint, p.grid.h());
        require(std::abs(val) <= 1e-6 * std::max(1.0, p.d[1]), "PerturbationOutOfClass",
                "theta1 violates the f''' orthogonality condition");
    }

    const Level coarse = solve_level(f, p, eps, delta_tilde, n, w, pert);
    const Level fine = solve_level(f, p, eps, delta_tilde, 2 * n - 1, w, pert);

    SpectrumReport rep;
    rep.eps = eps;
    rep.delta_tilde = delta_tilde;
    rep.grid = fine.g;
    rep.n = fine.g.n;
    rep.lambda1_raw = fine.l1;
    rep.lambda2_raw = fine.l2;
    rep.lambda1 = (4.0 * fine.l1 - coarse.l1) / 3.0;
    rep.lambda2 = (4.0 * fine.l2 - coarse.l2) / 3.0;
    rep.residual1 = fine.residual1;

    const int nf = fine.g.n;
    const double h = fine.g.h();
    // beta_eps from the unweighted L2 norm of theta0' on I
    double t2 = 0;
    std::vector<double> tp(nf);
    for (int i = 0; i < nf; ++i) {
        tp[i] = p.theta_d1(fine.g.node(i));
        t2 += trap_weight(i, nf, h) * tp[i] * tp[i];
    }
    rep.beta_eps = 1.0 / std::sqrt(t2);

    // fix the sign of Psi1 against theta0'
    rep.psi1 = fine.psi1;
    double align = 0;
    for (int i = 0; i < nf; ++i) align += fine.Dw[i] * rep.psi1[i] * tp[i];
    rep.sign_c = align >= 0 ? 1 : -1;
    if (rep.sign_c < 0)
        for (double& x : rep.psi1) x = -x;
    rep.min_psi1 = *std::min_element(rep.psi1.begin(), rep.psi1.end());

    const double J0 = w.J(0.0);
    double de = 0, dd = 0;
    std::vector<double> R(nf);
    for (int i = 0; i < nf; ++i) {
        R[i] = rep.psi1[i] - rep.beta_eps * tp[i] / std::sqrt(J0);
        de += fine.Dw[i] * R[i] * R[i];
    }
    for (int i = 0; i < nf; ++i) {
        double dR;
        if (i == 0)
            dR = (R[1] - R[0]) / h;
        else if (i == nf - 1)
            dR = (R[nf - 1] - R[nf - 2]) / h;
        else
            dR = (R[i + 1] - R[i - 1]) / (2 * h);
        dd += fine.Dw[i] * dR * dR;
    }
    rep.psi_defect = std::sqrt(de);
    rep.dpsi_defect = std::sqrt(dd);
    return rep;
}

SpectrumReport eig_unperturbed(const ScalarPotential& f, const Profile1D& p, double eps,
                               double delta_tilde, int n_base) {
    return eig_perturbed(f, p, eps, delta_tilde, WeightSpec{}, PerturbationSpec{}, n_base);
}

double nu2_from_nu1(const ScalarPotential& f, double nu1) {
    return std::min(0.5 * nu1, 0.25 * f.min_wells_d2());
}

SpectrumReport eig_vector(const VectorPotential& W, const Profile1D& p, double eps,
                          double delta_tilde, const WeightSpec& w, int n_base) {
    require(p.is_vector, "BadInput", "eig_vector expects a vector profile");
    require(eps > 0 && eps <= 0.2, "BadInput", "eps must be in (0, 0.2]");
    const int m = p.m;
    const double len = 2.0 * delta_tilde / eps;
    int n = n_base > 0 ? n_base : (int)std::ceil(40.0 * len) + 1;
    if (n % 2 == 0) ++n;
    require((n - 1) / len >= 20.0, "GridTooCoarse", "fewer than 20 points per unit z");

    struct VLevel {
        Grid1D g;
        double l1, l2;
        std::vector<double> psi1, Dw;
    };
    auto solve = [&](int nn) {
        VLevel L;
        L.g = Grid1D::symmetric(delta_tilde / eps, nn);
        const double h = L.g.h();
        std::vector<double> Jn(nn), Jh(nn - 1);
        for (int i = 0; i < nn; ++i) Jn[i] = w.J(F_eps(w, eps, L.g.node(i)));
        for (int i = 0; i < nn - 1; ++i)
            Jh[i] = w.J(F_eps(w, eps, 0.5 * (L.g.node(i) + L.g.node(i + 1))));
        L.Dw.resize((size_t)nn * m);
        SymBand M(nn * m, m);
        for (int i = 0; i < nn; ++i) {
            const double dwi = trap_weight(i, nn, h) * Jn[i];
            const auto Hb = W.hess(p.vtheta(eps * L.g.node(i)));
            const double fl = (i > 0) ? Jh[i - 1] / h : 0.0;
            const double fr = (i < nn - 1) ? Jh[i] / h : 0.0;
            for (int c = 0; c < m; ++c) {
                L.Dw[(size_t)i * m + c] = dwi;
                M.at(i * m + c, i * m + c) = (fl + fr) / dwi + Hb[(size_t)c * m + c];
                for (int c2 = c + 1; c2 < m; ++c2)
                    M.at(i * m + c2, i * m + c) =
                        0.5 * (Hb[(size_t)c2 * m + c] + Hb[(size_t)c * m + c2]);
            }
            if (i + 1 < nn) {
                const double dwj = trap_weight(i + 1, nn, h) * Jn[i + 1];
                for (int c = 0; c < m; ++c)
                    M.at((i + 1) * m + c, i * m + c) = -(Jh[i] / h) / std::sqrt(dwi * dwj);
            }
        }
        auto e = symband_smallest(M, 2);
        L.l1 = e.values[0];
        L.l2 = e.values.size() > 1 ? e.values[1] : 0.0;
        L.psi1.resize((size_t)nn * m);
        for (size_t ix = 0; ix < L.psi1.size(); ++ix)
            L.psi1[ix] = e.vectors[0][ix] / std::sqrt(L.Dw[ix]);
        return L;
    };
    const auto coarse = solve(n);
    const auto fine = solve(2 * n - 1);

    SpectrumReport rep;
    rep.eps = eps;
    rep.delta_tilde = delta_tilde;
    rep.grid = fine.g;
    rep.n = fine.g.n;
    rep.lambda1_raw = fine.l1;
    rep.lambda2_raw = fine.l2;
    rep.lambda1 = (4.0 * fine.l1 - coarse.l1) / 3.0;
    rep.lambda2 = (4.0 * fine.l2 - coarse.l2) / 3.0;

    const int nf = fine.g.n;
    const double h = fine.g.h();
    std::vector<double> tp((size_t)nf * m);
    double t2 = 0;
    for (int i = 0; i < nf; ++i) {
        const auto v = p.vtheta_d1(fine.g.node(i));
        for (int c = 0; c < m; ++c) {
            tp[(size_t)i * m + c] = v[c];
            t2 += trap_weight(i, nf, h) * v[c] * v[c];
        }
    }
    rep.beta_eps = 1.0 / std::sqrt(t2);
    rep.psi1 = fine.psi1;
    double align = 0;
    for (size_t ix = 0; ix < rep.psi1.size(); ++ix) align += fine.Dw[ix] * rep.psi1[ix] * tp[ix];
    rep.sign_c = align >= 0 ? 1 : -1; // the c_eps sign selector
    if (rep.sign_c < 0)
        for (double& x : rep.psi1) x = -x;
    const double J0 = w.J(0.0);
    double de = 0;
    for (size_t ix = 0; ix < rep.psi1.size(); ++ix) {
        const double R = rep.psi1[ix] - rep.beta_eps * tp[ix] / std::sqrt(J0);
        de += fine.Dw[ix] * R * R;
    }
    rep.psi_defect = std::sqrt(de);
    return rep;
}

} // namespace sil
