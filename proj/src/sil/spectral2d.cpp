#include "sil/spectral2d.hpp"

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/grid.hpp"
#include "sil/lin.hpp"

namespace sil {

namespace {

// Node weight of the all-sides-Neumann trapezoid product measure.
double wnode(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

struct Op2D {
    int nx, ny, m, N, kd;
    double hx, hy;
    const std::vector<double>* q;
    std::vector<double> D;

    size_t pidx(int i, int j, int c) const { return ((size_t)j * nx + i) * m + c; }

    void build_D() {
        D.assign((size_t)nx * ny * m, 1.0);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                for (int c = 0; c < m; ++c) D[pidx(i, j, c)] = wnode(i, nx) * wnode(j, ny);
    }

    // A = -Laplace_h (mirrored ghosts) + q, applied blockwise.
    std::vector<double> apply(const std::vector<double>& u) const {
        std::vector<double> y((size_t)nx * ny * m, 0.0);
        const double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int il = i > 0 ? i - 1 : 1, ir = i < nx - 1 ? i + 1 : nx - 2;
                const int jd = j > 0 ? j - 1 : 1, ju = j < ny - 1 ? j + 1 : ny - 2;
                for (int c = 0; c < m; ++c) {
                    const size_t p = pidx(i, j, c);
                    double lap = (u[pidx(il, j, c)] - 2 * u[p] + u[pidx(ir, j, c)]) * ihx2 +
                                 (u[pidx(i, jd, c)] - 2 * u[p] + u[pidx(i, ju, c)]) * ihy2;
                    double qv = 0;
                    for (int c2 = 0; c2 < m; ++c2)
                        qv += (*q)[((size_t)j * nx + i) * m * m + c * m + c2] *
                              u[pidx(i, j, c2)];
                    y[p] = -lap + qv;
                }
            }
        return y;
    }

    // Symmetrized banded form M = D^{1/2} A D^{-1/2}.
    SymBand symband() const {
        SymBand M(N, kd);
        const double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                for (int c = 0; c < m; ++c) {
                    const size_t p = pidx(i, j, c);
                    M.at((int)p, (int)p) =
                        2 * ihx2 + 2 * ihy2 + (*q)[((size_t)j * nx + i) * m * m + c * m + c];
                    for (int c2 = c + 1; c2 < m; ++c2)
                        M.at((int)pidx(i, j, c2), (int)p) =
                            0.5 * ((*q)[((size_t)j * nx + i) * m * m + c2 * m + c] +
                                   (*q)[((size_t)j * nx + i) * m * m + c * m + c2]);
                    const double dp = D[p];
                    // M_qp = A_pq sqrt(Dp/Dq); mirrored ghosts double the
                    // coupling out of boundary rows.
                    if (i + 1 < nx) {
                        const double coup = -(i == 0 ? 2.0 : 1.0) * ihx2;
                        const double dq = D[pidx(i + 1, j, c)];
                        M.at((int)pidx(i + 1, j, c), (int)p) = coup * std::sqrt(dp / dq);
                    }
                    if (j + 1 < ny) {
                        const double coup = -(j == 0 ? 2.0 : 1.0) * ihy2;
                        const double dq = D[pidx(i, j + 1, c)];
                        M.at((int)pidx(i, j + 1, c), (int)p) = coup * std::sqrt(dp / dq);
                    }
                }
        return M;
    }

    GenBand genband_shifted(double sigma) const {
        GenBand B(N, kd);
        const double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                for (int c = 0; c < m; ++c) {
                    const size_t p = pidx(i, j, c);
                    B.at((int)p, (int)p) = 2 * ihx2 + 2 * ihy2 +
                                           (*q)[((size_t)j * nx + i) * m * m + c * m + c] - sigma;
                    for (int c2 = 0; c2 < m; ++c2)
                        if (c2 != c)
                            B.at((int)p, (int)pidx(i, j, c2)) =
                                (*q)[((size_t)j * nx + i) * m * m + c * m + c2];
                    if (i > 0) B.at((int)p, (int)pidx(i - 1, j, c)) += -ihx2;
                    if (i + 1 < nx) B.at((int)p, (int)pidx(i + 1, j, c)) += -ihx2;
                    if (i == 0) B.at((int)p, (int)pidx(1, j, c)) += -ihx2;
                    if (i == nx - 1) B.at((int)p, (int)pidx(nx - 2, j, c)) += -ihx2;
                    if (j > 0) B.at((int)p, (int)pidx(i, j - 1, c)) += -ihy2;
                    if (j + 1 < ny) B.at((int)p, (int)pidx(i, j + 1, c)) += -ihy2;
                    if (j == 0) B.at((int)p, (int)pidx(i, 1, c)) += -ihy2;
                    if (j == ny - 1) B.at((int)p, (int)pidx(i, ny - 2, c)) += -ihy2;
                }
        return B;
    }
};

int coarse_stride(int n) {
    // smallest s >= (n-1)/64 dividing n-1
    const int n1 = n - 1;
    for (int s = std::max(1, n1 / 64); s <= n1; ++s)
        if (n1 % s == 0 && n1 / s <= 96) return s;
    return 1;
}

} // namespace

Floor2DReport rayleigh_floor_2d(const std::vector<double>& potential, int nx, int ny, double hx,
                                double hy, int m, const Floor2DOptions& opt) {
    require((int)potential.size() == nx * ny * m * m, "BadGrid", "potential size mismatch");
    Op2D op{nx, ny, m, nx * ny * m, nx * m, hx, hy, &potential, {}};
    op.build_D();

    Floor2DReport rep;

    // Coarse bootstrap for the shift.
    {
        const int sx = coarse_stride(nx), sy = coarse_stride(ny);
        const int cnx = (nx - 1) / sx + 1, cny = (ny - 1) / sy + 1;
        std::vector<double> cq((size_t)cnx * cny * m * m);
        for (int j = 0; j < cny; ++j)
            for (int i = 0; i < cnx; ++i)
                for (int cc = 0; cc < m * m; ++cc)
                    cq[((size_t)j * cnx + i) * m * m + cc] =
                        potential[((size_t)(j * sy) * nx + (i * sx)) * m * m + cc];
        Op2D cop{cnx, cny, m, cnx * cny * m, cnx * m, hx * sx, hy * sy, &cq, {}};
        cop.build_D();
        rep.coarse_estimate = symband_values_smallest(cop.symband(), 1)[0];
    }

    double sigma = rep.coarse_estimate - (1.0 + 0.1 * std::abs(rep.coarse_estimate));
    std::vector<double> v((size_t)op.N, 1.0);
    auto dotD = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (size_t i = 0; i < a.size(); ++i) s += op.D[i] * a[i] * b[i];
        return s * hx * hy;
    };

    double theta = 0, resid = 1e300;
    int total_iters = 0;
    for (int refac = 0; refac <= opt.max_refactor; ++refac) {
        BandLU lu;
        lu.factor(op.N, op.kd, op.genband_shifted(sigma).band);
        rep.factorizations++;
        double prev_resid = 1e300;
        for (int it = 0; it < opt.max_iters; ++it) {
            ++total_iters;
            const double nv = std::sqrt(dotD(v, v));
            for (double& x : v) x /= nv;
            auto Av = op.apply(v);
            theta = dotD(v, Av);
            double rr = 0;
            for (size_t i = 0; i < v.size(); ++i) {
                const double e = Av[i] - theta * v[i];
                rr += op.D[i] * e * e;
            }
            resid = std::sqrt(rr * hx * hy);
            if (resid <= opt.residual_tol) break;
            // refresh the shift when progress stalls
            if (it > 8 && resid > 0.8 * prev_resid) break;
            prev_resid = resid;
            v = lu.solve(v);
        }
        if (resid <= opt.residual_tol) break;
        sigma = theta - std::max(10.0 * resid, 1e-6 * std::max(1.0, std::abs(theta)));
    }
    require(resid <= opt.residual_tol, "NoConvergence",
            "inverse iteration residual " + std::to_string(resid));
    rep.lambda_min = theta;
    rep.residual = resid;
    rep.iters = total_iters;
    rep.eigvec = v;

    if (opt.verify_count) {
        const double tol = std::max(1e-6, 1e-8 * std::abs(theta));
        rep.count_below = symband_count_below(op.symband(), theta - tol);
        require(rep.count_below == 0, "NoConvergence",
                "inverse iteration converged above the bottom eigenvalue");
        rep.count_below = symband_count_below(op.symband(), theta + tol);
    }
    return rep;
}

} // namespace sil
