#include "sil/lin.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"

namespace sil {

std::vector<double> thomas_solve(const std::vector<double>& dl, const std::vector<double>& d,
                                 const std::vector<double>& du, std::vector<double> rhs) {
    const int n = (int)d.size();
    std::vector<double> c(n, 0.0), x(n, 0.0);
    c[0] = du[0] / d[0];
    x[0] = rhs[0] / d[0];
    for (int i = 1; i < n; ++i) {
        const double piv = d[i] - dl[i] * c[i - 1];
        c[i] = (i < n - 1 ? du[i] : 0.0) / piv;
        x[i] = (rhs[i] - dl[i] * x[i - 1]) / piv;
    }
    for (int i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
    return x;
}

EigPairs symtri_smallest(std::vector<double> diag, std::vector<double> off, int k) {
    const int n = (int)diag.size();
    k = std::min(k, n);
    off.resize(n, 0.0); // dstevr wants length >= n-1; keep a slot spare
    std::vector<double> w(n), z((size_t)n * k);
    std::vector<lapack_int> isuppz(2 * (size_t)std::max(1, k));
    lapack_int m = 0;
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(), 0, 0,
                                     1, k, 0.0, &m, w.data(), z.data(), n, isuppz.data());
    require(info == 0, "EigFailed", "dstevr info=" + std::to_string(info));
    EigPairs r;
    r.values.assign(w.begin(), w.begin() + m);
    r.vectors.resize(m);
    for (int j = 0; j < m; ++j)
        r.vectors[j].assign(z.begin() + (size_t)j * n, z.begin() + (size_t)(j + 1) * n);
    return r;
}

int symtri_count_below(const std::vector<double>& diag, const std::vector<double>& off,
                       double bound) {
    // Sturm sequence count: number of eigenvalues < bound.
    const int n = (int)diag.size();
    int count = 0;
    double q = diag[0] - bound;
    if (q < 0) ++count;
    for (int i = 1; i < n; ++i) {
        const double e = off[i - 1];
        if (q == 0.0) q = 1e-300;
        q = (diag[i] - bound) - e * e / q;
        if (q < 0) ++count;
    }
    return count;
}

double SymBand::get(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (i - j > kd) return 0.0;
    return ab[(size_t)j * (kd + 1) + (i - j)];
}

std::vector<double> SymBand::apply(const std::vector<double>& x) const {
    std::vector<double> y(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const int imax = std::min(n - 1, j + kd);
        y[j] += ab[(size_t)j * (kd + 1)] * x[j];
        for (int i = j + 1; i <= imax; ++i) {
            const double a = ab[(size_t)j * (kd + 1) + (i - j)];
            y[i] += a * x[j];
            y[j] += a * x[i];
        }
    }
    return y;
}

void symband_tridiagonalize(const SymBand& A, std::vector<double>& d, std::vector<double>& e) {
    std::vector<double> ab = A.ab;
    d.assign(A.n, 0.0);
    e.assign(std::max(0, A.n - 1), 0.0);
    std::vector<double> q(1);
    lapack_int info = LAPACKE_dsbtrd(LAPACK_COL_MAJOR, 'N', 'L', A.n, A.kd, ab.data(), A.kd + 1,
                                     d.data(), e.data(), q.data(), 1);
    require(info == 0, "EigFailed", "dsbtrd info=" + std::to_string(info));
}

std::vector<double> symband_values_smallest(const SymBand& A, int k) {
    std::vector<double> d, e;
    symband_tridiagonalize(A, d, e);
    const int n = A.n;
    k = std::min(k, n);
    e.resize(n, 0.0);
    std::vector<double> w(n), zdummy(1);
    lapack_int m = 0;
    std::vector<lapack_int> isuppz(2 * (size_t)std::max(1, k));
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'I', n, d.data(), e.data(), 0, 0, 1, k,
                                     0.0, &m, w.data(), zdummy.data(), 1, isuppz.data());
    require(info == 0, "EigFailed", "dstevr info=" + std::to_string(info));
    w.resize(m);
    return w;
}

int symband_count_below(const SymBand& A, double bound) {
    std::vector<double> d, e;
    symband_tridiagonalize(A, d, e);
    return symtri_count_below(d, e, bound);
}

namespace {
double norm2(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}
void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
} // namespace

EigPairs symband_smallest(const SymBand& A, int k) {
    EigPairs r;
    r.values = symband_values_smallest(A, k);
    const int n = A.n;
    // Eigenvectors by shifted inverse iteration, deflating previously found ones.
    for (size_t j = 0; j < r.values.size(); ++j) {
        const double gap =
            (j + 1 < r.values.size()) ? std::abs(r.values[j + 1] - r.values[j]) : 1.0;
        const double shift = r.values[j] - std::max(1e-8, 1e-6 * std::max(1.0, std::abs(r.values[j])) + 1e-3 * gap);
        GenBand B(n, A.kd);
        for (int i = 0; i < n; ++i)
            for (int jj = std::max(0, i - A.kd); jj <= std::min(n - 1, i + A.kd); ++jj)
                B.at(i, jj) = A.get(i, jj) - (i == jj ? shift : 0.0);
        BandLU lu;
        lu.factor(n, A.kd, B.band);
        std::vector<double> v(n, 1.0);
        for (int i = 0; i < n; ++i) v[i] += 1e-3 * std::sin(0.7 * i + 0.3 * (double)j);
        for (int it = 0; it < 60; ++it) {
            for (const auto& prev : r.vectors) axpy(v, -dot(v, prev), prev);
            double nv = norm2(v);
            for (double& x : v) x /= nv;
            std::vector<double> w = lu.solve(v);
            // residual of the eigen equation for the normalized iterate
            std::vector<double> Av = A.apply(v);
            const double theta = dot(v, Av);
            axpy(Av, -theta, v);
            if (norm2(Av) <= 1e-11 * std::max(1.0, std::abs(theta)) && it > 1) break;
            v = std::move(w);
        }
        for (const auto& prev : r.vectors) axpy(v, -dot(v, prev), prev);
        double nv = norm2(v);
        for (double& x : v) x /= nv;
        r.vectors.push_back(std::move(v));
    }
    return r;
}

std::vector<double> GenBand::apply(const std::vector<double>& x) const {
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const int j0 = std::max(0, i - kd), j1 = std::min(n - 1, i + kd);
        double s = 0;
        for (int j = j0; j <= j1; ++j) s += band[(size_t)i * (2 * kd + 1) + (j - i + kd)] * x[j];
        y[i] = s;
    }
    return y;
}

void BandLU::factor(int n, int kd, const std::vector<double>& band_rowmajor) {
    n_ = n;
    kd_ = kd;
    const int kl = kd, ku = kd, ldab = 2 * kl + ku + 1;
    ab_.assign((size_t)ldab * n, 0.0);
    std::vector<double> colsum(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - kd); j <= std::min(n - 1, i + kd); ++j) {
            const double v = band_rowmajor[(size_t)i * (2 * kd + 1) + (j - i + kd)];
            ab_[(size_t)j * ldab + (kl + ku + i - j)] = v;
            colsum[j] += std::abs(v);
        }
    anorm_ = *std::max_element(colsum.begin(), colsum.end());
    ipiv_.assign(n, 0);
    lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab_.data(), ldab, ipiv_.data());
    require(info == 0, "SingularSolve", "dgbtrf info=" + std::to_string(info));
    info = LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', n, kl, ku, ab_.data(), ldab, ipiv_.data(), anorm_,
                          &rcond_);
    require(info == 0, "SingularSolve", "dgbcon info=" + std::to_string(info));
}

std::vector<double> BandLU::solve(const std::vector<double>& rhs) const {
    std::vector<double> x = rhs;
    lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kd_, kd_, 1, ab_.data(),
                                     2 * kd_ + kd_ + 1, ipiv_.data(), x.data(), n_);
    require(info == 0, "SingularSolve", "dgbtrs info=" + std::to_string(info));
    return x;
}

} // namespace sil
