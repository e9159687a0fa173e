#pragma once
#include <vector>

namespace sil {

// Tridiagonal solve (Thomas, no pivoting; caller guarantees dominance).
// dl[0] and du[n-1] are ignored.
std::vector<double> thomas_solve(const std::vector<double>& dl, const std::vector<double>& d,
                                 const std::vector<double>& du, std::vector<double> rhs);

// Symmetric tridiagonal eigensolve: k smallest eigenpairs via LAPACK dstevr.
struct EigPairs {
    std::vector<double> values;               // ascending
    std::vector<std::vector<double>> vectors; // unit 2-norm
};
EigPairs symtri_smallest(std::vector<double> diag, std::vector<double> off, int k);

// Count of eigenvalues of a symmetric tridiagonal matrix below `bound`
// (Sturm sequence count via LAPACK bisection).
int symtri_count_below(const std::vector<double>& diag, const std::vector<double>& off,
                       double bound);

// Symmetric banded matrix, lower storage: ab[j*(kd+1)+i-j] = A(i,j), j<=i<=j+kd.
struct SymBand {
    int n = 0, kd = 0;
    std::vector<double> ab;
    SymBand() = default;
    SymBand(int n_, int kd_) : n(n_), kd(kd_), ab((size_t)n_ * (kd_ + 1), 0.0) {}
    double& at(int i, int j) { return ab[(size_t)j * (kd + 1) + (i - j)]; } // i >= j
    double get(int i, int j) const;                                        // any i,j within band
    std::vector<double> apply(const std::vector<double>& x) const;
};
// Reduce to tridiagonal (dsbtrd); eigenvalues via dstevr; counts via Sturm.
void symband_tridiagonalize(const SymBand& A, std::vector<double>& d, std::vector<double>& e);
std::vector<double> symband_values_smallest(const SymBand& A, int k);
EigPairs symband_smallest(const SymBand& A, int k);
int symband_count_below(const SymBand& A, double bound);

// General banded LU (LAPACK dgbtrf/dgbtrs), kl = ku = kd.
class BandLU {
public:
    BandLU() = default;
    // Assemble from a dense-band accessor: entries A(i,j) for |i-j| <= kd.
    void factor(int n, int kd, const std::vector<double>& band_rowmajor);
    std::vector<double> solve(const std::vector<double>& rhs) const;
    double rcond() const { return rcond_; } // reciprocal condition estimate (1-norm)
    int n() const { return n_; }

private:
    int n_ = 0, kd_ = 0;
    std::vector<double> ab_;
    std::vector<int> ipiv_;
    double anorm_ = 0, rcond_ = 0;
};

// Row-major dense-band helper for BandLU assembly: bands stored as
// band[i*(2kd+1) + (j-i+kd)] = A(i,j).
struct GenBand {
    int n = 0, kd = 0;
    std::vector<double> band;
    GenBand() = default;
    GenBand(int n_, int kd_) : n(n_), kd(kd_), band((size_t)n_ * (2 * kd_ + 1), 0.0) {}
    double& at(int i, int j) { return band[(size_t)i * (2 * kd + 1) + (j - i + kd)]; }
    double get(int i, int j) const {
        if (j < i - kd || j > i + kd) return 0.0;
        return band[(size_t)i * (2 * kd + 1) + (j - i + kd)];
    }
    std::vector<double> apply(const std::vector<double>& x) const;
};

} // namespace sil
