#pragma once
#include <cmath>
#include <functional>
#include <vector>

namespace sil {

// Uniform 1D grid with n nodes on [a,b], h=(b-a)/(n-1).
struct Grid1D {
    double a = 0.0, b = 1.0;
    int n = 2;

    double h() const { return (b - a) / (n - 1); }
    double node(int i) const { return a + i * h(); }
    std::vector<double> nodes() const;

    static Grid1D symmetric(double L, int n) { return Grid1D{-L, L, n}; }
};

// Composite Simpson; n must be odd.
double simpson(const std::vector<double>& f, double h);
// Trapezoid rule.
double trapezoid(const std::vector<double>& f, double h);
// Trapezoid node weight (h at interior, h/2 at the two ends).
inline double trap_weight(int i, int n, double h) { return (i == 0 || i == n - 1) ? 0.5 * h : h; }

// Adaptive Simpson to tolerance; used as an independent quadrature oracle.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

// Least-squares line y = c0 + c1 x; returns {c0, c1, rms residual}.
struct LineFit {
    double intercept = 0, slope = 0, residual = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Fitted order p of y ~ C eps^p over a sweep (log-log slope).
LineFit fit_order(const std::vector<double>& eps, const std::vector<double>& y);

// Cubic spline on a uniform grid. Natural ends by default; "even" ends clamp
// the first derivative to zero (reflective symmetry across the endpoints).
class Spline {
public:
    Spline() = default;
    Spline(Grid1D g, std::vector<double> y, bool even_ends = false);
    double operator()(double x) const;
    double deriv(double x) const;
    double deriv2(double x) const;
    const Grid1D& grid() const { return g_; }

private:
    Grid1D g_;
    std::vector<double> y_, m_; // values and second derivatives at nodes
    void locate(double x, int& i, double& t) const;
};

// Quintic smoothstep cutoff: 1 on [-1,1], 0 outside [-2,2], C^2 monotone blend.
double cutoff_eta(double r);
double cutoff_eta_d1(double r);
double cutoff_eta_d2(double r);

// Odd C^1 ramp: -1 for z<=-1, +1 for z>=1, cubic smoothstep between.
double odd_ramp(double z);

} // namespace sil
