#include "sil/grid.hpp"

#include <algorithm>
#include <cassert>

#include "sil/errors.hpp"

namespace sil {

std::vector<double> Grid1D::nodes() const {
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = node(i);
    return z;
}

double simpson(const std::vector<double>& f, double h) {
    const int n = (int)f.size();
    require(n >= 3 && n % 2 == 1, "BadQuadrature", "simpson needs odd n >= 3");
    double s = f[0] + f[n - 1];
    for (int i = 1; i < n - 1; i += 2) s += 4.0 * f[i];
    for (int i = 2; i < n - 1; i += 2) s += 2.0 * f[i];
    return s * h / 3.0;
}

double trapezoid(const std::vector<double>& f, double h) {
    const int n = (int)f.size();
    double s = 0.5 * (f[0] + f[n - 1]);
    for (int i = 1; i < n - 1; ++i) s += f[i];
    return s * h;
}

namespace {
double adsimp(const std::function<double(double)>& f, double a, double b, double fa, double fm,
              double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adsimp(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adsimp(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adsimp(f, a, b, fa, fm, fb, whole, tol, 48);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = (int)x.size();
    require(n >= 2 && (int)y.size() == n, "BadFit", "fit_line needs >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit r;
    const double det = n * sxx - sx * sx;
    r.slope = (n * sxy - sx * sy) / det;
    r.intercept = (sy - r.slope * sx) / n;
    double rr = 0;
    for (int i = 0; i < n; ++i) {
        const double e = y[i] - r.intercept - r.slope * x[i];
        rr += e * e;
    }
    r.residual = std::sqrt(rr / n);
    return r;
}

LineFit fit_order(const std::vector<double>& eps, const std::vector<double>& y) {
    std::vector<double> lx(eps.size()), ly(y.size());
    for (size_t i = 0; i < eps.size(); ++i) {
        require(eps[i] > 0 && y[i] > 0, "BadFit", "fit_order needs positive data");
        lx[i] = std::log(eps[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

Spline::Spline(Grid1D g, std::vector<double> y, bool even_ends) : g_(g), y_(std::move(y)) {
    const int n = g_.n;
    require((int)y_.size() == n && n >= 3, "BadSpline", "spline size mismatch");
    const double h = g_.h();
    // Solve the tridiagonal system for second derivatives m_.
    std::vector<double> dl(n, 0), d(n, 0), du(n, 0), rhs(n, 0);
    for (int i = 1; i < n - 1; ++i) {
        dl[i] = h / 6.0;
        d[i] = 2.0 * h / 3.0;
        du[i] = h / 6.0;
        rhs[i] = (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / h;
    }
    if (even_ends) {
        // y'(a)=0: h/3 m0 + h/6 m1 = (y1-y0)/h, and mirrored at b.
        d[0] = h / 3.0;
        du[0] = h / 6.0;
        rhs[0] = (y_[1] - y_[0]) / h;
        d[n - 1] = h / 3.0;
        dl[n - 1] = h / 6.0;
        rhs[n - 1] = -(y_[n - 1] - y_[n - 2]) / h;
    } else {
        d[0] = 1.0;
        d[n - 1] = 1.0;
    }
    // Thomas algorithm.
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0);
    c[0] = du[0] / d[0];
    m_[0] = rhs[0] / d[0];
    for (int i = 1; i < n; ++i) {
        const double piv = d[i] - dl[i] * c[i - 1];
        c[i] = du[i] / piv;
        m_[i] = (rhs[i] - dl[i] * m_[i - 1]) / piv;
    }
    for (int i = n - 2; i >= 0; --i) m_[i] -= c[i] * m_[i + 1];
}

void Spline::locate(double x, int& i, double& t) const {
    const double h = g_.h();
    double u = (x - g_.a) / h;
    i = (int)std::floor(u);
    i = std::max(0, std::min(g_.n - 2, i));
    t = x - g_.node(i);
}

double Spline::operator()(double x) const {
    int i;
    double t;
    locate(x, i, t);
    const double h = g_.h(), s = h - t;
    return (m_[i] * s * s * s + m_[i + 1] * t * t * t) / (6.0 * h) +
           (y_[i] / h - m_[i] * h / 6.0) * s + (y_[i + 1] / h - m_[i + 1] * h / 6.0) * t;
}

double Spline::deriv(double x) const {
    int i;
    double t;
    locate(x, i, t);
    const double h = g_.h(), s = h - t;
    return (-m_[i] * s * s + m_[i + 1] * t * t) / (2.0 * h) - (y_[i] / h - m_[i] * h / 6.0) +
           (y_[i + 1] / h - m_[i + 1] * h / 6.0);
}

double Spline::deriv2(double x) const {
    int i;
    double t;
    locate(x, i, t);
    const double h = g_.h();
    return m_[i] * (h - t) / h + m_[i + 1] * t / h;
}

namespace {
// Quintic smoothstep on [0,1].
double smooth5(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smooth5_d1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
double smooth5_d2(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }
} // namespace

double cutoff_eta(double r) {
    const double a = std::abs(r);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return 1.0 - smooth5(a - 1.0);
}

double cutoff_eta_d1(double r) {
    const double a = std::abs(r);
    if (a <= 1.0 || a >= 2.0) return 0.0;
    const double d = -smooth5_d1(a - 1.0);
    return r > 0 ? d : -d;
}

double cutoff_eta_d2(double r) {
    const double a = std::abs(r);
    if (a <= 1.0 || a >= 2.0) return 0.0;
    return -smooth5_d2(a - 1.0);
}

double odd_ramp(double z) {
    if (z <= -1.0) return -1.0;
    if (z >= 1.0) return 1.0;
    // cubic with zero slope at +-1
    return 0.5 * z * (3.0 - z * z);
}

} // namespace sil
