#include "sil/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/lin.hpp"

namespace sil {

double ScalarPotential::min_wells_d2() const { return std::min(d2(well_minus), d2(well_plus)); }

ScalarPotential make_quartic() {
    ScalarPotential f;
    f.name = "quartic";
    f.eval = [](double u) { return 0.5 * (1 - u * u) * (1 - u * u); };
    f.d1 = [](double u) { return 2.0 * u * u * u - 2.0 * u; };
    f.d2 = [](double u) { return 6.0 * u * u - 2.0; };
    f.d3 = [](double u) { return 12.0 * u; };
    f.radial_radius = 1.0;
    return f;
}

ScalarPotential make_polynomial(const std::vector<double>& coeffs, double radial_radius) {
    ScalarPotential f;
    f.name = "polynomial";
    auto horner = [](const std::vector<double>& c, double u) {
        double v = 0;
        for (size_t i = c.size(); i-- > 0;) v = v * u + c[i];
        return v;
    };
    auto derive = [](const std::vector<double>& c) {
        std::vector<double> d;
        for (size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * (double)i);
        if (d.empty()) d.push_back(0.0);
        return d;
    };
    const auto c1 = derive(coeffs), c2 = derive(c1), c3 = derive(c2);
    f.eval = [coeffs, horner](double u) { return horner(coeffs, u); };
    f.d1 = [c1, horner](double u) { return horner(c1, u); };
    f.d2 = [c2, horner](double u) { return horner(c2, u); };
    f.d3 = [c3, horner](double u) { return horner(c3, u); };
    f.radial_radius = radial_radius;
    return f;
}

std::vector<double> VectorPotential::reflect(const std::vector<double>& v) const {
    // R v = v - 2 ((v-mid).n) n with n along well_plus - well_minus.
    const int m = dim;
    std::vector<double> n(m), mid(m), r(m);
    double nn = 0;
    for (int i = 0; i < m; ++i) {
        n[i] = well_plus[i] - well_minus[i];
        mid[i] = 0.5 * (well_plus[i] + well_minus[i]);
        nn += n[i] * n[i];
    }
    double p = 0;
    for (int i = 0; i < m; ++i) p += (v[i] - mid[i]) * n[i];
    for (int i = 0; i < m; ++i) r[i] = v[i] - 2.0 * p * n[i] / nn;
    return r;
}

namespace {
double sym_min_eig(const std::vector<double>& H, int m) {
    SymBand A(m, m - 1);
    for (int j = 0; j < m; ++j)
        for (int i = j; i < m; ++i) A.at(i, j) = 0.5 * (H[(size_t)i * m + j] + H[(size_t)j * m + i]);
    return symband_values_smallest(A, 1)[0];
}
} // namespace

double VectorPotential::well_hessian_min_eig() const {
    return std::min(sym_min_eig(hess(well_minus), dim), sym_min_eig(hess(well_plus), dim));
}

VectorPotential make_twowell() {
    VectorPotential W;
    W.name = "twowell";
    W.dim = 2;
    W.well_minus = {-1.0, 0.0};
    W.well_plus = {1.0, 0.0};
    W.radial_radius = 2.0;
    W.eval = [](const std::vector<double>& u) {
        const double s = u[0] * u[0] + u[1] * u[1] - 1.0;
        return 0.25 * s * s + u[1] * u[1];
    };
    W.grad = [](const std::vector<double>& u) {
        const double s = u[0] * u[0] + u[1] * u[1] - 1.0;
        return std::vector<double>{s * u[0], s * u[1] + 2.0 * u[1]};
    };
    W.hess = [](const std::vector<double>& u) {
        const double s = u[0] * u[0] + u[1] * u[1] - 1.0;
        return std::vector<double>{s + 2.0 * u[0] * u[0], 2.0 * u[0] * u[1], 2.0 * u[0] * u[1],
                                   s + 2.0 * u[1] * u[1] + 2.0};
    };
    return W;
}

VectorPotential make_block_doubled(const VectorPotential& W0) {
    VectorPotential W;
    W.name = W0.name + "_doubled";
    const int m = W0.dim;
    W.dim = 2 * m;
    W.well_minus = W0.well_minus;
    W.well_plus = W0.well_plus;
    W.well_minus.insert(W.well_minus.end(), W0.well_minus.begin(), W0.well_minus.end());
    W.well_plus.insert(W.well_plus.end(), W0.well_plus.begin(), W0.well_plus.end());
    W.radial_radius = 2.0 * W0.radial_radius;
    auto split = [m](const std::vector<double>& u) {
        return std::pair(std::vector<double>(u.begin(), u.begin() + m),
                         std::vector<double>(u.begin() + m, u.end()));
    };
    W.eval = [W0, split](const std::vector<double>& u) {
        auto [a, b] = split(u);
        return W0.eval(a) + W0.eval(b);
    };
    W.grad = [W0, split, m](const std::vector<double>& u) {
        auto [a, b] = split(u);
        auto ga = W0.grad(a), gb = W0.grad(b);
        ga.insert(ga.end(), gb.begin(), gb.end());
        return ga;
    };
    W.hess = [W0, split, m](const std::vector<double>& u) {
        auto [a, b] = split(u);
        auto Ha = W0.hess(a), Hb = W0.hess(b);
        const int M = 2 * m;
        std::vector<double> H((size_t)M * M, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                H[(size_t)i * M + j] = Ha[(size_t)i * m + j];
                H[(size_t)(i + m) * M + (j + m)] = Hb[(size_t)i * m + j];
            }
        return H;
    };
    return W;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate(const ScalarPotential& f, double tol) {
    require(tol > 0, "BadTolerance", "validate needs tol > 0");
    ValidationReport rep;
    auto add = [&rep](const std::string& name, bool pass, double slack) {
        rep.checks.push_back({name, pass, slack});
    };
    const double a = f.well_minus, b = f.well_plus;
    add("critical_wells", std::abs(f.d1(a)) <= tol && std::abs(f.d1(b)) <= tol,
        std::max(std::abs(f.d1(a)), std::abs(f.d1(b))));
    const double m2 = f.min_wells_d2();
    add("convex_wells", m2 > tol, m2);
    add("equal_depth", std::abs(f.eval(a) - f.eval(b)) <= tol, std::abs(f.eval(a) - f.eval(b)));
    // f > f(1) strictly between the wells; fixed 257-point grid on [-3,3],
    // restricted to the open well interval.
    bool above = true;
    double min_gap = 1e300;
    for (int i = 0; i < 257; ++i) {
        const double u = -3.0 + 6.0 * i / 256.0;
        if (u <= a + 1e-9 || u >= b - 1e-9) continue;
        const double gap = f.eval(u) - f.eval(b);
        min_gap = std::min(min_gap, gap);
        if (gap <= 0) above = false;
    }
    add("above_well_depth", above, min_gap);
    bool radial = true;
    double worst = 1e300;
    for (int i = 0; i < 257; ++i) {
        const double u = -3.0 + 6.0 * i / 256.0;
        if (std::abs(u) < f.radial_radius) continue;
        const double s = u * f.d1(u);
        worst = std::min(worst, s);
        if (s < -tol) radial = false;
    }
    add("radial_sign", radial, worst);
    // Derivative consistency: central differences of f reproduce d1, d2.
    double dmax = 0;
    for (int i = 0; i < 20; ++i) {
        const double u = -2.0 + 4.0 * (i + 0.5) / 20.0, h = 1e-5;
        const double fd1 = (f.eval(u + h) - f.eval(u - h)) / (2 * h);
        const double fd2 = (f.d1(u + h) - f.d1(u - h)) / (2 * h);
        dmax = std::max(dmax, std::abs(fd1 - f.d1(u)) / std::max(1.0, std::abs(f.d1(u))));
        dmax = std::max(dmax, std::abs(fd2 - f.d2(u)) / std::max(1.0, std::abs(f.d2(u))));
    }
    add("derivative_consistency", dmax <= 1e-5, dmax);
    rep.well_hessian_min_eig = m2;
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                           [](const CheckResult& c) { return c.pass; });
    return rep;
}

ValidationReport validate(const VectorPotential& W, double tol) {
    require(tol > 0, "BadTolerance", "validate needs tol > 0");
    ValidationReport rep;
    auto add = [&rep](const std::string& name, bool pass, double slack) {
        rep.checks.push_back({name, pass, slack});
    };
    const int m = W.dim;
    auto norm = [m](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    add("critical_wells",
        norm(W.grad(W.well_minus)) <= tol && norm(W.grad(W.well_plus)) <= tol,
        std::max(norm(W.grad(W.well_minus)), norm(W.grad(W.well_plus))));
    const double lam = W.well_hessian_min_eig();
    add("positive_definite_wells", lam > tol, lam);
    add("equal_depth", std::abs(W.eval(W.well_minus) - W.eval(W.well_plus)) <= tol,
        std::abs(W.eval(W.well_minus) - W.eval(W.well_plus)));
    // Reflection symmetry and the radial condition on a fixed 33x33 grid in
    // the plane spanned by the first two coordinates of [-2,2]^2.
    bool sym = true, radial = true;
    double sym_worst = 0, rad_worst = 1e300;
    for (int i = 0; i < 33; ++i)
        for (int j = 0; j < 33; ++j) {
            std::vector<double> v(m, 0.0);
            v[0] = -2.0 + 4.0 * i / 32.0;
            if (m > 1) v[1] = -2.0 + 4.0 * j / 32.0;
            const double dW = std::abs(W.eval(W.reflect(v)) - W.eval(v));
            sym_worst = std::max(sym_worst, dW);
            if (dW > tol * std::max(1.0, std::abs(W.eval(v)))) sym = false;
            if (norm(v) >= W.radial_radius) {
                auto g = W.grad(v);
                double s = 0;
                for (int c = 0; c < m; ++c) s += v[c] * g[c];
                rad_worst = std::min(rad_worst, s);
                if (s < -tol) radial = false;
            }
        }
    add("reflection_symmetry", sym, sym_worst);
    add("radial_sign", radial, rad_worst);
    // Hessian vs central differences of grad at 20 fixed pseudo-random points.
    double dmax = 0;
    unsigned state = 12345;
    auto frand = [&state]() {
        state = state * 1664525u + 1013904223u;
        return -1.5 + 3.0 * (state / 4294967296.0);
    };
    for (int t = 0; t < 20; ++t) {
        std::vector<double> v(m);
        for (int c = 0; c < m; ++c) v[c] = frand();
        const auto H = W.hess(v);
        const double h = 1e-5;
        for (int c = 0; c < m; ++c) {
            auto vp = v, vm = v;
            vp[c] += h;
            vm[c] -= h;
            const auto gp = W.grad(vp), gm = W.grad(vm);
            for (int rix = 0; rix < m; ++rix) {
                const double fd = (gp[rix] - gm[rix]) / (2 * h);
                const double ref = std::max(1.0, std::abs(H[(size_t)rix * m + c]));
                dmax = std::max(dmax, std::abs(fd - H[(size_t)rix * m + c]) / ref);
            }
        }
    }
    add("hessian_consistency", dmax <= 1e-5, dmax);
    rep.well_hessian_min_eig = lam;
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                           [](const CheckResult& c) { return c.pass; });
    return rep;
}

} // namespace sil
