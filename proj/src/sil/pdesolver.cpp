#include "sil/pdesolver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

#include "sil/errors.hpp"
#include "sil/grid.hpp"

namespace sil {

namespace {

// Semi-implicit diffusion solve diagonalized by DCT-I (REDFT00), which is the
// exact eigenbasis of the mirrored-ghost Neumann Laplacian on vertex grids.
class DctSolver {
public:
    DctSolver(int nx, int ny, double hx, double hy) : nx_(nx), ny_(ny) {
        buf_.assign((size_t)nx * ny, 0.0);
        plan_fwd_ = fftw_plan_r2r_2d(ny, nx, buf_.data(), buf_.data(), FFTW_REDFT00,
                                     FFTW_REDFT00, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_r2r_2d(ny, nx, buf_.data(), buf_.data(), FFTW_REDFT00,
                                     FFTW_REDFT00, FFTW_ESTIMATE);
        lamx_.resize(nx);
        lamy_.resize(ny);
        for (int k = 0; k < nx; ++k)
            lamx_[k] = (2.0 * std::cos(M_PI * k / (nx - 1)) - 2.0) / (hx * hx);
        for (int k = 0; k < ny; ++k)
            lamy_[k] = (2.0 * std::cos(M_PI * k / (ny - 1)) - 2.0) / (hy * hy);
        norm_ = 4.0 * (double)(nx - 1) * (double)(ny - 1);
    }
    ~DctSolver() {
        fftw_destroy_plan(plan_fwd_);
        fftw_destroy_plan(plan_bwd_);
    }
    DctSolver(const DctSolver&) = delete;

    // u <- (I - dt Laplacian)^{-1} u
    void solve(std::vector<double>& u, double dt) {
        std::copy(u.begin(), u.end(), buf_.begin());
        fftw_execute(plan_fwd_);
        for (int l = 0; l < ny_; ++l)
            for (int k = 0; k < nx_; ++k)
                buf_[(size_t)l * nx_ + k] /= norm_ * (1.0 - dt * (lamx_[k] + lamy_[l]));
        fftw_execute(plan_bwd_);
        std::copy(buf_.begin(), buf_.end(), u.begin());
    }

private:
    int nx_, ny_;
    std::vector<double> buf_, lamx_, lamy_;
    double norm_ = 1;
    fftw_plan plan_fwd_{}, plan_bwd_{};
};

} // namespace

std::vector<double> apply_neumann_laplacian(const std::vector<double>& u, int nx, int ny,
                                            double hx, double hy) {
    std::vector<double> y((size_t)nx * ny);
    const double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int il = i > 0 ? i - 1 : 1, ir = i < nx - 1 ? i + 1 : nx - 2;
            const int jd = j > 0 ? j - 1 : 1, ju = j < ny - 1 ? j + 1 : ny - 2;
            y[(size_t)j * nx + i] =
                (u[(size_t)j * nx + il] - 2 * u[(size_t)j * nx + i] + u[(size_t)j * nx + ir]) *
                    ihx2 +
                (u[(size_t)jd * nx + i] - 2 * u[(size_t)j * nx + i] + u[(size_t)ju * nx + i]) *
                    ihy2;
        }
    return y;
}

namespace {

double node_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

double dirichlet_energy(const std::vector<double>& u, int nx, int ny, double hx, double hy) {
    double E = 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const double d = (u[(size_t)j * nx + i + 1] - u[(size_t)j * nx + i]) / hx;
            E += 0.5 * d * d * hx * hy * node_weight(j, ny);
        }
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double d = (u[(size_t)(j + 1) * nx + i] - u[(size_t)j * nx + i]) / hy;
            E += 0.5 * d * d * hx * hy * node_weight(i, nx);
        }
    return E;
}

} // namespace

double discrete_energy(const std::vector<double>& u, int nx, int ny, double hx, double hy,
                       double eps, const ScalarPotential& f) {
    double E = dirichlet_energy(u, nx, ny, hx, hy);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            E += node_weight(i, nx) * node_weight(j, ny) * hx * hy * f.eval(u[(size_t)j * nx + i]) /
                 (eps * eps);
    return E;
}

double discrete_energy_vec(const std::vector<double>& u, int nx, int ny, int m, double hx,
                           double hy, double eps, const VectorPotential& W) {
    double E = 0;
    const size_t plane = (size_t)nx * ny;
    for (int c = 0; c < m; ++c) {
        std::vector<double> uc(u.begin() + c * plane, u.begin() + (c + 1) * plane);
        E += dirichlet_energy(uc, nx, ny, hx, hy);
    }
    std::vector<double> v(m);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            for (int c = 0; c < m; ++c) v[c] = u[c * plane + (size_t)j * nx + i];
            E += node_weight(i, nx) * node_weight(j, ny) * hx * hy * W.eval(v) / (eps * eps);
        }
    return E;
}

namespace {

struct StepPlan {
    double dt = 0;
    int nsteps = 0;
};

StepPlan plan_steps(const EvolveConfig& cfg, double react_lip, double h2cap) {
    double dt = cfg.dt;
    if (dt <= 0) {
        dt = cfg.dt_safety * cfg.eps * cfg.eps / std::max(react_lip, 1e-12);
        if (cfg.scheme == Scheme::Explicit) dt = std::min(dt, h2cap);
    }
    StepPlan p;
    p.nsteps = std::max(1, (int)std::ceil(cfg.T / dt - 1e-12));
    p.dt = cfg.T / p.nsteps;
    return p;
}

template <typename React, typename Energy>
Trajectory evolve_impl(const std::vector<double>& u0, int nx, int ny, int m, double eps,
                       const EvolveConfig& cfg, double react_lip, React react, Energy energy) {
    const double hx = 1.0 / (nx - 1), hy = 1.0 / (ny - 1);
    if (cfg.scheme == Scheme::Explicit) {
        const double cap = 0.25 * std::min(hx * hx, hy * hy);
        require(cfg.dt <= 0 || cfg.dt <= cap + 1e-15, "BadInput",
                "explicit scheme requires dt <= h^2/4");
    }
    const auto plan = plan_steps(cfg, react_lip, 0.25 * std::min(hx * hx, hy * hy));

    Trajectory traj;
    traj.nx = nx;
    traj.ny = ny;
    traj.m = m;
    traj.hx = hx;
    traj.hy = hy;
    traj.eps = eps;
    traj.dt = plan.dt;
    std::vector<double> samples = cfg.sample_times;
    if (samples.empty()) samples = {0.0, cfg.T};
    std::vector<int> sample_steps;
    for (double ts : samples)
        sample_steps.push_back(std::max(0, std::min(plan.nsteps, (int)std::llround(ts / plan.dt))));

    const size_t plane = (size_t)nx * ny;
    std::vector<double> u = u0;
    DctSolver dct(nx, ny, hx, hy);
    std::vector<double> r(plane);

    auto record_sample = [&](int step) {
        for (size_t si = 0; si < sample_steps.size(); ++si)
            if (sample_steps[si] == step) {
                traj.sample_times.push_back(step * plan.dt);
                traj.snapshots.push_back(u);
            }
    };
    auto instrument = [&](int step) {
        double sup = 0;
        for (double x : u) sup = std::max(sup, std::abs(x));
        traj.instr.t.push_back(step * plan.dt);
        traj.instr.energy.push_back(energy(u));
        traj.instr.supnorm.push_back(sup);
    };

    instrument(0);
    record_sample(0);
    for (int k = 0; k < plan.nsteps; ++k) {
        react(u, r); // r <- reaction term eps^{-2} f'(u) (per component plane)
        if (cfg.scheme == Scheme::SemiImplicit) {
            for (int c = 0; c < m; ++c) {
                std::vector<double> uc(u.begin() + c * plane, u.begin() + (c + 1) * plane);
                for (size_t p = 0; p < plane; ++p) uc[p] -= plan.dt * r[c * plane + p];
                dct.solve(uc, plan.dt);
                std::copy(uc.begin(), uc.end(), u.begin() + c * plane);
            }
        } else {
            for (int c = 0; c < m; ++c) {
                std::vector<double> uc(u.begin() + c * plane, u.begin() + (c + 1) * plane);
                const auto lap = apply_neumann_laplacian(uc, nx, ny, hx, hy);
                for (size_t p = 0; p < plane; ++p)
                    u[c * plane + p] += plan.dt * (lap[p] - r[c * plane + p]);
            }
        }
        for (double x : u)
            require(std::isfinite(x), "StepRejected", "non-finite value in the update");
        instrument(k + 1);
        record_sample(k + 1);
    }
    traj.instr.neumann_defect = 0.0; // mirrored-ghost closure: exact by construction
    return traj;
}

} // namespace

Trajectory ac_evolve(const std::vector<double>& u0, int nx, int ny, const ScalarPotential& f,
                     const EvolveConfig& cfg) {
    require((int)u0.size() == nx * ny, "BadGrid", "u0 size mismatch");
    double B = 1.0;
    for (double x : u0) B = std::max(B, std::abs(x));
    B = std::max(B, f.radial_radius) + 0.1;
    double lip = 0;
    for (int i = 0; i <= 64; ++i) lip = std::max(lip, std::abs(f.d2(-B + 2 * B * i / 64.0)));
    const size_t plane = (size_t)nx * ny;
    auto react = [&f, eps = cfg.eps, plane](const std::vector<double>& u, std::vector<double>& r) {
        r.resize(plane);
        for (size_t p = 0; p < plane; ++p) r[p] = f.d1(u[p]) / (eps * eps);
    };
    auto energy = [&f, nx, ny, eps = cfg.eps](const std::vector<double>& u) {
        return discrete_energy(u, nx, ny, 1.0 / (nx - 1), 1.0 / (ny - 1), eps, f);
    };
    return evolve_impl(u0, nx, ny, 1, cfg.eps, cfg, lip, react, energy);
}

Trajectory vac_evolve(const std::vector<double>& u0, int nx, int ny, int m,
                      const VectorPotential& W, const EvolveConfig& cfg) {
    require((int)u0.size() == m * nx * ny, "BadGrid", "u0 size mismatch");
    const size_t plane = (size_t)nx * ny;
    double B = 1.0;
    for (size_t p = 0; p < plane; ++p) {
        double s = 0;
        for (int c = 0; c < m; ++c) s += u0[c * plane + p] * u0[c * plane + p];
        B = std::max(B, std::sqrt(s));
    }
    B = std::max(B, W.radial_radius) + 0.1;
    // crude Lipschitz bound for grad W on the bounded ball via Hessian samples
    double lip = 0;
    for (int i = 0; i <= 32; ++i)
        for (int j = 0; j <= 32; ++j) {
            std::vector<double> v(m, 0.0);
            v[0] = -B + 2 * B * i / 32.0;
            if (m > 1) v[1] = -B + 2 * B * j / 32.0;
            const auto H = W.hess(v);
            double rowsum = 0;
            for (int c = 0; c < m; ++c) {
                double rs = 0;
                for (int c2 = 0; c2 < m; ++c2) rs += std::abs(H[(size_t)c * m + c2]);
                rowsum = std::max(rowsum, rs);
            }
            lip = std::max(lip, rowsum);
        }
    auto react = [&W, m, plane, eps = cfg.eps](const std::vector<double>& u,
                                               std::vector<double>& r) {
        r.resize(m * plane);
        std::vector<double> v(m);
        for (size_t p = 0; p < plane; ++p) {
            for (int c = 0; c < m; ++c) v[c] = u[c * plane + p];
            const auto g = W.grad(v);
            for (int c = 0; c < m; ++c) r[c * plane + p] = g[c] / (eps * eps);
        }
    };
    auto energy = [&W, nx, ny, m, eps = cfg.eps](const std::vector<double>& u) {
        return discrete_energy_vec(u, nx, ny, m, 1.0 / (nx - 1), 1.0 / (ny - 1), eps, W);
    };
    return evolve_impl(u0, nx, ny, m, cfg.eps, cfg, lip, react, energy);
}

BoundsReport bounds_check(const Trajectory& traj, const std::vector<double>& u0, double R0,
                          double slack) {
    BoundsReport r;
    const size_t plane = (size_t)traj.nx * traj.ny;
    double b0 = 0;
    for (size_t p = 0; p < plane; ++p) {
        double s = 0;
        for (int c = 0; c < traj.m; ++c) s += u0[c * plane + p] * u0[c * plane + p];
        b0 = std::max(b0, std::sqrt(s));
    }
    r.bound = std::max(R0, b0);
    double worst = -1e300;
    for (const auto& snap : traj.snapshots) {
        for (size_t p = 0; p < plane; ++p) {
            double s = 0;
            for (int c = 0; c < traj.m; ++c) s += snap[c * plane + p] * snap[c * plane + p];
            worst = std::max(worst, std::sqrt(s) - r.bound);
        }
    }
    r.worst_excess = worst;
    r.pass = worst <= slack;
    return r;
}

} // namespace sil
