#pragma once
//
// Time evolution of u_t = A u - u u_x + f(x) v(t), A = -d^5 + d^3 + d (truncated
// to |k| <= N), and the fixed-point iteration that turns linear controls into
// controls for the nonlinear system.
//
// Per mode:  d/dt u_k = lambda_k u_k - (ik/2) (u^2)_k + f_k v(t).
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "biortho.hpp"
#include "errors.hpp"
#include "moment.hpp"
#include "quadrature.hpp"
#include "spectral_field.hpp"
#include "spectrum.hpp"

namespace kawahara {

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> snapshots;
    std::string solver;       ///< "linear-exact" or "nonlinear-ifrk4"
    double step = 0.0;        ///< time step (0 for the exact linear solver)
    bool dealias = true;
    int product_grid = 0;     ///< grid used for the quadratic term

    int max_index() const { return snapshots.front().max_index(); }
    const SpectralField& endpoint() const { return snapshots.back(); }
};

namespace detail {

inline void check_truncations(const SpectralField& u0, const ShapeProfile& profile, const EigenvalueSequence& seq)
{
    require(profile.max_index() == u0.max_index(), "evolve: truncation mismatch between state and profile");
    require(seq.max_index() >= u0.max_index(), "evolve: spectrum shorter than the state truncation");
}

inline int product_grid_size(int max_index, int grid_size, bool dealias)
{
    return dealias ? std::max(grid_size, 3 * max_index + 1) : grid_size;
}

/// out_k = -(ik/2) (u^2)_k for |k| <= N, product formed on an M-point grid.
class QuadraticTerm {
public:
    QuadraticTerm(int max_index, int grid) : n_(max_index), m_(grid), spec_(std::size_t(grid)), phys_(std::size_t(grid))
    {
        require(grid >= 2 * max_index + 1, "quadratic term: grid too small");
    }

    void operator()(const std::vector<cplx>& u, std::vector<cplx>& out)
    {
        std::fill(spec_.begin(), spec_.end(), cplx{});
        for (int k = -n_; k <= n_; ++k) spec_[wrap(k, m_)] += u[std::size_t(k + n_)];
        fft_.inv(phys_, spec_);
        const double scale = double(m_);
        for (auto& p : phys_) {
            const double r = p.real() * scale;
            p = cplx(r * r, 0.0);
        }
        fft_.fwd(spec_, phys_);
        out.resize(u.size());
        for (int k = -n_; k <= n_; ++k)
            out[std::size_t(k + n_)] = cplx(0.0, -0.5 * k) * (spec_[wrap(k, m_)] / scale);
    }

private:
    int n_, m_;
    Eigen::FFT<double> fft_;
    std::vector<cplx> spec_, phys_;
};

inline std::vector<cplx> symmetrized(std::vector<cplx> c)
{
    const int n = int(c.size() / 2);
    for (int k = 1; k <= n; ++k) c[std::size_t(n - k)] = std::conj(c[std::size_t(n + k)]);
    return c;
}

}  // namespace detail

/// zeta0 = S(T) u0: e^{lambda_k T} u0_k. Negative T runs the group backwards.
inline SpectralField free_endpoint(const SpectralField& u0, const EigenvalueSequence& seq, double horizon)
{
    require(seq.max_index() >= u0.max_index(), "free_endpoint: spectrum shorter than the state truncation");
    std::vector<cplx> c(u0.size());
    for (int k = -u0.max_index(); k <= u0.max_index(); ++k)
        c[std::size_t(k + u0.max_index())] = std::exp(seq[k] * horizon) * u0[k];
    return SpectralField(u0.max_index(), std::move(c));
}

/// Per-mode Duhamel on n_snapshots uniform times in [0, T]: closed form for exponential
/// sums, the signal's own quadrature rule for sampled controls.
inline Trajectory evolve_linear(const SpectralField& u0, const ShapeProfile& profile, const ControlSignal& control,
                                const EigenvalueSequence& seq, double horizon, int n_snapshots = 2)
{
    detail::check_truncations(u0, profile, seq);
    require(horizon > 0.0, "evolve_linear: horizon must be positive");
    require(n_snapshots >= 2, "evolve_linear: need at least 2 snapshots");
    require(control_horizon(control) >= horizon * (1.0 - 1e-12), "evolve_linear: control shorter than the horizon");

    const int n = u0.max_index();
    Trajectory tr;
    tr.solver = "linear-exact";
    tr.product_grid = 3 * n + 1;
    const auto intervals = std::size_t(n_snapshots - 1);
    for (std::size_t i = 0; i <= intervals; ++i) tr.times.push_back(horizon * double(i) / double(intervals));

    std::vector<std::vector<cplx>> modes(tr.times.size(), std::vector<cplx>(u0.size()));
    if (const auto* e = std::get_if<ExponentialSum>(&control)) {
        for (int k = -n; k <= n; ++k) {
            const cplx lam = seq[k];
            for (std::size_t i = 0; i < tr.times.size(); ++i) {
                const double t = tr.times[i];
                const cplx duhamel = e->coeffs.empty() ? cplx{} : profile[k] * e->real_part_moment(-lam, t);
                modes[i][std::size_t(k + n)] = std::exp(lam * t) * (u0[k] + duhamel);
            }
        }
    } else {
        const auto& s = std::get<SampledSignal>(control);
        s.validate();
        require(std::abs(s.horizon - horizon) <= 1e-12 * horizon, "evolve_linear: sampled control horizon must equal T");
        const std::size_t panels = (s.values.size() - 1) / 2;
        require(panels % intervals == 0, "evolve_linear: snapshot times must fall on quadrature panel boundaries");
        const std::size_t per = panels / intervals;
        for (int k = -n; k <= n; ++k) {
            const cplx lam = seq[k];
            const auto cum = s.rule == QuadratureRule::Filon ? quad::filon_cumulative(s.values, s.step(), -lam)
                                                             : quad::simpson_cumulative(s.values, s.step(), -lam);
            for (std::size_t i = 0; i < tr.times.size(); ++i)
                modes[i][std::size_t(k + n)] = std::exp(lam * tr.times[i]) * (u0[k] + profile[k] * cum[i * per]);
        }
    }
    for (auto& m : modes) tr.snapshots.emplace_back(n, detail::symmetrized(std::move(m)));
    return tr;
}

/// Integrating-factor RK4 with exact linear propagator; snapshots every `snapshot_stride` steps.
inline Trajectory evolve_nonlinear(const SpectralField& u0, const ShapeProfile& profile, const ControlSignal& control,
                                   const EigenvalueSequence& seq, double horizon, double dt, int grid_size,
                                   bool dealias = true, int snapshot_stride = 1)
{
    detail::check_truncations(u0, profile, seq);
    const int n = u0.max_index();
    require(horizon > 0.0, "evolve_nonlinear: horizon must be positive");
    require(dt > 0.0 && dt <= horizon, "evolve_nonlinear: need 0 < dt <= T");
    require(grid_size >= 3 * n, "evolve_nonlinear: grid_size must be >= 3 * max_index");
    require(snapshot_stride >= 1, "evolve_nonlinear: snapshot_stride must be >= 1");
    const double steps_real = horizon / dt;
    const auto steps = static_cast<long long>(std::llround(steps_real));
    require(steps >= 1 && std::abs(steps_real - double(steps)) <= 1e-9 * steps_real,
            "evolve_nonlinear: T must be an integer multiple of dt");
    require(steps % snapshot_stride == 0, "evolve_nonlinear: step count must be a multiple of snapshot_stride");
    require(control_horizon(control) >= horizon * (1.0 - 1e-12), "evolve_nonlinear: control shorter than the horizon");

    const double h = horizon / double(steps);
    const int grid = detail::product_grid_size(n, grid_size, dealias);
    detail::QuadraticTerm quadratic(n, grid);

    const std::size_t sz = u0.size();
    std::vector<cplx> e_half(sz), e_full(sz), fk(sz);
    double f_max = 0.0;
    for (int k = -n; k <= n; ++k) {
        const auto i = std::size_t(k + n);
        e_half[i] = std::exp(seq[k] * (h / 2.0));
        e_full[i] = e_half[i] * e_half[i];
        fk[i] = profile[k];
        f_max = std::max(f_max, std::abs(fk[i]));
    }

    double u_max = 0.0;
    for (const auto& c : u0.coeffs()) u_max = std::max(u_max, std::abs(c));
    const double reference = std::max({u_max, f_max * control_sup_bound(control) * std::max(1.0, horizon), 1e-300});
    const double blowup = 1e6 * reference;

    Trajectory tr;
    tr.solver = "nonlinear-ifrk4";
    tr.step = h;
    tr.dealias = dealias;
    tr.product_grid = grid;
    tr.times.push_back(0.0);
    tr.snapshots.push_back(u0);

    std::vector<cplx> u = u0.coeffs(), k1, k2, k3, k4, stage(sz);
    auto rhs = [&](const std::vector<cplx>& x, double vt, std::vector<cplx>& out) {
        quadratic(x, out);
        for (std::size_t i = 0; i < sz; ++i) out[i] += fk[i] * vt;
    };

    for (long long s = 0; s < steps; ++s) {
        const double t = h * double(s);
        const double v0 = control_value(control, t);
        const double vh = control_value(control, t + h / 2.0);
        const double v1 = control_value(control, t + h);

        rhs(u, v0, k1);
        for (std::size_t i = 0; i < sz; ++i) stage[i] = e_half[i] * (u[i] + (h / 2.0) * k1[i]);
        rhs(stage, vh, k2);
        for (std::size_t i = 0; i < sz; ++i) stage[i] = e_half[i] * u[i] + (h / 2.0) * k2[i];
        rhs(stage, vh, k3);
        for (std::size_t i = 0; i < sz; ++i) stage[i] = e_full[i] * u[i] + h * e_half[i] * k3[i];
        rhs(stage, v1, k4);
        for (std::size_t i = 0; i < sz; ++i)
            u[i] = e_full[i] * (u[i] + (h / 6.0) * k1[i]) + (h / 3.0) * e_half[i] * (k2[i] + k3[i]) + (h / 6.0) * k4[i];
        u = detail::symmetrized(std::move(u));

        for (std::size_t i = 0; i < sz; ++i) {
            const double a = std::abs(u[i]);
            if (!(a <= blowup))
                throw NumericalInstability("evolve_nonlinear: |u_" + std::to_string(int(i) - n) + "| = " +
                                           std::to_string(a) + " exceeds 1e6 x initial scale at t = " +
                                           std::to_string(t + h) + "; reduce dt or the data size");
        }
        if ((s + 1) % snapshot_stride == 0) {
            tr.times.push_back(s + 1 == steps ? horizon : t + h);
            tr.snapshots.emplace_back(n, u);
        }
    }
    return tr;
}

/// zeta1 = \int_0^T S(T - tau) N(xi(tau)) dtau with N(xi) = -xi xi_x (the sign the PDE
/// gives), by composite Simpson over the trajectory snapshots.
inline SpectralField nonlinear_duhamel_endpoint(const Trajectory& traj, const EigenvalueSequence& seq, double horizon,
                                                std::size_t stride = 1)
{
    require(stride >= 1, "duhamel endpoint: stride must be >= 1");
    require(!traj.snapshots.empty() && traj.times.size() == traj.snapshots.size(), "duhamel endpoint: empty trajectory");
    require((traj.snapshots.size() - 1) % stride == 0, "duhamel endpoint: stride does not divide the snapshot count");
    const std::size_t count = (traj.snapshots.size() - 1) / stride + 1;
    require(count >= 3 && count % 2 == 1, "duhamel endpoint: Simpson needs an odd number (>= 3) of snapshots");
    require(std::abs(traj.times.back() - horizon) <= 1e-12 * std::max(1.0, horizon) && traj.times.front() == 0.0,
            "duhamel endpoint: trajectory does not span [0, T]");
    const double h = horizon / double(count - 1);
    for (std::size_t i = 0; i < count; ++i)
        require(std::abs(traj.times[i * stride] - h * double(i)) <= 1e-9 * h, "duhamel endpoint: snapshots not uniform");

    const int n = traj.max_index();
    require(seq.max_index() >= n, "duhamel endpoint: spectrum shorter than the trajectory truncation");
    detail::QuadraticTerm quadratic(n, std::max(traj.product_grid, 2 * n + 1));
    const auto w = quad::simpson_weights(count, h);
    std::vector<cplx> acc(traj.snapshots.front().size()), nl;
    for (std::size_t i = 0; i < count; ++i) {
        quadratic(traj.snapshots[i * stride].coeffs(), nl);
        const double tau = h * double(i);
        for (int k = -n; k <= n; ++k)
            acc[std::size_t(k + n)] += w[i] * std::exp(seq[k] * (horizon - tau)) * nl[std::size_t(k + n)];
    }
    return SpectralField(n, detail::symmetrized(std::move(acc)));
}

/// sup_t ||a(t) - b(t)|| in the l2 coefficient norm (same time grid required).
inline double trajectory_distance(const Trajectory& a, const Trajectory& b)
{
    require(a.snapshots.size() == b.snapshots.size(), "trajectory distance: different time grids");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
        const auto& x = a.snapshots[i].coeffs();
        const auto& y = b.snapshots[i].coeffs();
        require(x.size() == y.size(), "trajectory distance: truncation mismatch");
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += std::norm(x[j] - y[j]);
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

inline double coeff_norm(const SpectralField& u) { return std::sqrt(u.coeff_norm2()); }

inline double coeff_distance(const SpectralField& a, const SpectralField& b)
{
    require(a.max_index() == b.max_index(), "distance: truncation mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a.coeffs()[j] - b.coeffs()[j]);
    return std::sqrt(s);
}

enum class SolverChoice { MinNorm, BiorthoSeries };

inline const char* solver_name(SolverChoice s) { return s == SolverChoice::MinNorm ? "min_norm" : "biortho_series"; }

struct FixedPointOptions {
    SolverChoice solver = SolverChoice::MinNorm;
    double dt = 0.0;                ///< 0 selects 1e-3, or twice the family step for biortho_series
    int grid_size = 0;              ///< 0 selects 4 * max_index
    bool dealias = true;
    int snapshot_stride = 1;
    int max_iterations = 50;
    double tol = 1e-10;             ///< on sup_t ||xi^{j+1}(t) - xi^j(t)||
    double smallness = 0.1;         ///< bound on ||u0||, ||u1|| (l2 coefficient norm)
    bool include_zero_mode = true;
    double condition_ceiling = kDefaultConditionCeiling;
};

struct FixedPointReport {
    int iterations = 0;
    std::vector<double> update_norms;
    std::vector<double> contraction_ratios;  ///< update_norms[j] / update_norms[j-1]
    double endpoint_error = 0.0;             ///< ||xi(T) - u1||
    double relative_endpoint_error = 0.0;    ///< divided by max(||u0||, ||u1||) when nonzero
    double control_norm = 0.0;               ///< ||v||_{L2(0,T)}
    double moment_residual = 0.0;            ///< max |moment residual| of the last linear solve
    double duhamel_quadrature_estimate = 0.0;  ///< |zeta1(h) - zeta1(2h)| / 15, NaN if unavailable
    double condition = 0.0;                  ///< Gram condition (min-norm only)
    bool converged = false;
};

struct FixedPointResult {
    ControlSignal control;
    Trajectory trajectory;
    FixedPointReport report;
    MomentProblem problem;  ///< the moment problem the final control solves
};

/// Iterates xi -> v(xi) -> xi' with v solving the reachability moment problem for
/// u1 - S(T)u0 - zeta1(xi). The first iterate uses xi = 0 (the linear control).
inline FixedPointResult fixed_point_control(const SpectralField& u0, const SpectralField& u1,
                                            const ShapeProfile& profile, const EigenvalueSequence& seq,
                                            double horizon, const FixedPointOptions& opt = {},
                                            const BiorthogonalFamily* family = nullptr)
{
    detail::check_truncations(u0, profile, seq);
    require(u1.max_index() == u0.max_index(), "fixed point: u0 and u1 truncations differ");
    require(opt.max_iterations >= 1, "fixed point: max_iterations must be >= 1");
    require(opt.tol > 0.0, "fixed point: tol must be positive");
    require(coeff_norm(u0) <= opt.smallness && coeff_norm(u1) <= opt.smallness,
            "fixed point: data exceed the smallness bound");
    if (opt.solver == SolverChoice::BiorthoSeries)
        require(family != nullptr, "fixed point: biortho_series requires a family");

    const int n = u0.max_index();
    const int grid = opt.grid_size > 0 ? opt.grid_size : 4 * n;
    // With dt = 2h every RK4 stage of the sampled control falls on a sample, and the
    // stepper's forcing term reduces to the Simpson rule the series solver is exact for.
    const double dt = opt.dt > 0.0 ? opt.dt
                    : opt.solver == SolverChoice::BiorthoSeries && family ? 2.0 * family->grid().step
                                                                : 1e-3;
    const double scale = std::max(coeff_norm(u0), coeff_norm(u1));

    FixedPointResult res{ExponentialSum::zero(horizon), Trajectory{}, FixedPointReport{}, MomentProblem{}};
    auto& rep = res.report;
    std::optional<Trajectory> prev;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        const SpectralField zeta1 = prev ? nonlinear_duhamel_endpoint(*prev, seq, horizon)
                                         : SpectralField::zero(n);
        const auto problem =
            assemble_reachability_problem(u0, u1, zeta1, profile, seq, horizon, opt.include_zero_mode);
        ControlSignal v;
        if (opt.solver == SolverChoice::MinNorm) {
            auto sol = solve_min_norm(problem, opt.condition_ceiling);
            rep.condition = sol.condition;
            v = std::move(sol.control);
        } else {
            v = solve_biortho_series(problem, *family).control;
        }
        rep.moment_residual = moment_residual(problem, v).max_abs();

        Trajectory next = evolve_nonlinear(u0, profile, v, seq, horizon, dt, grid, opt.dealias, opt.snapshot_stride);
        double update = 0.0;
        if (prev) {
            update = trajectory_distance(next, *prev);
        } else {
            for (const auto& s : next.snapshots) update = std::max(update, coeff_norm(s));
        }
        rep.iterations = it;
        if (!rep.update_norms.empty())
            rep.contraction_ratios.push_back(rep.update_norms.back() > 0.0 ? update / rep.update_norms.back() : 0.0);
        rep.update_norms.push_back(update);

        res.control = std::move(v);
        res.problem = problem;
        prev = std::move(next);
        if (update <= opt.tol) {
            rep.converged = true;
            break;
        }
    }
    res.trajectory = std::move(*prev);

    rep.endpoint_error = coeff_distance(res.trajectory.endpoint(), u1);
    rep.relative_endpoint_error = scale > 0.0 ? rep.endpoint_error / scale : rep.endpoint_error;
    rep.control_norm = control_l2_norm(res.control);
    rep.duhamel_quadrature_estimate = std::numeric_limits<double>::quiet_NaN();
    if ((res.trajectory.snapshots.size() - 1) % 4 == 0) {
        const auto fine = nonlinear_duhamel_endpoint(res.trajectory, seq, horizon, 1);
        const auto coarse = nonlinear_duhamel_endpoint(res.trajectory, seq, horizon, 2);
        rep.duhamel_quadrature_estimate = coeff_distance(fine, coarse) / 15.0;
    }
    return res;
}

}  // namespace kawahara
