#pragma once
//
// Null / reachability control of the truncated linear system as a moment
// problem. Per-mode Duhamel gives
//
//   u_hat_k(T) = e^{lambda_k T} ( u_hat0_k + f_hat_k \int_0^T e^{-lambda_k s} v(s) ds ),
//
// so u(T) = target iff  \int_0^T e^{-lambda_k s} v(s) ds = d_k  for every
// retained k, with d_k = (e^{-lambda_k T} target_k - u_hat0_k) / f_hat_k.
// (The form with v(T - s) e^{lambda_k s} and the factor e^{T lambda_k} is the
// same identity after s -> T - s.)
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "biortho.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "spectral_field.hpp"
#include "spectrum.hpp"

namespace kawahara {

/// \int_0^T e^{w s} ds.
inline cplx exp_integral(cplx w, double t)
{
    const cplx wt = w * t;
    if (std::abs(wt) < 1e-3) return t * (1.0 + wt / 2.0 + wt * wt / 6.0 + wt * wt * wt / 24.0);
    return (std::exp(wt) - 1.0) / w;
}

/// v(t) = sum_j c_j e^{rate_j t} on [0, T].
struct ExponentialSum {
    std::vector<int> indices;
    std::vector<cplx> coeffs;
    std::vector<cplx> rates;
    double horizon = 0.0;

    static ExponentialSum zero(double horizon) { return {{}, {}, {}, horizon}; }

    cplx value(double t) const
    {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < coeffs.size(); ++j) acc += coeffs[j] * std::exp(rates[j] * t);
        return acc;
    }

    /// \int_0^t e^{w s} Re v(s) ds in closed form (rates are imaginary, so
    /// conj(e^{r s}) = e^{conj(r) s}).
    cplx real_part_moment(cplx w, double t) const
    {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < coeffs.size(); ++j)
            acc += coeffs[j] * exp_integral(rates[j] + w, t) + std::conj(coeffs[j]) * exp_integral(std::conj(rates[j]) + w, t);
        return 0.5 * acc;
    }

    double coeff_l1() const
    {
        double s = 0.0;
        for (const auto& c : coeffs) s += std::abs(c);
        return s;
    }
};

enum class QuadratureRule { Simpson, Filon };

inline const char* rule_name(QuadratureRule r) { return r == QuadratureRule::Simpson ? "simpson" : "filon"; }

/// Real samples on the uniform grid t_i = i T / (n - 1), n odd.
struct SampledSignal {
    double horizon = 0.0;
    std::vector<double> values;
    QuadratureRule rule = QuadratureRule::Simpson;

    double step() const { return horizon / double(values.size() - 1); }
    double value(double t) const { return quad::quadratic_interpolate(values, step(), t); }

    void validate() const
    {
        require(horizon > 0.0, "sampled signal: horizon must be positive");
        require(values.size() >= 3 && values.size() % 2 == 1, "sampled signal: need an odd number (>= 3) of samples");
    }
};

using ControlSignal = std::variant<ExponentialSum, SampledSignal>;

inline double control_horizon(const ControlSignal& c)
{
    return std::visit([](const auto& s) { return s.horizon; }, c);
}

/// Real control value; the exponential sum's imaginary part is dropped.
inline double control_value(const ControlSignal& c, double t)
{
    if (const auto* e = std::get_if<ExponentialSum>(&c)) return e->value(t).real();
    return std::get<SampledSignal>(c).value(t);
}

/// Bound on sup |v| used for instability detection.
inline double control_sup_bound(const ControlSignal& c)
{
    if (const auto* e = std::get_if<ExponentialSum>(&c)) return e->coeff_l1();
    double m = 0.0;
    for (double v : std::get<SampledSignal>(c).values) m = std::max(m, std::abs(v));
    return m;
}

struct MomentProblem {
    double horizon = 0.0;
    std::vector<int> indices;   ///< closed under negation, ascending
    std::vector<cplx> rates;    ///< lambda_k for each index
    std::vector<cplx> targets;  ///< d_k

    std::size_t size() const { return indices.size(); }

    void validate() const
    {
        require(horizon > 0.0, "moment problem: horizon must be positive");
        require(rates.size() == indices.size() && targets.size() == indices.size(),
                "moment problem: inconsistent sizes");
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const auto mirror = std::find(indices.begin(), indices.end(), -indices[i]);
            require(mirror != indices.end(), "moment problem: index set not closed under negation");
            const auto j = static_cast<std::size_t>(mirror - indices.begin());
            const double scale = std::max(1.0, std::abs(targets[i]));
            require(std::abs(targets[j] - std::conj(targets[i])) <= 1e-12 * scale,
                    "moment problem: targets violate d_{-k} = conj(d_k)");
        }
    }
};

namespace detail {

inline std::vector<int> mode_indices(int max_index, bool include_zero)
{
    std::vector<int> idx;
    for (int k = -max_index; k <= max_index; ++k)
        if (k != 0 || include_zero) idx.push_back(k);
    return idx;
}

}  // namespace detail

/// Targets for steering `u0` to `target` at time T:
/// d_k = (e^{-lambda_k T} target_k - u0_k) / f_k.
inline MomentProblem assemble_problem(const SpectralField& u0, const SpectralField& target, const ShapeProfile& profile,
                                      const EigenvalueSequence& seq, double horizon, bool include_zero_mode,
                                      int control_max_index = -1)
{
    require(horizon > 0.0, "moment problem: horizon must be positive");
    require(u0.max_index() == profile.max_index() && target.max_index() == u0.max_index(),
            "moment problem: truncation mismatch between state and profile");
    const int n = control_max_index < 0 ? u0.max_index() : control_max_index;
    require(n <= u0.max_index(), "moment problem: control_max_index exceeds the truncation");
    require(n <= seq.max_index(), "moment problem: spectrum too short");
    require(n >= 1 || include_zero_mode, "moment problem: empty index set");
    MomentProblem p;
    p.horizon = horizon;
    p.indices = detail::mode_indices(n, include_zero_mode);
    for (int k : p.indices) {
        const cplx f = profile[k];
        if (std::abs(f) == 0.0)
            throw ValidationError("moment problem: profile vanishes at k = " + std::to_string(k));
        const cplx lam = seq[k];
        p.rates.push_back(lam);
        const cplx tk = target[k];
        cplx d = -u0[k] / f;
        if (tk != cplx{}) d += std::exp(-lam * horizon) * tk / f;
        p.targets.push_back(d);
    }
    p.validate();
    return p;
}

/// \int_0^T e^{-lambda_k s} v(s) ds = -u0_k / f_k.
inline MomentProblem assemble_null_control_problem(const SpectralField& u0, const ShapeProfile& profile,
                                                   const EigenvalueSequence& seq, double horizon,
                                                   bool include_zero_mode = true, int control_max_index = -1)
{
    return assemble_problem(u0, SpectralField::zero(u0.max_index()), profile, seq, horizon, include_zero_mode,
                            control_max_index);
}

/// Targets for phi(T) = u1 - S(T)u0 - zeta1, phi the controlled part of the state.
inline MomentProblem assemble_reachability_problem(const SpectralField& u0, const SpectralField& u1,
                                                   const SpectralField& extra_source_endstate,
                                                   const ShapeProfile& profile, const EigenvalueSequence& seq,
                                                   double horizon, bool include_zero_mode = true,
                                                   int control_max_index = -1)
{
    require(extra_source_endstate.max_index() == u1.max_index(), "moment problem: truncation mismatch");
    std::vector<cplx> diff(u1.size());
    for (int k = -u1.max_index(); k <= u1.max_index(); ++k)
        diff[static_cast<std::size_t>(k + u1.max_index())] = u1[k] - extra_source_endstate[k];
    return assemble_problem(u0, SpectralField(u1.max_index(), std::move(diff)), profile, seq, horizon,
                            include_zero_mode, control_max_index);
}

/// G[n][m] = \int_0^T e^{(lambda_m - lambda_n) s} ds.
inline Eigen::MatrixXcd gram_matrix(std::span<const cplx> rates, double horizon)
{
    const auto n = static_cast<Eigen::Index>(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i)
        for (std::size_t j = i + 1; j < rates.size(); ++j)
            if (rates[i] == rates[j])
                throw ValidationError("gram matrix: repeated frequency; merge collision classes first");
    Eigen::MatrixXcd g(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        g(r, r) = horizon;
        for (Eigen::Index c = 0; c < n; ++c) {
            if (c == r) continue;
            g(r, c) = exp_integral(rates[static_cast<std::size_t>(c)] - rates[static_cast<std::size_t>(r)], horizon);
        }
    }
    return g;
}

inline Eigen::MatrixXcd gram_matrix(const MomentProblem& problem)
{
    return gram_matrix(problem.rates, problem.horizon);
}

/// Ratio of extreme eigenvalues of a Hermitian positive matrix (infinity if not positive).
inline double hermitian_condition(const Eigen::MatrixXcd& g)
{
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    return ev.maxCoeff() / ev.minCoeff();
}

inline constexpr double kDefaultConditionCeiling = 1e12;

struct MinNormSolution {
    ExponentialSum control;
    double condition = 0.0;
    double linear_residual = 0.0;  ///< ||G c - d||
};

/// Minimal-L2 solution v(s) = sum_j c_j e^{lambda_j s} with G c = d.
inline MinNormSolution solve_min_norm(const MomentProblem& problem,
                                      double condition_ceiling = kDefaultConditionCeiling)
{
    problem.validate();
    MinNormSolution out;
    out.control.horizon = problem.horizon;
    if (problem.size() == 0) return out;
    const Eigen::MatrixXcd g = gram_matrix(problem);
    out.condition = hermitian_condition(g);
    if (!(out.condition <= condition_ceiling))
        throw SolverRefusal("min-norm: Gram condition number " + std::to_string(out.condition) +
                            " above ceiling " + std::to_string(condition_ceiling));
    const auto n = static_cast<Eigen::Index>(problem.size());
    Eigen::VectorXcd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = problem.targets[static_cast<std::size_t>(i)];
    const Eigen::VectorXcd c = g.ldlt().solve(d);
    out.linear_residual = (g * c - d).norm();
    out.control.indices = problem.indices;
    out.control.rates = problem.rates;
    out.control.coeffs.assign(c.data(), c.data() + n);
    return out;
}

/// ||v||_{L2(0,T)} for an exponential sum (closed form) or a sampled signal (Simpson).
inline double control_l2_norm(const ControlSignal& c)
{
    if (const auto* e = std::get_if<ExponentialSum>(&c)) {
        if (e->coeffs.empty()) return 0.0;
        const Eigen::MatrixXcd g = gram_matrix(e->rates, e->horizon);
        const Eigen::Map<const Eigen::VectorXcd> cv(e->coeffs.data(), static_cast<Eigen::Index>(e->coeffs.size()));
        return std::sqrt(std::max(0.0, (cv.adjoint() * g * cv)(0).real()));
    }
    const auto& s = std::get<SampledSignal>(c);
    std::vector<double> sq(s.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = s.values[i] * s.values[i];
    return std::sqrt(quad::simpson<double>(sq, s.step()));
}

struct BiorthoSeriesSolution {
    SampledSignal control;
    std::vector<int> indices;     ///< nonzero indices carried by the series
    std::vector<cplx> weights;    ///< w_k multiplying zeta_{-k}(s - T/2)
    double zero_mode_constant = 0.0;
    double family_defect = 0.0;   ///< biorthogonality defect on the problem's nonzero indices
    double expected_residual = 0.0;  ///< defect * (sum |w_k| + |c0| T)
    double max_imag = 0.0;        ///< largest discarded imaginary part of v
};

/// Series control v(s) = sum_k d_k e^{lambda_k T/2} zeta_{-k}(s - T/2) (+ c0 on [0, T]
/// when the zero mode is in the problem).
inline BiorthoSeriesSolution solve_biortho_series(const MomentProblem& problem, const BiorthogonalFamily& family)
{
    problem.validate();
    const double t_total = problem.horizon;
    require(std::abs(family.horizon() - t_total) < 1e-12, "biortho series: family horizon differs from the problem horizon");

    BiorthoSeriesSolution out;
    std::vector<cplx> d_nz;
    std::vector<cplx> rate_nz;
    cplx d0 = 0.0;
    bool has_zero = false;
    for (std::size_t i = 0; i < problem.size(); ++i) {
        const int k = problem.indices[i];
        if (k == 0) {
            has_zero = true;
            d0 = problem.targets[i];
            continue;
        }
        require(family.contains(-k), "biortho series: family lacks index " + std::to_string(-k));
        out.indices.push_back(k);
        d_nz.push_back(problem.targets[i]);
        rate_nz.push_back(problem.rates[i]);
    }

    const UniformGrid g = family.grid();
    const auto w = quad::simpson_weights(g.count, g.step);
    const std::size_t nk = out.indices.size();

    // Zero mode: constant kernel c0 coupled through E_k = \int_0^T e^{-lambda_k s} ds
    // and J_k = \int_0^T zeta_{-k}(s - T/2) ds. Both use the grid's Simpson weights so the
    // moments are exact under the rule the control is tagged with.
    std::vector<cplx> e_k(nk);
    for (std::size_t i = 0; i < nk && has_zero; ++i)
        for (std::size_t q = 0; q < g.count; ++q) e_k[i] += w[q] * std::exp(-rate_nz[i] * (g.step * double(q)));
    cplx c0 = 0.0;
    if (has_zero) {
        cplx num = d0, den = t_total;
        for (std::size_t i = 0; i < nk; ++i) {
            const auto& z = family.zeta(-out.indices[i]);
            cplx jk = 0.0;
            for (std::size_t q = 0; q < g.count; ++q) jk += w[q] * z[q];
            const cplx shift = std::exp(rate_nz[i] * (t_total / 2.0));
            num -= d_nz[i] * shift * jk;
            den -= e_k[i] * shift * jk;
        }
        c0 = num / den;
    }
    out.zero_mode_constant = c0.real();

    std::vector<cplx> v(g.count, cplx(c0.real(), 0.0));
    double wsum = 0.0;
    for (std::size_t i = 0; i < nk; ++i) {
        const cplx wk = (d_nz[i] - c0.real() * e_k[i]) * std::exp(rate_nz[i] * (t_total / 2.0));
        out.weights.push_back(wk);
        wsum += std::abs(wk);
        const auto& z = family.zeta(-out.indices[i]);
        for (std::size_t q = 0; q < g.count; ++q) v[q] += wk * z[q];
    }

    out.control.horizon = t_total;
    out.control.rule = QuadratureRule::Simpson;
    out.control.values.resize(g.count);
    double scale = 0.0;
    for (const auto& x : v) scale = std::max(scale, std::abs(x));
    for (std::size_t q = 0; q < g.count; ++q) {
        out.control.values[q] = v[q].real();
        out.max_imag = std::max(out.max_imag, std::abs(v[q].imag()));
    }
    if (out.max_imag > 1e-10 * std::max(1.0, scale))
        throw SolverRefusal("biortho series: control is not real; targets or family are not conjugate-symmetric");

    if (nk > 0) {
        std::vector<int> rows;
        for (int k : out.indices) rows.push_back(-k);
        const auto b = biorthogonality_matrix(family, family.spectrum(), rows, rows);
        out.family_defect = biorthogonality_defect(b, rows, rows);
    }
    out.expected_residual = out.family_defect * (wsum + std::abs(c0) * t_total);
    return out;
}

struct MomentResiduals {
    std::vector<int> indices;
    std::vector<cplx> residual;        ///< \int e^{-lambda_k s} v ds - d_k
    std::vector<double> error_estimate;  ///< Richardson estimate (sampled controls), else 0

    double max_abs() const
    {
        double m = 0.0;
        for (const auto& r : residual) m = std::max(m, std::abs(r));
        return m;
    }
};

namespace detail {

/// \int_0^T e^{w s} v(s) ds for a sampled signal under its rule; `stride` 2
/// uses every other sample.
inline cplx sampled_moment(const SampledSignal& s, cplx w, std::size_t stride)
{
    std::vector<double> vals;
    for (std::size_t i = 0; i < s.values.size(); i += stride) vals.push_back(s.values[i]);
    const double h = s.step() * double(stride);
    if (s.rule == QuadratureRule::Filon) return quad::filon_cumulative(vals, h, w).back();
    std::vector<cplx> f(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) f[i] = vals[i] * std::exp(w * (h * double(i)));
    return quad::simpson<cplx>(f, h);
}

}  // namespace detail

inline MomentResiduals moment_residual(const MomentProblem& problem, const ControlSignal& control)
{
    MomentResiduals out;
    out.indices = problem.indices;
    if (const auto* e = std::get_if<ExponentialSum>(&control)) {
        for (std::size_t i = 0; i < problem.size(); ++i) {
            const cplx acc = e->real_part_moment(-problem.rates[i], problem.horizon);
            out.residual.push_back(acc - problem.targets[i]);
            out.error_estimate.push_back(0.0);
        }
        return out;
    }
    const auto& s = std::get<SampledSignal>(control);
    s.validate();
    require(std::abs(s.horizon - problem.horizon) < 1e-12, "moment residual: control horizon differs from the problem");
    const bool coarse_ok = (s.values.size() - 1) % 4 == 0;
    const double order_factor = s.rule == QuadratureRule::Simpson ? 15.0 : 7.0;
    for (std::size_t i = 0; i < problem.size(); ++i) {
        const cplx fine = detail::sampled_moment(s, -problem.rates[i], 1);
        out.residual.push_back(fine - problem.targets[i]);
        double est = std::numeric_limits<double>::quiet_NaN();
        if (coarse_ok) est = std::abs(fine - detail::sampled_moment(s, -problem.rates[i], 2)) / order_factor;
        out.error_estimate.push_back(est);
    }
    return out;
}

}  // namespace kawahara
