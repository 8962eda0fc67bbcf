#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kawahara/kawahara_sim.hpp"

using namespace kawahara;

namespace {

const EigenvalueSequence& canon()
{
    static const auto seq = eigenvalue_sequence(DispersionParams::canonical(), 16);
    return seq;
}

SpectralField field(int n, std::vector<cplx> half)
{
    half.resize(std::size_t(n) + 1);
    return SpectralField::from_half(n, half);
}

SpectralField random_field(int n, std::mt19937_64& rng, double scale)
{
    std::normal_distribution<double> g(0.0, scale);
    std::vector<cplx> half(std::size_t(n) + 1);
    half[0] = g(rng);
    for (int k = 1; k <= n; ++k) half[std::size_t(k)] = {g(rng), g(rng)};
    return SpectralField::from_half(n, half);
}

ShapeProfile unit_profile(int n)
{
    return ShapeProfile(field(n, std::vector<cplx>(std::size_t(n) + 1, 1.0)));
}

ExponentialSum constant_signal(double c, double t)
{
    return ExponentialSum{{0}, {c}, {0.0}, t};
}

// Mean + cosines used for the conservation and convergence studies.
SpectralField smooth_state(int n)
{
    return field(n, {0.1, 0.05, 0.025});
}

double max_coeff_diff(const SpectralField& a, const SpectralField& b)
{
    double m = 0.0;
    for (int k = -a.max_index(); k <= a.max_index(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST(FreeEndpoint, Examples)
{
    std::mt19937_64 rng(1);
    const auto u0 = random_field(6, rng, 1.0);
    EXPECT_EQ(free_endpoint(u0, canon(), 0.0).coeffs(), u0.coeffs());

    const auto one = field(3, {0.0, cplx(0.3, 0.4)});
    const double t = 2.7;
    const auto e = free_endpoint(one, canon(), t);
    EXPECT_NEAR(std::abs(e[1] - cplx(0.3, 0.4) * std::polar(1.0, canon().mu(1) * t)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e[1]), 0.5, 1e-15);

    const auto lin = evolve_linear(u0, gaussian_profile(6), ExponentialSum::zero(t), canon(), t);
    EXPECT_LE(max_coeff_diff(lin.endpoint(), free_endpoint(u0, canon(), t)), 1e-14);
}

TEST(FreeEndpoint, TimeReversibility)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto u0 = random_field(16, rng, 1.0);
        const auto back = free_endpoint(free_endpoint(u0, canon(), 8.0), canon(), -8.0);
        EXPECT_LE(max_coeff_diff(back, u0), 1e-12);
    }
}

TEST(EvolveLinear, IsometryUnforced)
{
    std::mt19937_64 rng(3);
    const auto u0 = random_field(16, rng, 1.0);
    const auto tr = evolve_linear(u0, gaussian_profile(16), ExponentialSum::zero(8.0), canon(), 8.0, 81);
    ASSERT_EQ(tr.snapshots.size(), 81u);
    const double n0 = coeff_norm(u0);
    for (const auto& s : tr.snapshots) {
        EXPECT_LE(std::abs(coeff_norm(s) - n0), 1e-13 * n0);
        for (int k = -16; k <= 16; ++k)
            EXPECT_LE(std::abs(std::abs(s[k]) - std::abs(u0[k])), 1e-12 * std::max(1e-300, std::abs(u0[k])));
    }
}

TEST(EvolveLinear, ConstantForcing)
{
    const int n = 4;
    const double t = 3.0;
    for (const ControlSignal& v : {ControlSignal(constant_signal(1.0, t)),
                                   ControlSignal(SampledSignal{t, std::vector<double>(61, 1.0), QuadratureRule::Filon})}) {
        const auto tr = evolve_linear(SpectralField::zero(n), unit_profile(n), v, canon(), t);
        for (int k = -n; k <= n; ++k) {
            const cplx lam = canon()[k];
            const cplx want = k == 0 ? cplx(t) : (std::exp(lam * t) - 1.0) / lam;
            EXPECT_LE(std::abs(tr.endpoint()[k] - want), 1e-13) << k;
        }
    }
}

TEST(EvolveLinear, EndpointIdentityForExponentialSums)
{
    std::mt19937_64 rng(4);
    const int n = 6;
    const double t = 5.0;
    const auto u0 = random_field(n, rng, 0.5);
    const auto prof = gaussian_profile(n);
    ExponentialSum v;
    v.horizon = t;
    for (int j : {-2, 1, 3}) {
        v.indices.push_back(j);
        v.rates.push_back(canon()[j]);
        v.coeffs.push_back({double(rng() % 100) / 50.0 - 1.0, double(rng() % 100) / 50.0 - 1.0});
    }
    const auto end = evolve_linear(u0, prof, v, canon(), t).endpoint();
    const auto free = free_endpoint(u0, canon(), t);
    for (int k = -n; k <= n; ++k) {
        // Re v = (1/2) sum (c e^{r s} + conj(c) e^{-r s}); the rates are imaginary.
        cplx duhamel = 0.0;
        const cplx lk = canon()[k];
        for (std::size_t j = 0; j < v.coeffs.size(); ++j)
            for (const auto& [c, r] : {std::pair{v.coeffs[j], v.rates[j]}, std::pair{std::conj(v.coeffs[j]), -v.rates[j]}})
                duhamel += 0.5 * c * (r == lk ? t * std::exp(lk * t) : (std::exp(r * t) - std::exp(lk * t)) / (r - lk));
        EXPECT_LE(std::abs(end[k] - (free[k] + prof[k] * duhamel)), 1e-12) << k;
    }
}

TEST(EvolveLinear, SampledUsesItsOwnRule)
{
    // Simpson-tagged samples are propagated with Simpson: for mode 1 the endpoint
    // equals the composite Simpson sum of e^{-lambda s} computed here directly.
    const double t = 2.0;
    const std::size_t m = 41;
    const SampledSignal sig{t, std::vector<double>(m, 1.0), QuadratureRule::Simpson};
    const auto tr = evolve_linear(SpectralField::zero(2), unit_profile(2), sig, canon(), t);
    const double h = t / double(m - 1);
    for (int k : {1, 2}) {
        const cplx lam = canon()[k];
        cplx acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double wgt = (i == 0 || i + 1 == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += wgt * std::exp(-lam * (h * double(i)));
        }
        acc *= h / 3.0 * std::exp(lam * t);
        EXPECT_LE(std::abs(tr.endpoint()[k] - acc), 1e-13) << k;
    }
}

TEST(EvolveLinear, MinNormNullControl)
{
    const auto u0 = field(8, {0.0, 0.5, 0.25});
    const auto prof = gaussian_profile(8);
    const auto sol = solve_min_norm(assemble_null_control_problem(u0, prof, canon(), 8.0));
    const auto tr = evolve_linear(u0, prof, sol.control, canon(), 8.0);
    EXPECT_LE(coeff_norm(tr.endpoint()) / coeff_norm(u0), 1e-8);
}

TEST(EvolveLinear, Errors)
{
    const auto u0 = field(3, {0.1});
    EXPECT_THROW(evolve_linear(u0, gaussian_profile(4), ExponentialSum::zero(1.0), canon(), 1.0), ValidationError);
    EXPECT_THROW(evolve_linear(u0, gaussian_profile(3), ExponentialSum::zero(0.5), canon(), 1.0), ValidationError);
    EXPECT_THROW(evolve_linear(u0, gaussian_profile(3), ExponentialSum::zero(1.0), canon(), 1.0, 1), ValidationError);
    const SampledSignal s{1.0, std::vector<double>(11, 0.0), QuadratureRule::Filon};  // 5 panels
    EXPECT_THROW(evolve_linear(u0, gaussian_profile(3), s, canon(), 1.0, 3), ValidationError);
    EXPECT_NO_THROW(evolve_linear(u0, gaussian_profile(3), s, canon(), 1.0, 6));
}

TEST(EvolveNonlinear, ConservationUnforced)
{
    const int n = 16;
    const auto u0 = smooth_state(n);
    const auto tr = evolve_nonlinear(u0, gaussian_profile(n), ExponentialSum::zero(1.0), canon(), 1.0, 1e-3, 64);
    ASSERT_EQ(tr.snapshots.size(), 1001u);
    const double n0 = coeff_norm(u0);
    for (const auto& s : tr.snapshots) {
        EXPECT_EQ(s[0], u0[0]);
        EXPECT_LE(std::abs(coeff_norm(s) - n0), 1e-8 * n0);
    }
    EXPECT_EQ(tr.endpoint()[0], u0[0]);
    EXPECT_DOUBLE_EQ(tr.times.back(), 1.0);
}

TEST(EvolveNonlinear, FourthOrderConvergence)
{
    const int n = 16;
    const auto u0 = smooth_state(n);
    const auto prof = gaussian_profile(n);
    const ControlSignal v = ExponentialSum::zero(1.0);
    auto run = [&](double dt) {
        return evolve_nonlinear(u0, prof, v, canon(), 1.0, dt, 64, true, int(std::lround(1.0 / dt))).endpoint();
    };
    const auto ref = run(1e-3 / 16.0);
    const double e1 = coeff_distance(run(1e-3), ref);
    const double e2 = coeff_distance(run(5e-4), ref);
    EXPECT_GE(e1 / e2, 10.0);
    EXPECT_LE(e1 / e2, 24.0);
}

TEST(EvolveNonlinear, L2DriftShrinksWithDt)
{
    const int n = 16;
    const auto u0 = field(n, {0.0, 0.25, 0.125});
    const auto prof = gaussian_profile(n);
    auto drift = [&](double dt) {
        const auto tr = evolve_nonlinear(u0, prof, ExponentialSum::zero(1.0), canon(), 1.0, dt, 64, true,
                                         int(std::lround(1.0 / dt)));
        return std::abs(coeff_norm(tr.endpoint()) - coeff_norm(u0));
    };
    const double d1 = drift(4e-3), d2 = drift(2e-3);
    EXPECT_GE(d1 / d2, 10.0);
    EXPECT_LE(d1 / d2, 24.0);
}

TEST(EvolveNonlinear, MatchesLinearForTinyData)
{
    std::mt19937_64 rng(5);
    const int n = 8;
    auto u0 = random_field(n, rng, 1.0);
    u0 = u0.scaled(1e-6 / coeff_norm(u0));
    const auto prof = gaussian_profile(n);
    const auto nl = evolve_nonlinear(u0, prof, ExponentialSum::zero(1.0), canon(), 1.0, 1e-3, 32, true, 100);
    const auto lin = evolve_linear(u0, prof, ExponentialSum::zero(1.0), canon(), 1.0, 11);
    for (std::size_t i = 0; i < nl.snapshots.size(); ++i) EXPECT_LE(max_coeff_diff(nl.snapshots[i], lin.snapshots[i]), 1e-10);
}

TEST(EvolveNonlinear, ForcedMatchesLinearForTinyData)
{
    const int n = 6;
    const auto prof = gaussian_profile(n);
    const auto v = constant_signal(1e-7, 1.0);
    const auto nl = evolve_nonlinear(SpectralField::zero(n), prof, v, canon(), 1.0, 1e-3, 24);
    const auto lin = evolve_linear(SpectralField::zero(n), prof, v, canon(), 1.0);
    EXPECT_LE(max_coeff_diff(nl.endpoint(), lin.endpoint()), 1e-13);
}

TEST(EvolveNonlinear, InstabilityDetector)
{
    const int n = 16;
    const auto u0 = field(n, {0.0, 50.0, 30.0, 20.0});
    EXPECT_THROW(evolve_nonlinear(u0, gaussian_profile(n), ExponentialSum::zero(5.0), canon(), 5.0, 0.1, 64),
                 NumericalInstability);
}

TEST(EvolveNonlinear, Preconditions)
{
    const int n = 8;
    const auto u0 = field(n, {0.1});
    const auto prof = gaussian_profile(n);
    const auto v = ExponentialSum::zero(1.0);
    EXPECT_THROW(evolve_nonlinear(u0, prof, v, canon(), 1.0, 1e-3, 23), ValidationError);
    EXPECT_THROW(evolve_nonlinear(u0, prof, v, canon(), 1.0, 3e-3, 32), ValidationError);
    EXPECT_THROW(evolve_nonlinear(u0, prof, v, canon(), 1.0, 1e-3, 32, true, 3), ValidationError);
    EXPECT_THROW(evolve_nonlinear(u0, prof, v, canon(), 1.0, 0.0, 32), ValidationError);
    EXPECT_THROW(evolve_nonlinear(u0, prof, ExponentialSum::zero(0.5), canon(), 1.0, 1e-3, 32), ValidationError);
    EXPECT_NO_THROW(evolve_nonlinear(u0, prof, v, canon(), 1.0, 1e-3, 24, false, 10));
}

TEST(DuhamelEndpoint, ZeroAndSingleMode)
{
    const int n = 4;
    const auto z = evolve_linear(SpectralField::zero(n), gaussian_profile(n), ExponentialSum::zero(1.0), canon(), 1.0, 11);
    const auto ze = nonlinear_duhamel_endpoint(z, canon(), 1.0);
    for (const auto& c : ze.coeffs()) EXPECT_EQ(c, cplx(0.0, 0.0));

    Trajectory frozen;
    frozen.product_grid = 3 * n + 1;
    const auto xi = field(n, {0.0, cplx(0.3, -0.1)});
    for (int i = 0; i <= 2000; ++i) {
        frozen.times.push_back(i / 2000.0);
        frozen.snapshots.push_back(xi);
    }
    const auto e = nonlinear_duhamel_endpoint(frozen, canon(), 1.0);
    for (int k = -n; k <= n; ++k) {
        if (std::abs(k) == 2) {
            // frozen xi: -ik/2 (xi^2)_2 = -i xi_1^2, integrated against e^{lambda_2 (1 - tau)}
            const cplx lam = canon()[k];
            const cplx xk = k > 0 ? xi[1] * xi[1] : std::conj(xi[1] * xi[1]);
            const cplx want = cplx(0.0, -0.5 * k) * xk * (std::exp(lam) - 1.0) / lam;
            EXPECT_LE(std::abs(e[k] - want), 1e-7 * std::abs(want)) << k;
        } else
            EXPECT_LE(std::abs(e[k]), 1e-16) << k;
    }
}

TEST(DuhamelEndpoint, MatchesBruteForceOracle)
{
    // xi(tau) = S(tau) xi0 is known in closed form; the oracle forms the
    // quadratic term by direct convolution and integrates on a fine trapezoid grid.
    std::mt19937_64 rng(6);
    const int n = 3;
    const double t = 1.0;
    auto xi0 = random_field(n, rng, 1.0);
    xi0 = xi0.scaled(0.05 / coeff_norm(xi0));
    const auto traj = evolve_linear(xi0, gaussian_profile(n), ExponentialSum::zero(t), canon(), t, 2001);
    const auto got = nonlinear_duhamel_endpoint(traj, canon(), t);

    const std::size_t fine = 200001;
    const double h = t / double(fine - 1);
    std::vector<cplx> want(2 * n + 1);
    for (std::size_t i = 0; i < fine; ++i) {
        const double tau = h * double(i);
        const double w = (i == 0 || i + 1 == fine) ? 0.5 * h : h;
        for (int k = -n; k <= n; ++k) {
            cplx conv = 0.0;
            for (int j = -n; j <= n; ++j) {
                const int l = k - j;
                if (std::abs(l) > n) continue;
                conv += xi0[j] * std::exp(canon()[j] * tau) * xi0[l] * std::exp(canon()[l] * tau);
            }
            want[std::size_t(k + n)] += w * std::exp(canon()[k] * (t - tau)) * cplx(0.0, -0.5 * k) * conv;
        }
    }
    for (int k = -n; k <= n; ++k) EXPECT_LE(std::abs(got[k] - want[std::size_t(k + n)]), 1e-6) << k;
}

TEST(DuhamelEndpoint, Errors)
{
    const auto u0 = field(2, {0.1});
    const auto even = evolve_linear(u0, gaussian_profile(2), ExponentialSum::zero(1.0), canon(), 1.0, 4);
    EXPECT_THROW(nonlinear_duhamel_endpoint(even, canon(), 1.0), ValidationError);
    const auto two = evolve_linear(u0, gaussian_profile(2), ExponentialSum::zero(1.0), canon(), 1.0, 2);
    EXPECT_THROW(nonlinear_duhamel_endpoint(two, canon(), 1.0), ValidationError);
    const auto ok = evolve_linear(u0, gaussian_profile(2), ExponentialSum::zero(1.0), canon(), 1.0, 5);
    EXPECT_THROW(nonlinear_duhamel_endpoint(ok, canon(), 2.0), ValidationError);
}

TEST(FixedPoint, ZeroData)
{
    const auto z = SpectralField::zero(4);
    const auto r = fixed_point_control(z, z, gaussian_profile(4), canon(), 8.0);
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.report.iterations, 1);
    EXPECT_EQ(control_l2_norm(r.control), 0.0);
    EXPECT_EQ(r.report.endpoint_error, 0.0);
}

TEST(FixedPoint, SmallTwoModeNullControl)
{
    const double eps = 1e-2 / std::sqrt(0.625);
    const auto u0 = field(8, {0.0, eps / 2, eps / 4});
    const auto prof = gaussian_profile(8);
    const auto r = fixed_point_control(u0, SpectralField::zero(8), prof, canon(), 8.0);
    const auto& rep = r.report;
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.iterations, 20);
    EXPECT_EQ(rep.update_norms.size(), std::size_t(rep.iterations));
    for (std::size_t j = 1; j < rep.contraction_ratios.size(); ++j) EXPECT_LE(rep.contraction_ratios[j], 0.9);
    EXPECT_LE(rep.relative_endpoint_error, 1e-6);
    EXPECT_LE(rep.update_norms.back(), 1e-10);

    // Determinism: the returned control reproduces the endpoint bit for bit.
    const auto again = evolve_nonlinear(u0, prof, r.control, canon(), 8.0, 1e-3, 32);
    EXPECT_EQ(again.endpoint().coeffs(), r.trajectory.endpoint().coeffs());
}

TEST(FixedPoint, ReachesNonzeroTarget)
{
    const auto u0 = field(4, {0.0, 0.004});
    const auto u1 = field(4, {0.0, 0.0, cplx(0.0, 0.003)});
    const auto r = fixed_point_control(u0, u1, gaussian_profile(4), canon(), 8.0);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.relative_endpoint_error, 1e-6);
}

TEST(FixedPoint, BiorthoSeriesSolver)
{
    const auto fam = build_family(std::vector<int>{-2, -1, 1, 2}, canon(), BiorthoParams{});
    const auto u0 = field(2, {0.0, 0.004, 0.002});
    FixedPointOptions opt;
    opt.solver = SolverChoice::BiorthoSeries;
    opt.grid_size = 8;
    const auto r = fixed_point_control(u0, SpectralField::zero(2), gaussian_profile(2), canon(), 8.0, opt, &fam);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.relative_endpoint_error, 1e-6);
    EXPECT_TRUE(std::holds_alternative<SampledSignal>(r.control));
    EXPECT_DOUBLE_EQ(r.trajectory.step, 0.02);

    // Off-node stages see the quadratic interpolant instead of the Simpson samples.
    opt.dt = 1e-3;
    const auto off = fixed_point_control(u0, SpectralField::zero(2), gaussian_profile(2), canon(), 8.0, opt, &fam);
    EXPECT_TRUE(off.report.converged);
    EXPECT_GT(off.report.relative_endpoint_error, 10.0 * r.report.relative_endpoint_error);
}

TEST(FixedPoint, NonConvergenceIsReported)
{
    const double eps = 1e-2 / std::sqrt(0.625);
    const auto u0 = field(8, {0.0, eps / 2, eps / 4});
    FixedPointOptions opt;
    opt.max_iterations = 2;
    const auto r = fixed_point_control(u0, SpectralField::zero(8), gaussian_profile(8), canon(), 8.0, opt);
    EXPECT_FALSE(r.report.converged);
    EXPECT_EQ(r.report.iterations, 2);
    EXPECT_EQ(r.report.update_norms.size(), 2u);
}

TEST(FixedPoint, Preconditions)
{
    const auto big = field(4, {0.0, 1.0});
    const auto z = SpectralField::zero(4);
    EXPECT_THROW(fixed_point_control(big, z, gaussian_profile(4), canon(), 8.0), ValidationError);
    FixedPointOptions opt;
    opt.solver = SolverChoice::BiorthoSeries;
    EXPECT_THROW(fixed_point_control(z, z, gaussian_profile(4), canon(), 8.0, opt), ValidationError);
    EXPECT_THROW(fixed_point_control(z, SpectralField::zero(3), gaussian_profile(4), canon(), 8.0), ValidationError);
}
