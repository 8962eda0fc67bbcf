#pragma once
//
// Empirical checks of the growth and decay estimates behind the
// biorthogonal construction: fitted constants for P_m (growth on the real
// axis), M_m (decay past m^6, floor at the node) and the counting identity
// used for the multiplier decay.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "biortho.hpp"

namespace kawahara::bounds {

struct CountingIdentity {
    double sum_side = 0.0;       ///< sum_{j = m^6}^{[x]} ln(j / x)
    double integral_side = 0.0;  ///< -\int_{m^6}^{x} (B(u) - m^6 + 1) / u du, B(u) = floor(u)
};

/// Both sides evaluated independently: a direct log-sum against exact
/// piecewise integration of the step function B.
inline CountingIdentity counting_identity(int m, double x)
{
    require(m >= 1, "counting identity: m must be >= 1");
    const double m6 = std::pow(double(m), 6);
    require(x >= m6, "counting identity: need x >= m^6");
    const auto lo = static_cast<long long>(m6);
    const auto fx = static_cast<long long>(std::floor(x));

    CountingIdentity out;
    for (long long j = lo; j <= fx; ++j) out.sum_side += std::log(double(j) / x);

    // On [j, j+1) the integrand is (j - m^6 + 1)/u.
    double integral = 0.0;
    for (long long j = lo; j < fx; ++j)
        integral += double(j - lo + 1) * std::log1p(1.0 / double(j));
    integral += double(fx - lo + 1) * std::log(x / double(fx));
    out.integral_side = -integral;
    return out;
}

/// Symmetric log-spaced samples in [1, x_hi] (both signs).
inline std::vector<double> log_grid(double x_hi, std::size_t per_side, double offset = 0.0)
{
    std::vector<double> xs;
    const double lhi = std::log(x_hi);
    for (std::size_t i = 0; i < per_side; ++i) {
        const double frac = (double(i) + offset) / double(per_side - 1);
        const double x = std::exp(std::min(frac, 1.0) * lhi);
        xs.push_back(x);
        xs.push_back(-x);
    }
    return xs;
}

/// Smallest C1 with log|P_m(x)| <= C1 (|x| + m^6) on the sample grids, shared over `ms`.
inline double fit_growth_constant(std::span<const int> ms, const EigenvalueSequence& seq, int product_truncation,
                                  std::size_t per_side = 400)
{
    double c1 = 0.0;
    for (int m : ms) {
        const WeierstrassProduct p(m, seq, product_truncation);
        const double m6 = std::pow(double(std::abs(m)), 6);
        for (double x : log_grid(10.0 * m6 + 1.0, per_side)) {
            const double mag = std::abs(p(x));
            if (mag == 0.0) continue;
            c1 = std::max(c1, std::log(mag) / (std::abs(x) + m6));
        }
    }
    return c1;
}

struct DecayFit {
    double k1 = 0.0;      ///< slope in log|M_m(x)| <= K1 (m^6 - |x|) + log C
    double log_c = 0.0;   ///< fixed to 0: |M_m| <= 1 on the real axis
};

/// Fits K1 on [m^6, 10 m^6] from the envelope prod min(1, n^2/|x|) >= |M_m(x)|.
inline DecayFit fit_multiplier_decay(int m, int multiplier_truncation, std::size_t samples = 200)
{
    const MultiplierProduct mult(m, multiplier_truncation);
    const double m6 = std::pow(double(m), 6);
    DecayFit fit;
    fit.k1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= samples; ++i) {
        const double x = m6 + 9.0 * m6 * double(i) / double(samples);
        double env = 0.0;
        for (int n = mult.first_factor(); n <= mult.last_factor(); ++n)
            env += std::log(std::min(1.0, double(n) * n / x));
        fit.k1 = std::min(fit.k1, -env / (x - m6));
    }
    return fit;
}

/// Largest K2 needed for M_m(i lambda_m) >= exp(-K2 m^6) over `ms`.
inline double fit_multiplier_floor(std::span<const int> ms, const EigenvalueSequence& seq, int multiplier_truncation)
{
    double k2 = 0.0;
    for (int m : ms) {
        const MultiplierProduct mult(m, multiplier_truncation);
        const cplx v = mult(-seq.mu(m));
        require(v.real() > 0.0, "multiplier floor: M_m(i lambda_m) is not positive");
        k2 = std::max(k2, -std::log(v.real()) / std::pow(double(m), 6));
    }
    return k2;
}

}  // namespace kawahara::bounds
