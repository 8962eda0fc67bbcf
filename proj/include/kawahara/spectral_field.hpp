#pragma once
//
// Truncated Fourier representation of real 2*pi-periodic fields.
//
// Coefficient convention:  u_hat_k = (1/2pi) \int_0^{2pi} u(x) e^{-ikx} dx,
// so u(x) = sum_k u_hat_k e^{ikx} and ||u||_{L2}^2 = 2pi sum_k |u_hat_k|^2.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "errors.hpp"
#include "spectrum.hpp"

namespace kawahara {

/// Conjugate-symmetry defect tolerated at construction, relative to max(1, max|u_k|).
inline constexpr double kSymmetryTolerance = 1e-12;

class SpectralField {
public:
    SpectralField() = default;

    /// `coeffs[k + N]` holds u_hat_k for k in [-N, N].
    SpectralField(int max_index, std::vector<cplx> coeffs)
        : max_index_(max_index), coeffs_(std::move(coeffs))
    {
        require(max_index >= 0, "spectral field: max_index must be >= 0");
        require(coeffs_.size() == 2 * static_cast<std::size_t>(max_index) + 1,
                "spectral field: expected 2N+1 coefficients");
        double scale = 1.0;
        for (const auto& c : coeffs_) {
            require(std::isfinite(c.real()) && std::isfinite(c.imag()),
                    "spectral field: non-finite coefficient");
            scale = std::max(scale, std::abs(c));
        }
        const double tol = kSymmetryTolerance * scale;
        for (int k = 0; k <= max_index; ++k) {
            if (std::abs((*this)[-k] - std::conj((*this)[k])) > tol)
                throw ValidationError("spectral field: coefficients at k = +-" + std::to_string(k) +
                                      " violate conjugate symmetry of a real field");
        }
    }

    static SpectralField zero(int max_index)
    {
        return SpectralField(max_index, std::vector<cplx>(2 * static_cast<std::size_t>(max_index) + 1));
    }

    /// Builds a field from its nonnegative modes; negative modes are their conjugates.
    static SpectralField from_half(int max_index, std::span<const cplx> nonneg)
    {
        require(nonneg.size() == static_cast<std::size_t>(max_index) + 1,
                "spectral field: expected N+1 nonnegative-mode coefficients");
        std::vector<cplx> c(2 * static_cast<std::size_t>(max_index) + 1);
        c[static_cast<std::size_t>(max_index)] = {nonneg[0].real(), 0.0};
        for (int k = 1; k <= max_index; ++k) {
            c[static_cast<std::size_t>(max_index + k)] = nonneg[static_cast<std::size_t>(k)];
            c[static_cast<std::size_t>(max_index - k)] = std::conj(nonneg[static_cast<std::size_t>(k)]);
        }
        return SpectralField(max_index, std::move(c));
    }

    int max_index() const { return max_index_; }
    std::size_t size() const { return coeffs_.size(); }
    const std::vector<cplx>& coeffs() const { return coeffs_; }

    cplx operator[](int k) const
    {
        require(std::abs(k) <= max_index_, "spectral field: mode " + std::to_string(k) + " not retained");
        return coeffs_[static_cast<std::size_t>(k + max_index_)];
    }

    /// Sum of squared coefficient moduli; the l2 coefficient norm squared.
    double coeff_norm2() const
    {
        double s = 0.0;
        for (const auto& c : coeffs_) s += std::norm(c);
        return s;
    }

    SpectralField scaled(double factor) const
    {
        auto c = coeffs_;
        for (auto& v : c) v *= factor;
        return SpectralField(max_index_, std::move(c));
    }

private:
    int max_index_ = 0;
    std::vector<cplx> coeffs_{cplx{}};
};

/// Actuator f(x): every retained coefficient bounded away from zero.
class ShapeProfile {
public:
    ShapeProfile(SpectralField field, double min_coeff_modulus)
        : field_(std::move(field)), min_coeff_modulus_(min_coeff_modulus)
    {
        require(min_coeff_modulus > 0.0, "shape profile: min_coeff_modulus must be positive");
        for (int k = -field_.max_index(); k <= field_.max_index(); ++k) {
            if (std::abs(field_[k]) < min_coeff_modulus)
                throw ValidationError("shape profile: coefficient at k = " + std::to_string(k) +
                                      " below the nonvanishing floor");
        }
    }

    /// Uses the smallest retained modulus as the floor.
    explicit ShapeProfile(SpectralField field) : ShapeProfile(field, smallest_modulus(field)) {}

    const SpectralField& field() const { return field_; }
    double min_coeff_modulus() const { return min_coeff_modulus_; }
    int max_index() const { return field_.max_index(); }
    cplx operator[](int k) const { return field_[k]; }

private:
    static double smallest_modulus(const SpectralField& f)
    {
        double m = std::abs(f[0]);
        for (int k = 1; k <= f.max_index(); ++k) m = std::min(m, std::abs(f[k]));
        return m;
    }

    SpectralField field_;
    double min_coeff_modulus_;
};

/// f_hat_k = exp(-k^2 / width); width 4 is the harness default.
inline ShapeProfile gaussian_profile(int max_index, double width = 4.0)
{
    require(width > 0.0, "gaussian profile: width must be positive");
    std::vector<cplx> half(static_cast<std::size_t>(max_index) + 1);
    for (int k = 0; k <= max_index; ++k) half[static_cast<std::size_t>(k)] = std::exp(-double(k) * k / width);
    return ShapeProfile(SpectralField::from_half(max_index, half));
}

struct WeightedSpaceParams {
    double beta_weight = 0.0;  ///< exponent scale in e^{beta k^6}
};

/// sqrt( sum_k |u_hat_k|^2 (1 + k^2)^s ).
inline double hs_norm(const SpectralField& field, double s)
{
    double acc = 0.0;
    for (int k = -field.max_index(); k <= field.max_index(); ++k)
        acc += std::norm(field[k]) * std::pow(1.0 + double(k) * k, s);
    return std::sqrt(acc);
}

/// sqrt( sum_k |u_hat_k / f_hat_k|^2 e^{beta k^6} ).
/// log of the weighted norm, evaluated with log-sum-exp so large beta * k^6 stays finite.
/// Returns -inf for the zero field.
inline double log_weighted_norm(const SpectralField& field, const ShapeProfile& profile, WeightedSpaceParams w)
{
    require(w.beta_weight >= 0.0, "weighted norm: beta_weight must be >= 0");
    require(field.max_index() == profile.max_index(), "weighted norm: truncation mismatch");
    std::vector<double> logs;
    for (int k = -field.max_index(); k <= field.max_index(); ++k) {
        const double a = std::norm(field[k] / profile[k]);
        if (a > 0.0) logs.push_back(std::log(a) + w.beta_weight * std::pow(double(k), 6));
    }
    if (logs.empty()) return -std::numeric_limits<double>::infinity();
    const double top = *std::max_element(logs.begin(), logs.end());
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - top);
    return 0.5 * (top + std::log(acc));
}

/// Overflows to +inf only when the norm itself exceeds the double range.
inline double weighted_norm(const SpectralField& field, const ShapeProfile& profile, WeightedSpaceParams w)
{
    return std::exp(log_weighted_norm(field, profile, w));
}

/// Physical L2 norm on (0, 2pi) under the 1/(2pi) coefficient convention.
inline double l2_norm(const SpectralField& field)
{
    return std::sqrt(2.0 * std::numbers::pi * field.coeff_norm2());
}

namespace detail {

inline std::size_t wrap(int k, int m)
{
    return static_cast<std::size_t>(((k % m) + m) % m);
}

}  // namespace detail

/// Samples sum_k u_hat_k e^{i k x_j} at x_j = 2 pi j / grid_size.
inline std::vector<double> synthesize(const SpectralField& field, int grid_size)
{
    require(grid_size >= 2 * field.max_index() + 1,
            "synthesize: grid_size must be >= 2N+1 for the retained modes");
    std::vector<cplx> spec(static_cast<std::size_t>(grid_size));
    for (int k = -field.max_index(); k <= field.max_index(); ++k) spec[detail::wrap(k, grid_size)] += field[k];
    Eigen::FFT<double> fft;
    std::vector<cplx> phys;
    fft.inv(phys, spec);
    std::vector<double> out(phys.size());
    for (std::size_t j = 0; j < phys.size(); ++j) out[j] = phys[j].real() * grid_size;
    return out;
}

/// Inverse of `synthesize`: discrete Fourier coefficients for |k| <= max_index.
/// A negative max_index selects the largest unambiguous truncation (M-1)/2.
inline SpectralField analyze(std::span<const double> samples, int max_index = -1)
{
    const int m = static_cast<int>(samples.size());
    require(m >= 1, "analyze: no samples");
    if (max_index < 0) max_index = (m - 1) / 2;
    require(m >= 2 * max_index + 1, "analyze: grid too small for the requested max_index");
    std::vector<cplx> in(samples.begin(), samples.end());
    Eigen::FFT<double> fft;
    std::vector<cplx> spec;
    fft.fwd(spec, in);
    std::vector<cplx> half(static_cast<std::size_t>(max_index) + 1);
    for (int k = 0; k <= max_index; ++k) {
        // Real input: average the mirrored bins so the output is exactly symmetric.
        const cplx a = spec[detail::wrap(k, m)];
        const cplx b = std::conj(spec[detail::wrap(-k, m)]);
        half[static_cast<std::size_t>(k)] = 0.5 * (a + b) / double(m);
    }
    return SpectralField::from_half(max_index, half);
}

}  // namespace kawahara
