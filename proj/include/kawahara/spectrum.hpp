#pragma once
//
// Eigenvalues of the periodic dispersive operator
//
//   A u = beta u_5x - alpha u_3x - gamma u_x
//
// on the Fourier mode e^{ikx}. Substituting the mode gives the symbol
//
//   lambda_k = i k (beta k^4 + alpha k^2 - gamma),
//
// which is the other common labeling -i k(...) with k -> -k. Only the
// conjugate-symmetric set of eigenvalues matters downstream.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace kawahara {

using cplx = std::complex<double>;

/// Largest truncation for which k(k^4 + k^2 - 1) stays exact in a double.
inline constexpr int kMaxSpectrumIndex = 200;

struct DispersionParams {
    double gamma = 1.0;  ///< coefficient of u_x
    double alpha = 1.0;  ///< coefficient of u_xxx
    double beta = 1.0;   ///< coefficient of the fifth-order term, nonzero

    static DispersionParams canonical() { return {}; }

    void validate() const
    {
        require(beta != 0.0, "dispersion: beta must be nonzero");
        require(std::isfinite(gamma) && std::isfinite(alpha) && std::isfinite(beta),
                "dispersion: parameters must be finite");
    }
};

/// Real dispersion polynomial p(k) = k (beta k^4 + alpha k^2 - gamma); lambda_k = i p(k).
inline double dispersion_polynomial(const DispersionParams& p, int k)
{
    const double kd = k;
    const double k2 = kd * kd;
    return kd * (p.beta * k2 * k2 + p.alpha * k2 - p.gamma);
}

inline cplx eigenvalue(const DispersionParams& params, int k)
{
    return {0.0, dispersion_polynomial(params, k)};
}

/// Tabulated eigenvalues for k in [-N, N].
class EigenvalueSequence {
public:
    EigenvalueSequence(const DispersionParams& params, int max_index)
        : params_(params), max_index_(max_index)
    {
        params.validate();
        require(max_index >= 1, "eigenvalue_sequence: N must be >= 1");
        require(max_index <= kMaxSpectrumIndex,
                "eigenvalue_sequence: N above " + std::to_string(kMaxSpectrumIndex) +
                    " loses exactness of k(beta k^4 + alpha k^2 - gamma)");
        imag_.resize(2 * static_cast<std::size_t>(max_index) + 1);
        for (int k = 1; k <= max_index; ++k) {
            const double v = dispersion_polynomial(params, k);
            imag_[slot(k)] = v;
            imag_[slot(-k)] = -v;
        }
        imag_[slot(0)] = 0.0;
    }

    const DispersionParams& params() const { return params_; }
    int max_index() const { return max_index_; }

    cplx operator[](int k) const { return {0.0, imag_[slot(checked(k))]}; }
    /// Imaginary part mu_k of lambda_k = i mu_k.
    double mu(int k) const { return imag_[slot(checked(k))]; }

    bool contains(int k) const { return std::abs(k) <= max_index_; }

private:
    std::size_t slot(int k) const { return static_cast<std::size_t>(k + max_index_); }
    int checked(int k) const
    {
        require(contains(k), "eigenvalue index " + std::to_string(k) + " outside [-N, N]");
        return k;
    }

    DispersionParams params_;
    int max_index_;
    std::vector<double> imag_;
};

inline EigenvalueSequence eigenvalue_sequence(const DispersionParams& params, int max_index)
{
    return EigenvalueSequence(params, max_index);
}

/// Groups indices of [-N, N] sharing one eigenvalue. Classes are ordered by
/// their smallest member; members are ascending.
inline std::vector<std::vector<int>> collision_classes(const DispersionParams& params, int max_index)
{
    params.validate();
    require(max_index >= 1, "collision_classes: N must be >= 1");
    std::vector<std::pair<double, int>> vals;
    double scale = 0.0;
    for (int k = -max_index; k <= max_index; ++k) {
        const double v = dispersion_polynomial(params, k);
        vals.emplace_back(v, k);
        scale = std::max(scale, std::abs(v));
    }
    // Integer-valued parameters give exact values; otherwise allow rounding.
    const double tol = 1e-12 * std::max(1.0, scale);
    std::sort(vals.begin(), vals.end());
    std::vector<std::vector<int>> classes;
    for (std::size_t i = 0; i < vals.size();) {
        std::size_t j = i + 1;
        while (j < vals.size() && vals[j].first - vals[i].first <= tol) ++j;
        std::vector<int> cls;
        for (std::size_t q = i; q < j; ++q) cls.push_back(vals[q].second);
        std::sort(cls.begin(), cls.end());
        classes.push_back(std::move(cls));
        i = j;
    }
    std::sort(classes.begin(), classes.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return classes;
}

/// Differences between consecutive eigenvalues after sorting by imaginary part.
inline std::vector<double> sorted_adjacent_gaps(const EigenvalueSequence& seq, bool exclude_zero)
{
    std::vector<double> mus;
    for (int k = -seq.max_index(); k <= seq.max_index(); ++k) {
        if (exclude_zero && k == 0) continue;
        mus.push_back(seq.mu(k));
    }
    require(mus.size() >= 2, "min_gap: fewer than two eigenvalues retained");
    std::sort(mus.begin(), mus.end());
    std::vector<double> gaps(mus.size() - 1);
    for (std::size_t i = 0; i + 1 < mus.size(); ++i) gaps[i] = mus[i + 1] - mus[i];
    return gaps;
}

inline double min_gap(const EigenvalueSequence& seq, bool exclude_zero)
{
    const auto gaps = sorted_adjacent_gaps(seq, exclude_zero);
    return *std::min_element(gaps.begin(), gaps.end());
}

}  // namespace kawahara
