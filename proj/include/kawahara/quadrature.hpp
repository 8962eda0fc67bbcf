#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "errors.hpp"

namespace kawahara::quad {

using cplx = std::complex<double>;

/// Composite Simpson weights for `n` (odd, >= 3) equispaced nodes with spacing h.
inline std::vector<double> simpson_weights(std::size_t n, double h)
{
    require(n >= 3 && n % 2 == 1, "simpson: need an odd number (>= 3) of nodes");
    std::vector<double> w(n, 2.0);
    w.front() = 1.0;
    w.back() = 1.0;
    for (std::size_t i = 1; i + 1 < n; i += 2) w[i] = 4.0;
    for (auto& x : w) x *= h / 3.0;
    return w;
}

template <class T>
T simpson(std::span<const T> y, double h)
{
    const auto w = simpson_weights(y.size(), h);
    T acc{};
    for (std::size_t i = 0; i < y.size(); ++i) acc += w[i] * y[i];
    return acc;
}

/// \int_{-1}^{1} u^p e^{theta u} du for p in {0, 1, 2}.
inline cplx exp_moment(int p, cplx theta)
{
    if (std::abs(theta) < 0.5) {
        // Power series; only terms with p + j even survive.
        cplx acc = 0.0;
        cplx term = 1.0;  // theta^j / j!
        for (int j = 0; j < 40; ++j) {
            if ((p + j) % 2 == 0) acc += term * (2.0 / (p + j + 1));
            term *= theta / double(j + 1);
        }
        return acc;
    }
    const cplx sh = std::sinh(theta);
    const cplx ch = std::cosh(theta);
    switch (p) {
    case 0: return 2.0 * sh / theta;
    case 1: return 2.0 * ch / theta - 2.0 * sh / (theta * theta);
    default: return 2.0 * sh / theta - 4.0 * ch / (theta * theta) + 4.0 * sh / (theta * theta * theta);
    }
}

/// Filon-type rule: integrates e^{rate s} against the piecewise-quadratic
/// interpolant of `v` (Simpson panels on [0, h(n-1)]) exactly. Returns the
/// running integral at every panel boundary (index 0 is the origin), so
/// `out.back()` is the full integral.
inline std::vector<cplx> filon_cumulative(std::span<const double> v, double h, cplx rate)
{
    require(v.size() >= 3 && v.size() % 2 == 1, "filon: need an odd number (>= 3) of samples");
    const cplx theta = rate * h;
    const cplx m0 = exp_moment(0, theta);
    const cplx m1 = exp_moment(1, theta);
    const cplx m2 = exp_moment(2, theta);
    const std::size_t panels = (v.size() - 1) / 2;
    std::vector<cplx> out(panels + 1);
    cplx acc = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double v0 = v[2 * p], v1 = v[2 * p + 1], v2 = v[2 * p + 2];
        const double mid = h * double(2 * p + 1);
        const cplx local = v1 * m0 + 0.5 * (v2 - v0) * m1 + 0.5 * (v2 - 2.0 * v1 + v0) * m2;
        acc += h * std::exp(rate * mid) * local;
        out[p + 1] = acc;
    }
    return out;
}

/// Composite Simpson for \int e^{rate s} v(s) ds, accumulated panel by panel
/// with the same output layout as `filon_cumulative`.
inline std::vector<cplx> simpson_cumulative(std::span<const double> v, double h, cplx rate)
{
    require(v.size() >= 3 && v.size() % 2 == 1, "simpson: need an odd number (>= 3) of samples");
    const std::size_t panels = (v.size() - 1) / 2;
    std::vector<cplx> out(panels + 1);
    cplx acc = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const std::size_t i = 2 * p;
        const auto f = [&](std::size_t j) { return v[j] * std::exp(rate * (h * double(j))); };
        acc += h / 3.0 * (f(i) + 4.0 * f(i + 1) + f(i + 2));
        out[p + 1] = acc;
    }
    return out;
}

/// Piecewise-quadratic interpolant matching `filon_cumulative`.
inline double quadratic_interpolate(std::span<const double> v, double h, double t)
{
    require(v.size() >= 3 && v.size() % 2 == 1, "interpolate: need an odd number (>= 3) of samples");
    const std::size_t panels = (v.size() - 1) / 2;
    double pos = t / (2.0 * h);
    std::size_t p = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
    if (p >= panels) p = panels - 1;
    const double u = (t - h * double(2 * p + 1)) / h;
    const double v0 = v[2 * p], v1 = v[2 * p + 1], v2 = v[2 * p + 2];
    return v1 + 0.5 * (v2 - v0) * u + 0.5 * (v2 - 2.0 * v1 + v0) * u * u;
}

}  // namespace kawahara::quad

namespace kawahara {

/// Equispaced nodes start + i * step, i = 0 .. count-1.
struct UniformGrid {
    double start = 0.0;
    double step = 1.0;
    std::size_t count = 0;

    double operator[](std::size_t i) const { return start + step * static_cast<double>(i); }
    double stop() const { return (*this)[count == 0 ? 0 : count - 1]; }

    /// Grid on [-halfwidth, halfwidth] with `per_side` steps on each side of 0.
    static UniformGrid symmetric(std::size_t per_side, double step)
    {
        return {-step * static_cast<double>(per_side), step, 2 * per_side + 1};
    }
};

}  // namespace kawahara
