#pragma once
//
// Explicit biorthogonal family to the exponentials (e^{lambda_n t}), n != 0.
//
// For a target index m the construction chains
//
//   P_m(z)     = prod_{n != 0, m} (1 + i z / lambda_n) lambda_n / (lambda_n - lambda_m)
//   M_m(z)     = prod_{n = m^3}^{N_M} sin(z / n^2) / (z / n^2)
//   Psi_m(z)   = P_m(z) (M_|m|(z) / M_|m|(i lambda_m))^p sinc(delta (z - i lambda_m))
//   Theta_m(t) = (1/2pi) \int Psi_m(x) e^{itx} dx
//   zeta_m     = (Theta_m * rho_m) / \int kappa_a,   rho_m(s) = e^{-lambda_m s} kappa_a(s)
//
// and certifies  \int zeta_m(t) e^{lambda_n t} dt = delta_mn  by quadrature.
//
// Every eigenvalue is purely imaginary, so the interpolation nodes i lambda_n
// are real and Psi_m is real on the real axis. The products are truncated
// (|n| <= N_P, n <= N_M); the truncated Psi_m is still entire of exponential
// type p * sum n^-2 + delta, so Theta_m keeps compact support.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "quadrature.hpp"
#include "spectrum.hpp"

namespace kawahara {

struct BiorthoParams {
    int product_truncation = 12;        ///< N_P: P_m runs over 0 < |n| <= N_P
    int multiplier_truncation = 60;     ///< N_M: last factor of M_m
    int multiplier_power = 1;           ///< p, stands in for the analytic exponent
    double delta_window = 1.0;          ///< delta in the sinc window
    double kernel_halfwidth = 1.0;      ///< a: support of kappa_a is [-a, a]
    double horizon = 8.0;               ///< T: zeta_m lives on [-T/2, T/2]
    double quad_cutoff = 0.0;           ///< X_max; 0 selects it adaptively
    double quad_points_per_unit = 100.0;
    double tail_tolerance = 1e-10;      ///< |Psi_m| bound beyond X_max

    /// T~/2: Theta_m lives on [-T~/2, T~/2].
    double support_halfwidth() const { return horizon / 2.0 - kernel_halfwidth; }
    /// Time-grid spacing shared by Theta_m, rho_m and zeta_m.
    double time_step() const { return 1.0 / quad_points_per_unit; }

    void validate() const
    {
        require(product_truncation >= 2, "biortho: product_truncation must be >= 2");
        require(multiplier_truncation >= 1, "biortho: multiplier_truncation must be >= 1");
        require(multiplier_power >= 1, "biortho: multiplier_power must be >= 1");
        require(delta_window > 0.0, "biortho: delta_window must be positive");
        require(kernel_halfwidth > 0.0, "biortho: kernel_halfwidth must be positive");
        require(horizon > 2.0 * std::numbers::pi, "biortho: horizon T must exceed 2*pi");
        require(support_halfwidth() > 0.0, "biortho: horizon too short for the kernel half-width");
        require(quad_cutoff >= 0.0, "biortho: quad_cutoff must be >= 0");
        require(quad_points_per_unit > 0.0, "biortho: quad_points_per_unit must be positive");
        require(tail_tolerance > 0.0, "biortho: tail_tolerance must be positive");
        auto integral_steps = [&](double len) {
            const double q = len / time_step();
            return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
        };
        require(integral_steps(kernel_halfwidth) && integral_steps(support_halfwidth()),
                "biortho: kernel_halfwidth and T/2 - a must be multiples of 1/quad_points_per_unit");
    }

    std::size_t kernel_steps() const { return static_cast<std::size_t>(std::llround(kernel_halfwidth / time_step())); }
    std::size_t support_steps() const { return static_cast<std::size_t>(std::llround(support_halfwidth() / time_step())); }
};

namespace detail {

inline cplx sinc(cplx w)
{
    if (std::abs(w) < 1e-4) {
        const cplx w2 = w * w;
        return 1.0 - w2 / 6.0 + w2 * w2 / 120.0;
    }
    return std::sin(w) / w;
}

}  // namespace detail

/// Truncated Weierstrass product P_m with precomputed nodes.
class WeierstrassProduct {
public:
    WeierstrassProduct(int m, const EigenvalueSequence& seq, int product_truncation) : m_(m)
    {
        require(m != 0, "weierstrass_P: m = 0 is excluded from the family");
        require(std::abs(m) <= product_truncation, "weierstrass_P: need |m| <= N_P");
        require(product_truncation <= seq.max_index(), "weierstrass_P: N_P exceeds the tabulated spectrum");
        const double mu_m = seq.mu(m);
        for (int n = -product_truncation; n <= product_truncation; ++n) {
            if (n == 0 || n == m) continue;
            const double mu_n = seq.mu(n);
            if (mu_n == 0.0)
                throw ValidationError("weierstrass_P: lambda_" + std::to_string(n) + " = 0 collides with the zero mode");
            if (mu_n == mu_m)
                throw ValidationError("weierstrass_P: lambda_" + std::to_string(n) + " collides with lambda_" +
                                      std::to_string(m));
            mu_.push_back(mu_n);
            scale_.push_back(mu_n / (mu_n - mu_m));
        }
    }

    int index() const { return m_; }

    /// lambda_n = i mu_n, so i z / lambda_n = z / mu_n.
    cplx operator()(cplx z) const
    {
        cplx acc = 1.0;
        for (std::size_t j = 0; j < mu_.size(); ++j) acc *= (1.0 + z / mu_[j]) * scale_[j];
        return acc;
    }

    /// Deviation from 1 of the outermost retained factor pair at z; a proxy
    /// for the neglected tail of the infinite product.
    double tail_proxy(cplx z) const
    {
        double worst = 0.0;
        for (std::size_t j = 0; j < mu_.size(); ++j) {
            if (j != 0 && j + 1 != mu_.size()) continue;
            worst = std::max(worst, std::abs((1.0 + z / mu_[j]) * scale_[j] - 1.0));
        }
        return worst;
    }

    /// Polynomial degree of the truncated product.
    int degree() const { return static_cast<int>(mu_.size()); }

private:
    int m_;
    std::vector<double> mu_;
    std::vector<double> scale_;
};

inline cplx weierstrass_P(int m, cplx z, const EigenvalueSequence& seq, int product_truncation)
{
    return WeierstrassProduct(m, seq, product_truncation)(z);
}

/// Truncated sinc product M_m (m >= 1).
class MultiplierProduct {
public:
    MultiplierProduct(int m, int multiplier_truncation) : m_(m), last_(multiplier_truncation)
    {
        require(m >= 1, "multiplier_M: m must be >= 1");
        require(m <= 1000, "multiplier_M: m too large");
        first_ = m * m * m;
        require(multiplier_truncation >= first_ + 1, "multiplier_M: need N_M >= m^3 + 1");
    }

    int first_factor() const { return first_; }
    int last_factor() const { return last_; }
    int factor_count() const { return last_ - first_ + 1; }

    cplx operator()(cplx z) const
    {
        cplx acc = 1.0;
        for (int n = first_; n <= last_; ++n) acc *= detail::sinc(z / (double(n) * n));
        return acc;
    }

    /// sum_{n >= first} n^-2 restricted to the retained factors: the exponential type.
    double type() const
    {
        double s = 0.0;
        for (int n = last_; n >= first_; --n) s += 1.0 / (double(n) * n);
        return s;
    }

    /// Bound on |log| of the omitted tail prod_{n > N_M} sinc(z/n^2):
    /// |z|^2 / 6 * sum_{n > N_M} n^-4 <= |z|^2 / (18 N_M^3).
    double tail_log_bound(cplx z) const
    {
        const double n = last_;
        return std::norm(z) / 6.0 / (3.0 * n * n * n);
    }

private:
    int m_;
    int first_;
    int last_;
};

inline cplx multiplier_M(int m, cplx z, int multiplier_truncation)
{
    return MultiplierProduct(m, multiplier_truncation)(z);
}

/// Psi_m: interpolates delta_mn at the nodes i lambda_n, 0 < |n| <= N_P.
class PsiFunction {
public:
    PsiFunction(int m, const EigenvalueSequence& seq, const BiorthoParams& params, int power)
        : product_(m, seq, params.product_truncation),
          multiplier_(std::abs(m), params.multiplier_truncation),
          node_(-seq.mu(m)),
          power_(power),
          delta_(params.delta_window)
    {
        require(power >= 1, "psi: multiplier power must be >= 1");
        norm_ = multiplier_(node_);
        if (std::abs(norm_) == 0.0) throw SolverRefusal("psi: multiplier vanishes at the node");
    }

    PsiFunction(int m, const EigenvalueSequence& seq, const BiorthoParams& params)
        : PsiFunction(m, seq, params, params.multiplier_power)
    {
    }

    cplx operator()(cplx z) const
    {
        const cplx ratio = multiplier_(z) / norm_;
        cplx pw = 1.0;
        for (int i = 0; i < power_; ++i) pw *= ratio;
        return product_(z) * pw * detail::sinc(delta_ * (z - node_));
    }

    /// The node i lambda_m (real).
    double node() const { return node_; }
    int power() const { return power_; }
    cplx multiplier_at_node() const { return norm_; }
    const WeierstrassProduct& product() const { return product_; }
    const MultiplierProduct& multiplier() const { return multiplier_; }

    /// Exponential type; Theta_m is supported in [-type, type].
    double type() const { return power_ * multiplier_.type() + delta_; }

    /// Algebraic decay rate of |Psi_m(x)| as |x| -> infinity for the truncated products.
    int tail_exponent() const { return power_ * multiplier_.factor_count() + 1 - product_.degree(); }

private:
    WeierstrassProduct product_;
    MultiplierProduct multiplier_;
    double node_;
    int power_;
    double delta_;
    cplx norm_;
};

inline cplx psi(int m, cplx z, const EigenvalueSequence& seq, const BiorthoParams& params)
{
    return PsiFunction(m, seq, params)(z);
}

/// Smallest power p >= params.multiplier_power whose truncated Psi_m decays
/// at least like |x|^-2 (tail check).
inline int integrable_power(int m, const BiorthoParams& params)
{
    const int degree = 2 * params.product_truncation - 1;
    const int factors = params.multiplier_truncation - std::abs(m) * std::abs(m) * std::abs(m) + 1;
    require(factors >= 2, "biortho: N_M leaves fewer than two multiplier factors for m = " + std::to_string(m));
    int p = params.multiplier_power;
    while (p * factors + 1 - degree < 2) ++p;
    return p;
}

/// kappa_a(x) = (sqrt(2pi)/a^2) (chi_a * chi_a)(x): a triangle on [-a, a].
inline double smoothing_kernel(double a, double x)
{
    require(a > 0.0, "smoothing_kernel: a must be positive");
    return std::sqrt(2.0 * std::numbers::pi) / (a * a) * std::max(a - std::abs(x), 0.0);
}

/// Unitary transform of kappa_a: (4/a^2) sin^2(a xi / 2) / xi^2, equal to 1 at 0.
inline double kappa_hat(double a, double xi)
{
    require(a > 0.0, "kappa_hat: a must be positive");
    const double s = detail::sinc(cplx(a * xi / 2.0)).real();
    return s * s;
}

struct ThetaDiagnostics {
    double x_max = 0.0;            ///< quadrature cutoff
    std::size_t x_nodes = 0;       ///< Simpson nodes on [-x_max, x_max]
    double quad_error = 0.0;       ///< max_t |S_h - S_2h| / 15
    double tail_error = 0.0;       ///< (1/2pi) \int_{|x| > x_max} |Psi_m| (scan estimate)
    double tail_peak = 0.0;        ///< max |Psi_m| seen beyond x_max
    int power = 1;                 ///< effective multiplier power
    double type = 0.0;             ///< exponential type of Psi_m
    double multiplier_at_node = 0.0;
    double multiplier_tail_log = 0.0;  ///< omitted-tail bound of M at x_max
    double product_tail_proxy = 0.0;   ///< outermost-factor deviation of P at x_max
    double psi_l2 = 0.0;           ///< sqrt((1/2pi) \int |Psi_m|^2), Plancherel value of ||Theta_m||
    double theta_l2 = 0.0;         ///< ||Theta_m||_{L2} from the time samples
};

struct ThetaResult {
    int index = 0;
    UniformGrid grid;
    std::vector<cplx> values;
    ThetaDiagnostics diag;
};

namespace detail {

struct CutoffScan {
    double x_max = 0.0;
    double tail_l1 = 0.0;
    double tail_peak = 0.0;
};

/// Scans |Psi| outward on a fine grid; doubles the window until the last
/// sample above `tol` sits in its inner half.
inline CutoffScan scan_cutoff(const PsiFunction& psi, double tol, double fixed_cutoff)
{
    const double dx = std::min(0.05, std::numbers::pi / (8.0 * psi.type()));
    double span = std::max({50.0, 4.0 * std::abs(psi.node()), 2.0 * fixed_cutoff});
    constexpr double kScanLimit = 4e6;
    for (;;) {
        const auto n = static_cast<std::size_t>(std::ceil(span / dx));
        std::vector<double> mag(n + 1);
        double last = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = dx * double(i);
            mag[i] = std::max(std::abs(psi(x)), std::abs(psi(-x)));
            if (mag[i] >= tol) last = x;
        }
        if (last <= span / 2.0 || span >= kScanLimit) {
            if (last > span / 2.0) throw SolverRefusal("biortho: |Psi| does not decay below the tail tolerance");
            CutoffScan out;
            out.x_max = fixed_cutoff > 0.0 ? fixed_cutoff : std::ceil(last) + 1.0;
            for (std::size_t i = 0; i <= n; ++i) {
                const double x = dx * double(i);
                if (x <= out.x_max) continue;
                out.tail_l1 += 2.0 * mag[i] * dx;
                out.tail_peak = std::max(out.tail_peak, mag[i]);
            }
            return out;
        }
        span *= 2.0;
    }
}

}  // namespace detail

/// Theta_m sampled on [-T~/2, T~/2] with spacing 1/quad_points_per_unit.
inline UniformGrid theta_grid(const BiorthoParams& params)
{
    return UniformGrid::symmetric(params.support_steps(), params.time_step());
}

/// Truncated inverse transform (1/2pi) \int_{-X}^{X} Psi_m(x) e^{itx} dx on `grid`
/// by composite Simpson with >= ppu * (1 + (|t|max + type) X / 2pi) nodes.
inline ThetaResult theta(int m, const UniformGrid& grid, const EigenvalueSequence& seq, const BiorthoParams& params)
{
    params.validate();
    const double slack = 1e-9;
    require(grid.count >= 1 && grid.start >= -params.support_halfwidth() - slack &&
                grid.stop() <= params.support_halfwidth() + slack,
            "theta: time grid extends beyond [-T~/2, T~/2]");

    const int power = integrable_power(m, params);
    const PsiFunction psi_m(m, seq, params, power);
    if (psi_m.type() > params.support_halfwidth() + 1e-12)
        throw ValidationError("theta: exponential type " + std::to_string(psi_m.type()) +
                              " of Psi_m exceeds T~/2 = " + std::to_string(params.support_halfwidth()) +
                              "; Theta_m would not fit in the window");

    const auto scan = detail::scan_cutoff(psi_m, params.tail_tolerance, params.quad_cutoff);
    if (scan.tail_peak >= params.tail_tolerance)
        throw ValidationError("theta: |Psi_m| exceeds the tail tolerance beyond quad_cutoff");
    const double x_max = scan.x_max;

    const double t_abs = std::max(std::abs(grid.start), std::abs(grid.stop()));
    const double periods = (t_abs + psi_m.type()) * x_max / (2.0 * std::numbers::pi);
    auto nodes = static_cast<std::size_t>(std::ceil(params.quad_points_per_unit * (1.0 + periods)));
    nodes = std::max<std::size_t>(nodes, 9);
    while (nodes % 4 != 1) ++nodes;
    const double dx = 2.0 * x_max / double(nodes - 1);

    const auto w_full = quad::simpson_weights(nodes, dx);
    const auto w_half = quad::simpson_weights((nodes - 1) / 2 + 1, 2.0 * dx);
    std::vector<double> xs(nodes);
    std::vector<cplx> f_full(nodes), f_half(nodes);
    double psi_sq = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
        xs[j] = -x_max + dx * double(j);
        const cplx v = psi_m(xs[j]) / (2.0 * std::numbers::pi);
        f_full[j] = w_full[j] * v;
        f_half[j] = (j % 2 == 0) ? w_half[j / 2] * v : cplx{};
        psi_sq += w_full[j] * std::norm(v);
    }

    ThetaResult out;
    out.index = m;
    out.grid = grid;
    out.values.resize(grid.count);
    double qerr = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double t = grid[i];
        cplx acc_full = 0.0, acc_half = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) {
            const cplx ph(std::cos(t * xs[j]), std::sin(t * xs[j]));
            acc_full += f_full[j] * ph;
            acc_half += f_half[j] * ph;
        }
        out.values[i] = acc_full;
        qerr = std::max(qerr, std::abs(acc_full - acc_half) / 15.0);
    }

    auto& d = out.diag;
    d.x_max = x_max;
    d.x_nodes = nodes;
    d.quad_error = qerr;
    d.tail_error = scan.tail_l1 / (2.0 * std::numbers::pi);
    d.tail_peak = scan.tail_peak;
    d.power = power;
    d.type = psi_m.type();
    d.multiplier_at_node = psi_m.multiplier_at_node().real();
    d.multiplier_tail_log = psi_m.multiplier().tail_log_bound(x_max);
    d.product_tail_proxy = psi_m.product().tail_proxy(x_max);
    // (1/2pi) \int |Psi|^2 = 2pi \int |Psi/2pi|^2.
    d.psi_l2 = std::sqrt(2.0 * std::numbers::pi * psi_sq);
    double theta_sq = 0.0;
    for (const auto& v : out.values) theta_sq += std::norm(v) * grid.step;
    d.theta_l2 = std::sqrt(theta_sq);
    return out;
}

inline ThetaResult theta(int m, const EigenvalueSequence& seq, const BiorthoParams& params)
{
    return theta(m, theta_grid(params), seq, params);
}

struct ZetaResult {
    int index = 0;
    UniformGrid grid;  ///< [-T/2, T/2]
    std::vector<cplx> values;
    double l2 = 0.0;
};

/// zeta_m = (Theta_m * rho_m) / \int kappa_a, rho_m(s) = e^{-lambda_m s} kappa_a(s).
/// The convolution is the trapezoid sum on the shared time grid.
inline ZetaResult zeta(int m, const EigenvalueSequence& seq, const BiorthoParams& params, const ThetaResult& theta_m)
{
    params.validate();
    const UniformGrid expect = theta_grid(params);
    require(theta_m.index == m, "zeta: Theta samples belong to a different index");
    require(theta_m.grid.count == expect.count && std::abs(theta_m.grid.step - expect.step) < 1e-15 &&
                std::abs(theta_m.grid.start - expect.start) < 1e-9 && theta_m.values.size() == expect.count,
            "zeta: Theta grid does not match the parameters");

    const double h = params.time_step();
    const std::size_t na = params.kernel_steps();
    const double a = params.kernel_halfwidth;
    const double mu_m = seq.mu(m);
    std::vector<cplx> rho(2 * na + 1);
    for (std::size_t j = 0; j < rho.size(); ++j) {
        const double s = h * (double(j) - double(na));
        rho[j] = std::polar(smoothing_kernel(a, s), -mu_m * s);
    }
    const double norm = std::sqrt(2.0 * std::numbers::pi) * kappa_hat(a, 0.0);

    ZetaResult out;
    out.index = m;
    out.grid = UniformGrid::symmetric(params.support_steps() + na, h);
    const std::size_t nt = theta_m.values.size();
    out.values.assign(nt + 2 * na, cplx{});
    for (std::size_t i = 0; i < nt; ++i) {
        const cplx th = theta_m.values[i] * (h / norm);
        for (std::size_t j = 0; j < rho.size(); ++j) out.values[i + j] += th * rho[j];
    }
    double sq = 0.0;
    for (const auto& v : out.values) sq += std::norm(v) * h;
    out.l2 = std::sqrt(sq);
    return out;
}

class BiorthogonalFamily {
public:
    struct Member {
        ThetaResult theta;
        ZetaResult zeta;
    };

    BiorthogonalFamily(BiorthoParams params, EigenvalueSequence seq, std::map<int, Member> members)
        : params_(params), seq_(std::move(seq)), members_(std::move(members))
    {
    }

    const BiorthoParams& params() const { return params_; }
    const EigenvalueSequence& spectrum() const { return seq_; }
    double horizon() const { return params_.horizon; }
    UniformGrid grid() const { return UniformGrid::symmetric(params_.support_steps() + params_.kernel_steps(), params_.time_step()); }

    std::vector<int> indices() const
    {
        std::vector<int> out;
        for (const auto& [m, _] : members_) out.push_back(m);
        return out;
    }
    bool contains(int m) const { return members_.count(m) != 0; }

    const Member& member(int m) const
    {
        const auto it = members_.find(m);
        require(it != members_.end(), "family: index " + std::to_string(m) + " not built");
        return it->second;
    }
    const std::vector<cplx>& zeta(int m) const { return member(m).zeta.values; }

private:
    BiorthoParams params_;
    EigenvalueSequence seq_;
    std::map<int, Member> members_;
};

/// Builds Theta_m and zeta_m for every index (independently, concurrently).
inline BiorthogonalFamily build_family(std::span<const int> indices, const EigenvalueSequence& seq,
                                       const BiorthoParams& params)
{
    params.validate();
    require(!indices.empty(), "biortho: empty index set");
    for (int m : indices) {
        require(m != 0, "biortho: m = 0 is excluded from the family");
        require(std::abs(m) <= params.product_truncation, "biortho: |m| must be <= product_truncation");
    }
    require(params.product_truncation <= seq.max_index(), "biortho: product_truncation exceeds the spectrum");
    for (const auto& cls : collision_classes(seq.params(), params.product_truncation))
        require(cls.size() == 1, "biortho: colliding eigenvalues on the product truncation");

    std::vector<std::future<BiorthogonalFamily::Member>> jobs;
    for (int m : indices) {
        jobs.push_back(std::async(std::launch::async, [m, &seq, &params] {
            BiorthogonalFamily::Member mem;
            mem.theta = theta(m, seq, params);
            mem.zeta = zeta(m, seq, params, mem.theta);
            return mem;
        }));
    }
    std::map<int, BiorthogonalFamily::Member> members;
    for (std::size_t i = 0; i < jobs.size(); ++i) members[indices[i]] = jobs[i].get();
    return BiorthogonalFamily(params, seq, std::move(members));
}

/// B[i][j] = \int zeta_{rows[i]}(t) e^{lambda_{cols[j]} t} dt by Simpson on the family grid.
inline Eigen::MatrixXcd biorthogonality_matrix(const BiorthogonalFamily& family, const EigenvalueSequence& seq,
                                               std::span<const int> rows, std::span<const int> cols)
{
    const UniformGrid g = family.grid();
    const auto w = quad::simpson_weights(g.count, g.step);
    Eigen::MatrixXcd b(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const double mu_n = seq.mu(cols[j]);
        std::vector<cplx> kernel(g.count);
        for (std::size_t q = 0; q < g.count; ++q) kernel[q] = w[q] * std::polar(1.0, mu_n * g[q]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& z = family.zeta(rows[i]);
            cplx acc = 0.0;
            for (std::size_t q = 0; q < g.count; ++q) acc += z[q] * kernel[q];
            b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
        }
    }
    return b;
}

inline Eigen::MatrixXcd biorthogonality_matrix(const BiorthogonalFamily& family, const EigenvalueSequence& seq,
                                               std::span<const int> index_set)
{
    return biorthogonality_matrix(family, seq, index_set, index_set);
}

/// max |B - I| over entries where rows[i] == cols[j] marks the diagonal.
inline double biorthogonality_defect(const Eigen::MatrixXcd& b, std::span<const int> rows, std::span<const int> cols)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            const double target = rows[static_cast<std::size_t>(i)] == cols[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(b(i, j) - target));
        }
    return worst;
}

inline double biorthogonality_defect(const Eigen::MatrixXcd& b, std::span<const int> index_set)
{
    return biorthogonality_defect(b, index_set, index_set);
}

}  // namespace kawahara
