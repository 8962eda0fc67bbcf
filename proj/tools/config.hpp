#pragma once

// Experiment configuration: flat INI with one section per module.
//
//   [spectrum]        gamma, alpha, beta, max_index
//   [spectral_field]  profile, profile_width, initial, initial_norm, target, target_norm
//   [moment]          horizon, solver, include_zero_mode, condition_ceiling
//   [biortho]         indices and the family parameters
//   [kawahara_sim]    dt, grid_size, dealias, max_iterations, tol, smallness, snapshots, trajectory_stride
//   [cli]             out, seed, endpoint_tolerance, defect_tolerance
//
// State and profile specs:
//   zero | cosines:c1,c2,...  (sum c_j cos(j x), mean 0) | random:amp | file:path (k,re,im CSV)
//   gaussian (profile only; width from profile_width)

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "artifacts.hpp"
#include "kawahara/biortho.hpp"
#include "kawahara/kawahara_sim.hpp"
#include "kawahara/moment.hpp"
#include "kawahara/spectral_field.hpp"
#include "kawahara/spectrum.hpp"

namespace kawactl {

using namespace kawahara;
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

struct ExperimentConfig {
    DispersionParams dispersion;
    int max_index = 8;
    double horizon = 8.0;

    std::string profile = "gaussian";
    double profile_width = 4.0;
    std::string initial = "zero";
    double initial_norm = 0.0;  ///< > 0 rescales the state to this coefficient l2 norm
    std::string target = "zero";
    double target_norm = 0.0;

    SolverChoice solver = SolverChoice::MinNorm;
    bool include_zero_mode = true;
    double condition_ceiling = kDefaultConditionCeiling;

    std::vector<int> family_indices;  ///< empty: +-1..+-N
    BiorthoParams biortho;

    double dt = 0.0;
    int grid_size = 0;
    bool dealias = true;
    int max_iterations = 50;
    double tol = 1e-10;
    double smallness = 0.1;
    int snapshots = 81;
    int trajectory_stride = 100;

    std::string out = "kawa_out";
    std::uint64_t seed = 0;
    std::optional<double> endpoint_tolerance;
    double defect_tolerance = 1e-3;
    bool check_half_budget = true;  ///< biortho: also build at half the quadrature budget

    pt::ptree raw;  ///< the parsed file, kept for the stored copy
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        if (t.empty()) continue;
        out.push_back(std::stoi(t));
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        if (!t.empty()) out.push_back(std::stod(t));
    }
    return out;
}

inline SolverChoice parse_solver(const std::string& s)
{
    if (s == "min_norm") return SolverChoice::MinNorm;
    if (s == "biortho_series") return SolverChoice::BiorthoSeries;
    throw ValidationError("config: solver must be min_norm or biortho_series, got '" + s + "'");
}

inline bool is_file_spec(const std::string& s) { return s.rfind("file:", 0) == 0; }

inline fs::path spec_path(const std::string& s, const fs::path& base)
{
    fs::path p = s.substr(5);
    return p.is_absolute() ? p : base / p;
}

/// Present keys must convert completely; ptree's defaulted get() would silently
/// fall back to the default on bad data.
template <class T>
T value(const pt::ptree& r, const std::string& path, T fallback)
{
    const auto raw = r.get_optional<std::string>(path);
    if (!raw) return fallback;
    const std::string text = trim(*raw);
    if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
    } else if constexpr (std::is_same_v<T, std::string>) {
        return text;
    } else {
        const bool negative_unsigned = std::is_unsigned_v<T> && !text.empty() && text.front() == '-';
        std::istringstream in(text);
        T v{};
        in >> v;
        if (!negative_unsigned && !text.empty() && !in.fail() && in.eof()) return v;
    }
    throw ValidationError("config: bad value for " + path + ": '" + text + "'");
}

}  // namespace detail

/// Parses and validates; relative file specs resolve against the config's directory.
inline ExperimentConfig load_config(const fs::path& path)
{
    if (!fs::exists(path)) throw ValidationError("config: file not found: " + path.string());
    ExperimentConfig c;
    try {
        pt::read_ini(path.string(), c.raw);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    const auto& r = c.raw;
    try {
        c.dispersion.gamma = detail::value(r, "spectrum.gamma", 1.0);
        c.dispersion.alpha = detail::value(r, "spectrum.alpha", 1.0);
        c.dispersion.beta = detail::value(r, "spectrum.beta", 1.0);
        c.max_index = detail::value(r, "spectrum.max_index", 8);

        c.profile = detail::value<std::string>(r, "spectral_field.profile", "gaussian");
        c.profile_width = detail::value(r, "spectral_field.profile_width", 4.0);
        c.initial = detail::value<std::string>(r, "spectral_field.initial", "zero");
        c.initial_norm = detail::value(r, "spectral_field.initial_norm", 0.0);
        c.target = detail::value<std::string>(r, "spectral_field.target", "zero");
        c.target_norm = detail::value(r, "spectral_field.target_norm", 0.0);

        c.horizon = detail::value(r, "moment.horizon", 8.0);
        c.solver = detail::parse_solver(detail::value<std::string>(r, "moment.solver", "min_norm"));
        c.include_zero_mode = detail::value(r, "moment.include_zero_mode", true);
        c.condition_ceiling = detail::value(r, "moment.condition_ceiling", kDefaultConditionCeiling);

        c.family_indices = detail::parse_int_list(detail::value<std::string>(r, "biortho.indices", ""));
        auto& b = c.biortho;
        b.product_truncation = detail::value(r, "biortho.product_truncation", b.product_truncation);
        b.multiplier_truncation = detail::value(r, "biortho.multiplier_truncation", b.multiplier_truncation);
        b.multiplier_power = detail::value(r, "biortho.multiplier_power", b.multiplier_power);
        b.delta_window = detail::value(r, "biortho.delta_window", b.delta_window);
        b.kernel_halfwidth = detail::value(r, "biortho.kernel_halfwidth", b.kernel_halfwidth);
        b.quad_cutoff = detail::value(r, "biortho.quad_cutoff", b.quad_cutoff);
        b.quad_points_per_unit = detail::value(r, "biortho.quad_points_per_unit", b.quad_points_per_unit);
        b.tail_tolerance = detail::value(r, "biortho.tail_tolerance", b.tail_tolerance);
        b.horizon = c.horizon;
        c.check_half_budget = detail::value(r, "biortho.check_half_budget", true);

        c.dt = detail::value(r, "kawahara_sim.dt", 0.0);
        c.grid_size = detail::value(r, "kawahara_sim.grid_size", 0);
        c.dealias = detail::value(r, "kawahara_sim.dealias", true);
        c.max_iterations = detail::value(r, "kawahara_sim.max_iterations", 50);
        c.tol = detail::value(r, "kawahara_sim.tol", 1e-10);
        c.smallness = detail::value(r, "kawahara_sim.smallness", 0.1);
        c.snapshots = detail::value(r, "kawahara_sim.snapshots", 81);
        c.trajectory_stride = detail::value(r, "kawahara_sim.trajectory_stride", 100);

        c.out = detail::value<std::string>(r, "cli.out", "kawa_out");
        c.seed = detail::value<std::uint64_t>(r, "cli.seed", 0);
        if (r.get_optional<std::string>("cli.endpoint_tolerance"))
            c.endpoint_tolerance = detail::value(r, "cli.endpoint_tolerance", 0.0);
        c.defect_tolerance = detail::value(r, "cli.defect_tolerance", 1e-3);
    } catch (const ValidationError&) {
        throw;
    } catch (const pt::ptree_bad_data& e) {
        throw ValidationError(std::string("config: bad value: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("config: bad list: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ValidationError(std::string("config: value out of range: ") + e.what());
    }

    // Relative file specs are anchored at the config location.
    const fs::path base = fs::absolute(path).parent_path();
    for (std::string* s : {&c.profile, &c.initial, &c.target})
        if (detail::is_file_spec(*s)) *s = "file:" + detail::spec_path(*s, base).string();
    return c;
}

/// Checks shared by every subcommand, run before anything is written.
inline void validate_config(const ExperimentConfig& c)
{
    c.dispersion.validate();
    require(c.max_index >= 1 && c.max_index <= kMaxSpectrumIndex, "config: spectrum.max_index out of range");
    require(c.horizon > 0.0 && std::isfinite(c.horizon), "config: moment.horizon must be positive");
    if (c.solver == SolverChoice::BiorthoSeries)
        require(c.horizon > 2.0 * std::numbers::pi, "config: biortho_series needs horizon T > 2 pi");
    require(c.profile_width > 0.0, "config: spectral_field.profile_width must be positive");
    require(c.initial_norm >= 0.0 && c.target_norm >= 0.0, "config: state norms must be >= 0");
    require(c.condition_ceiling > 0.0, "config: moment.condition_ceiling must be positive");
    require(c.snapshots >= 2, "config: kawahara_sim.snapshots must be >= 2");
    require(c.trajectory_stride >= 1, "config: kawahara_sim.trajectory_stride must be >= 1");
    require(c.dt >= 0.0, "config: kawahara_sim.dt must be >= 0 (0 selects the default)");
    require(c.defect_tolerance > 0.0, "config: cli.defect_tolerance must be positive");
    if (c.endpoint_tolerance) require(*c.endpoint_tolerance > 0.0, "config: cli.endpoint_tolerance must be positive");
    for (const std::string* s : {&c.profile, &c.initial, &c.target})
        if (detail::is_file_spec(*s))
            require(fs::is_regular_file(s->substr(5)), "config: referenced file does not exist: " + s->substr(5));
}

/// Uniform in [0, 1) from the top 53 bits, so presets are identical across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline SpectralField read_field_csv(const fs::path& path, int n)
{
    const auto table = read_csv(path, {"k", "re", "im"});
    std::vector<cplx> c(2 * std::size_t(n) + 1);
    std::vector<bool> seen(c.size(), false);
    for (const auto& row : table.rows) {
        const int k = int(std::lround(row[0]));
        require(double(k) == row[0], "csv " + path.string() + ": non-integer mode index");
        require(std::abs(k) <= n, "csv " + path.string() + ": mode " + std::to_string(k) + " exceeds max_index");
        const auto slot = std::size_t(k + n);
        require(!seen[slot], "csv " + path.string() + ": duplicate mode " + std::to_string(k));
        seen[slot] = true;
        c[slot] = {row[1], row[2]};
    }
    // Tables may list only k >= 0; mirror the missing negative modes.
    for (int k = 1; k <= n; ++k)
        if (!seen[std::size_t(n - k)] && seen[std::size_t(n + k)]) c[std::size_t(n - k)] = std::conj(c[std::size_t(n + k)]);
    return SpectralField(n, std::move(c));
}

/// `stream` separates the random draws of the initial and target states.
inline SpectralField make_state(const std::string& spec, int n, double norm, std::uint64_t seed, std::uint64_t stream)
{
    SpectralField f;
    if (spec == "zero") {
        f = SpectralField::zero(n);
    } else if (spec.rfind("cosines:", 0) == 0) {
        const auto amps = detail::parse_double_list(spec.substr(8));
        require(!amps.empty(), "config: cosines preset needs at least one amplitude");
        require(amps.size() <= std::size_t(n), "config: cosines preset has more modes than max_index");
        std::vector<cplx> half(std::size_t(n) + 1);
        for (std::size_t j = 0; j < amps.size(); ++j) half[j + 1] = amps[j] / 2.0;
        f = SpectralField::from_half(n, half);
    } else if (spec.rfind("random:", 0) == 0) {
        const double amp = std::stod(spec.substr(7));
        require(amp >= 0.0, "config: random preset amplitude must be >= 0");
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
        std::vector<cplx> half(std::size_t(n) + 1);
        for (int k = 1; k <= n; ++k)
            half[std::size_t(k)] = {2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0};
        f = SpectralField::from_half(n, half);
        const double s = std::sqrt(f.coeff_norm2());
        if (s > 0.0) f = f.scaled(amp / s);
    } else if (detail::is_file_spec(spec)) {
        f = read_field_csv(spec.substr(5), n);
    } else {
        throw ValidationError("config: unknown state spec '" + spec + "'");
    }
    if (norm > 0.0) {
        const double s = std::sqrt(f.coeff_norm2());
        require(s > 0.0, "config: cannot rescale the zero state to a positive norm");
        f = f.scaled(norm / s);
    }
    return f;
}

inline ShapeProfile make_profile(const std::string& spec, int n, double width)
{
    if (spec == "gaussian") return gaussian_profile(n, width);
    if (detail::is_file_spec(spec)) return ShapeProfile(read_field_csv(spec.substr(5), n));
    throw ValidationError("config: unknown profile spec '" + spec + "'");
}

inline std::vector<int> family_indices(const ExperimentConfig& c)
{
    if (!c.family_indices.empty()) return c.family_indices;
    std::vector<int> out;
    for (int k = -c.max_index; k <= c.max_index; ++k)
        if (k != 0) out.push_back(k);
    return out;
}

}  // namespace kawactl
