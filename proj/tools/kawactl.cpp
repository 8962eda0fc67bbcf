// kawactl: config-driven runner for the spectrum, family, control and verification pipelines.
//
// Exit codes: 0 pass, 1 validation failure (bad config or a threshold missed),
// 2 solver refusal, 3 numerical instability.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "artifacts.hpp"
#include "config.hpp"

using namespace kawactl;

namespace {

enum Exit { kPass = 0, kValidation = 1, kRefusal = 2, kInstability = 3 };

/// Structured text: [section] headers followed by `key = value` lines.
class Report {
public:
    void section(const std::string& name) { text_ += (text_.empty() ? "[" : "\n[") + name + "]\n"; }
    void kv(const std::string& key, const std::string& value) { text_ += key + " = " + value + "\n"; }
    void kv(const std::string& key, double value) { kv(key, num(value)); }
    void kv(const std::string& key, bool value) { kv(key, std::string(value ? "true" : "false")); }
    void kv(const std::string& key, const char* value) { kv(key, std::string(value)); }
    void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }

    /// Records `value <= limit` (or an explicit condition) and returns it.
    bool check(const std::string& name, double value, double limit)
    {
        const bool ok = value <= limit;
        kv(name + ".value", value);
        kv(name + ".limit", limit);
        kv(name + ".pass", ok);
        return ok;
    }

    const std::string& text() const { return text_; }

private:
    std::string text_;
};

struct Run {
    std::string command;
    ExperimentConfig cfg;
    ArtifactSet files;
    std::vector<SummaryRow> summary;
    Report results;  ///< filled by the pipeline
    bool pass = true;
    int status = kPass;
    std::string message = "ok";

    void row(const std::string& k, const std::string& metric, double re, double im = 0.0)
    {
        summary.push_back({k, metric, re, im});
    }
    void row(int k, const std::string& metric, cplx v) { row(std::to_string(k), metric, v.real(), v.imag()); }
    void global(const std::string& metric, double v) { row("", metric, v); }
};

std::string field_csv(const SpectralField& f)
{
    std::string s = "k,re,im\n";
    for (int k = -f.max_index(); k <= f.max_index(); ++k) s += std::to_string(k) + "," + num(f[k].real()) + "," + num(f[k].imag()) + "\n";
    return s;
}

std::string control_csv(const ControlSignal& c)
{
    std::string s;
    if (const auto* e = std::get_if<ExponentialSum>(&c)) {
        s = "k,re,im\n";
        for (std::size_t j = 0; j < e->coeffs.size(); ++j)
            s += std::to_string(e->indices[j]) + "," + num(e->coeffs[j].real()) + "," + num(e->coeffs[j].imag()) + "\n";
    } else {
        const auto& v = std::get<SampledSignal>(c);
        s = "t,v\n";
        for (std::size_t i = 0; i < v.values.size(); ++i) s += num(v.step() * double(i)) + "," + num(v.values[i]) + "\n";
    }
    return s;
}

/// Plot-ready (t, v) samples of any control.
std::string control_samples_csv(const ControlSignal& c, std::size_t count = 1601)
{
    const double t_end = control_horizon(c);
    std::string s = "t,v\n";
    for (std::size_t i = 0; i < count; ++i) {
        const double t = t_end * double(i) / double(count - 1);
        s += num(t) + "," + num(control_value(c, t)) + "\n";
    }
    return s;
}

ControlSignal read_control(const fs::path& path, const EigenvalueSequence& seq, double horizon)
{
    const auto t = read_csv(path);
    if (t.header == std::vector<std::string>{"k", "re", "im"}) {
        ExponentialSum e;
        e.horizon = horizon;
        for (const auto& r : t.rows) {
            const int k = int(std::lround(r[0]));
            e.indices.push_back(k);
            e.rates.push_back(seq[k]);
            e.coeffs.push_back({r[1], r[2]});
        }
        return e;
    }
    if (t.header == std::vector<std::string>{"t", "v"}) {
        SampledSignal s{horizon, {}, QuadratureRule::Simpson};
        for (const auto& r : t.rows) s.values.push_back(r[1]);
        s.validate();
        return s;
    }
    throw ValidationError("control.csv: unrecognized header");
}

std::string moments_csv(const MomentProblem& p)
{
    std::string s = "k,re_d,im_d\n";
    for (std::size_t i = 0; i < p.size(); ++i)
        s += std::to_string(p.indices[i]) + "," + num(p.targets[i].real()) + "," + num(p.targets[i].imag()) + "\n";
    return s;
}

MomentProblem read_moments(const fs::path& path, const EigenvalueSequence& seq, double horizon)
{
    const auto t = read_csv(path, {"k", "re_d", "im_d"});
    MomentProblem p;
    p.horizon = horizon;
    for (const auto& r : t.rows) {
        const int k = int(std::lround(r[0]));
        p.indices.push_back(k);
        p.rates.push_back(seq[k]);
        p.targets.push_back({r[1], r[2]});
    }
    p.validate();
    return p;
}

std::string trajectory_csv(const Trajectory& tr, std::size_t stride)
{
    std::string s = "t,k,re,im\n";
    const std::size_t last = tr.snapshots.size() - 1;
    for (std::size_t i = 0; i <= last; ++i) {
        if (i % stride != 0 && i != last) continue;
        const auto& u = tr.snapshots[i];
        for (int k = -u.max_index(); k <= u.max_index(); ++k)
            s += num(tr.times[i]) + "," + std::to_string(k) + "," + num(u[k].real()) + "," + num(u[k].imag()) + "\n";
    }
    return s;
}

std::string series_csv(const UniformGrid& g, const std::vector<cplx>& v)
{
    std::string s = "t,re,im\n";
    for (std::size_t i = 0; i < v.size(); ++i) s += num(g[i]) + "," + num(v[i].real()) + "," + num(v[i].imag()) + "\n";
    return s;
}

/// Artifacts read back by `verify`; when present they replace the rerun's values.
struct Stored {
    std::optional<ControlSignal> control;
    std::optional<MomentProblem> problem;
};

struct Inputs {
    EigenvalueSequence seq;
    SpectralField u0, u1;
    ShapeProfile profile;
};

Inputs make_inputs(const ExperimentConfig& cfg, int spectrum_max)
{
    return {eigenvalue_sequence(cfg.dispersion, spectrum_max),
            make_state(cfg.initial, cfg.max_index, cfg.initial_norm, cfg.seed, 0),
            make_state(cfg.target, cfg.max_index, cfg.target_norm, cfg.seed, 1),
            make_profile(cfg.profile, cfg.max_index, cfg.profile_width)};
}

int spectrum_size(const ExperimentConfig& cfg, bool needs_family)
{
    return needs_family ? std::max(cfg.max_index, cfg.biortho.product_truncation) : cfg.max_index;
}

double relative_error(double err, const SpectralField& u0, const SpectralField& u1)
{
    const double scale = std::max(coeff_norm(u0), coeff_norm(u1));
    return scale > 0.0 ? err / scale : err;
}

// ---------------------------------------------------------------- eig

void run_eig(Run& run)
{
    const auto& cfg = run.cfg;
    const auto seq = eigenvalue_sequence(cfg.dispersion, cfg.max_index);
    std::string eig = "k,re,im,modulus\n";
    for (int k = -cfg.max_index; k <= cfg.max_index; ++k) {
        eig += std::to_string(k) + "," + num(seq[k].real()) + "," + num(seq[k].imag()) + "," + num(std::abs(seq[k])) + "\n";
        run.row(k, "eigenvalue", seq[k]);
    }
    run.files.put("eigenvalues.csv", eig);

    const auto gaps = sorted_adjacent_gaps(seq, true);
    std::string g = "i,gap\n";
    for (std::size_t i = 0; i < gaps.size(); ++i) g += std::to_string(i) + "," + num(gaps[i]) + "\n";
    run.files.put("gaps.csv", g);

    // The nonzero spectrum is symmetric, so the middle gap straddles the origin.
    bool increasing = true;
    const std::size_t mid = gaps.size() / 2;
    for (std::size_t j = mid; j + 1 < gaps.size(); ++j) increasing = increasing && gaps[j + 1] > gaps[j];
    for (std::size_t j = mid; j > 0; --j) increasing = increasing && gaps[j - 1] > gaps[j];

    const auto classes = collision_classes(cfg.dispersion, cfg.max_index);
    std::string c = "class,k\n";
    std::size_t largest = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        largest = std::max(largest, classes[i].size());
        for (int k : classes[i]) c += std::to_string(i) + "," + std::to_string(k) + "\n";
    }
    run.files.put("collisions.csv", c);

    const double gap_nz = min_gap(seq, true), gap_all = min_gap(seq, false);
    run.global("min_gap_nonzero", gap_nz);
    run.global("min_gap_all", gap_all);
    run.global("gaps_increasing", increasing ? 1.0 : 0.0);
    run.global("collision_classes", double(classes.size()));
    run.global("max_class_size", double(largest));

    auto& r = run.results;
    r.section("results");
    r.kv("max_index", cfg.max_index);
    r.kv("min_gap_nonzero", gap_nz);
    r.kv("min_gap_all", gap_all);
    r.kv("gaps_increasing_away_from_origin", increasing);
    r.kv("collision_classes", int(classes.size()));
    r.kv("max_class_size", int(largest));
}

// ---------------------------------------------------------------- biortho

double family_defect(const BiorthogonalFamily& fam, const EigenvalueSequence& seq, const std::vector<int>& idx)
{
    return biorthogonality_defect(biorthogonality_matrix(fam, seq, idx), idx);
}

void run_biortho(Run& run)
{
    const auto& cfg = run.cfg;
    const auto idx = family_indices(cfg);
    const auto seq = eigenvalue_sequence(cfg.dispersion, spectrum_size(cfg, true));
    const auto fam = build_family(idx, seq, cfg.biortho);
    const auto b = biorthogonality_matrix(fam, seq, idx);
    const double defect = biorthogonality_defect(b, idx);

    std::string dm = "m,n,re,im,defect\n";
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const cplx v = b(Eigen::Index(i), Eigen::Index(j));
            const double d = std::abs(v - (i == j ? 1.0 : 0.0));
            dm += std::to_string(idx[i]) + "," + std::to_string(idx[j]) + "," + num(v.real()) + "," + num(v.imag()) + "," +
                  num(d) + "\n";
        }
    run.files.put("defect_matrix.csv", dm);

    for (int m : idx) {
        const auto& mem = fam.member(m);
        run.files.put("theta_" + std::to_string(m) + ".csv", series_csv(mem.theta.grid, mem.theta.values));
        run.files.put("zeta_" + std::to_string(m) + ".csv", series_csv(mem.zeta.grid, mem.zeta.values));
        const auto& d = mem.theta.diag;
        const auto k = std::to_string(m);
        run.row(k, "x_max", d.x_max);
        run.row(k, "x_nodes", double(d.x_nodes));
        run.row(k, "theta_quad_error", d.quad_error);
        run.row(k, "theta_tail_error", d.tail_error);
        run.row(k, "multiplier_power", double(d.power));
        run.row(k, "exponential_type", d.type);
        run.row(k, "zeta_l2", mem.zeta.l2);
    }
    run.global("max_defect", defect);

    auto& r = run.results;
    r.section("results");
    std::string list;
    for (int m : idx) list += (list.empty() ? "" : ",") + std::to_string(m);
    r.kv("indices", list);
    r.kv("horizon", cfg.horizon);
    r.kv("quad_points_per_unit", cfg.biortho.quad_points_per_unit);
    r.section("thresholds");
    run.pass = r.check("max_defect", defect, cfg.defect_tolerance) && run.pass;

    if (cfg.check_half_budget) {
        auto half = cfg.biortho;
        half.quad_points_per_unit /= 2.0;
        const double d_half = family_defect(build_family(idx, seq, half), seq, idx);
        run.global("half_budget_defect", d_half);
        r.kv("half_budget_defect", d_half);
        r.kv("half_budget_defect_larger", d_half > defect);
        run.pass = run.pass && d_half > defect;
    }
}

// ---------------------------------------------------------------- control

double endpoint_tolerance(const ExperimentConfig& cfg, double fallback)
{
    return cfg.endpoint_tolerance.value_or(fallback);
}

void emit_states(Run& run, const Inputs& in)
{
    run.files.put("initial.csv", field_csv(in.u0));
    run.files.put("target.csv", field_csv(in.u1));
    run.files.put("profile.csv", field_csv(in.profile.field()));
}

void emit_residuals(Run& run, const MomentProblem& p, const ControlSignal& v)
{
    const auto res = moment_residual(p, v);
    for (std::size_t i = 0; i < p.size(); ++i) {
        run.row(p.indices[i], "moment_target", p.targets[i]);
        run.row(p.indices[i], "moment_residual", res.residual[i]);
    }
    run.global("max_moment_residual", res.max_abs());
    run.results.kv("max_moment_residual", res.max_abs());
}

void emit_endpoint(Run& run, const SpectralField& end)
{
    for (int k = -end.max_index(); k <= end.max_index(); ++k) run.row(k, "endpoint", end[k]);
}

void run_control_linear(Run& run, const Stored& stored)
{
    const auto& cfg = run.cfg;
    const bool series = cfg.solver == SolverChoice::BiorthoSeries;
    const auto in = make_inputs(cfg, spectrum_size(cfg, series));
    const auto problem = assemble_problem(in.u0, in.u1, in.profile, in.seq, cfg.horizon, cfg.include_zero_mode);
    emit_states(run, in);
    run.files.put("moments.csv", moments_csv(problem));

    auto& r = run.results;
    r.section("results");
    r.kv("solver", solver_name(cfg.solver));
    r.kv("include_zero_mode", cfg.include_zero_mode);
    r.kv("moments", int(problem.size()));

    ControlSignal control;
    if (series) {
        const auto fam = build_family(family_indices(cfg), in.seq, cfg.biortho);
        const auto sol = solve_biortho_series(problem, fam);
        run.global("family_defect", sol.family_defect);
        run.global("expected_residual", sol.expected_residual);
        run.global("zero_mode_constant", sol.zero_mode_constant);
        r.kv("family_defect", sol.family_defect);
        r.kv("expected_residual", sol.expected_residual);
        r.kv("control_rule", rule_name(sol.control.rule));
        control = sol.control;
    } else {
        const auto sol = solve_min_norm(problem, cfg.condition_ceiling);
        run.global("condition", sol.condition);
        r.kv("condition", sol.condition);
        r.kv("condition_ceiling", cfg.condition_ceiling);
        control = sol.control;
    }
    if (stored.control) control = *stored.control;

    run.files.put("control.csv", control_csv(control));
    run.files.put("control_samples.csv", control_samples_csv(control));
    emit_residuals(run, stored.problem ? *stored.problem : problem, control);

    const auto tr = evolve_linear(in.u0, in.profile, control, in.seq, cfg.horizon, cfg.snapshots);
    run.files.put("trajectory.csv", trajectory_csv(tr, 1));
    emit_endpoint(run, tr.endpoint());
    const double err = coeff_distance(tr.endpoint(), in.u1);
    const double rel = relative_error(err, in.u0, in.u1);
    const double vnorm = control_l2_norm(control);
    run.global("initial_norm", coeff_norm(in.u0));
    run.global("target_norm", coeff_norm(in.u1));
    run.global("endpoint_error", err);
    run.global("relative_endpoint_error", rel);
    run.global("control_l2_norm", vnorm);
    r.kv("endpoint_error", err);
    r.kv("control_l2_norm", vnorm);
    r.section("thresholds");
    run.pass = r.check("relative_endpoint_error", rel, endpoint_tolerance(cfg, 1e-8)) && run.pass;
}

void run_control_nonlinear(Run& run, const Stored& stored)
{
    const auto& cfg = run.cfg;
    const bool series = cfg.solver == SolverChoice::BiorthoSeries;
    const auto in = make_inputs(cfg, spectrum_size(cfg, series));
    emit_states(run, in);

    FixedPointOptions opt;
    opt.solver = cfg.solver;
    opt.dt = cfg.dt;
    opt.grid_size = cfg.grid_size;
    opt.dealias = cfg.dealias;
    opt.max_iterations = cfg.max_iterations;
    opt.tol = cfg.tol;
    opt.smallness = cfg.smallness;
    opt.include_zero_mode = cfg.include_zero_mode;
    opt.condition_ceiling = cfg.condition_ceiling;

    std::optional<BiorthogonalFamily> fam;
    if (series) fam.emplace(build_family(family_indices(cfg), in.seq, cfg.biortho));
    auto res = fixed_point_control(in.u0, in.u1, in.profile, in.seq, cfg.horizon, opt, fam ? &*fam : nullptr);
    const auto& rep = res.report;

    auto& r = run.results;
    r.section("results");
    r.kv("solver", solver_name(cfg.solver));
    r.kv("dt", res.trajectory.step);
    r.kv("product_grid", res.trajectory.product_grid);
    r.kv("dealias", res.trajectory.dealias);
    r.kv("iterations", rep.iterations);
    r.kv("converged", rep.converged);
    for (std::size_t j = 0; j < rep.update_norms.size(); ++j) {
        run.row(std::to_string(j + 1), "update_norm", rep.update_norms[j]);
        r.kv("update_norm." + std::to_string(j + 1), rep.update_norms[j]);
    }
    for (std::size_t j = 0; j < rep.contraction_ratios.size(); ++j)
        run.row(std::to_string(j + 2), "contraction_ratio", rep.contraction_ratios[j]);
    run.global("iterations", rep.iterations);
    run.global("converged", rep.converged ? 1.0 : 0.0);
    run.global("duhamel_quadrature_estimate", rep.duhamel_quadrature_estimate);
    r.kv("duhamel_quadrature_estimate", rep.duhamel_quadrature_estimate);
    if (!series) {
        run.global("condition", rep.condition);
        r.kv("condition", rep.condition);
    }

    // Everything below is a function of the stored control and states only.
    Trajectory tr = std::move(res.trajectory);
    ControlSignal control = std::move(res.control);
    if (stored.control) {
        control = *stored.control;
        const int grid = cfg.grid_size > 0 ? cfg.grid_size : 4 * cfg.max_index;
        tr = evolve_nonlinear(in.u0, in.profile, control, in.seq, cfg.horizon, tr.step, grid, cfg.dealias);
    }
    run.files.put("control.csv", control_csv(control));
    run.files.put("control_samples.csv", control_samples_csv(control));
    run.files.put("moments.csv", moments_csv(res.problem));
    run.files.put("trajectory.csv", trajectory_csv(tr, std::size_t(cfg.trajectory_stride)));
    emit_residuals(run, stored.problem ? *stored.problem : res.problem, control);
    emit_endpoint(run, tr.endpoint());

    const double err = coeff_distance(tr.endpoint(), in.u1);
    const double rel = relative_error(err, in.u0, in.u1);
    const double vnorm = control_l2_norm(control);
    run.global("initial_norm", coeff_norm(in.u0));
    run.global("target_norm", coeff_norm(in.u1));
    run.global("endpoint_error", err);
    run.global("relative_endpoint_error", rel);
    run.global("control_l2_norm", vnorm);
    r.kv("endpoint_error", err);
    r.kv("control_l2_norm", vnorm);
    r.section("thresholds");
    run.pass = r.check("relative_endpoint_error", rel, endpoint_tolerance(cfg, 1e-6)) && run.pass;
    if (!rep.converged) {
        run.status = kRefusal;
        run.message = "fixed point did not converge within max_iterations";
    }
}

// ---------------------------------------------------------------- driver

void dispatch(Run& run, const Stored& stored = {})
{
    if (run.command == "eig") return run_eig(run);
    if (run.command == "biortho") return run_biortho(run);
    if (run.command == "control-linear") return run_control_linear(run, stored);
    if (run.command == "control-nonlinear") return run_control_nonlinear(run, stored);
    throw ValidationError("unknown command '" + run.command + "'");
}

/// The stored copy points at the emitted state files and pins the effective seed.
std::string stored_config(const Run& run)
{
    auto tree = run.cfg.raw;
    tree.put("cli.command", run.command);
    tree.put("cli.seed", run.cfg.seed);
    tree.put("cli.out", ".");
    if (run.command == "control-linear" || run.command == "control-nonlinear") {
        tree.put("spectral_field.initial", "file:initial.csv");
        tree.put("spectral_field.target", "file:target.csv");
        tree.put("spectral_field.profile", "file:profile.csv");
        tree.put("spectral_field.initial_norm", 0);
        tree.put("spectral_field.target_norm", 0);
    }
    std::ostringstream os;
    pt::write_ini(os, tree);
    return os.str();
}

std::string report_text(const Run& run)
{
    Report head;
    head.section("run");
    head.kv("command", run.command);
    head.kv("seed", std::to_string(run.cfg.seed));
    head.kv("max_index", run.cfg.max_index);
    head.kv("horizon", run.cfg.horizon);
    head.kv("gamma", run.cfg.dispersion.gamma);
    head.kv("alpha", run.cfg.dispersion.alpha);
    head.kv("beta", run.cfg.dispersion.beta);
    std::string s = head.text() + "\n" + run.results.text();
    Report tail;
    tail.section("status");
    tail.kv("thresholds_pass", run.pass);
    tail.kv("exit_code", run.status);
    tail.kv("message", run.message);
    return s + "\n" + tail.text();
}

/// Runs a pipeline and commits its artifacts. Validation errors leave the output untouched;
/// refusals and instabilities still write the report and whatever summary exists.
int execute(const std::string& command, ExperimentConfig cfg, const fs::path& out)
{
    Run run;
    run.command = command;
    run.cfg = std::move(cfg);
    try {
        validate_config(run.cfg);
        dispatch(run);
        if (run.status == kPass && !run.pass) {
            run.status = kValidation;
            run.message = "acceptance threshold missed";
        }
    } catch (const ValidationError& e) {
        std::cerr << "kawactl: " << e.what() << "\n";
        return kValidation;
    } catch (const SolverRefusal& e) {
        run.pass = false;
        run.status = kRefusal;
        run.message = e.what();
    } catch (const NumericalInstability& e) {
        run.pass = false;
        run.status = kInstability;
        run.message = e.what();
    }
    run.files.put("summary.csv", summary_csv(run.summary));
    run.files.put("report.txt", report_text(run));
    run.files.put("config.ini", stored_config(run));
    run.files.commit(out);
    std::cout << command << ": " << (run.status == kPass ? "PASS" : "FAIL") << " (" << run.message << ") -> "
              << out.string() << "\n";
    return run.status;
}

bool close(double a, double b)
{
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

int verify(const fs::path& dir)
{
    try {
        auto cfg = load_config(dir / "config.ini");
        const auto command = kawactl::detail::value<std::string>(cfg.raw, "cli.command", "");
        require(!command.empty(), "verify: stored config has no cli.command");
        validate_config(cfg);

        Run run;
        run.command = command;
        run.cfg = cfg;
        Stored stored;
        if (command == "control-linear" || command == "control-nonlinear") {
            const bool series = cfg.solver == SolverChoice::BiorthoSeries;
            const auto seq = eigenvalue_sequence(cfg.dispersion, spectrum_size(cfg, series));
            stored.control = read_control(dir / "control.csv", seq, cfg.horizon);
            stored.problem = read_moments(dir / "moments.csv", seq, cfg.horizon);
        }
        dispatch(run, stored);

        const auto want = read_summary(dir / "summary.csv");
        std::string out = "k,metric,stored_re,stored_im,recomputed_re,recomputed_im,match\n";
        bool ok = want.size() == run.summary.size();
        std::size_t bad = 0;
        for (std::size_t i = 0; i < std::min(want.size(), run.summary.size()); ++i) {
            const auto& a = want[i];
            const auto& b = run.summary[i];
            const bool same = a.k == b.k && a.metric == b.metric && close(a.re, b.re) && close(a.im, b.im);
            if (!same) ++bad;
            ok = ok && same;
            out += a.k + "," + a.metric + "," + num(a.re) + "," + num(a.im) + "," + num(b.re) + "," + num(b.im) + "," +
                   (same ? "1" : "0") + "\n";
        }
        ArtifactSet files;
        files.put("verify.csv", out);
        files.commit(dir);
        std::cout << "verify: " << (ok ? "PASS" : "FAIL") << " (" << want.size() << " stored, " << run.summary.size()
                  << " recomputed, " << bad << " mismatched) " << dir.string() << "\n";
        return ok ? kPass : kValidation;
    } catch (const ValidationError& e) {
        std::cerr << "kawactl verify: " << e.what() << "\n";
        return kValidation;
    } catch (const SolverRefusal& e) {
        std::cerr << "kawactl verify: " << e.what() << "\n";
        return kRefusal;
    } catch (const NumericalInstability& e) {
        std::cerr << "kawactl verify: " << e.what() << "\n";
        return kInstability;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Moment-method control experiments for the periodic Kawahara equation"};
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "experiment config (INI)");
    app.add_option("--out", out_dir, "output directory (overrides KAWA_OUT and [cli] out)");
    app.add_option("--seed", seed, "seed for random state presets");
    app.require_subcommand(1);
    for (const char* name : {"eig", "biortho", "control-linear", "control-nonlinear"})
        app.add_subcommand(name, "")->fallthrough();
    app.add_subcommand("verify", "recompute a run's summary from its stored artifacts")->fallthrough();
    app.get_subcommand("eig")->description("eigenvalue, gap and collision report");
    app.get_subcommand("biortho")->description("biorthogonal family build and defect matrix");
    app.get_subcommand("control-linear")->description("linear moment-method control");
    app.get_subcommand("control-nonlinear")->description("fixed-point control of the nonlinear equation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kValidation;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    fs::path out;
    if (!out_dir.empty())
        out = out_dir;
    else if (const char* env = std::getenv("KAWA_OUT"); env && *env)
        out = env;

    if (command == "verify") {
        if (out.empty()) {
            std::cerr << "kawactl verify: pass the run directory with --out or KAWA_OUT\n";
            return kValidation;
        }
        return verify(out);
    }

    if (config_path.empty()) {
        std::cerr << "kawactl: --config is required\n";
        return kValidation;
    }
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ValidationError& e) {
        std::cerr << "kawactl: " << e.what() << "\n";
        return kValidation;
    }
    if (seed) cfg.seed = *seed;
    if (out.empty()) {
        out = cfg.out;
        if (out.is_relative()) out = (fs::absolute(config_path).parent_path() / out).lexically_normal();
    }
    return execute(command, std::move(cfg), out);
}
