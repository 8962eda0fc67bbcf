// End-to-end checks of the kawactl binary plus unit tests of its config and CSV layer.
// Usage: test_cli <path-to-kawactl> <scratch-dir>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "artifacts.hpp"
#include "config.hpp"

using namespace kawactl;

namespace {

fs::path g_tool;
fs::path g_root;

int run_tool(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + g_tool.string() + "' " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

fs::path scratch(const std::string& name)
{
    const fs::path d = g_root / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write(const fs::path& path, const std::string& text)
{
    std::ofstream(path) << text;
    return path;
}

const char* kNullControl = R"([spectrum]
max_index = 8
[spectral_field]
initial = cosines:1,0.5
target = zero
[moment]
horizon = 8
solver = min_norm
)";

double summary_value(const fs::path& dir, const std::string& metric, const std::string& k = "")
{
    for (const auto& r : read_summary(dir / "summary.csv"))
        if (r.metric == metric && r.k == k) return r.re;
    ADD_FAILURE() << "metric " << metric << " missing in " << dir;
    return std::nan("");
}

bool same_tree(const fs::path& a, const fs::path& b)
{
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        ++n;
        const auto other = b / e.path().filename();
        if (!fs::exists(other) || read_text(e.path()) != read_text(other)) return false;
    }
    return n == std::size_t(std::distance(fs::directory_iterator(b), fs::directory_iterator{}));
}

}  // namespace

// ------------------------------------------------------------ binary

TEST(Eig, CanonicalModuli)
{
    const auto d = scratch("eig");
    write(d / "eig.ini", "[spectrum]\nmax_index = 5\n");
    ASSERT_EQ(run_tool("eig --config " + (d / "eig.ini").string() + " --out " + (d / "run").string()), 0);
    const auto t = read_csv(d / "run" / "eigenvalues.csv", {"k", "re", "im", "modulus"});
    ASSERT_EQ(t.rows.size(), 11u);
    // Integer closed form k (k^4 + k^2 - 1): 1, 38, 267, 1084, 3245.
    for (int k = -5; k <= 5; ++k) {
        const long long m = std::llabs(k * (k * k * k * k + k * k - 1LL));
        EXPECT_EQ(t.rows[std::size_t(5 + k)][0], double(k));
        EXPECT_EQ(t.rows[std::size_t(5 + k)][3], double(m));
    }
    EXPECT_EQ(t.rows[8][3], 267.0);
    EXPECT_EQ(summary_value(d / "run", "min_gap_nonzero"), 2.0);
    EXPECT_EQ(summary_value(d / "run", "gaps_increasing"), 1.0);
    EXPECT_EQ(summary_value(d / "run", "max_class_size"), 1.0);
}

TEST(ControlLinear, NullControlPresetPasses)
{
    const auto d = scratch("null");
    write(d / "c.ini", kNullControl);
    ASSERT_EQ(run_tool("control-linear --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 0);
    EXPECT_LE(summary_value(d / "run", "relative_endpoint_error"), 1e-8);
    for (const char* f : {"summary.csv", "control.csv", "control_samples.csv", "trajectory.csv", "moments.csv",
                          "report.txt", "config.ini", "initial.csv", "target.csv", "profile.csv"})
        EXPECT_TRUE(fs::exists(d / "run" / f)) << f;
    const auto report = read_text(d / "run" / "report.txt");
    EXPECT_NE(report.find("thresholds_pass = true"), std::string::npos);
    EXPECT_NE(report.find("relative_endpoint_error.limit = 1e-08"), std::string::npos);
    // No temp files survive the atomic commit.
    for (const auto& e : fs::directory_iterator(d / "run")) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(ControlLinear, ThresholdMissIsNonzeroWithArtifacts)
{
    const auto d = scratch("strict");
    write(d / "c.ini", std::string(kNullControl) + "[cli]\nendpoint_tolerance = 1e-30\n");
    EXPECT_EQ(run_tool("control-linear --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 1);
    EXPECT_NE(read_text(d / "run" / "report.txt").find("thresholds_pass = false"), std::string::npos);
}

TEST(Determinism, ByteIdenticalRunsAndSeedSensitivity)
{
    const auto d = scratch("det");
    write(d / "c.ini", "[spectrum]\nmax_index = 6\n[spectral_field]\ninitial = random:0.05\ntarget = random:0.02\n");
    const auto cfg = (d / "c.ini").string();
    ASSERT_EQ(run_tool("control-linear --config " + cfg + " --seed 11 --out " + (d / "a").string()), 0);
    ASSERT_EQ(run_tool("control-linear --config " + cfg + " --seed 11 --out " + (d / "b").string()), 0);
    ASSERT_EQ(run_tool("control-linear --config " + cfg + " --seed 12 --out " + (d / "c").string()), 0);
    EXPECT_TRUE(same_tree(d / "a", d / "b"));
    EXPECT_NE(read_text(d / "a" / "initial.csv"), read_text(d / "c" / "initial.csv"));
}

TEST(Determinism, NonlinearRunsAreByteIdentical)
{
    const auto d = scratch("det_nl");
    write(d / "c.ini", "[spectrum]\nmax_index = 4\n[spectral_field]\ninitial = cosines:1,0.5\ninitial_norm = 0.01\n"
                       "[kawahara_sim]\ndt = 0.001\nmax_iterations = 20\n");
    const auto cfg = (d / "c.ini").string();
    ASSERT_EQ(run_tool("control-nonlinear --config " + cfg + " --out " + (d / "a").string()), 0);
    ASSERT_EQ(run_tool("control-nonlinear --config " + cfg + " --out " + (d / "b").string()), 0);
    EXPECT_TRUE(same_tree(d / "a", d / "b"));
    EXPECT_EQ(run_tool("verify --out " + (d / "a").string()), 0);
}

TEST(Verify, ReproducesSummaryAndDetectsTampering)
{
    const auto d = scratch("verify");
    write(d / "c.ini", kNullControl);
    const auto run = d / "run";
    ASSERT_EQ(run_tool("control-linear --config " + (d / "c.ini").string() + " --out " + run.string()), 0);
    EXPECT_EQ(run_tool("verify --out " + run.string()), 0);
    const auto v = read_text(run / "verify.csv");
    EXPECT_EQ(v.find(",0\n"), std::string::npos);  // every row matched

    // A perturbed control coefficient changes the recomputed residuals.
    auto ctl = read_csv(run / "control.csv", {"k", "re", "im"});
    auto& big = *std::max_element(ctl.rows.begin(), ctl.rows.end(),
                                  [](const auto& a, const auto& b) { return std::abs(a[1]) < std::abs(b[1]); });
    big[1] *= 1.0 + 1e-9;
    std::string text = "k,re,im\n";
    for (const auto& r : ctl.rows) text += num(r[0]) + "," + num(r[1]) + "," + num(r[2]) + "\n";
    write(run / "control.csv", text);
    EXPECT_EQ(run_tool("verify --out " + run.string()), 1);
}

TEST(Verify, MissingRunDirectory)
{
    EXPECT_EQ(run_tool("verify --out " + (g_root / "does_not_exist").string()), 1);
    EXPECT_EQ(run_tool("verify"), 1);
}

TEST(Guards, SeriesSolverNeedsHorizonAboveTwoPi)
{
    const auto d = scratch("guard_t");
    write(d / "c.ini", "[spectrum]\nmax_index = 2\n[spectral_field]\ninitial = cosines:1\n"
                       "[moment]\nhorizon = 6\nsolver = biortho_series\n");
    EXPECT_EQ(run_tool("control-linear --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 1);
    EXPECT_FALSE(fs::exists(d / "run"));
}

TEST(Guards, MissingProfileFileLeavesNoArtifacts)
{
    const auto d = scratch("guard_file");
    write(d / "c.ini", "[spectrum]\nmax_index = 2\n[spectral_field]\nprofile = file:absent.csv\ninitial = cosines:1\n");
    EXPECT_NE(run_tool("control-linear --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 0);
    EXPECT_FALSE(fs::exists(d / "run"));
}

TEST(Guards, BadConfigValues)
{
    const auto d = scratch("bad");
    const auto out = " --out " + (d / "run").string();
    write(d / "a.ini", "[moment]\nsolver = simplex\n");
    EXPECT_EQ(run_tool("control-linear --config " + (d / "a.ini").string() + out), 1);
    write(d / "b.ini", "[spectrum]\nmax_index = lots\n");
    EXPECT_EQ(run_tool("eig --config " + (d / "b.ini").string() + out), 1);
    write(d / "b2.ini", "[moment]\ninclude_zero_mode = maybe\n");
    EXPECT_EQ(run_tool("control-linear --config " + (d / "b2.ini").string() + out), 1);
    write(d / "b3.ini", "[cli]\nseed = -4\n");
    EXPECT_EQ(run_tool("eig --config " + (d / "b3.ini").string() + out), 1);
    write(d / "b4.ini", "[biortho]\nindices = 1,x\n");
    EXPECT_EQ(run_tool("biortho --config " + (d / "b4.ini").string() + out), 1);
    write(d / "c.ini", "[spectral_field]\ninitial = sawtooth\n");
    EXPECT_EQ(run_tool("control-linear --config " + (d / "c.ini").string() + out), 1);
    write(d / "d.ini", "[spectrum]\nbeta = 0\n");
    EXPECT_EQ(run_tool("eig --config " + (d / "d.ini").string() + out), 1);
    write(d / "e.ini", "[spectral_field]\ninitial = cosines:1,1\n[kawahara_sim]\nsmallness = 0.1\n");
    EXPECT_EQ(run_tool("control-nonlinear --config " + (d / "e.ini").string() + out), 1);
    EXPECT_EQ(run_tool("eig --config " + (d / "missing.ini").string() + out), 1);
    EXPECT_EQ(run_tool("eig" + out), 1);
    EXPECT_EQ(run_tool("frobnicate"), 1);
    EXPECT_FALSE(fs::exists(d / "run"));
}

TEST(Guards, SolverRefusalWritesReport)
{
    const auto d = scratch("refusal");
    write(d / "c.ini", std::string(kNullControl) + "condition_ceiling = 1.5\n");
    EXPECT_EQ(run_tool("control-linear --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 2);
    const auto report = read_text(d / "run" / "report.txt");
    EXPECT_NE(report.find("exit_code = 2"), std::string::npos);
    EXPECT_NE(report.find("ceiling"), std::string::npos);
}

TEST(Guards, NonConvergenceIsARefusal)
{
    const auto d = scratch("nonconv");
    write(d / "c.ini", "[spectrum]\nmax_index = 4\n[spectral_field]\ninitial = cosines:1,0.5\ninitial_norm = 0.01\n"
                       "[kawahara_sim]\ndt = 0.004\nmax_iterations = 2\n");
    EXPECT_EQ(run_tool("control-nonlinear --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 2);
    EXPECT_TRUE(fs::exists(d / "run" / "summary.csv"));
    EXPECT_EQ(summary_value(d / "run", "converged"), 0.0);
}

TEST(Guards, InstabilityExitCode)
{
    const auto d = scratch("blowup");
    write(d / "c.ini", "[spectrum]\nmax_index = 8\n[spectral_field]\ninitial = cosines:1,0.5\ninitial_norm = 20\n"
                       "[kawahara_sim]\ndt = 0.05\ngrid_size = 32\nsmallness = 100\nmax_iterations = 3\n");
    EXPECT_EQ(run_tool("control-nonlinear --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 3);
    EXPECT_NE(read_text(d / "run" / "report.txt").find("exit_code = 3"), std::string::npos);
}

TEST(Output, EnvironmentOverrideAndPrecedence)
{
    const auto d = scratch("env");
    write(d / "c.ini", "[spectrum]\nmax_index = 3\n[cli]\nout = from_config\n");
    const auto cfg = (d / "c.ini").string();
    ASSERT_EQ(run_tool("eig --config " + cfg), 0);
    EXPECT_TRUE(fs::exists(d / "from_config" / "summary.csv"));
    ASSERT_EQ(run_tool("eig --config " + cfg, "KAWA_OUT='" + (d / "from_env").string() + "'"), 0);
    EXPECT_TRUE(fs::exists(d / "from_env" / "summary.csv"));
    ASSERT_EQ(run_tool("eig --config " + cfg + " --out " + (d / "from_flag").string(),
                       "KAWA_OUT='" + (d / "ignored").string() + "'"),
              0);
    EXPECT_TRUE(fs::exists(d / "from_flag" / "summary.csv"));
    EXPECT_FALSE(fs::exists(d / "ignored"));
}

TEST(Biortho, DefaultFamilyDefectMatrix)
{
    const auto d = scratch("biortho");
    write(d / "c.ini", "[spectrum]\nmax_index = 2\n[biortho]\nindices = -2,-1,1,2\n");
    ASSERT_EQ(run_tool("biortho --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 0);
    const auto t = read_csv(d / "run" / "defect_matrix.csv", {"m", "n", "re", "im", "defect"});
    ASSERT_EQ(t.rows.size(), 16u);
    double worst = 0.0;
    for (const auto& r : t.rows) worst = std::max(worst, r[4]);
    EXPECT_LE(worst, 1e-3);
    EXPECT_EQ(worst, summary_value(d / "run", "max_defect"));
    EXPECT_GT(summary_value(d / "run", "half_budget_defect"), worst);
    for (int m : {-2, -1, 1, 2}) {
        EXPECT_TRUE(fs::exists(d / "run" / ("theta_" + std::to_string(m) + ".csv")));
        EXPECT_TRUE(fs::exists(d / "run" / ("zeta_" + std::to_string(m) + ".csv")));
    }
}

TEST(ControlLinear, SeriesSolverAndFileStates)
{
    const auto d = scratch("series");
    write(d / "u0.csv", "k,re,im\n0,0,0\n1,0.5,0.1\n2,0.25,0\n");
    write(d / "c.ini", "[spectrum]\nmax_index = 2\n[spectral_field]\ninitial = file:u0.csv\n"
                       "[moment]\nhorizon = 8\nsolver = biortho_series\n[cli]\nendpoint_tolerance = 1e-6\n");
    ASSERT_EQ(run_tool("control-linear --config " + (d / "c.ini").string() + " --out " + (d / "run").string()), 0);
    const auto u0 = read_field_csv(d / "run" / "initial.csv", 2);
    EXPECT_EQ(u0[1], cplx(0.5, 0.1));
    EXPECT_EQ(u0[-1], cplx(0.5, -0.1));
    EXPECT_EQ(read_csv(d / "run" / "control.csv").header, (std::vector<std::string>{"t", "v"}));
    EXPECT_EQ(run_tool("verify --out " + (d / "run").string()), 0);
}

// ------------------------------------------------------------ config and CSV layer

TEST(ConfigLayer, DefaultsAndOverrides)
{
    const auto d = scratch("cfg");
    const auto c = load_config(write(d / "c.ini", "[moment]\nhorizon = 9\n[biortho]\nquad_points_per_unit = 50\n"));
    EXPECT_EQ(c.max_index, 8);
    EXPECT_EQ(c.horizon, 9.0);
    EXPECT_EQ(c.biortho.horizon, 9.0);
    EXPECT_EQ(c.biortho.quad_points_per_unit, 50.0);
    EXPECT_EQ(c.solver, SolverChoice::MinNorm);
    EXPECT_FALSE(c.endpoint_tolerance.has_value());
    EXPECT_EQ(family_indices(c).size(), 16u);
    EXPECT_NO_THROW(validate_config(c));
}

TEST(ConfigLayer, StatePresets)
{
    const auto cos = make_state("cosines:1,0.5", 4, 0.0, 0, 0);
    EXPECT_EQ(cos[1], cplx(0.5));
    EXPECT_EQ(cos[-2], cplx(0.25));
    EXPECT_EQ(cos[0], cplx(0.0));
    const auto scaled = make_state("cosines:1,0.5", 4, 1e-2, 0, 0);
    EXPECT_NEAR(std::sqrt(scaled.coeff_norm2()), 1e-2, 1e-17);

    const auto r1 = make_state("random:0.3", 5, 0.0, 42, 0);
    const auto r2 = make_state("random:0.3", 5, 0.0, 42, 0);
    const auto r3 = make_state("random:0.3", 5, 0.0, 42, 1);
    EXPECT_EQ(r1.coeffs(), r2.coeffs());
    EXPECT_NE(r1.coeffs(), r3.coeffs());
    EXPECT_NEAR(std::sqrt(r1.coeff_norm2()), 0.3, 1e-15);
    EXPECT_EQ(r1[0], cplx(0.0));

    EXPECT_THROW(make_state("cosines:1,2,3", 2, 0.0, 0, 0), ValidationError);
    EXPECT_THROW(make_state("zero", 2, 1.0, 0, 0), ValidationError);
    EXPECT_THROW(make_state("noise", 2, 0.0, 0, 0), ValidationError);
    EXPECT_THROW(make_profile("flat", 2, 4.0), ValidationError);
}

TEST(ConfigLayer, FieldCsvErrors)
{
    const auto d = scratch("csv");
    EXPECT_THROW(read_field_csv(write(d / "a.csv", "k,re\n0,1\n"), 2), ValidationError);
    EXPECT_THROW(read_field_csv(write(d / "b.csv", "k,re,im\n3,1,0\n"), 2), ValidationError);
    EXPECT_THROW(read_field_csv(write(d / "c.csv", "k,re,im\n1,1,0\n1,1,0\n"), 2), ValidationError);
    EXPECT_THROW(read_field_csv(write(d / "d.csv", "k,re,im\n1,1,x\n"), 2), ValidationError);
    EXPECT_THROW(read_field_csv(write(d / "e.csv", "k,re,im\n0,1,0.5\n"), 2), ValidationError);  // imaginary mean
    EXPECT_THROW(read_field_csv(write(d / "f.csv", "k,re,im\n1,1,0\n-1,2,0\n"), 2), ValidationError);
    EXPECT_THROW(read_field_csv(d / "none.csv", 2), ValidationError);
    const auto ok = read_field_csv(write(d / "g.csv", "k,re,im\n-2,0.5,-0.25\n2,0.5,0.25\n"), 2);
    EXPECT_EQ(ok[2], cplx(0.5, 0.25));
}

TEST(CsvLayer, NumbersRoundTripExactly)
{
    std::mt19937_64 rng(99);
    for (int i = 0; i < 10000; ++i) {
        double v;
        const auto bits = rng();
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        EXPECT_EQ(parse_num(num(v)), v == 0.0 ? 0.0 : v);
    }
    EXPECT_EQ(num(-0.0), "0");
    EXPECT_TRUE(std::isnan(parse_num(num(std::nan("")))));
    EXPECT_THROW(parse_num("1.5abc"), ValidationError);
}

int main(int argc, char** argv)
{
    ::testing::InitGoogleTest(&argc, argv);
    if (argc < 3) {
        std::cerr << "usage: test_cli <kawactl> <scratch-dir>\n";
        return 2;
    }
    g_tool = fs::absolute(argv[1]);
    g_root = fs::absolute(argv[2]);
    fs::create_directories(g_root);
    return RUN_ALL_TESTS();
}
