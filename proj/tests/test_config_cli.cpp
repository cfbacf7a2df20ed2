// ============================================================================
// Tests for config parsing, CSV/SVG/snapshot plumbing, and the CLI binary.
// The binary path is injected at compile time as NLDW_CLI_PATH.
// ============================================================================

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "nldw/config.hpp"
#include "nldw/csv.hpp"
#include "nldw/snapshot_io.hpp"
#include "nldw/svg.hpp"

using Catch::Approx;
using namespace nldw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("nldw_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Run the CLI binary; returns the process exit code.
int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(NLDW_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
  const int ret = std::system(cmd.c_str());
  REQUIRE(ret != -1);
  REQUIRE(WIFEXITED(ret));
  return WEXITSTATUS(ret);
}

const char* kMinimalConfig = R"(
[problem]
p = 2.0
)";

}  // namespace

// ============================================================================
// parse_config
// ============================================================================

TEST_CASE("minimal config fills documented defaults", "[config]") {
  const ExperimentConfig cfg = parse_config(kMinimalConfig);
  REQUIRE(cfg.cfl == 0.5);
  REQUIRE(cfg.theta == 1e6);
  REQUIRE(cfg.stride == 8);
  REQUIRE(cfg.beta == 0.0);
  REQUIRE(cfg.dim == 1);
  REQUIRE(cfg.epsilons == std::vector<double>{1.0});
  REQUIRE(cfg.deterministic);
  REQUIRE(cfg.make_detector().theta_low == 1e4);
  REQUIRE(cfg.make_detector().theta_high == 1e8);
}

TEST_CASE("config keys map onto module objects", "[config]") {
  const ExperimentConfig cfg = parse_config(R"(
[damping]
beta = 0.5

[problem]
n = 1
p = 3.0
epsilons = 0.4,0.2,0.1
t_end = 12.5
nonlinearity = yes
theorem_regime = on

[grid]
L = 80
N = 1024
cfl = 0.25
dt_cap = 0.05

[data]
shape = compact
amplitude_u0 = 2.0
amplitude_u1 = -0.5
width = 1.5
offset = 3.0

[detector]
theta = 1e5
theta_low = 1e3
theta_high = 1e7
confirm_doubling = false

[output]
out_dir = results
stride = 4
snapshots = true
svg = true

[sweep]
horizon = 300

[fit]
regime = critical_exp
p = 3.0
)");
  const Grid g = cfg.make_grid();
  REQUIRE(g.dim == 1);
  REQUIRE(g.half_width == 80.0);
  REQUIRE(g.points == 1024);

  const ProblemParams prm = cfg.make_params(0.4);
  REQUIRE(prm.p == 3.0);
  REQUIRE(prm.epsilon == 0.4);
  REQUIRE(prm.damping.beta() == 0.5);
  REQUIRE(prm.cfl == 0.25);
  REQUIRE(prm.dt_cap == 0.05);

  const InitialData d = cfg.make_data();
  REQUIRE(d.shape == DataShape::CompactBump);
  REQUIRE(d.amplitude_u0 == 2.0);
  REQUIRE(d.amplitude_u1 == -0.5);
  REQUIRE(d.width == 1.5);
  REQUIRE(d.offset == 3.0);

  const BlowupDetector det = cfg.make_detector();
  REQUIRE(det.theta == 1e5);
  REQUIRE_FALSE(det.confirm_doubling);

  REQUIRE(cfg.sweep_horizon == 300.0);
  REQUIRE(cfg.fit_regime == ScalingRegime::CriticalExp);
  REQUIRE(cfg.out_dir == "results");
  REQUIRE(cfg.snapshots);
  REQUIRE(cfg.svg);
}

TEST_CASE("validation collects every violation at once", "[config]") {
  try {
    parse_config(R"(
[damping]
beta = 1.5

[problem]
p = 0.5
bogus_key = 1

[grid]
N = 3

[detector]
theta = 1.0
theta_low = 10.0
)");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto& v = e.violations();
    REQUIRE(v.size() >= 4);
    const std::string all = e.what();
    REQUIRE(all.find("beta must lie in [-1, 1)") != std::string::npos);
    REQUIRE(all.find("p must exceed 1") != std::string::npos);
    REQUIRE(all.find("unknown key 'problem.bogus_key'") != std::string::npos);
    REQUIRE(all.find("theta_low < theta") != std::string::npos);
    // parse-stage notes carry line numbers
    REQUIRE(all.find("line 7") != std::string::npos);
  }
}

TEST_CASE("malformed lines are reported with line numbers", "[config]") {
  try {
    parse_config("[problem\np = 2.0\nnot a kv line\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string all = e.what();
    REQUIRE(all.find("line 1") != std::string::npos);
    REQUIRE(all.find("malformed section header") != std::string::npos);
    REQUIRE(all.find("line 3") != std::string::npos);
  }
}

TEST_CASE("epsilon and epsilons are mutually exclusive", "[config]") {
  REQUIRE_THROWS_AS(parse_config("[problem]\nepsilon = 1.0\nepsilons = "
                                 "1.0,0.5\n"),
                    ConfigError);
}

TEST_CASE("unknown sections and stages are rejected", "[config]") {
  REQUIRE_THROWS_AS(parse_config("[nonsense]\nx = 1\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("[run]\nstages = aux,transmogrify\n"),
                    ConfigError);
  REQUIRE_NOTHROW(parse_config("[run]\nstages = aux,odelab\n"));
}

TEST_CASE("sweep epsilons must strictly decrease", "[config]") {
  REQUIRE_THROWS_AS(parse_config("[sweep]\nepsilons = 0.5,0.5\n"),
                    ConfigError);
  REQUIRE_NOTHROW(parse_config("[sweep]\nepsilons = 0.5,0.25\n"));
}

// ============================================================================
// csv / svg / snapshot plumbing
// ============================================================================

TEST_CASE("numeric formatting is stable and locale-free", "[csv]") {
  REQUIRE(format_number(0.1) == "0.1");
  REQUIRE(format_number(1e12) == "1e+12");
  REQUIRE(format_number(-2.5) == "-2.5");
  REQUIRE(format_number(std::numeric_limits<double>::infinity()) == "inf");
  REQUIRE(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  REQUIRE(format_number(57.1270638398437) == "57.1270638398");
}

TEST_CASE("fnv1a64 matches the reference vectors", "[csv]") {
  REQUIRE(fnv1a64("") == 0xcbf29ce484222325ull);
  REQUIRE(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  REQUIRE(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("csv tables write atomically with footers", "[csv]") {
  const fs::path dir = fresh_dir("csv");
  CsvTable t({"x", "y"});
  t.row().num(1.0).num(2.5);
  t.row().num(2.0).text("hello");
  t.footer_line("# trailer");
  const fs::path out = dir / "t.csv";
  t.write(out);
  REQUIRE(slurp(out) == "x,y\n1,2.5\n2,hello\n# trailer\n");
  REQUIRE_FALSE(fs::exists(dir / "t.csv.partial"));
}

TEST_CASE("svg plots are self-contained polyline documents", "[svg]") {
  SvgPlotOptions opt;
  opt.title = "demo";
  opt.draw_fit = true;
  opt.slope = 1.0;
  opt.intercept = 0.0;
  const std::string svg =
      svg_scatter_plot({0.0, 1.0, 2.0}, {0.1, 0.9, 2.2}, opt);
  REQUIRE(svg.rfind("<svg", 0) == 0);
  REQUIRE(svg.find("<polyline") != std::string::npos);
  REQUIRE(svg.find("<line") != std::string::npos);  // fit overlay
  std::size_t circles = 0, pos = 0;
  while ((pos = svg.find("<circle", pos)) != std::string::npos) {
    ++circles;
    ++pos;
  }
  REQUIRE(circles == 3);
  REQUIRE_THROWS_AS(svg_scatter_plot({1.0}, {2.0}, opt), OutOfRange);
}

TEST_CASE("field dumps round-trip bit-exactly", "[snapshot_io]") {
  const fs::path dir = fresh_dir("fields");
  const Grid g(1, 12.5, 32);
  Field f = Field::sample_radial(g, [](double r2) { return std::exp(-r2); });
  f.values[7] = 1.0 / 3.0;  // non-representable decimal
  write_field_binary(dir / "f.bin", f, 2.75);

  double t = 0.0;
  const Field back = read_field_binary(dir / "f.bin", t);
  REQUIRE(t == 2.75);
  REQUIRE(back.grid == g);
  REQUIRE(back.values == f.values);

  REQUIRE_THROWS_AS(read_field_binary(dir / "absent.bin", t), MissingInput);
  std::ofstream(dir / "junk.bin", std::ios::binary) << "not a field dump!!";
  REQUIRE_THROWS_AS(read_field_binary(dir / "junk.bin", t), Error);
}

TEST_CASE("snapshot directories round-trip with metadata", "[snapshot_io]") {
  const fs::path dir = fresh_dir("snapdir");
  const Grid g(1, 10.0, 32);
  SnapshotStore store(SnapshotStore::Mode::Full, 4);
  for (int k = 0; k < 5; ++k) {
    SimState s;
    s.t = 0.5 * k;
    s.u = Field::sample_radial(g, [&](double r2) { return r2 + k; });
    s.v = Field::sample_radial(g, [&](double r2) { return -r2 * k; });
    store.push(s);
  }
  RunMeta meta;
  meta["beta"] = "0.5";
  meta["p"] = "2";
  meta["stride"] = "4";
  write_snapshot_dir(dir / "snaps", store, meta);

  RunMeta back_meta;
  const SnapshotStore back = read_snapshot_dir(dir / "snaps", back_meta);
  REQUIRE(back.entries().size() == 5);
  REQUIRE(back.stride() == 4);
  REQUIRE(back_meta.at("beta") == "0.5");
  REQUIRE(back_meta.at("count") == "5");
  for (std::size_t k = 0; k < 5; ++k) {
    REQUIRE(back.entries()[k].t == store.entries()[k].t);
    REQUIRE(back.entries()[k].u.values == store.entries()[k].u.values);
    REQUIRE(back.entries()[k].v.values == store.entries()[k].v.values);
  }

  REQUIRE_THROWS_AS(read_snapshot_dir(dir / "nowhere", back_meta),
                    MissingInput);
}

// ============================================================================
// CLI binary
// ============================================================================

TEST_CASE("cli aux writes the specified table", "[cli]") {
  const fs::path dir = fresh_dir("cli_aux");
  const fs::path out = dir / "aux.csv";
  REQUIRE(run_cli("aux --beta 0.5 --tmax 10 --samples 16 --out " +
                  out.string()) == 0);
  const std::string text = slurp(out);
  REQUIRE(text.rfind("t,b,g,gprime,G,Gamma,bg_minus_1\n", 0) == 0);
  // header + 17 sample rows, newline-terminated
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 18);
  // g(0) = b* = 3/2 for beta = 1/2
  std::stringstream ss(text);
  std::string header, first;
  std::getline(ss, header);
  std::getline(ss, first);
  REQUIRE(first.rfind("0,1,1.5,", 0) == 0);
}

TEST_CASE("cli rejects bad invocations with exit 1", "[cli]") {
  REQUIRE(run_cli("aux --beta 1.5 --tmax 10 --out /dev/null") == 1);
  REQUIRE(run_cli("definitely-not-a-subcommand") == 1);
  REQUIRE(run_cli("fit --regime bogus --in nowhere.csv") == 1);
}

TEST_CASE("cli maps missing inputs to exit 2", "[cli]") {
  const fs::path dir = fresh_dir("cli_missing");
  REQUIRE(run_cli("identity --run " + (dir / "nowhere").string() + " --out " +
                  (dir / "x.csv").string()) == 2);
  REQUIRE(run_cli("simulate --config " + (dir / "absent.ini").string()) == 2);
}

TEST_CASE("cli configs fail validation with exit 1", "[cli]") {
  const fs::path dir = fresh_dir("cli_badcfg");
  std::ofstream(dir / "bad.ini") << "[problem]\np = 0.5\n";
  REQUIRE(run_cli("simulate --config " + (dir / "bad.ini").string()) == 1);
}

TEST_CASE("cli aux output is bitwise deterministic", "[cli]") {
  const fs::path dir = fresh_dir("cli_det");
  REQUIRE(run_cli("aux --beta -0.5 --tmax 100 --samples 32 --out " +
                  (dir / "a.csv").string()) == 0);
  REQUIRE(run_cli("aux --beta -0.5 --tmax 100 --samples 32 --out " +
                  (dir / "b.csv").string()) == 0);
  REQUIRE(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
}

TEST_CASE("cli odelab emits rows plus a fit footer", "[cli]") {
  const fs::path dir = fresh_dir("cli_ode");
  const fs::path out = dir / "ode.csv";
  REQUIRE(run_cli("odelab --kind lizhou --p 3 --epsilons 0.3,0.2,0.15 "
                  "--tol 1e-5 --out " +
                  out.string()) == 0);
  const std::string text = slurp(out);
  REQUIRE(text.rfind("epsilon,T_lo,T_hi,tau_blowup\n", 0) == 0);
  REQUIRE(text.find("\n# fit\nregime,slope,intercept,r_squared,n_points\n") !=
          std::string::npos);
  REQUIRE(text.find("subcritical_poly,") != std::string::npos);
}

TEST_CASE("cli fit recovers a synthetic power law from a sweep csv",
          "[cli]") {
  const fs::path dir = fresh_dir("cli_fit");
  {
    std::ofstream sweep(dir / "sweep.csv");
    sweep << "epsilon,T_lo,T_hi,reason,theta,insensitivity_ratio\n";
    // T = eps^-2 exactly; one flagged point must be ignored by the fit.
    sweep << "0.25,16,16,threshold_crossed,1e+06,0.001\n";
    sweep << "0.5,4,4,threshold_crossed,1e+06,0.001\n";
    sweep << "0.75,nan,nan,error,1e+06,nan\n";
    sweep << "1,1,1,threshold_crossed,1e+06,0.001\n";
  }
  const fs::path out = dir / "fit.csv";
  REQUIRE(run_cli("fit --regime subcritical_poly --in " +
                  (dir / "sweep.csv").string() + " --out " + out.string() +
                  " --svg " + (dir / "fit.svg").string()) == 0);
  const std::string text = slurp(out);
  std::stringstream ss(text);
  std::string header, row;
  std::getline(ss, header);
  REQUIRE(header == "regime,slope,intercept,r_squared,n_points");
  std::getline(ss, row);
  std::stringstream rs(row);
  std::string regime, slope, intercept, r2, n;
  std::getline(rs, regime, ',');
  std::getline(rs, slope, ',');
  std::getline(rs, intercept, ',');
  std::getline(rs, r2, ',');
  std::getline(rs, n, ',');
  REQUIRE(regime == "subcritical_poly");
  REQUIRE(std::stod(slope) == Approx(-2.0).epsilon(1e-9));
  REQUIRE(std::stod(r2) == Approx(1.0).epsilon(1e-9));
  REQUIRE(n == "3");
  REQUIRE(fs::exists(dir / "fit.svg"));
}

TEST_CASE("cli pipeline runs end to end and is reproducible", "[cli]") {
  const fs::path dir = fresh_dir("cli_run");
  const fs::path out_dir = dir / "out";
  {
    // simulate runs small data to t_end; the sweep uses larger epsilons that
    // blow up quickly, so both stages finish fast and predictably.
    std::ofstream ini(dir / "exp.ini");
    ini << "[damping]\nbeta = 0.5\n\n"
        << "[problem]\nn = 1\np = 2.0\nepsilon = 0.05\nt_end = 3.0\n\n"
        << "[grid]\nL = 24\nN = 256\n\n"
        << "[data]\nshape = gaussian\namplitude_u0 = 3.0\nwidth = 1.0\n\n"
        << "[output]\nout_dir = " << out_dir.string()
        << "\nsnapshots = true\nstride = 8\n\n"
        << "[sweep]\nepsilons = 1.4,1.2,1.0\nhorizon = 40\n\n"
        << "[fit]\nregime = subcritical_poly\n\n"
        << "[run]\nstages = simulate,sweep,fit,identity\nidentity_times = "
           "0.75,1.5,2.25,3.0\n";
  }
  REQUIRE(run_cli("run --config " + (dir / "exp.ini").string()) == 0);
  for (const char* f :
       {"trajectory.csv", "sweep.csv", "fit.csv", "identity.csv",
        "manifest.txt"}) {
    INFO(f);
    REQUIRE(fs::exists(out_dir / f));
  }
  REQUIRE(fs::exists(out_dir / "snapshots" / "run.meta"));

  const std::string manifest = slurp(out_dir / "manifest.txt");
  REQUIRE(manifest.find("config_hash=") != std::string::npos);
  REQUIRE(manifest.find("module_versions=") != std::string::npos);
  REQUIRE(manifest.find("stage_sweep_ms=") != std::string::npos);
  REQUIRE(manifest.find("deterministic=true") != std::string::npos);

  // identity CSV carries the specified columns
  const std::string id = slurp(out_dir / "identity.csv");
  REQUIRE(id.rfind("t,A,B,C,D,E,residual,relative_residual,H,J0\n", 0) == 0);

  // a second run into a fresh directory reproduces every CSV body bitwise
  const fs::path out2 = dir / "out2";
  {
    std::string ini = slurp(dir / "exp.ini");
    const auto pos = ini.find(out_dir.string());
    REQUIRE(pos != std::string::npos);
    ini.replace(pos, out_dir.string().size(), out2.string());
    std::ofstream(dir / "exp2.ini") << ini;
  }
  REQUIRE(run_cli("run --config " + (dir / "exp2.ini").string()) == 0);
  for (const char* f :
       {"trajectory.csv", "sweep.csv", "fit.csv", "identity.csv"}) {
    INFO(f);
    REQUIRE(slurp(out_dir / f) == slurp(out2 / f));
  }
}

TEST_CASE("run pipeline without snapshots fails identity with exit 2",
          "[cli]") {
  const fs::path dir = fresh_dir("cli_nosnaps");
  {
    std::ofstream ini(dir / "exp.ini");
    ini << "[problem]\np = 2.0\nt_end = 2.0\n\n"
        << "[grid]\nL = 16\nN = 64\n\n"
        << "[output]\nout_dir = " << (dir / "out").string()
        << "\nsnapshots = false\n\n"
        << "[run]\nstages = simulate,identity\n";
  }
  REQUIRE(run_cli("run --config " + (dir / "exp.ini").string()) == 2);
  // completed stages still appear in the manifest postmortem
  const std::string manifest = slurp(dir / "out" / "manifest.txt");
  REQUIRE(manifest.find("stage_simulate_ms=") != std::string::npos);
  REQUIRE(manifest.find("stage_identity_ms=") == std::string::npos);
}
