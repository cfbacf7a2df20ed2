// ============================================================================
// nldw -- batch front-end for the blow-up laboratory
//
// One binary, one subcommand per experiment stage:
//
//   aux       tabulate the damping auxiliaries b, g, G, Gamma
//   simulate  integrate one Cauchy problem, dump trajectory and snapshots
//   sweep     estimate lifespans T(eps) across an epsilon sweep
//   fit       fit a scaling law to a sweep CSV
//   identity  evaluate the weighted-functional identity on stored snapshots
//   odelab    comparison-ODE blow-up sweeps and fits
//   run       execute a multi-stage pipeline from one config file
//
// Exit codes: 0 success, 1 validation/parse, 2 missing inputs, 3 numerical
// failure.  CSV bodies are bitwise-deterministic for identical configs; the
// run manifest differs at most in its timestamp.  NLDW_WORKERS bounds sweep
// parallelism (default: logical processors).
// ============================================================================

#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nldw/config.hpp"
#include "nldw/csv.hpp"
#include "nldw/identity.hpp"
#include "nldw/snapshot_io.hpp"
#include "nldw/svg.hpp"
#include "nldw/version.hpp"

namespace fs = std::filesystem;
using namespace nldw;

namespace {

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_double_csv_list(const std::string& text,
                                          const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    item = item.substr(b, e - b + 1);
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw OutOfRange(std::string(what) + ": not a number: '" + item + "'");
    }
  }
  if (out.empty()) {
    throw OutOfRange(std::string(what) + ": empty list");
  }
  return out;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

void warn_classical(const DampingModel& model) {
  if (model.classical()) {
    std::cerr << "note: beta = 0 is the constant-damping cross-check regime;"
                 " the variable-damping theory is exercised for beta != 0\n";
  }
}

double stage_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

std::string iso_utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Stage implementations (shared by the standalone subcommands and `run`)
// ---------------------------------------------------------------------------

void stage_aux(double beta, double tmax, std::size_t samples,
               const fs::path& out) {
  const DampingModel model(beta);
  warn_classical(model);
  const AuxFunctions aux(model, tmax, std::max<std::size_t>(samples, 16));
  CsvTable table({"t", "b", "g", "gprime", "G", "Gamma", "bg_minus_1"});
  const std::size_t rows = std::max<std::size_t>(samples, 2);
  for (std::size_t i = 0; i <= rows; ++i) {
    const double t = tmax * static_cast<double>(i) / static_cast<double>(rows);
    const double b = model.b(t);
    const double g = aux.g(t);
    table.row()
        .num(t)
        .num(b)
        .num(g)
        .num(aux.g_prime(t))
        .num(aux.G(t))
        .num(aux.Gamma(t))
        .num(b * g - 1.0);
  }
  table.write(out);
  std::cout << "aux: wrote " << out.string() << "\n";
}

RunMeta simulate_meta(const ExperimentConfig& cfg, double epsilon) {
  RunMeta meta;
  meta["dim"] = std::to_string(cfg.dim);
  meta["N"] = std::to_string(cfg.N);
  meta["L"] = format_exact(cfg.L);
  meta["beta"] = format_exact(cfg.beta);
  meta["p"] = format_exact(cfg.p);
  meta["epsilon"] = format_exact(epsilon);
  meta["shape"] =
      cfg.shape == DataShape::GaussianBump ? "gaussian" : "compact";
  meta["amplitude_u0"] = format_exact(cfg.amplitude_u0);
  meta["amplitude_u1"] = format_exact(cfg.amplitude_u1);
  meta["width"] = format_exact(cfg.width);
  meta["offset"] = format_exact(cfg.offset);
  meta["stride"] = std::to_string(cfg.stride);
  meta["t_end"] = format_exact(cfg.t_end);
  meta["nonlinearity"] = cfg.nonlinearity_on ? "1" : "0";
  meta["theorem_regime"] = cfg.theorem_regime ? "1" : "0";
  return meta;
}

void stage_simulate(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const double epsilon = cfg.epsilons.front();
  const ProblemParams prm = cfg.make_params(epsilon);
  const InitialData data = cfg.make_data();
  const Grid grid = cfg.make_grid();
  warn_classical(prm.damping);

  RunOptions opt;
  opt.t_end = cfg.t_end;
  opt.keep_snapshots = cfg.snapshots;
  opt.snapshot_stride = cfg.stride;
  opt.stop_theta = cfg.theta;
  opt.confirm_doubling = cfg.confirm_doubling;
  const RunOutcome outcome = run(prm, data, grid, opt);

  if (!outcome.domain_guard_ok) {
    std::cerr << "warning: box half-width " << format_number(grid.half_width)
              << " is smaller than data support + t_end + 1; wrap-around "
                 "contamination is possible\n";
  }

  CsvTable table({"t", "max_abs_u", "l2_u", "energy", "dt"});
  for (const auto& row : outcome.trajectory) {
    table.row()
        .num(row.t)
        .num(row.max_abs_u)
        .num(row.l2_u)
        .num(row.energy)
        .num(row.dt);
  }
  table.write(out_dir / "trajectory.csv");

  if (cfg.snapshots) {
    write_snapshot_dir(out_dir / "snapshots", outcome.snapshots,
                       simulate_meta(cfg, epsilon));
  }

  std::cout << "simulate: " << stop_reason_name(outcome.report.reason)
            << " at t = " << format_number(outcome.report.t_final) << " ("
            << outcome.report.steps << " steps); wrote "
            << (out_dir / "trajectory.csv").string() << "\n";
}

std::vector<LifespanRecord> stage_sweep(const ExperimentConfig& cfg,
                                        const std::vector<double>& epsilons,
                                        const fs::path& out) {
  const ProblemParams prm = cfg.make_params(epsilons.front());
  const InitialData data = cfg.make_data();
  const Grid grid = cfg.make_grid();
  const BlowupDetector det = cfg.make_detector();
  warn_classical(prm.damping);

  const auto records =
      sweep(prm, data, grid, det, epsilons, cfg.sweep_horizon);

  CsvTable table(
      {"epsilon", "T_lo", "T_hi", "reason", "theta", "insensitivity_ratio"});
  for (const auto& r : records) {
    if (!r.error.empty()) {
      std::cerr << "sweep: epsilon = " << format_number(r.epsilon)
                << " flagged: " << r.error << "\n";
    }
    table.row()
        .num(r.epsilon)
        .num(r.T_lo)
        .num(r.T_hi)
        .text(r.error.empty() ? lifespan_reason_name(r.reason) : "error")
        .num(r.theta_used)
        .num(r.insensitivity_ratio);
  }
  table.write(out);
  std::cout << "sweep: " << records.size() << " points; wrote " << out.string()
            << "\n";
  return records;
}

std::vector<LifespanRecord> read_sweep_csv(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) {
    throw Error("empty sweep CSV: " + path.string());
  }
  if (split_csv_row(line) !=
      std::vector<std::string>{"epsilon", "T_lo", "T_hi", "reason", "theta",
                               "insensitivity_ratio"}) {
    throw Error("not a sweep CSV (unexpected header): " + path.string());
  }
  std::vector<LifespanRecord> records;
  int lineno = 1;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_row(line);
    if (cells.size() != 6) {
      throw Error("sweep CSV row " + std::to_string(lineno) +
                  " has wrong arity: " + path.string());
    }
    LifespanRecord r;
    r.epsilon = std::stod(cells[0]);
    r.T_lo = std::stod(cells[1]);
    r.T_hi = std::stod(cells[2]);
    r.theta_used = std::stod(cells[4]);
    r.insensitivity_ratio = std::stod(cells[5]);
    if (cells[3] == "error") {
      r.error = "flagged in sweep CSV";
    } else if (cells[3] == "threshold_crossed") {
      r.blew_up = true;
      r.confirmed = true;
      r.reason = LifespanReason::ThresholdCrossed;
      r.lifespan = 0.5 * (r.T_lo + r.T_hi);
    }
    records.push_back(std::move(r));
  }
  return records;
}

const char* regime_axis_label(ScalingRegime regime, bool y) {
  switch (regime) {
    case ScalingRegime::SubcriticalPoly:
      return y ? "log T" : "log eps";
    case ScalingRegime::CriticalExp:
      return y ? "log T" : "eps^-(p-1)";
    case ScalingRegime::CriticalDoubleExp:
      return y ? "log log T" : "eps^-(p-1)";
  }
  return "";
}

void write_fit_svg(const fs::path& path, const ScalingFit& fit,
                   const std::string& title) {
  SvgPlotOptions opt;
  opt.title = title;
  opt.x_label = regime_axis_label(fit.regime, false);
  opt.y_label = regime_axis_label(fit.regime, true);
  opt.draw_fit = true;
  opt.slope = fit.slope;
  opt.intercept = fit.intercept;
  write_svg_plot(path, fit.xs, fit.ys, opt);
}

ScalingFit stage_fit(const std::vector<LifespanRecord>& records,
                     ScalingRegime regime, double p, const fs::path& out,
                     const std::optional<fs::path>& svg) {
  const ScalingFit fit = fit_scaling(records, regime, p);
  CsvTable table({"regime", "slope", "intercept", "r_squared", "n_points"});
  table.row()
      .text(scaling_regime_name(fit.regime))
      .num(fit.slope)
      .num(fit.intercept)
      .num(fit.r_squared)
      .num(static_cast<double>(fit.n_points));
  table.write(out);
  if (svg) write_fit_svg(*svg, fit, "lifespan scaling fit");
  std::cout << "fit: " << scaling_regime_name(fit.regime)
            << " slope = " << format_number(fit.slope)
            << " r^2 = " << format_number(fit.r_squared) << "; wrote "
            << out.string() << "\n";
  return fit;
}

void stage_identity(const fs::path& run_dir, std::vector<double> times,
                    std::size_t samples, const fs::path& out) {
  RunMeta meta;
  const SnapshotStore store = read_snapshot_dir(run_dir, meta);
  const auto need = [&](const char* key) -> std::string {
    const auto it = meta.find(key);
    if (it == meta.end()) {
      throw Error("run.meta lacks key '" + std::string(key) + "' in " +
                  run_dir.string());
    }
    return it->second;
  };

  const double beta = std::stod(need("beta"));
  const double p = std::stod(need("p"));
  const double epsilon = std::stod(need("epsilon"));
  InitialData data;
  data.shape = need("shape") == "compact" ? DataShape::CompactBump
                                          : DataShape::GaussianBump;
  data.amplitude_u0 = std::stod(need("amplitude_u0"));
  data.amplitude_u1 = std::stod(need("amplitude_u1"));
  data.width = std::stod(need("width"));
  data.offset = std::stod(need("offset"));
  const bool linear_run = need("nonlinearity") == "0";

  const auto& entries = store.entries();
  if (entries.size() < 4) {
    throw InsufficientSnapshots("identity: snapshot directory " +
                                run_dir.string() + " holds only " +
                                std::to_string(entries.size()) +
                                " snapshots (need >= 4)");
  }
  const double t_last = entries.back().t;
  if (times.empty()) {
    times = {0.25 * t_last, 0.5 * t_last, 0.75 * t_last, t_last};
  }

  const DampingModel model(beta);
  const AuxFunctions aux(model, t_last * (1.0 + 1e-12) + 1e-12,
                         std::max<std::size_t>(samples, 16));
  const IdentityReport rep =
      identity_report(store, aux, data, epsilon, p, times, linear_run);

  CsvTable table({"t", "A", "B", "C", "D", "E", "residual",
                  "relative_residual", "H", "J0"});
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    if (!rep.notes[i].empty()) {
      std::cerr << "identity: t = " << format_number(rep.times[i]) << ": "
                << rep.notes[i] << "\n";
    }
    table.row()
        .num(rep.times[i])
        .num(rep.A[i])
        .num(rep.B[i])
        .num(rep.C[i])
        .num(rep.D[i])
        .num(rep.E[i])
        .num(rep.residual[i])
        .num(rep.relative_residual[i])
        .num(rep.H[i])
        .num(rep.J0);
  }
  table.write(out);
  std::cout << "identity: max relative residual = "
            << format_number(rep.max_relative_residual()) << "; wrote "
            << out.string() << "\n";
}

void stage_odelab(OdeKind kind, double beta, double p,
                  const std::vector<double>& epsilons, double tol,
                  double horizon, const fs::path& out,
                  const std::optional<fs::path>& svg) {
  const OdeScalingStudy study = scaling_study(kind, beta, p, epsilons, tol,
                                              horizon);
  CsvTable table({"epsilon", "T_lo", "T_hi", "tau_blowup"});
  for (const auto& row : study.rows) {
    table.row()
        .num(row.epsilon)
        .num(row.result.T_lo)
        .num(row.result.T_hi)
        .num(row.result.blew_up
                 ? 0.5 * (row.result.x_lo + row.result.x_hi)
                 : std::numeric_limits<double>::quiet_NaN());
  }
  table.footer_line("# fit");
  table.footer_line("regime,slope,intercept,r_squared,n_points");
  table.footer_line(std::string(scaling_regime_name(study.fit.regime)) + "," +
                    format_number(study.fit.slope) + "," +
                    format_number(study.fit.intercept) + "," +
                    format_number(study.fit.r_squared) + "," +
                    std::to_string(study.fit.n_points));
  table.write(out);
  if (svg) write_fit_svg(*svg, study.fit, "comparison-ODE scaling fit");
  std::cout << "odelab: " << ode_kind_name(kind)
            << " slope = " << format_number(study.fit.slope)
            << " r^2 = " << format_number(study.fit.r_squared) << "; wrote "
            << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// Multi-stage pipeline
// ---------------------------------------------------------------------------

int cmd_run(const fs::path& config_path) {
  const std::string text = read_text_file(config_path);
  const ExperimentConfig cfg = parse_config(text);
  if (cfg.stages.empty()) {
    throw ConfigError({"run: [run] stages must list at least one stage"});
  }
  const fs::path out_dir = cfg.out_dir;
  fs::create_directories(out_dir);

  std::vector<std::pair<std::string, double>> timings;
  std::vector<LifespanRecord> sweep_records;

  const auto write_manifest = [&] {
    std::string m;
    m += "config_hash=" + hex64(fnv1a64(text)) + "\n";
    m += "library_version=" + std::string(kLibraryVersion) + "\n";
    m += "module_versions=damping:" + std::string(kDampingVersion) +
         ",heat_kernel:" + kHeatKernelVersion + ",solver:" + kSolverVersion +
         ",lifespan:" + kLifespanVersion + ",identity:" + kIdentityVersion +
         ",ode_lab:" + kOdeLabVersion + ",cli:" + kCliVersion + "\n";
    m += "deterministic=" + std::string(cfg.deterministic ? "true" : "false") +
         "\n";
    m += "written_at=" + iso_utc_now() + "\n";
    for (const auto& [name, ms] : timings) {
      m += "stage_" + name + "_ms=" + format_number(ms) + "\n";
    }
    write_file_atomic(out_dir / "manifest.txt", m);
  };

  try {
    for (const auto& stage : cfg.stages) {
      const auto t0 = std::chrono::steady_clock::now();
      if (stage == "aux") {
        stage_aux(cfg.beta, cfg.t_end, 1024, out_dir / "aux.csv");
      } else if (stage == "simulate") {
        stage_simulate(cfg, out_dir);
      } else if (stage == "sweep") {
        sweep_records =
            stage_sweep(cfg, cfg.effective_sweep_epsilons(),
                        out_dir / "sweep.csv");
      } else if (stage == "fit") {
        if (!cfg.fit_regime) {
          throw ConfigError({"run: the fit stage needs [fit] regime"});
        }
        if (sweep_records.empty()) {
          sweep_records = read_sweep_csv(out_dir / "sweep.csv");
        }
        const double p = cfg.fit_p > 0.0 ? cfg.fit_p : cfg.p;
        stage_fit(sweep_records, *cfg.fit_regime, p, out_dir / "fit.csv",
                  cfg.svg ? std::optional<fs::path>(out_dir / "fit.svg")
                          : std::nullopt);
      } else if (stage == "identity") {
        stage_identity(out_dir / "snapshots", cfg.identity_times, 4096,
                       out_dir / "identity.csv");
      } else if (stage == "odelab") {
        if (!cfg.ode_kind) {
          throw ConfigError({"run: the odelab stage needs [odelab] kind"});
        }
        stage_odelab(*cfg.ode_kind, cfg.ode_beta, cfg.ode_p,
                     cfg.ode_epsilons.empty() ? cfg.epsilons
                                              : cfg.ode_epsilons,
                     cfg.ode_tol, cfg.ode_horizon, out_dir / "odelab.csv",
                     cfg.svg ? std::optional<fs::path>(out_dir / "odelab.svg")
                             : std::nullopt);
      }
      timings.emplace_back(stage, stage_ms(t0));
    }
  } catch (...) {
    write_manifest();  // record completed stages for the postmortem
    throw;
  }
  write_manifest();
  std::cout << "run: completed " << cfg.stages.size() << " stage(s); wrote "
            << (out_dir / "manifest.txt").string() << "\n";
  return 0;
}

int map_exit(const Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  if (dynamic_cast<const MissingInput*>(&e) ||
      dynamic_cast<const InsufficientSnapshots*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const NonConvergent*>(&e) ||
      dynamic_cast<const DomainTooSmall*>(&e)) {
    return 3;
  }
  return 1;  // validation/parse family
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "nldw: lifespan experiments for the semilinear wave equation with "
      "time-dependent damping"};
  app.require_subcommand(1);

  // --- aux ---
  auto* aux_cmd =
      app.add_subcommand("aux", "Tabulate b, g, G, Gamma for one beta");
  double aux_beta = 0.5, aux_tmax = 1000.0;
  std::size_t aux_samples = 1024;
  std::string aux_out = "aux.csv";
  aux_cmd->add_option("--beta", aux_beta, "damping exponent in [-1, 1)")
      ->required();
  aux_cmd->add_option("--tmax", aux_tmax, "table end time");
  aux_cmd->add_option("--samples", aux_samples, "table rows / cache samples");
  aux_cmd->add_option("--out", aux_out, "output CSV path");

  // --- simulate ---
  auto* sim_cmd =
      app.add_subcommand("simulate", "Integrate one Cauchy problem");
  std::string sim_config;
  sim_cmd->add_option("--config", sim_config, "experiment config file")
      ->required();

  // --- sweep ---
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Estimate lifespans across epsilons");
  std::string sweep_config, sweep_eps_list, sweep_out = "sweep.csv";
  sweep_cmd->add_option("--config", sweep_config, "experiment config file")
      ->required();
  sweep_cmd->add_option("--epsilons", sweep_eps_list,
                        "comma list overriding the config");
  sweep_cmd->add_option("--out", sweep_out, "output CSV path");

  // --- fit ---
  auto* fit_cmd = app.add_subcommand("fit", "Fit a scaling law to a sweep");
  std::string fit_regime_name, fit_in, fit_out = "fit.csv", fit_svg;
  double fit_p = 0.0;
  fit_cmd
      ->add_option("--regime", fit_regime_name,
                   "subcritical_poly | critical_exp | critical_double_exp")
      ->required();
  fit_cmd->add_option("--in", fit_in, "sweep CSV to fit")->required();
  fit_cmd->add_option("--out", fit_out, "output CSV path");
  fit_cmd->add_option("--p", fit_p,
                      "nonlinearity exponent (critical regimes)");
  fit_cmd->add_option("--svg", fit_svg, "optional plot path");

  // --- identity ---
  auto* id_cmd = app.add_subcommand(
      "identity", "Evaluate the weighted identity on stored snapshots");
  std::string id_run, id_times, id_out = "identity.csv";
  std::size_t id_samples = 4096;
  id_cmd->add_option("--run", id_run, "snapshot directory")->required();
  id_cmd->add_option("--times", id_times, "comma list of evaluation times");
  id_cmd->add_option("--out", id_out, "output CSV path");
  id_cmd->add_option("--samples", id_samples, "auxiliary cache samples");

  // --- odelab ---
  auto* ode_cmd =
      app.add_subcommand("odelab", "Comparison-ODE blow-up sweep and fit");
  std::string ode_kind_name_arg, ode_eps_list, ode_out = "odelab.csv", ode_svg;
  double ode_beta = 0.5, ode_p = 3.0, ode_tol = 1e-6;
  double ode_horizon = std::numeric_limits<double>::infinity();
  ode_cmd->add_option("--kind", ode_kind_name_arg, "lizhou | lemmaA1 | lemmaA2")
      ->required();
  ode_cmd->add_option("--beta", ode_beta, "damping exponent (lemmaA1)");
  ode_cmd->add_option("--p", ode_p, "nonlinearity exponent");
  ode_cmd->add_option("--epsilons", ode_eps_list, "comma list of data sizes")
      ->required();
  ode_cmd->add_option("--tol", ode_tol, "bracket tolerance");
  ode_cmd->add_option("--horizon", ode_horizon,
                      "physical-time horizon (default: unbounded)");
  ode_cmd->add_option("--out", ode_out, "output CSV path");
  ode_cmd->add_option("--svg", ode_svg, "optional plot path");

  // --- run ---
  auto* run_cmd =
      app.add_subcommand("run", "Execute a multi-stage pipeline config");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "experiment config file")
      ->required();

  try {
    app.parse(argc, argv);

    if (aux_cmd->parsed()) {
      stage_aux(aux_beta, aux_tmax, aux_samples, aux_out);
      return 0;
    }
    if (sim_cmd->parsed()) {
      const ExperimentConfig cfg =
          parse_config(read_text_file(sim_config));
      fs::create_directories(cfg.out_dir);
      stage_simulate(cfg, cfg.out_dir);
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const ExperimentConfig cfg =
          parse_config(read_text_file(sweep_config));
      const std::vector<double> eps =
          sweep_eps_list.empty()
              ? cfg.effective_sweep_epsilons()
              : parse_double_csv_list(sweep_eps_list, "--epsilons");
      stage_sweep(cfg, eps, sweep_out);
      return 0;
    }
    if (fit_cmd->parsed()) {
      const ScalingRegime regime = parse_scaling_regime(fit_regime_name);
      if (regime != ScalingRegime::SubcriticalPoly && !(fit_p > 1.0)) {
        throw OutOfRange("fit: critical regimes need --p > 1");
      }
      const auto records = read_sweep_csv(fit_in);
      stage_fit(records, regime, fit_p > 0.0 ? fit_p : 2.0, fit_out,
                fit_svg.empty() ? std::nullopt
                                : std::optional<fs::path>(fit_svg));
      return 0;
    }
    if (id_cmd->parsed()) {
      const std::vector<double> times =
          id_times.empty() ? std::vector<double>{}
                           : parse_double_csv_list(id_times, "--times");
      stage_identity(id_run, times, id_samples, id_out);
      return 0;
    }
    if (ode_cmd->parsed()) {
      OdeKind kind;
      if (ode_kind_name_arg == "lizhou") {
        kind = OdeKind::LiZhouBase;
      } else if (ode_kind_name_arg == "lemmaA1") {
        kind = OdeKind::LemmaA1;
      } else if (ode_kind_name_arg == "lemmaA2") {
        kind = OdeKind::LemmaA2;
      } else {
        throw OutOfRange("odelab: kind must be lizhou|lemmaA1|lemmaA2, got '" +
                         ode_kind_name_arg + "'");
      }
      stage_odelab(kind, ode_beta, ode_p,
                   parse_double_csv_list(ode_eps_list, "--epsilons"), ode_tol,
                   ode_horizon, ode_out,
                   ode_svg.empty() ? std::nullopt
                                   : std::optional<fs::path>(ode_svg));
      return 0;
    }
    if (run_cmd->parsed()) {
      return cmd_run(run_config);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad flags are a validation failure
  } catch (const Error& e) {
    return map_exit(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
