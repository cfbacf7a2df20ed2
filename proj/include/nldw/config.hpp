#pragma once

// ============================================================================
// config.hpp -- experiment configuration: INI-style parse and validation
//
// Format: `[section]` headers, `key = value` lines, blank lines, and
// comments starting with '#' or ';'.  Lists are comma-separated.  Unknown
// sections and keys are rejected, parse problems carry line numbers, and
// validation reports *every* violated invariant at once (a config that is
// wrong in three ways produces three messages, not one).
//
// Sections:
//   [damping]   beta
//   [problem]   n, p, epsilon | epsilons, t_end, nonlinearity, theorem_regime
//   [grid]      L, N, cfl, dt_cap
//   [data]      shape (gaussian|compact), amplitude_u0, amplitude_u1,
//               width, offset
//   [detector]  theta, theta_low, theta_high, confirm_doubling
//   [output]    out_dir, stride, snapshots, svg
//   [sweep]     epsilons, horizon
//   [fit]       regime, p
//   [odelab]    kind (lizhou|lemmaA1|lemmaA2), beta, p, epsilons, tol, horizon
//   [run]       stages, deterministic, identity_times
// ============================================================================

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nldw/damping.hpp"
#include "nldw/errors.hpp"
#include "nldw/grid.hpp"
#include "nldw/lifespan.hpp"
#include "nldw/ode_lab.hpp"
#include "nldw/solver.hpp"

namespace nldw {

struct ExperimentConfig {
  // [damping]
  double beta = 0.0;

  // [problem]
  int dim = 1;
  double p = 2.0;
  std::vector<double> epsilons = {1.0};
  double t_end = 10.0;
  bool nonlinearity_on = true;
  bool theorem_regime = true;

  // [grid]
  double L = 40.0;
  std::size_t N = 512;
  double cfl = 0.5;
  double dt_cap = 0.1;

  // [data]
  DataShape shape = DataShape::GaussianBump;
  double amplitude_u0 = 1.0;
  double amplitude_u1 = 0.0;
  double width = 1.0;
  double offset = 0.0;

  // [detector]
  double theta = 1e6;
  double theta_low = 1e4;
  double theta_high = 1e8;
  bool confirm_doubling = true;

  // [output]
  std::string out_dir = "out";
  int stride = 8;
  bool snapshots = false;
  bool svg = false;

  // [sweep]
  std::vector<double> sweep_epsilons;  // empty: use problem epsilons
  double sweep_horizon = 200.0;

  // [fit]
  std::optional<ScalingRegime> fit_regime;
  double fit_p = 0.0;  // 0: inherit problem p

  // [odelab]
  std::optional<OdeKind> ode_kind;
  double ode_beta = 0.5;
  double ode_p = 3.0;
  std::vector<double> ode_epsilons;
  double ode_tol = 1e-6;
  double ode_horizon = std::numeric_limits<double>::infinity();

  // [run]
  std::vector<std::string> stages;
  bool deterministic = true;  // seedless by construction; recorded as such
  std::vector<double> identity_times;

  // ---- derived builders (valid only after validation passed) ----

  Grid make_grid() const { return Grid(dim, L, N); }

  InitialData make_data() const {
    InitialData d;
    d.shape = shape;
    d.amplitude_u0 = amplitude_u0;
    d.amplitude_u1 = amplitude_u1;
    d.width = width;
    d.offset = offset;
    return d;
  }

  ProblemParams make_params(double epsilon) const {
    ProblemParams prm;
    prm.dim = dim;
    prm.p = p;
    prm.epsilon = epsilon;
    prm.damping = DampingModel(beta);
    prm.nonlinearity_on = nonlinearity_on;
    prm.theorem_regime = theorem_regime;
    prm.cfl = cfl;
    prm.dt_cap = dt_cap;
    return prm;
  }

  BlowupDetector make_detector() const {
    BlowupDetector det;
    det.theta = theta;
    det.theta_low = theta_low;
    det.theta_high = theta_high;
    det.confirm_doubling = confirm_doubling;
    return det;
  }

  std::vector<double> effective_sweep_epsilons() const {
    return sweep_epsilons.empty() ? epsilons : sweep_epsilons;
  }
};

namespace detail {

struct ConfigLine {
  std::string section, key, value;
  int line = 0;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class ConfigReader {
 public:
  explicit ConfigReader(std::vector<std::string>& violations)
      : violations_(violations) {}

  void note(int line, const std::string& msg) {
    violations_.push_back("line " + std::to_string(line) + ": " + msg);
  }

  bool parse_double(const ConfigLine& ln, double& out) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(ln.value, &pos);
      if (pos != ln.value.size()) throw std::invalid_argument("trailing");
      out = v;
      return true;
    } catch (const std::exception&) {
      note(ln.line, ln.key + ": not a number: '" + ln.value + "'");
      return false;
    }
  }

  bool parse_int(const ConfigLine& ln, long long& out) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(ln.value, &pos);
      if (pos != ln.value.size()) throw std::invalid_argument("trailing");
      out = v;
      return true;
    } catch (const std::exception&) {
      note(ln.line, ln.key + ": not an integer: '" + ln.value + "'");
      return false;
    }
  }

  bool parse_bool(const ConfigLine& ln, bool& out) {
    std::string v = ln.value;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
      out = true;
      return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
      out = false;
      return true;
    }
    note(ln.line, ln.key + ": not a boolean: '" + ln.value + "'");
    return false;
  }

  bool parse_double_list(const ConfigLine& ln, std::vector<double>& out) {
    std::vector<double> vals;
    std::stringstream ss(ln.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        std::size_t pos = 0;
        vals.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        note(ln.line, ln.key + ": not a number in list: '" + item + "'");
        return false;
      }
    }
    if (vals.empty()) {
      note(ln.line, ln.key + ": empty list");
      return false;
    }
    out = std::move(vals);
    return true;
  }

  bool parse_string_list(const ConfigLine& ln,
                         std::vector<std::string>& out) {
    std::vector<std::string> vals;
    std::stringstream ss(ln.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) vals.push_back(item);
    }
    if (vals.empty()) {
      note(ln.line, ln.key + ": empty list");
      return false;
    }
    out = std::move(vals);
    return true;
  }

 private:
  std::vector<std::string>& violations_;
};

}  // namespace detail

/// Parse and fully validate an experiment configuration.  Throws
/// ConfigError carrying every parse problem (with line numbers) and every
/// violated invariant found — never just the first.
inline ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::string> violations;
  detail::ConfigReader rd(violations);

  // ---- pass 1: tokenize into (section, key, value, line) ----
  std::vector<detail::ConfigLine> lines;
  {
    std::stringstream ss(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(ss, raw)) {
      ++lineno;
      const std::string line = detail::trim(raw);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          rd.note(lineno, "malformed section header: '" + line + "'");
          section.clear();
          continue;
        }
        section = detail::trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        rd.note(lineno, "expected 'key = value': '" + line + "'");
        continue;
      }
      detail::ConfigLine cl;
      cl.section = section;
      cl.key = detail::trim(line.substr(0, eq));
      cl.value = detail::trim(line.substr(eq + 1));
      cl.line = lineno;
      if (cl.key.empty()) {
        rd.note(lineno, "empty key");
        continue;
      }
      if (cl.section.empty()) {
        rd.note(lineno, "key '" + cl.key + "' outside any [section]");
        continue;
      }
      lines.push_back(std::move(cl));
    }
  }

  // ---- pass 2: assign keys ----
  ExperimentConfig cfg;
  bool saw_epsilon = false, saw_epsilons = false;
  for (const auto& ln : lines) {
    long long ival = 0;
    const std::string where = ln.section + "." + ln.key;
    if (ln.section == "damping") {
      if (ln.key == "beta") {
        rd.parse_double(ln, cfg.beta);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "problem") {
      if (ln.key == "n") {
        if (rd.parse_int(ln, ival)) cfg.dim = static_cast<int>(ival);
      } else if (ln.key == "p") {
        rd.parse_double(ln, cfg.p);
      } else if (ln.key == "epsilon") {
        double e = 0.0;
        if (rd.parse_double(ln, e)) {
          cfg.epsilons = {e};
          saw_epsilon = true;
        }
      } else if (ln.key == "epsilons") {
        if (rd.parse_double_list(ln, cfg.epsilons)) saw_epsilons = true;
      } else if (ln.key == "t_end") {
        rd.parse_double(ln, cfg.t_end);
      } else if (ln.key == "nonlinearity") {
        rd.parse_bool(ln, cfg.nonlinearity_on);
      } else if (ln.key == "theorem_regime") {
        rd.parse_bool(ln, cfg.theorem_regime);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "grid") {
      if (ln.key == "L") {
        rd.parse_double(ln, cfg.L);
      } else if (ln.key == "N") {
        if (rd.parse_int(ln, ival)) cfg.N = static_cast<std::size_t>(ival);
      } else if (ln.key == "cfl") {
        rd.parse_double(ln, cfg.cfl);
      } else if (ln.key == "dt_cap") {
        rd.parse_double(ln, cfg.dt_cap);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "data") {
      if (ln.key == "shape") {
        if (ln.value == "gaussian") {
          cfg.shape = DataShape::GaussianBump;
        } else if (ln.value == "compact") {
          cfg.shape = DataShape::CompactBump;
        } else {
          rd.note(ln.line, "shape must be 'gaussian' or 'compact', got '" +
                               ln.value + "'");
        }
      } else if (ln.key == "amplitude_u0") {
        rd.parse_double(ln, cfg.amplitude_u0);
      } else if (ln.key == "amplitude_u1") {
        rd.parse_double(ln, cfg.amplitude_u1);
      } else if (ln.key == "width") {
        rd.parse_double(ln, cfg.width);
      } else if (ln.key == "offset") {
        rd.parse_double(ln, cfg.offset);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "detector") {
      if (ln.key == "theta") {
        rd.parse_double(ln, cfg.theta);
      } else if (ln.key == "theta_low") {
        rd.parse_double(ln, cfg.theta_low);
      } else if (ln.key == "theta_high") {
        rd.parse_double(ln, cfg.theta_high);
      } else if (ln.key == "confirm_doubling") {
        rd.parse_bool(ln, cfg.confirm_doubling);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "output") {
      if (ln.key == "out_dir") {
        cfg.out_dir = ln.value;
      } else if (ln.key == "stride") {
        if (rd.parse_int(ln, ival)) cfg.stride = static_cast<int>(ival);
      } else if (ln.key == "snapshots") {
        rd.parse_bool(ln, cfg.snapshots);
      } else if (ln.key == "svg") {
        rd.parse_bool(ln, cfg.svg);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "sweep") {
      if (ln.key == "epsilons") {
        rd.parse_double_list(ln, cfg.sweep_epsilons);
      } else if (ln.key == "horizon") {
        rd.parse_double(ln, cfg.sweep_horizon);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "fit") {
      if (ln.key == "regime") {
        try {
          cfg.fit_regime = parse_scaling_regime(ln.value);
        } catch (const Error& e) {
          rd.note(ln.line, e.what());
        }
      } else if (ln.key == "p") {
        rd.parse_double(ln, cfg.fit_p);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "odelab") {
      if (ln.key == "kind") {
        if (ln.value == "lizhou") {
          cfg.ode_kind = OdeKind::LiZhouBase;
        } else if (ln.value == "lemmaA1") {
          cfg.ode_kind = OdeKind::LemmaA1;
        } else if (ln.value == "lemmaA2") {
          cfg.ode_kind = OdeKind::LemmaA2;
        } else {
          rd.note(ln.line,
                  "kind must be lizhou|lemmaA1|lemmaA2, got '" + ln.value +
                      "'");
        }
      } else if (ln.key == "beta") {
        rd.parse_double(ln, cfg.ode_beta);
      } else if (ln.key == "p") {
        rd.parse_double(ln, cfg.ode_p);
      } else if (ln.key == "epsilons") {
        rd.parse_double_list(ln, cfg.ode_epsilons);
      } else if (ln.key == "tol") {
        rd.parse_double(ln, cfg.ode_tol);
      } else if (ln.key == "horizon") {
        rd.parse_double(ln, cfg.ode_horizon);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else if (ln.section == "run") {
      if (ln.key == "stages") {
        rd.parse_string_list(ln, cfg.stages);
      } else if (ln.key == "deterministic") {
        rd.parse_bool(ln, cfg.deterministic);
      } else if (ln.key == "identity_times") {
        rd.parse_double_list(ln, cfg.identity_times);
      } else {
        rd.note(ln.line, "unknown key '" + where + "'");
      }
    } else {
      rd.note(ln.line, "unknown section '[" + ln.section + "]'");
    }
  }
  if (saw_epsilon && saw_epsilons) {
    violations.push_back(
        "problem: give either 'epsilon' or 'epsilons', not both");
  }

  // ---- pass 3: re-validate every module-level invariant ----
  const auto check = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      violations.push_back(std::string(what) + ": " + e.what());
    }
  };

  check("damping", [&] { (void)DampingModel(cfg.beta); });
  check("grid", [&] { (void)Grid(cfg.dim, cfg.L, cfg.N); });
  check("problem", [&] {
    if (!(cfg.p > 1.0)) throw OutOfRange("p must exceed 1");
    if (!(cfg.t_end > 0.0)) throw OutOfRange("t_end must be positive");
    for (double e : cfg.epsilons) {
      if (!(e > 0.0)) throw OutOfRange("epsilon values must be positive");
    }
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) {
      throw OutOfRange("cfl must lie in (0, 1]");
    }
    if (!(cfg.dt_cap > 0.0)) throw OutOfRange("dt_cap must be positive");
  });
  check("data", [&] {
    InitialData d = cfg.make_data();
    d.profile(0.0);  // width check
  });
  check("detector", [&] { cfg.make_detector().validate(); });
  check("output", [&] {
    if (cfg.stride < 1) throw OutOfRange("stride must be >= 1");
    if (cfg.out_dir.empty()) throw OutOfRange("out_dir must be non-empty");
  });
  check("sweep", [&] {
    if (!(cfg.sweep_horizon > 0.0)) {
      throw OutOfRange("horizon must be positive");
    }
    auto eps = cfg.effective_sweep_epsilons();
    for (std::size_t i = 1; i < eps.size(); ++i) {
      if (!(eps[i] < eps[i - 1])) {
        throw OutOfRange("epsilons must be strictly decreasing");
      }
    }
  });
  check("odelab", [&] {
    if (!(cfg.ode_tol > 0.0 && cfg.ode_tol < 1.0)) {
      throw OutOfRange("tol must lie in (0, 1)");
    }
    if (!(cfg.ode_p > 1.0)) throw OutOfRange("p must exceed 1");
    if (cfg.ode_kind == OdeKind::LemmaA1 &&
        !(cfg.ode_beta >= -1.0 && cfg.ode_beta < 1.0)) {
      throw OutOfRange("beta must lie in [-1, 1)");
    }
  });
  check("run", [&] {
    for (const auto& s : cfg.stages) {
      if (s != "aux" && s != "simulate" && s != "sweep" && s != "fit" &&
          s != "identity" && s != "odelab") {
        throw OutOfRange("unknown stage '" + s + "'");
      }
    }
    for (double t : cfg.identity_times) {
      if (!(t >= 0.0)) throw OutOfRange("identity_times must be >= 0");
    }
  });

  if (!violations.empty()) throw ConfigError(std::move(violations));
  return cfg;
}

}  // namespace nldw
