#pragma once

// Run configuration: flat INI sections parsed with Boost.PropertyTree, checked
// key by key, and dumped back in a normalised form that parses to the same value.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dichotomy/errors.hpp"
#include "dichotomy/grid.hpp"
#include "dichotomy/limit_harness.hpp"
#include "dichotomy/model.hpp"
#include "dichotomy/rd_solver.hpp"

namespace dichotomy {

inline constexpr const char* kVersion = "0.3.0";

enum class ModelKind { Rd3Conserved, Rd3Growth, CrossLimit };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Rd3Conserved: return "rd3-conserved";
    case ModelKind::Rd3Growth: return "rd3-growth";
    case ModelKind::CrossLimit: return "cross-limit";
  }
  return "?";
}

enum class NoiseTarget { V, U, Both };

inline const char* to_string(NoiseTarget t) {
  switch (t) {
    case NoiseTarget::V: return "v";
    case NoiseTarget::U: return "u";
    case NoiseTarget::Both: return "both";
  }
  return "?";
}

struct TimeConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> snapshots;
  std::size_t series_every = 10;
  Scheme scheme = Scheme::ImexBE;
  ExchangeTreatment exchange = ExchangeTreatment::Exact;
  bool operator==(const TimeConfig&) const = default;
};

struct InitialConfig {
  double u = 1.0;                ///< total density level
  std::optional<double> v;       ///< pheromone level; alpha u / beta when unset
  double noise = 0.0;            ///< amplitude of uniform noise
  NoiseTarget noise_target = NoiseTarget::V;
  std::optional<std::uint64_t> seed;
  double cos_amplitude = 0.0;    ///< cos(mode pi x / L) added to the total density
  int cos_mode = 1;
  SplitMode split = SplitMode::Manifold;
  bool operator==(const InitialConfig&) const = default;
};

struct ScanConfig {
  double parameter = 1.0;  ///< M or r for the dispersion relation
  int n_max = 8;           ///< highest mode for neutral curves
  int dispersion_modes = 64;
  double param_min = 0.5, param_max = 2.0;
  std::size_t param_count = 301;
  double d_min = 0.01, d_max = 0.5;
  std::size_t d_count = 200;
  double growth_ratio = 1.0;
  bool operator==(const ScanConfig&) const = default;
};

struct ContinuationConfig {
  double start = 1.0;  ///< parameter value of the first Newton solve
  int guess_mode = 1;
  double guess_amplitude = 0.1;
  int direction = 0;   ///< +1, -1, or 0 for both
  double ds = 0.02;
  double ds_max = 0.05;
  int max_steps = 500;
  double param_min = 0.3, param_max = 2.0;
  double growth_ratio = 1.0;
  bool conserved_limit = false;  ///< cross-limit only: continue in M with a1 = a2 = 0
  bool operator==(const ContinuationConfig&) const = default;
};

struct SweepConfig {
  std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  bool parallel = true;
  bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
  ModelKind model = ModelKind::Rd3Conserved;
  ModelParams params;
  Grid grid{1, 256, 1.0};
  TimeConfig time;
  InitialConfig ic;
  ScanConfig scan;
  ContinuationConfig cont;
  SweepConfig sweep;
  std::string out_dir = "out";

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

[[noreturn]] inline void bad_key(const std::string& key, const std::string& why) {
  throw ValidationError("config key '" + key + "': " + why);
}

inline double to_double(const std::string& key, const std::string& s) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) bad_key(key, "expected a number, got '" + s + "'");
  return x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& s) {
  Int x{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) bad_key(key, "expected an integer, got '" + s + "'");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  bad_key(key, "expected true or false, got '" + s + "'");
}

inline std::vector<double> to_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b == std::string::npos) bad_key(key, "empty list entry");
    out.push_back(to_double(key, item.substr(b, e - b + 1)));
  }
  return out;
}

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string num_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + num(xs[i]);
  return s;
}

/// Reads one section, rejecting keys outside `handlers`.
class SectionReader {
 public:
  using Handler = std::function<void(const std::string& key, const std::string& value)>;

  SectionReader(const boost::property_tree::ptree& root, const std::string& section) : section_(section) {
    if (auto child = root.get_child_optional(section)) node_ = &*child;
  }

  void read(const std::map<std::string, Handler>& handlers) const {
    if (!node_) return;
    for (const auto& [key, val] : *node_) {
      const std::string full = section_ + "." + key;
      auto it = handlers.find(key);
      if (it == handlers.end()) bad_key(full, "unknown key");
      it->second(full, val.get_value<std::string>());
    }
  }

 private:
  std::string section_;
  const boost::property_tree::ptree* node_ = nullptr;
};

}  // namespace detail

inline void RunConfig::validate() const {
  params.validate();
  grid.validate();
  if (std::abs(grid.length - params.L) > 1e-14 * params.L) detail::bad_key("model.L", "must equal the grid length");
  if (model == ModelKind::Rd3Conserved && (params.a1 != 0.0 || params.a2 != 0.0))
    detail::bad_key(params.a1 != 0.0 ? "model.a1" : "model.a2", "must be 0 for rd3-conserved");
  if (!(time.dt > 0.0) || !std::isfinite(time.dt)) detail::bad_key("time.dt", "must be positive");
  if (!(time.t_end > 0.0) || !std::isfinite(time.t_end)) detail::bad_key("time.t_end", "must be positive");
  if (time.series_every == 0) detail::bad_key("time.series_every", "must be at least 1");
  for (std::size_t i = 0; i < time.snapshots.size(); ++i) {
    const double s = time.snapshots[i];
    if (!(s >= 0.0) || s > time.t_end) detail::bad_key("time.snapshots", "entries must lie in [0, t_end]");
    if (i > 0 && !(s > time.snapshots[i - 1])) detail::bad_key("time.snapshots", "entries must increase");
  }
  if (!(ic.u >= 0.0) || !std::isfinite(ic.u)) detail::bad_key("ic.u", "must be nonnegative");
  if (ic.v && (!(*ic.v >= 0.0) || !std::isfinite(*ic.v))) detail::bad_key("ic.v", "must be nonnegative");
  if (!(ic.noise >= 0.0) || !std::isfinite(ic.noise)) detail::bad_key("ic.noise", "must be nonnegative");
  if (ic.noise > 0.0 && !ic.seed) detail::bad_key("ic.seed", "required when ic.noise > 0");
  if (!std::isfinite(ic.cos_amplitude)) detail::bad_key("ic.cos_amplitude", "must be finite");
  if (ic.cos_mode < 0) detail::bad_key("ic.cos_mode", "must be nonnegative");
  if (scan.n_max < 1) detail::bad_key("scan.n_max", "must be at least 1");
  if (scan.dispersion_modes < 1) detail::bad_key("scan.dispersion_modes", "must be at least 1");
  if (!(scan.param_max > scan.param_min)) detail::bad_key("scan.param_max", "must exceed scan.param_min");
  if (!(scan.d_max > scan.d_min) || !(scan.d_min > 0.0)) detail::bad_key("scan.d_max", "need 0 < d_min < d_max");
  if (scan.param_count < 100) detail::bad_key("scan.param_count", "must be at least 100");
  if (scan.d_count < 100) detail::bad_key("scan.d_count", "must be at least 100");
  if (!(scan.growth_ratio >= 0.0)) detail::bad_key("scan.growth_ratio", "must be nonnegative");
  if (cont.direction < -1 || cont.direction > 1) detail::bad_key("continuation.direction", "must be -1, 0 or 1");
  if (!(cont.ds > 0.0) || !(cont.ds_max >= cont.ds)) detail::bad_key("continuation.ds", "need 0 < ds <= ds_max");
  if (cont.max_steps < 1) detail::bad_key("continuation.max_steps", "must be at least 1");
  if (!(cont.param_max > cont.param_min)) detail::bad_key("continuation.param_max", "must exceed param_min");
  if (!(cont.start >= cont.param_min && cont.start <= cont.param_max))
    detail::bad_key("continuation.start", "must lie in [param_min, param_max]");
  if (cont.guess_mode < 0) detail::bad_key("continuation.guess_mode", "must be nonnegative");
  if (cont.conserved_limit && model != ModelKind::CrossLimit)
    detail::bad_key("continuation.conserved_limit", "only applies to cross-limit");
  if (sweep.eps.size() < 3) detail::bad_key("sweep.eps", "needs at least three entries");
  for (std::size_t i = 0; i < sweep.eps.size(); ++i) {
    if (!(sweep.eps[i] > 0.0)) detail::bad_key("sweep.eps", "entries must be positive");
    if (i > 0 && !(sweep.eps[i] < sweep.eps[i - 1])) detail::bad_key("sweep.eps", "entries must decrease");
  }
  if (out_dir.empty()) detail::bad_key("output.dir", "must not be empty");
}

/// Parses INI text. Unknown sections or keys, malformed values and constraint
/// violations throw ValidationError naming the key. Absent keys keep their defaults.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  static const std::set<std::string> sections{"model", "grid", "time", "ic", "output", "scan", "continuation",
                                              "sweep"};
  // read_ini drops empty sections, so headers are checked on the raw text
  {
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
      const auto b = line.find_first_not_of(" \t\r");
      const auto e = line.find_last_not_of(" \t\r");
      if (b == std::string::npos || line[b] != '[' || line[e] != ']') continue;
      const std::string name = line.substr(b + 1, e - b - 1);
      if (!sections.count(name)) throw ValidationError("config section '" + name + "' is unknown");
    }
  }
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("malformed config: ") + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
  }
  for (const auto& [name, child] : root) {
    if (!sections.count(name)) throw ValidationError("config section '" + name + "' is unknown");
    if (child.data().size() && child.empty()) throw ValidationError("config key '" + name + "' outside a section");
  }

  using detail::to_double;
  using H = detail::SectionReader::Handler;
  RunConfig c;
  auto dbl = [](double& dst) -> H { return [&dst](const auto& k, const auto& v) { dst = to_double(k, v); }; };
  auto boolean = [](bool& dst) -> H { return [&dst](const auto& k, const auto& v) { dst = detail::to_bool(k, v); }; };
  auto integer = [](int& dst) -> H { return [&dst](const auto& k, const auto& v) { dst = detail::to_int<int>(k, v); }; };
  auto count = [](std::size_t& dst) -> H {
    return [&dst](const auto& k, const auto& v) { dst = detail::to_int<std::size_t>(k, v); };
  };

  detail::SectionReader model(root, "model");
  ModelParams& m = c.params;
  model.read({
      {"system",
       [&](const auto& k, const auto& v) {
         if (v == "rd3-conserved") c.model = ModelKind::Rd3Conserved;
         else if (v == "rd3-growth") c.model = ModelKind::Rd3Growth;
         else if (v == "cross-limit") c.model = ModelKind::CrossLimit;
         else detail::bad_key(k, "expected rd3-conserved, rd3-growth or cross-limit");
       }},
      {"d", dbl(m.d)}, {"D", dbl(m.D)}, {"Dv", dbl(m.Dv)}, {"a1", dbl(m.a1)}, {"a2", dbl(m.a2)},
      {"alpha", dbl(m.alpha)}, {"beta", dbl(m.beta)}, {"eps", dbl(m.eps)}, {"gamma1", dbl(m.gamma1)},
      {"gamma2", dbl(m.gamma2)}, {"v_star", dbl(m.v_star)}, {"v_sharp", dbl(m.v_sharp)}, {"L", dbl(m.L)},
      {"switching",
       [&](const auto& k, const auto& v) {
         try {
           m.switching = switching_from_string(v);
         } catch (const ValidationError&) {
           detail::bad_key(k, "expected tanh-sum, decreasing-only or piecewise");
         }
       }},
  });
  c.grid.length = m.L;
  int dim = 1;
  detail::SectionReader(root, "grid").read({{"dim", integer(dim)}, {"n", count(c.grid.n)}});
  c.grid.dim = dim;

  detail::SectionReader(root, "time").read({
      {"dt", dbl(c.time.dt)},
      {"t_end", dbl(c.time.t_end)},
      {"snapshots", [&](const auto& k, const auto& v) { c.time.snapshots = detail::to_list(k, v); }},
      {"series_every", count(c.time.series_every)},
      {"scheme",
       [&](const auto& k, const auto& v) {
         if (v == "imex-be") c.time.scheme = Scheme::ImexBE;
         else if (v == "imex-cn") c.time.scheme = Scheme::ImexCN;
         else detail::bad_key(k, "expected imex-be or imex-cn");
       }},
      {"exchange",
       [&](const auto& k, const auto& v) {
         if (v == "exact") c.time.exchange = ExchangeTreatment::Exact;
         else if (v == "backward-euler") c.time.exchange = ExchangeTreatment::BackwardEuler;
         else detail::bad_key(k, "expected exact or backward-euler");
       }},
  });

  detail::SectionReader(root, "ic").read({
      {"u", dbl(c.ic.u)},
      {"v", [&](const auto& k, const auto& v) { c.ic.v = to_double(k, v); }},
      {"noise", dbl(c.ic.noise)},
      {"noise_target",
       [&](const auto& k, const auto& v) {
         if (v == "v") c.ic.noise_target = NoiseTarget::V;
         else if (v == "u") c.ic.noise_target = NoiseTarget::U;
         else if (v == "both") c.ic.noise_target = NoiseTarget::Both;
         else detail::bad_key(k, "expected v, u or both");
       }},
      {"seed", [&](const auto& k, const auto& v) { c.ic.seed = detail::to_int<std::uint64_t>(k, v); }},
      {"cos_amplitude", dbl(c.ic.cos_amplitude)},
      {"cos_mode", integer(c.ic.cos_mode)},
      {"split",
       [&](const auto& k, const auto& v) {
         if (v == "manifold") c.ic.split = SplitMode::Manifold;
         else if (v == "even") c.ic.split = SplitMode::Even;
         else detail::bad_key(k, "expected manifold or even");
       }},
  });

  detail::SectionReader(root, "output").read({{"dir", [&](const auto&, const auto& v) { c.out_dir = v; }}});

  auto& s = c.scan;
  detail::SectionReader(root, "scan").read({
      {"parameter", dbl(s.parameter)}, {"n_max", integer(s.n_max)}, {"dispersion_modes", integer(s.dispersion_modes)},
      {"param_min", dbl(s.param_min)}, {"param_max", dbl(s.param_max)}, {"param_count", count(s.param_count)},
      {"d_min", dbl(s.d_min)}, {"d_max", dbl(s.d_max)}, {"d_count", count(s.d_count)},
      {"growth_ratio", dbl(s.growth_ratio)},
  });

  auto& k = c.cont;
  detail::SectionReader(root, "continuation").read({
      {"start", dbl(k.start)}, {"guess_mode", integer(k.guess_mode)}, {"guess_amplitude", dbl(k.guess_amplitude)},
      {"direction", integer(k.direction)}, {"ds", dbl(k.ds)}, {"ds_max", dbl(k.ds_max)},
      {"max_steps", integer(k.max_steps)}, {"param_min", dbl(k.param_min)}, {"param_max", dbl(k.param_max)},
      {"growth_ratio", dbl(k.growth_ratio)}, {"conserved_limit", boolean(k.conserved_limit)},
  });

  detail::SectionReader(root, "sweep").read({
      {"eps", [&](const auto& key, const auto& v) { c.sweep.eps = detail::to_list(key, v); }},
      {"parallel", boolean(c.sweep.parallel)},
  });

  c.validate();
  return c;
}

/// Normalised dump: every key, fixed order, doubles at 17 significant digits.
inline std::string dump_config(const RunConfig& c) {
  using detail::num;
  std::ostringstream o;
  const auto& m = c.params;
  o << "[model]\n"
    << "system = " << to_string(c.model) << "\n"
    << "d = " << num(m.d) << "\nD = " << num(m.D) << "\nDv = " << num(m.Dv) << "\na1 = " << num(m.a1)
    << "\na2 = " << num(m.a2) << "\nalpha = " << num(m.alpha) << "\nbeta = " << num(m.beta)
    << "\neps = " << num(m.eps) << "\ngamma1 = " << num(m.gamma1) << "\ngamma2 = " << num(m.gamma2)
    << "\nv_star = " << num(m.v_star) << "\nv_sharp = " << num(m.v_sharp) << "\nL = " << num(m.L)
    << "\nswitching = " << to_string(m.switching) << "\n\n";
  o << "[grid]\ndim = " << c.grid.dim << "\nn = " << c.grid.n << "\n\n";
  o << "[time]\ndt = " << num(c.time.dt) << "\nt_end = " << num(c.time.t_end) << "\n";
  if (!c.time.snapshots.empty()) o << "snapshots = " << detail::num_list(c.time.snapshots) << "\n";
  o << "series_every = " << c.time.series_every << "\nscheme = " << to_string(c.time.scheme)
    << "\nexchange = " << (c.time.exchange == ExchangeTreatment::Exact ? "exact" : "backward-euler") << "\n\n";
  o << "[ic]\nu = " << num(c.ic.u) << "\n";
  if (c.ic.v) o << "v = " << num(*c.ic.v) << "\n";
  o << "noise = " << num(c.ic.noise) << "\nnoise_target = " << to_string(c.ic.noise_target) << "\n";
  if (c.ic.seed) o << "seed = " << *c.ic.seed << "\n";
  o << "cos_amplitude = " << num(c.ic.cos_amplitude) << "\ncos_mode = " << c.ic.cos_mode
    << "\nsplit = " << to_string(c.ic.split) << "\n\n";
  const auto& s = c.scan;
  o << "[scan]\nparameter = " << num(s.parameter) << "\nn_max = " << s.n_max
    << "\ndispersion_modes = " << s.dispersion_modes << "\nparam_min = " << num(s.param_min)
    << "\nparam_max = " << num(s.param_max) << "\nparam_count = " << s.param_count << "\nd_min = " << num(s.d_min)
    << "\nd_max = " << num(s.d_max) << "\nd_count = " << s.d_count << "\ngrowth_ratio = " << num(s.growth_ratio)
    << "\n\n";
  const auto& k = c.cont;
  o << "[continuation]\nstart = " << num(k.start) << "\nguess_mode = " << k.guess_mode
    << "\nguess_amplitude = " << num(k.guess_amplitude) << "\ndirection = " << k.direction << "\nds = " << num(k.ds)
    << "\nds_max = " << num(k.ds_max) << "\nmax_steps = " << k.max_steps << "\nparam_min = " << num(k.param_min)
    << "\nparam_max = " << num(k.param_max) << "\ngrowth_ratio = " << num(k.growth_ratio)
    << "\nconserved_limit = " << (k.conserved_limit ? "true" : "false") << "\n\n";
  o << "[sweep]\neps = " << detail::num_list(c.sweep.eps) << "\nparallel = " << (c.sweep.parallel ? "true" : "false")
    << "\n\n";
  o << "[output]\ndir = " << c.out_dir << "\n";
  return o.str();
}

}  // namespace dichotomy
