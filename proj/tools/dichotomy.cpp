// Command-line front end: simulate, linstab, neutral-curve, continue, eps-sweep.
// Exit status 0 on success, 1 on invalid input, 2 on numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "dichotomy/dichotomy.hpp"

namespace fs = std::filesystem;
using namespace dichotomy;

namespace {

using Outputs = std::map<std::string, std::string>;  // file name -> contents

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream o;
  fn(o);
  return o.str();
}

RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Outputs simulate(const RunConfig& c, std::ostream& log) {
  Outputs out;
  const RunSettings rs = run_settings(c);
  auto emit = [&](const auto& traj) {
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
      out[name] = render([&](std::ostream& o) { write_snapshot(o, c, traj.snapshots[i]); });
    }
    out["series.csv"] = render([&](std::ostream& o) { write_series(o, c, traj.series); });
    out["series.gp"] = plot_script("series.csv", "total mass", "t", "mass", 1, 2);
    log << "simulated to t=" << fmt(traj.final_state.t) << ", " << traj.snapshots.size() << " snapshots\n";
  };
  if (c.model == ModelKind::CrossLimit)
    emit(run_cross(rs, c.params, initial_cross_state(c)));
  else
    emit(run(rs, c.params, initial_rd_state(c)));
  return out;
}

Outputs linstab(const RunConfig& c, std::ostream& log) {
  const auto r = run_linstab(c);
  Outputs out;
  out["dispersion.csv"] = render([&](std::ostream& o) { write_dispersion(o, c, r); });
  out["dispersion.gp"] = plot_script("dispersion.csv", "dispersion relation", "k^2", "Re lambda", 2, 3);
  out["growth_rate.csv"] = render([&](std::ostream& o) { write_growth_scan(o, c, r); });
  const char* par = parameter_name(mode_system(c));
  out["growth_rate.gp"] = plot_script("growth_rate.csv", "largest growth rate", par, "lambda_max", 1, 2);
  log << "largest growth rate at " << par << "=" << fmt(c.scan.parameter) << ": "
      << fmt(max_growth_rate(mode_system(c), c.scan.parameter, c.params, c.scan.dispersion_modes,
                             c.scan.growth_ratio).lambda_max)
      << "\n";
  return out;
}

Outputs neutral(const RunConfig& c, std::ostream& log) {
  const auto curves = run_neutral_curves(c);
  Outputs out;
  out["neutral_curves.csv"] = render([&](std::ostream& o) { write_neutral_curves(o, c, curves); });
  out["neutral_curves.gp"] =
      plot_script("neutral_curves.csv", "neutral stability curves", parameter_name(mode_system(c)), "D", 3, 4);
  std::size_t pts = 0;
  for (const auto& nc : curves) pts += nc.points.size();
  log << curves.size() << " curves, " << pts << " points\n";
  return out;
}

Outputs cont(const RunConfig& c, std::ostream& log) {
  const auto res = run_continuation(c);
  Outputs out;
  out["branches.csv"] = render([&](std::ostream& o) { write_branches(o, c, res); });
  out["events.csv"] = render([&](std::ostream& o) { write_events(o, c, res); });
  const SteadyProblem pb(steady_system(c), c.params, c.grid, c.cont.growth_ratio);
  out["branches.gp"] = plot_script("branches.csv", "stationary branches", pb.parameter_name(), "u1+u2 at x=0", 2, 4);
  for (const auto& br : res.branches) {
    log << "branch: " << br.points.size() << " points, stop: " << br.stop_reason << "\n";
    for (const auto& e : br.events) log << "  " << to_string(e.kind) << " at " << fmt(e.parameter) << "\n";
  }
  return out;
}

Outputs sweep(const RunConfig& c, std::ostream& log) {
  const auto r = eps_sweep(sweep_setup(c), c.sweep.eps);
  Outputs out;
  out["eps_sweep.csv"] = render([&](std::ostream& o) { write_sweep(o, c, r); });
  out["eps_sweep.gp"] = plot_script("eps_sweep.csv", "gap to the limit system", "eps", "gap_u_L2", 1, 2, true);
  log << "defect slope " << fmt(r.slopes.defect) << "\n";
  return out;
}

void write_all(const fs::path& dir, const Outputs& out) {
  fs::create_directories(dir);
  for (const auto& [name, text] : out) {
    std::ofstream f(dir / name, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slow/fast dichotomy model: simulation, stability and bifurcation tools"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "configuration file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override ic.seed");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_flag("--quiet", quiet, "no progress output");
  app.fallthrough();

  using Runner = Outputs (*)(const RunConfig&, std::ostream&);
  const std::map<std::string, std::pair<const char*, Runner>> commands{
      {"simulate", {"time integration", simulate}},
      {"linstab", {"dispersion relation and largest growth rate", linstab}},
      {"neutral-curve", {"neutral stability curves in the (parameter, D) plane", neutral}},
      {"continue", {"stationary branches and bifurcation events", cont}},
      {"eps-sweep", {"convergence to the fast-reaction limit", sweep}},
  };
  for (const auto& [name, cmd] : commands) app.add_subcommand(name, cmd.first)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  std::ostringstream sink;
  std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : std::cout;
  try {
    RunConfig c = load(config_path);
    if (*seed_opt) c.ic.seed = seed;
    if (!out_dir.empty()) c.out_dir = out_dir;
    c.validate();
    const std::string name = app.get_subcommands().front()->get_name();
    const Outputs out = commands.at(name).second(c, log);
    write_all(c.out_dir, out);
    log << "wrote " << out.size() << " files to " << c.out_dir << "\n";
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
