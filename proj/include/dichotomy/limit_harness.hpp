#pragma once

// Fast-reaction limit checks: runs the three-component system for a list of
// exchange rates eps and compares against one run of the cross-diffusion limit.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dichotomy/continuation.hpp"
#include "dichotomy/cross_solver.hpp"
#include "dichotomy/errors.hpp"
#include "dichotomy/rd_solver.hpp"

namespace dichotomy {

enum class SplitMode { Manifold, Even };

inline const char* to_string(SplitMode s) { return s == SplitMode::Manifold ? "manifold" : "even"; }
inline SplitMode split_from_string(const std::string& s) {
  if (s == "manifold") return SplitMode::Manifold;
  if (s == "even") return SplitMode::Even;
  throw ValidationError("unknown split mode '" + s + "'");
}

/// Splits a total density into (u1, u2). Manifold: u1 = p/(p+q) u, which puts
/// the initial state on the slow manifold at v0. Even: halves.
inline std::pair<Field, Field> split_total(const Field& u, const Field& v, const ModelParams& m, SplitMode mode) {
  if (!(u.grid == v.grid)) throw ValidationError("u and v live on different grids");
  Field u1(u.grid), u2(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double frac = 0.5;
    if (mode == SplitMode::Manifold) {
      const auto s = switching_at(v[i], m);
      frac = s.p / checked_sum(s.p, s.q);
    }
    u1[i] = frac * u[i];
    u2[i] = u[i] - u1[i];
  }
  return {u1, u2};
}

/// L2 norm of u1 - p/(p+q) (u1+u2).
inline double relation_residual(const RDState& s, const ModelParams& m) {
  Field w(s.u1.grid);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto sw = switching_at(s.v[i], m);
    w[i] = s.u1[i] - sw.p / checked_sum(sw.p, sw.q) * (s.u1[i] + s.u2[i]);
  }
  return l2_norm(w);
}

struct SweepSetup {
  ModelParams params;  ///< eps is replaced by each sweep entry
  double t_end = 1.0;
  StepControl ctrl{1e-5, Scheme::ImexBE, ExchangeTreatment::Exact};
  Field u0, v0;        ///< shared total density and pheromone
  SplitMode split = SplitMode::Manifold;
  bool parallel = true;
};

struct SweepEntry {
  double eps = 0.0;
  double gap_u = 0.0;    ///< |(u1+u2) - u| at t_end
  double gap_v = 0.0;    ///< |v_eps - v| at t_end
  double defect = 0.0;   ///< |q u1 - p u2| at t_end
  double relation = 0.0; ///< |u1 - p/(p+q)(u1+u2)| at t_end
  std::string error;     ///< empty on success
};

struct SweepSlopes {
  double gap_u = std::numeric_limits<double>::quiet_NaN();
  double gap_v = std::numeric_limits<double>::quiet_NaN();
  double defect = std::numeric_limits<double>::quiet_NaN();
  double relation = std::numeric_limits<double>::quiet_NaN();
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  SweepSlopes slopes;
};

/// Least-squares slope of log(value) against log(eps).
inline double slope_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw FitError("slope fit needs at least three points");
  double sx = 0, sy = 0;
  for (const auto& [e, v] : pairs) {
    if (!(e > 0.0) || !(v > 0.0) || !std::isfinite(e) || !std::isfinite(v))
      throw FitError("slope fit needs positive finite data");
    sx += std::log(e);
    sy += std::log(v);
  }
  const double n = static_cast<double>(pairs.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [e, v] : pairs) {
    const double dx = std::log(e) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  if (sxx == 0.0) throw FitError("slope fit needs distinct eps values");
  return sxy / sxx;
}

namespace detail {

inline SweepEntry sweep_one(const SweepSetup& setup, double eps, const CrossState& limit_final) {
  SweepEntry e;
  e.eps = eps;
  try {
    ModelParams m = setup.params;
    m.eps = eps;
    m.validate();
    auto [u1, u2] = split_total(setup.u0, setup.v0, m, setup.split);
    RunSettings rs;
    rs.t_end = setup.t_end;
    rs.ctrl = setup.ctrl;
    rs.series_every = std::numeric_limits<std::size_t>::max();
    const RDState fin = run(rs, m, RDState{0.0, u1, u2, setup.v0}).final_state;
    Field total(fin.u1.grid);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] = fin.u1[i] + fin.u2[i];
    e.gap_u = l2_distance(total, limit_final.u);
    e.gap_v = l2_distance(fin.v, limit_final.v);
    e.defect = defect_norm(fin, m);
    e.relation = relation_residual(fin, m);
  } catch (const std::exception& ex) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    e.gap_u = e.gap_v = e.defect = e.relation = nan;
    e.error = ex.what();
  }
  return e;
}

inline double slope_or_nan(const std::vector<SweepEntry>& es, double SweepEntry::*field) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : es)
    if (e.error.empty()) pts.emplace_back(e.eps, e.*field);
  try {
    return slope_fit(pts);
  } catch (const FitError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace detail

inline SweepReport eps_sweep(const SweepSetup& setup, const std::vector<double>& eps) {
  if (eps.size() < 3) throw ValidationError("eps list needs at least three entries");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ValidationError("eps entries must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ValidationError("eps list must be strictly decreasing");
  }
  if (!(setup.u0.grid == setup.v0.grid)) throw ValidationError("u0 and v0 live on different grids");
  setup.params.validate();

  RunSettings rs;
  rs.t_end = setup.t_end;
  rs.ctrl = setup.ctrl;
  rs.series_every = std::numeric_limits<std::size_t>::max();
  const CrossState limit_final = run_cross(rs, setup.params, CrossState{0.0, setup.u0, setup.v0}).final_state;

  SweepReport rep;
  if (setup.parallel) {
    std::vector<std::future<SweepEntry>> jobs;
    for (double e : eps)
      jobs.push_back(std::async(std::launch::async, [&, e] { return detail::sweep_one(setup, e, limit_final); }));
    for (auto& j : jobs) rep.entries.push_back(j.get());
  } else {
    for (double e : eps) rep.entries.push_back(detail::sweep_one(setup, e, limit_final));
  }
  rep.slopes.gap_u = detail::slope_or_nan(rep.entries, &SweepEntry::gap_u);
  rep.slopes.gap_v = detail::slope_or_nan(rep.entries, &SweepEntry::gap_v);
  rep.slopes.defect = detail::slope_or_nan(rep.entries, &SweepEntry::defect);
  rep.slopes.relation = detail::slope_or_nan(rep.entries, &SweepEntry::relation);
  return rep;
}

// ---- stationary branches ----------------------------------------------------

struct LabeledBranch {
  const SteadyProblem* problem = nullptr;
  const Branch* branch = nullptr;
  double eps = 0.0;  ///< 0 for the limit branch
};

struct StructureRow {
  double parameter;
  double eps;
  int crossing;     ///< k-th passage of the branch through the parameter, in arclength order
  double distance;  ///< L2 distance of total densities
};

namespace detail {

/// Total density along a branch at every passage through `par`, interpolated
/// linearly between adjacent points.
inline std::vector<Field> profiles_at(const LabeledBranch& lb, double par) {
  std::vector<Field> out;
  const auto& pts = lb.branch->points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double a = pts[k].parameter;
    if (a == par) {
      out.push_back(lb.problem->total_density(pts[k].state));
      continue;
    }
    if (k + 1 == pts.size()) break;
    const double b = pts[k + 1].parameter;
    if (!((a - par) * (b - par) < 0.0)) continue;
    const double s = (par - a) / (b - a);
    out.push_back(lb.problem->total_density((1.0 - s) * pts[k].state + s * pts[k + 1].state));
  }
  return out;
}

}  // namespace detail

/// Distances between total-density profiles of each eps branch and the limit
/// branch at common parameter values.
inline std::vector<StructureRow> steady_structure_compare(const std::vector<LabeledBranch>& eps_branches,
                                                          const LabeledBranch& limit,
                                                          const std::vector<double>& parameters) {
  if (!limit.problem || !limit.branch) throw ValidationError("limit branch is missing");
  std::vector<StructureRow> rows;
  for (double par : parameters) {
    const auto ref = detail::profiles_at(limit, par);
    if (ref.empty()) throw AlignmentError("limit branch does not reach parameter " + std::to_string(par));
    for (const auto& lb : eps_branches) {
      if (!lb.problem || !lb.branch) throw ValidationError("eps branch is missing");
      if (!(lb.problem->grid() == limit.problem->grid()))
        throw AlignmentError("branches were computed on different grids");
      const auto prof = detail::profiles_at(lb, par);
      if (prof.empty())
        throw AlignmentError("branch for eps " + std::to_string(lb.eps) + " does not reach parameter " +
                             std::to_string(par));
      const std::size_t n = std::min(prof.size(), ref.size());
      for (std::size_t k = 0; k < n; ++k)
        rows.push_back({par, lb.eps, static_cast<int>(k), l2_distance(prof[k], ref[k])});
    }
  }
  return rows;
}

}  // namespace dichotomy
