#pragma once

// CSV writers and gnuplot script text. Every file starts with a comment block
// holding the program version and the normalised configuration.

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dichotomy/config.hpp"
#include "dichotomy/pipeline.hpp"

namespace dichotomy {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline void write_header(std::ostream& o, const RunConfig& c, const std::string& what) {
  o << "# dichotomy " << kVersion << "\n# " << what << "\n";
  // [output] is left out so that reruns into another directory stay byte-identical
  std::istringstream cfg(dump_config(c));
  for (std::string line; std::getline(cfg, line);) {
    if (line == "[output]") break;
    if (!line.empty()) o << "# " << line << "\n";
  }
}

/// Rows t, x[, y], u1, u2, v.
inline void write_snapshot(std::ostream& o, const RunConfig& c, const RDState& s) {
  write_header(o, c, "snapshot t=" + fmt(s.t));
  const Grid& g = s.u1.grid;
  o << (g.dim == 1 ? "t,x,u1,u2,v\n" : "t,x,y,u1,u2,v\n");
  for (std::size_t k = 0; k < g.cells(); ++k) {
    o << fmt(s.t) << "," << fmt(g.center(k % g.n));
    if (g.dim == 2) o << "," << fmt(g.center(k / g.n));
    o << "," << fmt(s.u1[k]) << "," << fmt(s.u2[k]) << "," << fmt(s.v[k]) << "\n";
  }
}

/// Rows t, x[, y], u, v.
inline void write_snapshot(std::ostream& o, const RunConfig& c, const CrossState& s) {
  write_header(o, c, "snapshot t=" + fmt(s.t));
  const Grid& g = s.u.grid;
  o << (g.dim == 1 ? "t,x,u,v\n" : "t,x,y,u,v\n");
  for (std::size_t k = 0; k < g.cells(); ++k) {
    o << fmt(s.t) << "," << fmt(g.center(k % g.n));
    if (g.dim == 2) o << "," << fmt(g.center(k / g.n));
    o << "," << fmt(s.u[k]) << "," << fmt(s.v[k]) << "\n";
  }
}

inline void write_series(std::ostream& o, const RunConfig& c, const std::vector<SeriesRow>& rows) {
  write_header(o, c, "time series");
  o << "t,mass,min_v,defect_L2\n";
  for (const auto& r : rows) o << fmt(r.t) << "," << fmt(r.mass) << "," << fmt(r.min_v) << "," << fmt(r.defect) << "\n";
}

inline void write_dispersion(std::ostream& o, const RunConfig& c, const LinstabResult& r) {
  write_header(o, c, "dispersion at " + std::string(parameter_name(mode_system(c))) + "=" + fmt(c.scan.parameter));
  o << "n,k2,re_lambda,im_lambda\n";
  for (const auto& d : r.dispersion)
    o << d.n << "," << fmt(d.k2) << "," << fmt(d.lambda.real()) << "," << fmt(d.lambda.imag()) << "\n";
}

inline void write_growth_scan(std::ostream& o, const RunConfig& c, const LinstabResult& r) {
  write_header(o, c, "largest growth rate over the scan range");
  o << parameter_name(mode_system(c)) << ",lambda_max,mode\n";
  for (const auto& [p, g] : r.growth) o << fmt(p) << "," << fmt(g.lambda_max) << "," << g.mode << "\n";
}

/// Columns n, parameter_name, parameter, D.
inline void write_neutral_curves(std::ostream& o, const RunConfig& c, const std::vector<NeutralCurve>& curves) {
  write_header(o, c, "neutral stability curves");
  o << "n,parameter_name,parameter,D\n";
  for (const auto& nc : curves)
    for (const auto& [p, D] : nc.points)
      o << nc.n << "," << parameter_name(nc.which) << "," << fmt(p) << "," << fmt(D) << "\n";
}

/// Columns branch_id, parameter, arclength, value_at_x0, stable, event. Located
/// events are interleaved by arclength; ordinary points carry event "-".
inline void write_branches(std::ostream& o, const RunConfig& c, const ContinuationResult& res) {
  write_header(o, c, "branches");
  const SteadyProblem pb(steady_system(c), c.params, c.grid, c.cont.growth_ratio);
  o << "branch_id,parameter,arclength,value_at_x0,stable,event\n";
  auto row = [&](std::size_t id, const BranchPoint& p, const char* ev) {
    o << id << "," << fmt(p.parameter) << "," << fmt(p.arclength) << "," << fmt(pb.total_density(p.state)[0]) << ","
      << (p.stable ? 1 : 0) << "," << ev << "\n";
  };
  for (std::size_t b = 0; b < res.branches.size(); ++b) {
    const Branch& br = res.branches[b];
    std::size_t e = 0;
    for (const auto& p : br.points) {
      while (e < br.events.size() && br.events[e].located.arclength <= p.arclength) {
        row(b, br.events[e].located, to_string(br.events[e].kind));
        ++e;
      }
      row(b, p, "-");
    }
    for (; e < br.events.size(); ++e) row(b, br.events[e].located, to_string(br.events[e].kind));
  }
}

inline void write_events(std::ostream& o, const RunConfig& c, const ContinuationResult& res) {
  write_header(o, c, "bifurcation events");
  o << "branch_id,kind,parameter,antisymmetric,frequency\n";
  for (std::size_t b = 0; b < res.branches.size(); ++b)
    for (const auto& e : res.branches[b].events)
      o << b << "," << to_string(e.kind) << "," << fmt(e.parameter) << "," << (e.antisymmetric_null_vector ? 1 : 0)
        << "," << fmt(e.frequency) << "\n";
}

/// Columns eps, gap_u_L2, gap_v_L2, defect_L2, rel21_residual, then one footer
/// line "# slopes ...". Failed entries print nan and an error comment.
inline void write_sweep(std::ostream& o, const RunConfig& c, const SweepReport& r) {
  write_header(o, c, "eps sweep");
  o << "eps,gap_u_L2,gap_v_L2,defect_L2,rel21_residual\n";
  for (const auto& e : r.entries) {
    o << fmt(e.eps) << "," << fmt(e.gap_u) << "," << fmt(e.gap_v) << "," << fmt(e.defect) << "," << fmt(e.relation)
      << "\n";
    if (!e.error.empty()) o << "# eps=" << fmt(e.eps) << " failed: " << e.error << "\n";
  }
  o << "# slopes gap_u_L2=" << fmt(r.slopes.gap_u) << " gap_v_L2=" << fmt(r.slopes.gap_v)
    << " defect_L2=" << fmt(r.slopes.defect) << " rel21_residual=" << fmt(r.slopes.relation) << "\n";
}

/// gnuplot script text for a CSV with a header row. `columns` are 1-based.
inline std::string plot_script(const std::string& csv, const std::string& title, const std::string& xlabel,
                               const std::string& ylabel, int xcol, int ycol, bool logscale = false) {
  std::ostringstream s;
  s << "# generated by dichotomy " << kVersion << "\n"
    << "set datafile separator ','\nset key autotitle columnhead\n"
    << "set title '" << title << "'\nset xlabel '" << xlabel << "'\nset ylabel '" << ylabel << "'\n";
  if (logscale) s << "set logscale xy\n";
  s << "set terminal pngcairo size 900,600\nset output '" << csv.substr(0, csv.rfind('.')) << ".png'\n"
    << "plot '" << csv << "' using " << xcol << ":" << ycol << " with linespoints\n";
  return s.str();
}

}  // namespace dichotomy
