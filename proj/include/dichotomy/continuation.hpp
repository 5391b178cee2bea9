#pragma once

// Newton solves for stationary states, pseudo-arclength continuation in the
// mean mass M or the growth rate r, and detection of folds, pitchforks and
// Hopf points from the tangent and the rightmost eigenvalues.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dichotomy/eigs.hpp"
#include "dichotomy/errors.hpp"
#include "dichotomy/steady.hpp"

namespace dichotomy {

struct LeadingEig {
  std::complex<double> value;
  bool mass_neutral = false;  ///< the zero eigenvalue carried by mass conservation
  Eigen::VectorXcd vector;    ///< empty once stored on a branch point
  double residual = 0.0;
};

struct BranchPoint {
  double parameter = 0.0;
  Vec state;                     ///< unknowns of the SteadyProblem (incl. multiplier)
  bool stable = false;
  std::vector<LeadingEig> eigs;  ///< sorted by decreasing real part
  double arclength = 0.0;
  double residual = 0.0;
  int iterations = 0;
  Vec tangent;                   ///< (d state, d parameter)/ds, empty when unknown
};

enum class EventKind { Fold, Pitchfork, Hopf };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Fold: return "fold";
    case EventKind::Pitchfork: return "pitchfork";
    case EventKind::Hopf: return "hopf";
  }
  return "?";
}

struct BifurcationEvent {
  EventKind kind = EventKind::Fold;
  double parameter = 0.0;
  BranchPoint left, right;   ///< accepted points bracketing the event
  BranchPoint located;       ///< refined point at the crossing
  bool antisymmetric_null_vector = false;
  double frequency = 0.0;    ///< imaginary part at a Hopf point
};

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<BifurcationEvent> events;
  bool closed = false;  ///< the branch returned to its starting point
  std::string stop_reason;
};

class StuckBranchError : public NumericalError {
 public:
  StuckBranchError(const std::string& what, Branch partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const Branch& partial() const noexcept { return partial_; }

 private:
  Branch partial_;
};

struct NewtonOptions {
  double tolerance = 1e-10;  ///< max-norm residual
  int max_iterations = 50;
  bool damping = true;
  bool with_stability = true;
  int eig_count = 6;
};

struct ContinuationControl {
  double ds = 0.02;
  double ds_min = 1e-8;
  double ds_max = 0.05;
  int max_steps = 1000;
  double parameter_min = -std::numeric_limits<double>::infinity();
  double parameter_max = std::numeric_limits<double>::infinity();
  double tolerance = 1e-10;
  int max_corrector_iterations = 12;
  int eig_count = 6;
  bool detect_events = true;
  bool stop_on_loop = true;
  std::optional<Vec> initial_tangent;  ///< size problem.size() + 1
};

inline constexpr double kComplexThreshold = 1e-6;
inline constexpr double kMaxTangentTurn = 0.3;

namespace detail {

using SpLU = Eigen::SparseLU<SpMat>;

inline double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// [J  F_p; row^T  row_p] as a sparse matrix.
inline SpMat bordered(const SteadyProblem& pb, const Vec& x, double par, const Vec& row) {
  std::vector<Eigen::Triplet<double>> t;
  pb.dynamics_triplets(x, par, t);
  if (pb.conserved()) pb.append_border(t);
  const Eigen::Index N = pb.size();
  const Vec fp = pb.parameter_derivative(x, par);
  for (Eigen::Index i = 0; i < N; ++i)
    if (fp[i] != 0.0) t.emplace_back(i, N, fp[i]);
  for (Eigen::Index j = 0; j <= N; ++j)
    if (row[j] != 0.0) t.emplace_back(N, j, row[j]);
  SpMat A(N + 1, N + 1);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

inline Vec join(const Vec& x, double par) {
  Vec y(x.size() + 1);
  y.head(x.size()) = x;
  y[x.size()] = par;
  return y;
}

inline double wnorm(const Vec& v, const Vec& w) { return std::sqrt((v.array().square() * w.array()).sum()); }

/// Tangent of the solution curve at (x, par), oriented along `orient` (weighted).
inline Vec tangent_at(const SteadyProblem& pb, const Vec& x, double par, const Vec& orient) {
  const Vec w = pb.weights(true);
  const Vec row = (w.array() * orient.array()).matrix();
  SpLU lu(bordered(pb, x, par, row));
  if (lu.info() != Eigen::Success) throw NumericalError("singular bordered system while computing a tangent");
  Vec rhs = Vec::Zero(pb.size() + 1);
  rhs[pb.size()] = 1.0;
  Vec t = lu.solve(rhs);
  t /= wnorm(t, w);
  if (t.dot(row) < 0.0) t = -t;
  return t;
}

}  // namespace detail

/// Rightmost eigenvalues of the linearised dynamics at a stationary point.
inline std::vector<LeadingEig> leading_eigs(const SteadyProblem& pb, const Vec& state, double parameter,
                                            int count = 6) {
  const Vec x = state.head(pb.state_size());
  const SpMat J = pb.dynamics_jacobian(x, parameter);
  ArnoldiOptions opt;
  opt.count = count + (pb.conserved() ? 1 : 0);
  const auto pairs = rightmost_eigenpairs(J, opt);
  std::vector<LeadingEig> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.value, false, p.vector, p.residual});
  if (pb.conserved()) {
    // Only the conservation mode has an eigenvector with nonzero total mass.
    std::size_t best = 0;
    double best_mass = -1.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double m = std::abs(pb.mass_of(out[i].vector));
      if (m > best_mass) {
        best_mass = m;
        best = i;
      }
    }
    if (best_mass > 1e-6 && std::abs(out[best].value) < 1e-6) out[best].mass_neutral = true;
    int kept = 0;
    std::vector<LeadingEig> trimmed;
    for (auto& e : out) {
      if (e.mass_neutral || kept < count) {
        if (!e.mass_neutral) ++kept;
        trimmed.push_back(std::move(e));
      }
    }
    out = std::move(trimmed);
  }
  return out;
}

inline std::vector<LeadingEig> leading_eigs(const SteadyProblem& pb, const BranchPoint& pt, int count = 6) {
  return leading_eigs(pb, pt.state, pt.parameter, count);
}

inline int unstable_count(const std::vector<LeadingEig>& eigs) {
  int n = 0;
  for (const auto& e : eigs)
    if (!e.mass_neutral && e.value.real() > 0.0) ++n;
  return n;
}

inline void attach_stability(const SteadyProblem& pb, BranchPoint& pt, int count) {
  pt.eigs = leading_eigs(pb, pt, count);
  pt.stable = unstable_count(pt.eigs) == 0;
  for (auto& e : pt.eigs) e.vector.resize(0);
}

/// Damped Newton iteration for residual(x, parameter) = 0 at fixed parameter.
inline BranchPoint newton_steady(const SteadyProblem& pb, Vec guess, double parameter,
                                 const NewtonOptions& opt = {}) {
  if (guess.size() != pb.size()) {
    if (guess.size() == pb.state_size() && pb.conserved()) {
      Vec g = Vec::Zero(pb.size());
      g.head(pb.state_size()) = guess;
      guess = g;
    } else {
      throw ValidationError("initial guess has the wrong size");
    }
  }
  if (!guess.allFinite()) throw ValidationError("initial guess is not finite");
  Vec x = std::move(guess);
  Vec r = pb.residual(x, parameter);
  double res = detail::max_abs(r);
  double best = res;
  int it = 0;
  while (res > opt.tolerance) {
    if (it >= opt.max_iterations)
      throw NoConvergenceError("Newton did not converge; best residual " + std::to_string(best), best);
    detail::SpLU lu(pb.jacobian(x, parameter));
    if (lu.info() != Eigen::Success) throw NoConvergenceError("singular Jacobian in Newton iteration", best);
    const Vec dx = lu.solve(r);
    double lambda = 1.0;
    Vec trial = x - dx;
    Vec rt = pb.residual(trial, parameter);
    if (opt.damping) {
      while (!(detail::max_abs(rt) < res) && lambda > 1.0 / 64) {
        lambda *= 0.5;
        trial = x - lambda * dx;
        rt = pb.residual(trial, parameter);
      }
    }
    x = std::move(trial);
    r = std::move(rt);
    res = detail::max_abs(r);
    if (!std::isfinite(res)) throw NoConvergenceError("Newton iterate became non-finite", best);
    best = std::min(best, res);
    ++it;
  }
  BranchPoint pt;
  pt.parameter = parameter;
  pt.state = std::move(x);
  pt.residual = res;
  pt.iterations = it;
  if (opt.with_stability) attach_stability(pb, pt, opt.eig_count);
  return pt;
}

namespace detail {

struct Corrected {
  Vec y;
  int iterations;
  double residual;
};

/// Pseudo-arclength corrector from y0 along tangent t with step ds.
inline std::optional<Corrected> correct(const SteadyProblem& pb, const Vec& y0, const Vec& t, double ds,
                                        double tol, int max_iter) {
  const Eigen::Index N = pb.size();
  const Vec w = pb.weights(true);
  const Vec row = (w.array() * t.array()).matrix();
  Vec y = y0 + ds * t;
  double first = -1.0;
  for (int it = 0; it <= max_iter; ++it) {
    const Vec x = y.head(N);
    const double par = y[N];
    Vec r(N + 1);
    r.head(N) = pb.residual(x, par);
    r[N] = row.dot(y - y0) - ds;
    const double res = max_abs(r.head(N));
    if (!std::isfinite(res)) return std::nullopt;
    if (first < 0.0) first = res;
    if (res <= tol && std::abs(r[N]) <= 1e-12 * std::max(1.0, std::abs(ds))) return Corrected{y, it, res};
    if (it == max_iter || res > 1e6 * std::max(first, 1.0)) return std::nullopt;
    SpLU lu(bordered(pb, x, par, row));
    if (lu.info() != Eigen::Success) return std::nullopt;
    y -= lu.solve(r);
  }
  return std::nullopt;
}

inline BranchPoint make_point(const SteadyProblem& pb, const Corrected& c, const Vec& orient, double arclength,
                              int eig_count) {
  const Eigen::Index N = pb.size();
  BranchPoint p;
  p.state = c.y.head(N);
  p.parameter = c.y[N];
  p.residual = c.residual;
  p.iterations = c.iterations;
  p.arclength = arclength;
  p.tangent = tangent_at(pb, p.state, p.parameter, orient);
  attach_stability(pb, p, eig_count);
  return p;
}

inline bool is_constant_state(const SteadyProblem& pb, const Vec& x, double rel_tol = 1e-3) {
  const Field u = pb.total_density(x);
  return u.spread() <= rel_tol * std::max(1.0, std::abs(u.max()));
}

/// Eigenvalue tracked across a non-turning crossing: the non-neutral eigenvalue
/// nearest the imaginary axis, restricted to real (pitchfork) or complex (Hopf) ones.
inline std::optional<std::complex<double>> crossing_eig(const std::vector<LeadingEig>& eigs, bool complex_pair) {
  std::optional<std::complex<double>> best;
  for (const auto& e : eigs) {
    if (e.mass_neutral) continue;
    const bool is_complex = std::abs(e.value.imag()) > kComplexThreshold;
    if (is_complex != complex_pair) continue;
    if (complex_pair && e.value.imag() < 0.0) continue;
    if (!best || std::abs(e.value.real()) < std::abs(best->real())) best = e.value;
  }
  return best;
}

}  // namespace detail

/// Determines whether a bifurcation lies between two adjacent accepted points.
/// Returns the event with an unrefined location (linear interpolation), or
/// nothing. Throws RefinementNeededError when the bracket holds several crossings.
inline std::optional<BifurcationEvent> classify_event(const SteadyProblem& pb, const BranchPoint& a,
                                                      const BranchPoint& b) {
  if (a.tangent.size() == 0 || b.tangent.size() == 0)
    throw ValidationError("classify_event needs points carrying tangents");
  const Eigen::Index N = pb.size();
  const double ta = a.tangent[N], tb = b.tangent[N];
  const bool turning = (ta > 0.0) != (tb > 0.0);
  const int na = unstable_count(a.eigs), nb = unstable_count(b.eigs);
  const int jump = std::abs(nb - na);

  auto lerp = [&](double fa, double fb) {
    const double s = fa == fb ? 0.5 : fa / (fa - fb);
    return a.parameter + std::clamp(s, 0.0, 1.0) * (b.parameter - a.parameter);
  };

  BifurcationEvent ev;
  ev.left = a;
  ev.right = b;
  if (turning) {
    if (jump > 1) throw RefinementNeededError("turning point and several eigenvalue crossings in one step");
    const bool at_constant = detail::is_constant_state(pb, a.state) || detail::is_constant_state(pb, b.state) ||
                             detail::is_constant_state(pb, 0.5 * (a.state + b.state));
    ev.kind = at_constant ? EventKind::Pitchfork : EventKind::Fold;
    ev.parameter = lerp(ta, tb);
    return ev;
  }
  if (jump == 0) return std::nullopt;
  const auto ca = detail::crossing_eig(a.eigs, true), cb = detail::crossing_eig(b.eigs, true);
  const auto ra = detail::crossing_eig(a.eigs, false), rb = detail::crossing_eig(b.eigs, false);
  const bool complex_crossing = ca && cb && (ca->real() > 0.0) != (cb->real() > 0.0);
  const bool real_crossing = ra && rb && (ra->real() > 0.0) != (rb->real() > 0.0);
  if (jump == 2 && complex_crossing && !real_crossing) {
    ev.kind = EventKind::Hopf;
    ev.parameter = lerp(ca->real(), cb->real());
    ev.frequency = 0.5 * (ca->imag() + cb->imag());
    return ev;
  }
  if (jump == 1 && real_crossing && !complex_crossing) {
    ev.kind = EventKind::Pitchfork;
    ev.parameter = lerp(ra->real(), rb->real());
    return ev;
  }
  throw RefinementNeededError("ambiguous eigenvalue crossings between adjacent branch points");
}

namespace detail {

/// Illinois (modified regula falsi) on the arclength offset from `a`, until the
/// parameter is pinned to `par_tol`.
inline BranchPoint refine_event(const SteadyProblem& pb, BifurcationEvent& ev, double par_tol, int eig_count) {
  const Eigen::Index N = pb.size();
  const Vec y0 = join(ev.left.state, ev.left.parameter);
  const Vec& t = ev.left.tangent;
  const Vec w = pb.weights(true);
  const double span = (w.array() * t.array()).matrix().dot(join(ev.right.state, ev.right.parameter) - y0);

  auto quantity = [&](const BranchPoint& p) -> double {
    if (ev.kind == EventKind::Hopf) {
      auto c = crossing_eig(p.eigs, true);
      return c ? c->real() : std::numeric_limits<double>::quiet_NaN();
    }
    const bool turning = (ev.left.tangent[N] > 0.0) != (ev.right.tangent[N] > 0.0);
    if (turning) return p.tangent[N];
    auto r = crossing_eig(p.eigs, false);
    return r ? r->real() : std::numeric_limits<double>::quiet_NaN();
  };

  double s_lo = 0.0, s_hi = span;
  double f_lo = quantity(ev.left), f_hi = quantity(ev.right);
  BranchPoint lo = ev.left, hi = ev.right;
  int side = 0;
  for (int it = 0; it < 60; ++it) {
    if (std::abs(hi.parameter - lo.parameter) <= par_tol && it > 0) break;
    if (!std::isfinite(f_lo) || !std::isfinite(f_hi) || f_lo == f_hi) break;
    double s = s_lo + f_lo * (s_hi - s_lo) / (f_lo - f_hi);
    if (!(s > s_lo && s < s_hi)) s = 0.5 * (s_lo + s_hi);
    auto c = correct(pb, y0, t, s, 1e-10, 20);
    if (!c) break;
    BranchPoint p = make_point(pb, *c, t, ev.left.arclength + s, eig_count);
    const double f = quantity(p);
    if (!std::isfinite(f)) break;
    if ((f > 0.0) == (f_lo > 0.0)) {
      s_lo = s;
      f_lo = f;
      lo = std::move(p);
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      s_hi = s;
      f_hi = f;
      hi = std::move(p);
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    (void)N;
  }
  const bool lo_closer = std::abs(f_lo) <= std::abs(f_hi);
  return lo_closer ? lo : hi;
}

/// Real null vector of the crossing eigenvalue at a located point (state part).
inline Vec null_vector(const SteadyProblem& pb, const BranchPoint& p) {
  auto eigs = leading_eigs(pb, p, 8);
  const LeadingEig* best = nullptr;
  for (const auto& e : eigs) {
    if (e.mass_neutral || std::abs(e.value.imag()) > kComplexThreshold) continue;
    if (!best || std::abs(e.value) < std::abs(best->value)) best = &e;
  }
  if (!best) throw EigenSolverError("no real eigenvalue near zero at the branch point");
  // At a constant state the conservation mode shares the zero eigenvalue and
  // the solver may return any mix of the two. Every other eigenvector carries
  // no mass, so take the massless combination.
  Eigen::VectorXcd z = best->vector;
  for (const auto& e : eigs) {
    if (!e.mass_neutral || std::abs(e.value - best->value) > 1e-6) continue;
    const std::complex<double> mb = pb.mass_of(z), mn = pb.mass_of(e.vector);
    if (std::abs(mn) > 0.0) z = z * mn - e.vector * mb;
  }
  Vec phi = z.real();
  if (phi.norm() < 1e-3 * z.norm()) phi = z.imag();
  return phi / phi.norm();
}

/// Pins a branch point on the constant-state branch: secant iteration on the
/// real eigenvalue nearest zero of the constant state's linearisation.
inline std::optional<BranchPoint> constant_branch_point(const SteadyProblem& pb, double par0, double par1,
                                                        int eig_count) {
  auto f = [&](double par) {
    Vec x = pb.constant_state(par);
    auto eigs = leading_eigs(pb, x, par, eig_count);
    std::optional<double> best;
    for (const auto& e : eigs) {
      if (e.mass_neutral || std::abs(e.value.imag()) > kComplexThreshold) continue;
      if (!best || std::abs(e.value.real()) < std::abs(*best)) best = e.value.real();
    }
    return best ? *best : std::numeric_limits<double>::quiet_NaN();
  };
  double f0 = f(par0), f1 = f(par1);
  for (int it = 0; it < 40; ++it) {
    if (!std::isfinite(f0) || !std::isfinite(f1) || f0 == f1) return std::nullopt;
    const double par2 = par1 - f1 * (par1 - par0) / (f1 - f0);
    par0 = par1;
    f0 = f1;
    par1 = par2;
    f1 = f(par1);
    if (std::abs(par1 - par0) < 1e-10 * std::max(1.0, std::abs(par1))) {
      BranchPoint p;
      p.parameter = par1;
      p.state = pb.constant_state(par1);
      attach_stability(pb, p, eig_count);
      return p;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Pseudo-arclength continuation from a converged point. `direction` (+1/-1)
/// orients the initial tangent by the sign of its parameter component, or along
/// `ctrl.initial_tangent` when one is supplied.
inline Branch continue_branch(const SteadyProblem& pb, const BranchPoint& start, int direction,
                              const ContinuationControl& ctrl = {}) {
  const Eigen::Index N = pb.size();
  const Vec w = pb.weights(true);
  Branch br;

  BranchPoint first = start;
  if (ctrl.initial_tangent) {
    if (ctrl.initial_tangent->size() != N + 1) throw ValidationError("initial tangent has the wrong size");
    Vec t = *ctrl.initial_tangent * (direction >= 0 ? 1.0 : -1.0);
    first.tangent = t / detail::wnorm(t, w);
  } else {
    Vec orient = Vec::Zero(N + 1);
    orient[N] = direction >= 0 ? 1.0 : -1.0;
    first.tangent = detail::tangent_at(pb, first.state, first.parameter, orient);
  }
  if (first.eigs.empty()) attach_stability(pb, first, ctrl.eig_count);
  br.points.push_back(first);

  double ds = ctrl.ds;
  const Vec y_start = detail::join(first.state, first.parameter);
  for (int step = 0; step < ctrl.max_steps; ++step) {
    const BranchPoint& prev = br.points.back();
    const Vec y0 = detail::join(prev.state, prev.parameter);
    std::optional<BranchPoint> accepted;
    std::optional<BifurcationEvent> event;
    while (!accepted) {
      if (ds < ctrl.ds_min) {
        br.stop_reason = "step size underflow";
        throw StuckBranchError("continuation step fell below ds_min at parameter " +
                                   std::to_string(prev.parameter),
                               br);
      }
      auto c = detail::correct(pb, y0, prev.tangent, ds, ctrl.tolerance, ctrl.max_corrector_iterations);
      if (!c) {
        ds *= 0.5;
        continue;
      }
      BranchPoint p;
      try {
        p = detail::make_point(pb, *c, prev.tangent, prev.arclength + ds, ctrl.eig_count);
        if (ctrl.detect_events) event = classify_event(pb, prev, p);
      } catch (const RefinementNeededError&) {
        ds *= 0.5;
        continue;
      } catch (const NumericalError&) {
        ds *= 0.5;
        continue;
      }
      // A sharp turn in the tangent means the corrector landed on a neighbouring branch.
      if (detail::wnorm(p.tangent - prev.tangent, w) > kMaxTangentTurn) {
        ds *= 0.5;
        event.reset();
        continue;
      }
      if (c->iterations <= 3) ds = std::min(ds * 1.3, ctrl.ds_max);
      accepted = std::move(p);
    }
    if (event) {
      event->located = detail::refine_event(pb, *event, 1e-5, ctrl.eig_count);
      event->parameter = event->located.parameter;
      // A turning point where the branch passes through a constant state is
      // a symmetry-breaking branch point, not a fold.
      if (event->kind == EventKind::Fold && detail::is_constant_state(pb, event->located.state, 2e-2)) {
        event->kind = EventKind::Pitchfork;
        const double mid = 0.5 * (event->left.parameter + event->right.parameter);
        const double par0 = event->located.parameter;
        const double par1 = std::abs(mid - par0) > 1e-9 ? mid : par0 + 1e-4;
        if (auto cp = detail::constant_branch_point(pb, par0, par1, ctrl.eig_count)) {
          cp->arclength = event->located.arclength;
          cp->tangent = event->located.tangent;
          event->located = std::move(*cp);
          event->parameter = event->located.parameter;
        }
      }
      if (event->kind == EventKind::Hopf) {
        if (auto ce = detail::crossing_eig(event->located.eigs, true)) event->frequency = ce->imag();
      }
      if (event->kind == EventKind::Pitchfork) {
        try {
          const Vec phi = detail::null_vector(pb, event->located);
          const Vec x = phi.head(pb.state_size());
          Vec full = Vec::Zero(pb.size());
          full.head(pb.state_size()) = x;
          const Vec rx = pb.reflect(full).head(pb.state_size());
          event->antisymmetric_null_vector = (rx + x).norm() < 1e-3 * x.norm();
        } catch (const NumericalError&) {
        }
      }
      br.events.push_back(std::move(*event));
    }
    br.points.push_back(std::move(*accepted));
    const BranchPoint& cur = br.points.back();
    if (cur.parameter < ctrl.parameter_min || cur.parameter > ctrl.parameter_max) {
      br.stop_reason = "parameter bound";
      return br;
    }
    if (ctrl.stop_on_loop && br.points.size() > 10) {
      const double dist = detail::wnorm(detail::join(cur.state, cur.parameter) - y_start, w);
      if (dist < 0.75 * ds) {
        br.closed = true;
        br.stop_reason = "closed loop";
        return br;
      }
    }
  }
  br.stop_reason = "step limit";
  return br;
}

/// Follows the branch bifurcating at a pitchfork: the first predictor is the
/// null vector with amplitude 1e-3 times the state norm.
inline Branch switch_branch(const SteadyProblem& pb, const BifurcationEvent& ev, int direction,
                            ContinuationControl ctrl = {}) {
  if (ev.kind != EventKind::Pitchfork) throw ValidationError("branch switching needs a pitchfork event");
  const Vec phi = detail::null_vector(pb, ev.located);
  Vec t = Vec::Zero(pb.size() + 1);
  t.head(pb.state_size()) = phi.head(pb.state_size());
  ctrl.initial_tangent = t;
  const Vec w = pb.weights(false);
  const double amp = 1e-3 * detail::wnorm(ev.located.state, w);
  ctrl.ds = std::max(amp, ctrl.ds_min * 10);
  return continue_branch(pb, ev.located, direction, ctrl);
}

}  // namespace dichotomy
