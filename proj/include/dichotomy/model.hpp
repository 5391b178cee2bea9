#pragma once

// Parameters, switching functions and pointwise kinetics of the
// slow/fast dichotomy model with pheromone-mediated switching.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <string>

#include "dichotomy/errors.hpp"

namespace dichotomy {

/// Shape of the slow -> fast switching rate q(v); p(v) = 1 - q(v) for every kind.
enum class SwitchingKind {
  TanhSum,         ///< q = q1 + q2, rising again above v_sharp (crowding avoidance)
  DecreasingOnly,  ///< q = q1 (no crowding term)
  PiecewiseFig1,   ///< q = q1 below the breakpoint where q1 = q2, q2 above it
};

inline const char* to_string(SwitchingKind k) {
  switch (k) {
    case SwitchingKind::TanhSum: return "tanh-sum";
    case SwitchingKind::DecreasingOnly: return "decreasing-only";
    case SwitchingKind::PiecewiseFig1: return "piecewise";
  }
  return "?";
}

inline SwitchingKind switching_from_string(const std::string& s) {
  if (s == "tanh-sum") return SwitchingKind::TanhSum;
  if (s == "decreasing-only") return SwitchingKind::DecreasingOnly;
  if (s == "piecewise") return SwitchingKind::PiecewiseFig1;
  throw ValidationError("unknown switching kind '" + s + "'");
}

struct ModelParams {
  double d = 0.05;       ///< diffusivity of the slow group
  double D = 0.15;       ///< extra diffusivity of the fast group
  double Dv = 0.1;       ///< pheromone diffusivity
  double a1 = 0.0;       ///< growth rate of the slow group
  double a2 = 0.0;       ///< growth rate of the fast group
  double alpha = 1.0;    ///< pheromone production
  double beta = 1.0;     ///< pheromone decay
  double eps = 1e-3;     ///< conversion timescale
  double gamma1 = 20.0;  ///< steepness of the low-v transition
  double gamma2 = 20.0;  ///< steepness of the high-v transition
  double v_star = 1.0;   ///< lower threshold
  double v_sharp = 1.25; ///< upper (crowding) threshold
  double L = 1.0;        ///< domain side length
  SwitchingKind switching = SwitchingKind::TanhSum;

  /// Throws ValidationError naming the first offending field.
  void validate() const {
    auto need = [](bool ok, const char* name) {
      if (!ok) throw ValidationError(std::string("invalid model parameter '") + name + "'");
    };
    auto finite = [](double x) { return std::isfinite(x); };
    need(finite(d) && d > 0, "d");
    need(finite(D) && D > 0, "D");
    need(finite(Dv) && Dv > 0, "Dv");
    need(finite(a1) && a1 >= 0, "a1");
    need(finite(a2) && a2 >= 0, "a2");
    need(finite(alpha) && alpha > 0, "alpha");
    need(finite(beta) && beta > 0, "beta");
    need(finite(eps) && eps > 0, "eps");
    need(finite(gamma1) && gamma1 > 0, "gamma1");
    need(finite(gamma2) && gamma2 > 0, "gamma2");
    need(finite(v_star) && v_star > 0, "v_star");
    need(finite(v_sharp) && v_sharp > v_star, "v_sharp");
    need(finite(L) && L > 0, "L");
  }

  bool operator==(const ModelParams&) const = default;
};

namespace detail {

inline double q_low(double v, const ModelParams& m) {
  return 0.5 * (1.0 - std::tanh(m.gamma1 * (v - m.v_star)));
}
inline double q_high(double v, const ModelParams& m) {
  return 0.5 * (1.0 + std::tanh(m.gamma2 * (v - m.v_sharp)));
}
inline double sech2(double x) {
  const double c = std::cosh(x);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}
inline double dq_low(double v, const ModelParams& m) {
  return -0.5 * m.gamma1 * sech2(m.gamma1 * (v - m.v_star));
}
inline double dq_high(double v, const ModelParams& m) {
  return 0.5 * m.gamma2 * sech2(m.gamma2 * (v - m.v_sharp));
}

inline void check_v(double v) {
  if (!(v >= 0.0)) throw std::domain_error("switching function evaluated at negative or NaN v");
}

}  // namespace detail

/// Breakpoint of the piecewise switching kind: the point in [v_star, v_sharp] where
/// the decreasing and increasing branches meet.
inline double piecewise_breakpoint(const ModelParams& m) {
  double lo = m.v_star, hi = m.v_sharp;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::q_low(mid, m) > detail::q_high(mid, m))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double eval_q(double v, const ModelParams& m, SwitchingKind kind) {
  detail::check_v(v);
  switch (kind) {
    case SwitchingKind::TanhSum: return detail::q_low(v, m) + detail::q_high(v, m);
    case SwitchingKind::DecreasingOnly: return detail::q_low(v, m);
    case SwitchingKind::PiecewiseFig1:
      return v <= piecewise_breakpoint(m) ? detail::q_low(v, m) : detail::q_high(v, m);
  }
  return 0.0;
}
inline double eval_q(double v, const ModelParams& m) { return eval_q(v, m, m.switching); }

inline double eval_p(double v, const ModelParams& m, SwitchingKind kind) {
  return 1.0 - eval_q(v, m, kind);
}
inline double eval_p(double v, const ModelParams& m) { return eval_p(v, m, m.switching); }

/// dq/dv from the closed-form tanh derivatives.
inline double eval_dq(double v, const ModelParams& m, SwitchingKind kind) {
  detail::check_v(v);
  switch (kind) {
    case SwitchingKind::TanhSum: return detail::dq_low(v, m) + detail::dq_high(v, m);
    case SwitchingKind::DecreasingOnly: return detail::dq_low(v, m);
    case SwitchingKind::PiecewiseFig1:
      return v <= piecewise_breakpoint(m) ? detail::dq_low(v, m) : detail::dq_high(v, m);
  }
  return 0.0;
}
inline double eval_dq(double v, const ModelParams& m) { return eval_dq(v, m, m.switching); }
inline double eval_dp(double v, const ModelParams& m) { return -eval_dq(v, m); }

/// q and p together with their derivatives; one tanh evaluation per branch.
struct Switching {
  double q, p, dq, dp;
};

inline Switching switching_at(double v, const ModelParams& m) {
  detail::check_v(v);
  Switching s{};
  switch (m.switching) {
    case SwitchingKind::TanhSum:
      s.q = detail::q_low(v, m) + detail::q_high(v, m);
      s.dq = detail::dq_low(v, m) + detail::dq_high(v, m);
      break;
    case SwitchingKind::DecreasingOnly:
      s.q = detail::q_low(v, m);
      s.dq = detail::dq_low(v, m);
      break;
    case SwitchingKind::PiecewiseFig1:
      s.q = eval_q(v, m, m.switching);
      s.dq = eval_dq(v, m, m.switching);
      break;
  }
  s.p = 1.0 - s.q;
  s.dp = -s.dq;
  return s;
}

struct Reaction {
  double f1, f2, f3;
};

/// Right-hand side of the three-component kinetics at one point.
inline Reaction reaction_terms(double u1, double u2, double v, const ModelParams& m) {
  if (!(u1 >= 0 && u2 >= 0 && v >= 0))
    throw std::domain_error("reaction_terms requires nonnegative densities");
  const auto s = switching_at(v, m);
  const double exchange = (s.q * u1 - s.p * u2) / m.eps;
  const double crowd = 1.0 - u1 - u2;
  return {m.a1 * crowd * u1 - exchange, m.a2 * crowd * u2 + exchange,
          m.alpha * (u1 + u2) - m.beta * v};
}

/// Exact partial derivatives of reaction_terms with respect to (u1, u2, v).
inline Eigen::Matrix3d reaction_jacobian(double u1, double u2, double v, const ModelParams& m) {
  if (!(u1 >= 0 && u2 >= 0 && v >= 0))
    throw std::domain_error("reaction_jacobian requires nonnegative densities");
  const auto s = switching_at(v, m);
  const double ie = 1.0 / m.eps;
  const double crowd = 1.0 - u1 - u2;
  const double dexch_dv = (s.dq * u1 - s.dp * u2) * ie;
  Eigen::Matrix3d J;
  J << m.a1 * (crowd - u1) - s.q * ie, -m.a1 * u1 + s.p * ie, -dexch_dv,
      -m.a2 * u2 + s.q * ie, m.a2 * (crowd - u2) - s.p * ie, dexch_dv,
      m.alpha, m.alpha, -m.beta;
  return J;
}

struct ConstantState {
  double u1, u2, v;
};

inline double checked_sum(double p, double q) {
  const double s = p + q;
  if (!(s > 0.0)) throw DegenerateStateError("p(v) + q(v) vanishes at the constant state");
  return s;
}

/// Constant steady state of the mass-conserving system with mean total density M.
inline ConstantState constant_steady_conserved(double M, const ModelParams& m) {
  if (!(M > 0.0) || !std::isfinite(M)) throw ValidationError("mass M must be positive");
  const double v = m.alpha / m.beta * M;
  const double q = eval_q(v, m), p = eval_p(v, m);
  const double s = checked_sum(p, q);
  return {p * M / s, q * M / s, v};
}

/// The unique constant steady state of the system with logistic growth.
inline ConstantState constant_steady_growth(const ModelParams& m) {
  const double v = m.alpha / m.beta;
  const double q = eval_q(v, m), p = eval_p(v, m);
  const double s = checked_sum(p, q);
  return {p / s, q / s, v};
}

}  // namespace dichotomy
