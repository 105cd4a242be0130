#pragma once

// Statistical-fluctuation corrections for finite data: each observed gain
// is replaced by an n_alpha-standard-deviation interval and the decoy-state
// bounds are re-evaluated with every term pushed to its pessimistic end.
// An infinite sample size collapses the intervals and reproduces the
// asymptotic bounds bit for bit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/types.hpp"

namespace mdiqkd {

struct FluctuationConfig {
  double n_alpha = 5.0;  // number of standard deviations
  // Pulse-pair count per (intensity pair, basis) cell; infinity = asymptotic.
  double sample_size = std::numeric_limits<double>::infinity();

  static FluctuationConfig asymptotic() { return {5.0, std::numeric_limits<double>::infinity()}; }

  bool is_asymptotic() const { return std::isinf(sample_size); }

  void validate() const {
    if (!(n_alpha > 0.0) || std::isnan(n_alpha))
      throw std::invalid_argument("FluctuationConfig: n_alpha must be > 0");
    if (!(sample_size > 0.0) || std::isnan(sample_size))
      throw std::invalid_argument("FluctuationConfig: sample size must be > 0");
  }
};

// Confidence interval around one gain point. Relative half-width for an
// observable V is beta = n_alpha / sqrt(N V); a zero observable has no
// relative scale, so it gets the absolute cap [0, n_alpha^2 / N] instead.
struct BoundedGainPoint {
  double q_lo = 0.0, q_hi = 0.0;
  double eq_lo = 0.0, eq_hi = 0.0;
};

namespace detail {

struct Interval {
  double lo, hi;
};

inline Interval fluctuation_interval(double value, const FluctuationConfig& cfg) {
  if (value <= 0.0) return {0.0, cfg.n_alpha * cfg.n_alpha / cfg.sample_size};
  const double beta = cfg.n_alpha / std::sqrt(cfg.sample_size * value);
  return {std::max(0.0, value * (1.0 - beta)), value * (1.0 + beta)};
}

}  // namespace detail

inline BoundedGainPoint fluctuate(const GainPoint& gp, const FluctuationConfig& cfg) {
  cfg.validate();
  if (!gp.valid()) throw std::invalid_argument("fluctuate: invalid gain point");
  const detail::Interval q = detail::fluctuation_interval(gp.q, cfg);
  const detail::Interval eq = detail::fluctuation_interval(gp.eq, cfg);
  return {q.lo, q.hi, eq.lo, eq.hi};
}

// Worst-case rewrite of y11_lower: every observable is taken at the
// interval end that minimizes the bound, term by term. Expression shapes
// mirror the asymptotic versions exactly so degenerate intervals reproduce
// them bit for bit.
inline double y11_lower_fluct(const GainTable& t, Basis w, const FluctuationConfig& cfg) {
  t.validate();
  cfg.validate();
  const DecoyRatios r = abc_alpha(t.alice, t.bob);
  const double alpha = r.alpha;
  auto q_lo = [&](int i, int j) { return detail::fluctuation_interval(t.at(w, i, j).q, cfg).lo; };
  auto q_hi = [&](int i, int j) { return detail::fluctuation_interval(t.at(w, i, j).q, cfg).hi; };
  auto ew = [&](int i, int j) { return detail::exp_weight(t, i, j); };
  const double g1 =
      ew(0, 2) * q_lo(0, 2) + ew(2, 0) * q_lo(2, 0) - ew(0, 1) * q_hi(0, 1) - ew(1, 0) * q_hi(1, 0);
  const double g2 =
      alpha * (ew(2, 1) * q_lo(2, 1) - ew(0, 1) * q_hi(0, 1) - ew(2, 0) * q_hi(2, 0) + q_lo(0, 0));
  const double g3 =
      alpha * (ew(1, 2) * q_lo(1, 2) - ew(0, 2) * q_hi(0, 2) - ew(1, 0) * q_hi(1, 0) + q_lo(0, 0));
  const double num = g1 + g2 + g3 - ew(2, 2) * q_hi(2, 2) + ew(1, 1) * q_lo(1, 1);
  const double den = detail::bound_denominator(t.alice, t.bob, alpha);
  if (!(den > 0.0))
    throw inconsistency_error("y11_lower_fluct: bound denominator is not positive");
  return std::max(0.0, num / den);
}

// Worst-case rewrite of e11_upper against the fluctuation-corrected Y_11
// lower bound: numerator terms that tighten the bound take their lower
// ends, the subtracted vacuum-vacuum term its upper end.
inline double e11_upper_fluct(const GainTable& t, Basis w, const FluctuationConfig& cfg,
                              double y11_lo) {
  t.validate();
  cfg.validate();
  if (!(y11_lo > 0.0))
    throw zero_yield_error("e11_upper_fluct: requires a positive Y_11 lower bound");
  auto eq_lo = [&](int i, int j) {
    return detail::fluctuation_interval(t.at(w, i, j).eq, cfg).lo;
  };
  auto eq_hi = [&](int i, int j) {
    return detail::fluctuation_interval(t.at(w, i, j).eq, cfg).hi;
  };
  auto ew = [&](int i, int j) { return detail::exp_weight(t, i, j); };
  const double g4_lo = ew(0, 1) * eq_lo(0, 1) + ew(1, 0) * eq_lo(1, 0) - eq_hi(0, 0);
  const double num = ew(1, 1) * eq_hi(1, 1) - g4_lo;
  const double den = t.alice.decoy * t.bob.decoy * y11_lo;
  return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace mdiqkd
