#pragma once

// Closed-form vacuum+weak decoy-state bounds: a lower bound on the yield
// Y_11 and an upper bound on the error rate e_11 of the events where both
// parties sent a single photon, computed from the nine measured gains per
// basis. This is the analytical core of the toolkit.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdiqkd/types.hpp"

namespace mdiqkd {

// The three ratios whose minimum multiplies the multi-photon remainder
// terms. For signal/decoy intensities (mu2, mu1) and (nu2, nu1):
//   a = (mu2 nu2^2 - mu1 nu1^2) / (mu2 nu1^2 + mu1 nu2^2)
//   b = (mu2^2 nu2 - mu1^2 nu1) / (mu2^2 nu1 + mu1^2 nu2)
//   c = (mu2^2 nu2^2 - mu1^2 nu1^2) / (mu2^2 nu1^2 + mu1^2 nu2^2)
// Each is the n = m = 2 member of a family that is nondecreasing in the
// photon numbers, so alpha = min{a, b, c} multiplies every remainder term
// from below.
struct DecoyRatios {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double alpha = 0.0;
};

inline DecoyRatios abc_alpha(const IntensityTriple& alice, const IntensityTriple& bob) {
  alice.validate();
  bob.validate();
  const double m1 = alice.decoy, m2 = alice.signal;
  const double n1 = bob.decoy, n2 = bob.signal;
  DecoyRatios r;
  r.a = (m2 * n2 * n2 - m1 * n1 * n1) / (m2 * n1 * n1 + m1 * n2 * n2);
  r.b = (m2 * m2 * n2 - m1 * m1 * n1) / (m2 * m2 * n1 + m1 * m1 * n2);
  r.c = (m2 * m2 * n2 * n2 - m1 * m1 * n1 * n1) / (m2 * m2 * n1 * n1 + m1 * m1 * n2 * n2);
  r.alpha = std::min({r.a, r.b, r.c});
  return r;
}

namespace detail {

// e^{mu_i + nu_j} removes the Poisson normalization from a measured gain.
inline double exp_weight(const GainTable& t, int i, int j) {
  return std::exp(t.alice.at(i) + t.bob.at(j));
}

inline double bound_denominator(const IntensityTriple& a, const IntensityTriple& b,
                                double alpha) {
  return a.decoy * b.decoy - a.signal * b.signal + alpha * a.signal * b.decoy +
         alpha * a.decoy * b.signal;
}

}  // namespace detail

struct GTerms {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
};

// The vacuum/decoy/signal gain combinations entering the Y_11 bound:
//   g1 = e^{nu2} Q_{0 nu2} + e^{mu2} Q_{mu2 0} - e^{nu1} Q_{0 nu1} - e^{mu1} Q_{mu1 0}
//   g2 = alpha (e^{mu2+nu1} Q_{mu2 nu1} - e^{nu1} Q_{0 nu1} - e^{mu2} Q_{mu2 0} + Q_{00})
//   g3 = alpha (e^{mu1+nu2} Q_{mu1 nu2} - e^{nu2} Q_{0 nu2} - e^{mu1} Q_{mu1 0} + Q_{00})
inline GTerms g123(const GainTable& t, Basis w, double alpha) {
  auto q = [&](int i, int j) { return t.at(w, i, j).q; };
  auto ew = [&](int i, int j) { return detail::exp_weight(t, i, j); };
  GTerms g;
  g.g1 = ew(0, 2) * q(0, 2) + ew(2, 0) * q(2, 0) - ew(0, 1) * q(0, 1) - ew(1, 0) * q(1, 0);
  g.g2 = alpha * (ew(2, 1) * q(2, 1) - ew(0, 1) * q(0, 1) - ew(2, 0) * q(2, 0) + q(0, 0));
  g.g3 = alpha * (ew(1, 2) * q(1, 2) - ew(0, 2) * q(0, 2) - ew(1, 0) * q(1, 0) + q(0, 0));
  return g;
}

// Lower bound on Y_11:
//   [g1 + g2 + g3 - e^{mu2+nu2} Q_{mu2 nu2} + e^{mu1+nu1} Q_{mu1 nu1}]
//     / [mu1 nu1 - mu2 nu2 + alpha mu2 nu1 + alpha mu1 nu2]
// floored at 0. The denominator is provably positive for alpha derived
// from valid intensities; a nonpositive value here means broken inputs.
inline double y11_lower(const GainTable& t, Basis w) {
  t.validate();
  const DecoyRatios r = abc_alpha(t.alice, t.bob);
  const GTerms g = g123(t, w, r.alpha);
  const double num = g.g1 + g.g2 + g.g3 -
                     detail::exp_weight(t, 2, 2) * t.at(w, 2, 2).q +
                     detail::exp_weight(t, 1, 1) * t.at(w, 1, 1).q;
  const double den = detail::bound_denominator(t.alice, t.bob, r.alpha);
  if (!(den > 0.0))
    throw inconsistency_error("y11_lower: bound denominator is not positive");
  return std::max(0.0, num / den);
}

// Error-weighted analogue of g1 for the e_11 bound:
//   g4 = e^{nu1} Q_{0 nu1} E_{0 nu1} + e^{mu1} Q_{mu1 0} E_{mu1 0} - Q_{00} E_{00}
inline double g4(const GainTable& t, Basis w) {
  auto eq = [&](int i, int j) { return t.at(w, i, j).eq; };
  return detail::exp_weight(t, 0, 1) * eq(0, 1) + detail::exp_weight(t, 1, 0) * eq(1, 0) -
         eq(0, 0);
}

// Upper bound on e_11, valid only against a positive Y_11 lower bound:
//   [e^{mu1+nu1} Q_{mu1 nu1} E_{mu1 nu1} - g4] / [mu1 nu1 Y11_lower]
// clamped into [0, 1]. A caller holding y11_lo = 0 must treat the point as
// yielding zero key instead of calling this.
inline double e11_upper(const GainTable& t, Basis w, double y11_lo) {
  t.validate();
  if (!(y11_lo > 0.0))
    throw zero_yield_error("e11_upper: requires a positive Y_11 lower bound");
  const double num = detail::exp_weight(t, 1, 1) * t.at(w, 1, 1).eq - g4(t, w);
  const double den = t.alice.decoy * t.bob.decoy * y11_lo;
  return std::clamp(num / den, 0.0, 1.0);
}

// Bundle of everything the bound computation produces for one gain table.
// e11_upper is reported as the trivial bound 1 for a basis whose Y_11
// lower bound is zero.
struct BoundResult {
  DecoyRatios ratios;
  struct PerBasis {
    double g1 = 0.0, g2 = 0.0, g3 = 0.0, g4 = 0.0;
    double y11_lower = 0.0;
    double e11_upper = 1.0;
  };
  PerBasis x;
  PerBasis z;

  const PerBasis& basis(Basis w) const { return w == Basis::x ? x : z; }
};

inline BoundResult compute_bounds(const GainTable& t) {
  t.validate();
  BoundResult out;
  out.ratios = abc_alpha(t.alice, t.bob);
  for (Basis w : all_bases) {
    BoundResult::PerBasis& pb = w == Basis::x ? out.x : out.z;
    const GTerms g = g123(t, w, out.ratios.alpha);
    pb.g1 = g.g1;
    pb.g2 = g.g2;
    pb.g3 = g.g3;
    pb.g4 = g4(t, w);
    pb.y11_lower = y11_lower(t, w);
    pb.e11_upper = pb.y11_lower > 0.0 ? e11_upper(t, w, pb.y11_lower) : 1.0;
  }
  return out;
}

}  // namespace mdiqkd
