#pragma once

// Eve-absent analytic channel model: gains and error-weighted gains of the
// untrusted relay for weak coherent pulses in the x and z bases.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdiqkd/types.hpp"

namespace mdiqkd {

// Modified Bessel function of the first kind, I0(x), by ascending power
// series: sum_k (x/2)^{2k} / (k!)^2. The series is terminated once a term
// drops below 1e-16 of the running sum, which keeps the result within
// ~1e-14 absolute for the small arguments this model produces (x <~ 30).
inline double bessel_i0(double x) {
  if (!std::isfinite(x) || x < 0.0)
    throw std::domain_error("bessel_i0: argument must be finite and >= 0");
  const double quarter_x2 = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= quarter_x2 / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

namespace detail {

inline void check_intensity_args(const ChannelParams& p, double mu, double nu) {
  p.validate();
  if (!std::isfinite(mu) || !std::isfinite(nu) || mu < 0.0 || nu < 0.0)
    throw std::invalid_argument("gains: intensities must be finite and >= 0");
}

}  // namespace detail

// x-basis gain and error-weighted gain for mean photon numbers (mu, nu).
//   mu' = eta_a mu + eta_b nu,  s = sqrt(eta_a mu * eta_b nu)/2,
//   y   = (1 - P_d) exp(-mu'/4)       (y decays with channel loss)
//   Q^x  = 2 y^2 [1 + 2y^2 - 4y I0(s) + I0(2s)]
//   EQ^x = e_0 Q^x - 2 (e_0 - e_d) y^2 [I0(2s) - 1]
inline GainPoint gains_x(const ChannelParams& p, double mu, double nu) {
  detail::check_intensity_args(p, mu, nu);
  const double mu_prime = p.eta_a * mu + p.eta_b * nu;
  const double s = 0.5 * std::sqrt((p.eta_a * mu) * (p.eta_b * nu));
  const double y = (1.0 - p.dark_count) * std::exp(-0.25 * mu_prime);
  const double i0_s = bessel_i0(s);
  const double i0_2s = bessel_i0(2.0 * s);
  const double y2 = y * y;
  const double q = std::max(0.0, 2.0 * y2 * (1.0 + 2.0 * y2 - 4.0 * y * i0_s + i0_2s));
  const double eq = p.background_error * q -
                    2.0 * (p.background_error - p.misalignment) * y2 * (i0_2s - 1.0);
  return {q, std::clamp(eq, 0.0, q)};
}

// z-basis gain split into a correct-coincidence part Q_C and a
// dark-count-driven erroneous part Q_E:
//   Q_C  = 2 (1-P_d)^2 e^{-mu'/2} [1-(1-P_d)e^{-eta_a mu/2}] [1-(1-P_d)e^{-eta_b nu/2}]
//   Q_E  = 2 P_d (1-P_d)^2 e^{-mu'/2} [I0(2s) - (1-P_d) e^{-mu'/2}]
//   Q^z  = Q_C + Q_E,   EQ^z = e_d Q_C + (1 - e_d) Q_E
inline GainPoint gains_z(const ChannelParams& p, double mu, double nu) {
  detail::check_intensity_args(p, mu, nu);
  const double pd = p.dark_count;
  const double mu_prime = p.eta_a * mu + p.eta_b * nu;
  const double s = 0.5 * std::sqrt((p.eta_a * mu) * (p.eta_b * nu));
  const double damp = std::exp(-0.5 * mu_prime);
  const double one_m_pd = 1.0 - pd;
  const double q_c = std::max(0.0, 2.0 * one_m_pd * one_m_pd * damp *
                                       ((1.0 - one_m_pd * std::exp(-0.5 * p.eta_a * mu)) *
                                        (1.0 - one_m_pd * std::exp(-0.5 * p.eta_b * nu))));
  const double q_e = std::max(0.0, 2.0 * pd * one_m_pd * one_m_pd * damp *
                                       (bessel_i0(2.0 * s) - one_m_pd * damp));
  const double q = q_c + q_e;
  const double eq = p.misalignment * q_c + (1.0 - p.misalignment) * q_e;
  return {q, std::clamp(eq, 0.0, q)};
}

inline GainPoint gains(const ChannelParams& p, Basis w, double mu, double nu) {
  return w == Basis::x ? gains_x(p, mu, nu) : gains_z(p, mu, nu);
}

// Evaluates the model at all 9 intensity pairs in both bases.
inline GainTable build_gain_table(const ChannelParams& p, const IntensityTriple& alice,
                                  const IntensityTriple& bob) {
  p.validate();
  alice.validate();
  bob.validate();
  GainTable t{alice, bob, {}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      t.at(Basis::x, i, j) = gains_x(p, alice.at(i), bob.at(j));
      t.at(Basis::z, i, j) = gains_z(p, alice.at(i), bob.at(j));
    }
  }
  return t;
}

}  // namespace mdiqkd
