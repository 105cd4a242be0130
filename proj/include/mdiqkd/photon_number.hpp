#pragma once

// Photon-number channel model evaluated by brute force: gains of a phase-
// randomized source are double Poisson mixtures of per-photon-number yields.
// Given an explicit (truncated) yield/error matrix this computes the exact
// observables, which makes it the independent ground truth the decoy-state
// bounds are tested against. Also provides the "infinitely many decoy
// states" baseline that reads the single-photon point straight out of a
// gain function.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/types.hpp"

namespace mdiqkd {

// Truncated (n, m)-indexed yields Y_nm and error rates e_nm for Alice
// sending n photons and Bob sending m photons, 0 <= n, m <= n_max.
struct YieldMatrix {
  int n_max = 25;
  std::vector<double> yields;
  std::vector<double> errors;

  static YieldMatrix zeros(int n_max) {
    if (n_max < 2) throw std::invalid_argument("YieldMatrix: n_max must be >= 2");
    const std::size_t n = static_cast<std::size_t>(n_max + 1);
    return YieldMatrix{n_max, std::vector<double>(n * n, 0.0), std::vector<double>(n * n, 0.0)};
  }

  std::size_t idx(int n, int m) const {
    if (n < 0 || n > n_max || m < 0 || m > n_max)
      throw std::out_of_range("YieldMatrix: photon-number index out of range");
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n_max + 1) +
           static_cast<std::size_t>(m);
  }

  double y(int n, int m) const { return yields[idx(n, m)]; }
  double& y(int n, int m) { return yields[idx(n, m)]; }
  double e(int n, int m) const { return errors[idx(n, m)]; }
  double& e(int n, int m) { return errors[idx(n, m)]; }

  void validate() const {
    if (n_max < 2) throw std::invalid_argument("YieldMatrix: n_max must be >= 2");
    const std::size_t expected =
        static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 1);
    if (yields.size() != expected || errors.size() != expected)
      throw std::invalid_argument("YieldMatrix: storage does not match n_max");
    for (double v : yields)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("YieldMatrix: yields must be in [0, 1]");
    for (double v : errors)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("YieldMatrix: error rates must be in [0, 1]");
  }
};

// Poisson probability e^{-mu} mu^n / n!; switches to log space above n = 20
// so large n cannot overflow the running product.
inline double poisson_weight(double mu, int n) {
  if (!std::isfinite(mu) || mu < 0.0)
    throw std::domain_error("poisson_weight: mu must be finite and >= 0");
  if (n < 0) throw std::domain_error("poisson_weight: n must be >= 0");
  if (n > 20)
    return std::exp(-mu + static_cast<double>(n) * std::log(mu) -
                    std::lgamma(static_cast<double>(n) + 1.0));
  double w = std::exp(-mu);
  for (int k = 1; k <= n; ++k) w *= mu / static_cast<double>(k);
  return w;
}

namespace detail {

inline std::vector<double> poisson_row(double mu, int n_max) {
  std::vector<double> row(static_cast<std::size_t>(n_max + 1));
  for (int n = 0; n <= n_max; ++n) row[static_cast<std::size_t>(n)] = poisson_weight(mu, n);
  return row;
}

}  // namespace detail

// Q = sum_{n,m} P(n|mu) P(m|nu) Y_nm and EQ = sum P P Y_nm e_nm over the
// truncated matrix. The Poisson mass dropped by the truncation must be
// below 1e-12 for each party or the result would be silently biased.
inline GainPoint gain_from_yields(const YieldMatrix& ym, double mu, double nu) {
  ym.validate();
  const std::vector<double> pa = detail::poisson_row(mu, ym.n_max);
  const std::vector<double> pb = detail::poisson_row(nu, ym.n_max);
  double mass_a = 0.0, mass_b = 0.0;
  for (double w : pa) mass_a += w;
  for (double w : pb) mass_b += w;
  if (1.0 - mass_a >= 1e-12 || 1.0 - mass_b >= 1e-12)
    throw truncation_error("gain_from_yields: Poisson tail beyond n_max exceeds 1e-12");
  double q = 0.0, eq = 0.0;
  for (int n = 0; n <= ym.n_max; ++n) {
    const double wa = pa[static_cast<std::size_t>(n)];
    for (int m = 0; m <= ym.n_max; ++m) {
      const double w = wa * pb[static_cast<std::size_t>(m)] * ym.y(n, m);
      q += w;
      eq += w * ym.e(n, m);
    }
  }
  return {q, eq};
}

// Ground-truth readout of the single-photon cell.
inline std::pair<double, double> exact_y11_e11(const YieldMatrix& ym) {
  ym.validate();
  return {ym.y(1, 1), ym.e(1, 1)};
}

// Builds a GainTable whose entries come from yield matrices instead of the
// analytic model; x and z bases may carry different matrices.
inline GainTable gain_table_from_yields(const YieldMatrix& ym_x, const YieldMatrix& ym_z,
                                        const IntensityTriple& alice,
                                        const IntensityTriple& bob) {
  alice.validate();
  bob.validate();
  GainTable t{alice, bob, {}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      t.at(Basis::x, i, j) = gain_from_yields(ym_x, alice.at(i), bob.at(j));
      t.at(Basis::z, i, j) = gain_from_yields(ym_z, alice.at(i), bob.at(j));
    }
  }
  return t;
}

// Extracts (Y_11, e_11) from any gain function Q(mu, nu). With
// F(mu, nu) = e^{mu+nu} Q(mu, nu), the coefficient of mu*nu is exactly
// Y_11, so the mixed forward difference of F at the origin converges to it;
// two Richardson levels over steps (delta, delta/2, delta/4) cancel the
// O(delta) and O(delta^2) truncation terms. e_11 comes the same way from
// G(mu, nu) = e^{mu+nu} Q E, divided by Y_11.
template <class GainFn>
std::pair<double, double> extract_single_photon(GainFn&& gain_fn, double delta = 4e-3) {
  if (!(delta > 0.0)) throw std::invalid_argument("extract_single_photon: delta must be > 0");
  struct Weighted {
    double f;  // e^{mu+nu} Q
    double g;  // e^{mu+nu} EQ
  };
  auto weighted = [&](double mu, double nu) -> Weighted {
    const GainPoint gp = gain_fn(mu, nu);
    const double w = std::exp(mu + nu);
    return {w * gp.q, w * gp.eq};
  };
  auto mixed = [&](double d) -> Weighted {
    const Weighted w11 = weighted(d, d);
    const Weighted w10 = weighted(d, 0.0);
    const Weighted w01 = weighted(0.0, d);
    const Weighted w00 = weighted(0.0, 0.0);
    const double inv_d2 = 1.0 / (d * d);
    return {(w11.f - w10.f - w01.f + w00.f) * inv_d2, (w11.g - w10.g - w01.g + w00.g) * inv_d2};
  };
  const Weighted m1 = mixed(delta);
  const Weighted m2 = mixed(0.5 * delta);
  const Weighted m3 = mixed(0.25 * delta);
  auto extrapolate = [](double c1, double c2, double c3) {
    return (4.0 * (2.0 * c3 - c2) - (2.0 * c2 - c1)) / 3.0;
  };
  const double y11 = extrapolate(m1.f, m2.f, m3.f);
  const double ge11 = extrapolate(m1.g, m2.g, m3.g);
  if (!(y11 > 0.0))
    throw zero_yield_error("extract_single_photon: extracted Y_11 is not positive");
  return {y11, ge11 / y11};
}

// Exact (Y_11, e_11) implied by the analytic channel model, i.e. what a
// protocol with infinitely many decoy states could estimate.
inline std::pair<double, double> infinite_decoy_baseline(const ChannelParams& p, Basis w) {
  p.validate();
  return extract_single_photon([&p, w](double mu, double nu) { return gains(p, w, mu, nu); });
}

}  // namespace mdiqkd
