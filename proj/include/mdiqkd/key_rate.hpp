#pragma once

// Secret key rate from bound estimates, exhaustive intensity-grid
// optimization, and transmission scans. Grid evaluations are pure, so they
// may run in any order or in parallel; the reduction is a fixed
// lexicographic tie-break that makes the optimum deterministic.

#include <algorithm>
#include <cmath>
#include <future>
#include <span>
#include <stdexcept>
#include <vector>

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/finite_key.hpp"
#include "mdiqkd/photon_number.hpp"
#include "mdiqkd/types.hpp"

namespace mdiqkd {

// Binary Shannon entropy H(x) = -x log2 x - (1-x) log2 (1-x), extended
// continuously with H(0) = H(1) = 0.
inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("binary_entropy: argument must be in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

struct KeyRatePoint {
  double rate = 0.0;      // secret key rate per pulse pair, clamped at 0
  double rate_raw = 0.0;  // unclamped value, kept for diagnostics
  IntensityTriple alice;
  IntensityTriple bob;
  double y11_z = 0.0;  // Y_11 bound (or exact value) fed into the rate
  double e11_x = 1.0;  // e_11 bound (or exact value); 1 when unbounded
  double q_z = 0.0;    // measured signal-signal z gain
  double e_z = 0.0;    // measured signal-signal z error rate
};

// R = mu2 nu2 e^{-mu2-nu2} Y11_z [1 - H(e11_x)] - Q_z f H(E_z).
// The single-photon term contributes only when a positive Y_11 bound
// exists and e11_x < 1/2; past that point no key is distillable from the
// single-photon fraction and the term is dropped rather than letting
// 1 - H(x) turn positive again for x > 1/2.
inline KeyRatePoint key_rate(const GainTable& t, const ChannelParams& p, double y11_z,
                             double e11_x) {
  t.validate();
  p.validate();
  const GainPoint signal = t.at(Basis::z, 2, 2);
  KeyRatePoint out;
  out.alice = t.alice;
  out.bob = t.bob;
  out.y11_z = y11_z;
  out.e11_x = e11_x;
  out.q_z = signal.q;
  out.e_z = signal.q > 0.0 ? signal.eq / signal.q : 0.0;
  const double ec_cost = signal.q * p.f_ec * binary_entropy(out.e_z);
  double single_photon = 0.0;
  if (y11_z > 0.0 && e11_x < 0.5) {
    const double m2 = t.alice.signal, n2 = t.bob.signal;
    single_photon = m2 * n2 * std::exp(-m2 - n2) * y11_z * (1.0 - binary_entropy(e11_x));
  }
  out.rate_raw = single_photon - ec_cost;
  out.rate = std::max(0.0, out.rate_raw);
  return out;
}

// Full pipeline for one choice of intensities: model gains -> decoy bounds
// (fluctuation-corrected when cfg has finite samples) -> key rate. The
// e_11^x bound needs the x-basis Y_11 lower bound; when that is zero the
// error rate is unbounded and the point yields no key.
inline KeyRatePoint evaluate_key_point(const ChannelParams& p, const IntensityTriple& alice,
                                       const IntensityTriple& bob,
                                       const FluctuationConfig& cfg) {
  const GainTable t = build_gain_table(p, alice, bob);
  const double y11_z = y11_lower_fluct(t, Basis::z, cfg);
  const double y11_x = y11_lower_fluct(t, Basis::x, cfg);
  const double e11_x = y11_x > 0.0 ? e11_upper_fluct(t, Basis::x, cfg, y11_x) : 1.0;
  return key_rate(t, p, y11_z, e11_x);
}

// Intensity search grid; by default the canonical 0.01..0.6 step 0.01 with
// both parties forced symmetric.
struct ScanGrid {
  double lo = 0.01;
  double hi = 0.6;
  double step = 0.01;
  bool symmetric = true;

  void validate() const {
    if (!(lo > 0.0) || !(hi > lo))
      throw std::invalid_argument("ScanGrid: need 0 < lo < hi");
    if (!(step > 0.0)) throw std::invalid_argument("ScanGrid: step must be > 0");
  }

  std::vector<double> values() const {
    validate();
    std::vector<double> v;
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    v.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) v.push_back(lo + static_cast<double>(k) * step);
    return v;
  }
};

namespace detail {

// Tie-break for equal rates: smaller signal, then smaller decoy intensity
// (Alice before Bob), giving a unique optimum independent of evaluation
// order.
inline bool better_point(const KeyRatePoint& cand, const KeyRatePoint& cur) {
  if (cand.rate != cur.rate) return cand.rate > cur.rate;
  if (cand.alice.signal != cur.alice.signal) return cand.alice.signal < cur.alice.signal;
  if (cand.alice.decoy != cur.alice.decoy) return cand.alice.decoy < cur.alice.decoy;
  if (cand.bob.signal != cur.bob.signal) return cand.bob.signal < cur.bob.signal;
  return cand.bob.decoy < cur.bob.decoy;
}

}  // namespace detail

// Exhaustive grid search for the rate-maximizing intensities, symmetric
// (mu = nu) or over all decoy/signal combinations with signal > decoy.
inline KeyRatePoint optimize_intensities(const ChannelParams& p, const ScanGrid& grid,
                                         const FluctuationConfig& cfg) {
  p.validate();
  cfg.validate();
  const std::vector<double> vals = grid.values();
  bool found = false;
  KeyRatePoint best;
  auto consider = [&](const IntensityTriple& a, const IntensityTriple& b) {
    const KeyRatePoint pt = evaluate_key_point(p, a, b, cfg);
    if (!found || detail::better_point(pt, best)) {
      best = pt;
      found = true;
    }
  };
  for (std::size_t i2 = 1; i2 < vals.size(); ++i2) {
    for (std::size_t i1 = 0; i1 < i2; ++i1) {
      const IntensityTriple a{0.0, vals[i1], vals[i2]};
      if (grid.symmetric) {
        consider(a, a);
      } else {
        for (std::size_t j2 = 1; j2 < vals.size(); ++j2)
          for (std::size_t j1 = 0; j1 < j2; ++j1)
            consider(a, IntensityTriple{0.0, vals[j1], vals[j2]});
      }
    }
  }
  if (!found)
    throw std::invalid_argument("optimize_intensities: grid has no point with signal > decoy");
  return best;
}

enum class Method { vacuum_weak, infinite };

inline const char* to_string(Method m) {
  return m == Method::vacuum_weak ? "vacuum+weak" : "infinite";
}

// Key-rate point for the infinite-decoy reference: Y_11 and e_11 are the
// exact model values, so only the signal intensity is searched. The decoy
// slot of the reported triple is a placeholder (it does not enter the
// rate).
inline KeyRatePoint optimize_signal_infinite(const ChannelParams& p, const ScanGrid& grid) {
  p.validate();
  const double y11_z = infinite_decoy_baseline(p, Basis::z).first;
  const double e11_x = infinite_decoy_baseline(p, Basis::x).second;
  bool found = false;
  KeyRatePoint best;
  for (double signal : grid.values()) {
    const IntensityTriple a{0.0, 0.5 * signal, signal};
    const GainTable t = build_gain_table(p, a, a);
    const KeyRatePoint pt = key_rate(t, p, y11_z, e11_x);
    if (!found || detail::better_point(pt, best)) {
      best = pt;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("optimize_signal_infinite: empty grid");
  return best;
}

struct ScanRecord {
  double eta = 0.0;         // per-arm transmission (eta_a = eta_b)
  Method method = Method::vacuum_weak;
  double sample_size = 0.0;  // pulse pairs per cell; infinity = asymptotic
  KeyRatePoint point;
};

// One optimized record per (transmission, method). Points are evaluated
// concurrently; a point whose evaluation fails is recorded with zero rate
// rather than dropped. The fluctuation config applies to the vacuum+weak
// method only; the infinite-decoy reference is always asymptotic.
inline std::vector<ScanRecord> scan_transmission(const ChannelParams& tmpl,
                                                 std::span<const double> etas,
                                                 const ScanGrid& grid,
                                                 const FluctuationConfig& cfg,
                                                 std::span<const Method> methods) {
  tmpl.validate();
  cfg.validate();
  grid.validate();
  if (etas.empty()) throw std::invalid_argument("scan_transmission: eta list is empty");
  if (methods.empty()) throw std::invalid_argument("scan_transmission: method list is empty");
  for (double eta : etas)
    if (!(eta > 0.0 && eta <= 1.0))
      throw std::invalid_argument("scan_transmission: eta must be in (0, 1]");

  std::vector<ScanRecord> records(etas.size() * methods.size());
  std::vector<std::future<void>> jobs;
  jobs.reserve(records.size());
  for (std::size_t ei = 0; ei < etas.size(); ++ei) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      ScanRecord& rec = records[ei * methods.size() + mi];
      rec.eta = etas[ei];
      rec.method = methods[mi];
      rec.sample_size = rec.method == Method::vacuum_weak
                            ? cfg.sample_size
                            : std::numeric_limits<double>::infinity();
      jobs.push_back(std::async(std::launch::async, [&tmpl, &grid, &cfg, &rec] {
        ChannelParams p = tmpl;
        p.eta_a = rec.eta;
        p.eta_b = rec.eta;
        try {
          rec.point = rec.method == Method::vacuum_weak ? optimize_intensities(p, grid, cfg)
                                                        : optimize_signal_infinite(p, grid);
        } catch (const std::exception&) {
          rec.point = KeyRatePoint{};  // failed point: zero rate, kept in the curve
        }
      }));
    }
  }
  for (std::future<void>& j : jobs) j.get();
  return records;
}

}  // namespace mdiqkd
