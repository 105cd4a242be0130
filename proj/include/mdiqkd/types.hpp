#pragma once

// Shared domain types for the decoy-state MDI-QKD analysis toolkit:
// channel constants, per-party intensity triples, and measured gain tables.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdiqkd {

enum class Basis { x, z };

inline constexpr std::array<Basis, 2> all_bases{Basis::x, Basis::z};

inline const char* to_string(Basis b) { return b == Basis::x ? "x" : "z"; }

// Thrown when a computed quantity violates a structural guarantee of the
// bound derivation (e.g. a denominator that must be positive is not).
// Signals a bug or corrupted input, not a recoverable condition.
class inconsistency_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Thrown by operations that require a provably positive single-photon yield.
class zero_yield_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a truncated photon-number sum would drop non-negligible
// Poisson tail mass.
class truncation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Detector and channel constants. Defaults are the standard simulation
// parameter set used throughout the docs and tests.
struct ChannelParams {
  double misalignment = 0.015;    // e_d, in [0, 0.5]
  double dark_count = 3e-6;       // P_d per detector per gate, in [0, 1)
  double eta_a = 0.1;             // Alice-arm transmission, in (0, 1]
  double eta_b = 0.1;             // Bob-arm transmission, in (0, 1]
  double background_error = 0.5;  // e_0, fixed at 1/2
  double f_ec = 1.16;             // error-correction inefficiency, >= 1

  void validate() const {
    if (!(misalignment >= 0.0 && misalignment <= 0.5))
      throw std::invalid_argument("ChannelParams: e_d must be in [0, 0.5]");
    if (!(dark_count >= 0.0 && dark_count < 1.0))
      throw std::invalid_argument("ChannelParams: P_d must be in [0, 1)");
    if (!(eta_a > 0.0 && eta_a <= 1.0) || !(eta_b > 0.0 && eta_b <= 1.0))
      throw std::invalid_argument("ChannelParams: eta_a, eta_b must be in (0, 1]");
    if (background_error != 0.5)
      throw std::invalid_argument("ChannelParams: e_0 is fixed at 1/2");
    if (!(f_ec >= 1.0))
      throw std::invalid_argument("ChannelParams: f must be >= 1");
  }
};

// One party's three pulse intensities. The vacuum intensity is exactly zero
// and the ordering signal > decoy > 0 is a hard invariant.
struct IntensityTriple {
  double vacuum = 0.0;
  double decoy = 0.0;
  double signal = 0.0;

  double at(int idx) const {
    switch (idx) {
      case 0: return vacuum;
      case 1: return decoy;
      case 2: return signal;
      default: throw std::out_of_range("IntensityTriple: index must be 0, 1 or 2");
    }
  }

  void validate() const {
    if (vacuum != 0.0)
      throw std::invalid_argument("IntensityTriple: vacuum intensity must be exactly 0");
    if (!(decoy > 0.0) || !(signal > decoy))
      throw std::invalid_argument("IntensityTriple: need signal > decoy > 0");
  }
};

// Gain Q and error-weighted gain E*Q for one intensity pair and basis.
// Downstream formulas consume EQ directly; the ratio E = EQ/Q is never
// required, so vacuum-vacuum cells need no special casing.
struct GainPoint {
  double q = 0.0;   // in [0, 1]
  double eq = 0.0;  // in [0, q]

  bool valid() const { return q >= 0.0 && q <= 1.0 && eq >= 0.0 && eq <= q; }
};

// All 18 observables for a pair of intensity triples: 3x3 intensity pairs
// per basis, keyed by intensity index (0 = vacuum, 1 = decoy, 2 = signal).
struct GainTable {
  IntensityTriple alice;
  IntensityTriple bob;
  std::array<GainPoint, 18> entries{};

  static std::size_t slot(Basis w, int i, int j) {
    if (i < 0 || i > 2 || j < 0 || j > 2)
      throw std::out_of_range("GainTable: intensity index must be 0, 1 or 2");
    return static_cast<std::size_t>(w == Basis::z) * 9 +
           static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(j);
  }

  GainPoint& at(Basis w, int i, int j) { return entries[slot(w, i, j)]; }
  const GainPoint& at(Basis w, int i, int j) const { return entries[slot(w, i, j)]; }

  void validate() const {
    alice.validate();
    bob.validate();
    for (const GainPoint& g : entries)
      if (!g.valid())
        throw std::invalid_argument("GainTable: entry violates 0 <= EQ <= Q <= 1");
  }
};

}  // namespace mdiqkd
