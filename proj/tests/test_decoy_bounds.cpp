#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/photon_number.hpp"
#include "support/test_support.hpp"

using namespace mdiqkd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GainTable zero_table() {
  return GainTable{{0.0, 0.05, 0.3}, {0.0, 0.05, 0.3}, {}};
}

GainTable standard_table() {
  return build_gain_table(ChannelParams{}, {0.0, 0.01, 0.36}, {0.0, 0.01, 0.36});
}

}  // namespace

TEST_CASE("abc_alpha on the symmetric example", "[bounds]") {
  const DecoyRatios r = abc_alpha({0.0, 0.1, 0.3}, {0.0, 0.1, 0.3});
  // (M^3 - m^3) / (M m (M + m)) and (M^4 - m^4) / (2 M^2 m^2)
  CHECK_THAT(r.a, WithinRel(13.0 / 6.0, 1e-13));
  CHECK_THAT(r.b, WithinRel(13.0 / 6.0, 1e-13));
  CHECK_THAT(r.c, WithinRel(40.0 / 9.0, 1e-13));
  CHECK(r.alpha == std::min({r.a, r.b, r.c}));
  CHECK(r.alpha == r.a);
}

TEST_CASE("abc_alpha near coinciding intensities", "[bounds]") {
  const double m2 = 0.3, m1 = 0.999 * m2;
  const DecoyRatios r = abc_alpha({0.0, m1, m2}, {0.0, m1, m2});
  CHECK(r.a > 0.0);
  CHECK(r.b > 0.0);
  CHECK(r.c > 0.0);
  CHECK(r.alpha < 0.01);
}

TEST_CASE("abc_alpha rejects bad intensity ordering", "[bounds]") {
  CHECK_THROWS_AS(abc_alpha({0.0, 0.3, 0.1}, {0.0, 0.1, 0.3}), std::invalid_argument);
  CHECK_THROWS_AS(abc_alpha({0.0, 0.1, 0.3}, {0.0, 0.3, 0.3}), std::invalid_argument);
}

TEST_CASE("a, b, c floor their whole ratio families", "[bounds][property]") {
  std::mt19937_64 rng(0x10aded);
  for (int trial = 0; trial < 50; ++trial) {
    const auto [alice, bob] = testsupport::random_intensities(rng);
    const double m1 = alice.decoy, m2 = alice.signal, n1 = bob.decoy, n2 = bob.signal;
    const DecoyRatios r = abc_alpha(alice, bob);
    REQUIRE(r.a >= 0.0);
    REQUIRE(r.b >= 0.0);
    REQUIRE(r.c >= 0.0);
    for (int n = 2; n <= 20; ++n) {
      const double pn2 = std::pow(m2, n), pn1 = std::pow(m1, n);
      const double row_b = (pn2 * n2 - pn1 * n1) / (pn2 * n1 + pn1 * n2);
      REQUIRE(row_b >= r.b - 1e-12);
      for (int m = 2; m <= 20; ++m) {
        const double qm2 = std::pow(n2, m), qm1 = std::pow(n1, m);
        if (n == 2) {
          const double row_a = (m2 * qm2 - m1 * qm1) / (m2 * qm1 + m1 * qm2);
          REQUIRE(row_a >= r.a - 1e-12);
        }
        const double row_c = (pn2 * qm2 - pn1 * qm1) / (pn2 * qm1 + pn1 * qm2);
        REQUIRE(row_c >= r.c - 1e-12);
      }
    }
    // the bound denominator stays positive
    REQUIRE(m1 * n1 - m2 * n2 + r.alpha * m2 * n1 + r.alpha * m1 * n2 > 0.0);
  }
}

TEST_CASE("g terms on degenerate tables", "[bounds]") {
  const GainTable zeros = zero_table();
  const DecoyRatios r = abc_alpha(zeros.alice, zeros.bob);
  const GTerms g = g123(zeros, Basis::z, r.alpha);
  CHECK(g.g1 == 0.0);
  CHECK(g.g2 == 0.0);
  CHECK(g.g3 == 0.0);
  CHECK(g4(zeros, Basis::z) == 0.0);
  CHECK(y11_lower(zeros, Basis::z) == 0.0);
}

TEST_CASE("g2 equals g3 on a fully symmetric table", "[bounds]") {
  const GainTable t = standard_table();  // equal triples, equal arms
  const DecoyRatios r = abc_alpha(t.alice, t.bob);
  const GTerms g = g123(t, Basis::x, r.alpha);
  CHECK_THAT(g.g2, WithinRel(g.g3, 1e-12));
}

TEST_CASE("g terms match independent recomputation", "[bounds]") {
  const GainTable t = build_gain_table(ChannelParams{}, {0.0, 0.05, 0.36}, {0.0, 0.07, 0.42});
  const DecoyRatios r = abc_alpha(t.alice, t.bob);
  for (Basis w : all_bases) {
    auto q = [&](int i, int j) { return t.at(w, i, j).q; };
    auto eq = [&](int i, int j) { return t.at(w, i, j).eq; };
    auto ew = [&](int i, int j) { return std::exp(t.alice.at(i) + t.bob.at(j)); };
    const double terms1[] = {ew(0, 2) * q(0, 2), ew(2, 0) * q(2, 0), -ew(0, 1) * q(0, 1),
                             -ew(1, 0) * q(1, 0)};
    const double terms2[] = {ew(2, 1) * q(2, 1), -ew(0, 1) * q(0, 1), -ew(2, 0) * q(2, 0),
                             q(0, 0)};
    const double terms3[] = {ew(1, 2) * q(1, 2), -ew(0, 2) * q(0, 2), -ew(1, 0) * q(1, 0),
                             q(0, 0)};
    const double terms4[] = {ew(0, 1) * eq(0, 1), ew(1, 0) * eq(1, 0), -eq(0, 0)};
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (double v : terms1) s1 += v;
    for (double v : terms2) s2 += v;
    for (double v : terms3) s3 += v;
    for (double v : terms4) s4 += v;
    const GTerms g = g123(t, w, r.alpha);
    REQUIRE_THAT(g.g1, WithinRel(s1, 1e-12));
    REQUIRE_THAT(g.g2, WithinRel(r.alpha * s2, 1e-12));
    REQUIRE_THAT(g.g3, WithinRel(r.alpha * s3, 1e-12));
    REQUIRE_THAT(g4(t, w), WithinRel(s4, 1e-12));
  }
}

TEST_CASE("g4 closed form for a uniform-error table", "[bounds]") {
  GainTable t = zero_table();
  // EQ = e_0 q at the three cells entering g4
  const double q = 1e-3, e0 = 0.5;
  t.at(Basis::z, 0, 1) = {q, e0 * q};
  t.at(Basis::z, 1, 0) = {q, e0 * q};
  t.at(Basis::z, 0, 0) = {q, e0 * q};
  const double expected = e0 * q * (std::exp(t.bob.decoy) + std::exp(t.alice.decoy) - 1.0);
  CHECK_THAT(g4(t, Basis::z), WithinRel(expected, 1e-14));
}

TEST_CASE("bounds at the standard operating point", "[bounds]") {
  const GainTable t = standard_table();
  const double y11_z = y11_lower(t, Basis::z);
  const double y11_x = y11_lower(t, Basis::x);
  CHECK_THAT(y11_z, WithinRel(4.1966604877414753e-3, 1e-9));
  CHECK_THAT(y11_x, WithinRel(3.6873446022174078e-3, 1e-9));
  CHECK_THAT(e11_upper(t, Basis::x, y11_x), WithinRel(2.7241543632366669e-2, 1e-9));
}

TEST_CASE("e11_upper requires a positive yield bound", "[bounds]") {
  const GainTable t = standard_table();
  CHECK_THROWS_AS(e11_upper(t, Basis::x, 0.0), zero_yield_error);
  CHECK_THROWS_AS(e11_upper(t, Basis::x, -1.0), zero_yield_error);
}

TEST_CASE("error-free ground truth gives a zero error bound", "[bounds]") {
  std::mt19937_64 rng(0xe0e0);
  YieldMatrix ym = testsupport::random_yield_matrix(rng);
  std::fill(ym.errors.begin(), ym.errors.end(), 0.0);
  const IntensityTriple a{0.0, 0.1, 0.4};
  const GainTable t = gain_table_from_yields(ym, ym, a, a);
  const double lo = y11_lower(t, Basis::z);
  REQUIRE(lo > 0.0);
  CHECK(e11_upper(t, Basis::z, lo) == 0.0);
}

TEST_CASE("bounds are sound against the photon-number oracle", "[bounds][oracle]") {
  std::mt19937_64 rng(0x0b5e55);
  int checked_e11 = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const YieldMatrix ym_x = testsupport::random_yield_matrix(rng);
    const YieldMatrix ym_z = testsupport::random_yield_matrix(rng);
    const auto [alice, bob] = testsupport::random_intensities(rng);
    const GainTable t = gain_table_from_yields(ym_x, ym_z, alice, bob);
    for (Basis w : all_bases) {
      const YieldMatrix& truth = w == Basis::x ? ym_x : ym_z;
      const double lo = y11_lower(t, w);
      REQUIRE(lo <= truth.y(1, 1) + 1e-12);
      if (lo > 0.0) {
        REQUIRE(e11_upper(t, w, lo) >= truth.e(1, 1) - 1e-12);
        ++checked_e11;
      }
    }
  }
  CHECK(checked_e11 > 0);
}

TEST_CASE("identical tables give identical bounds in either basis label", "[bounds]") {
  GainTable t = standard_table();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.at(Basis::z, i, j) = t.at(Basis::x, i, j);
  CHECK(y11_lower(t, Basis::x) == y11_lower(t, Basis::z));
  const double lo = y11_lower(t, Basis::x);
  REQUIRE(lo > 0.0);
  CHECK(e11_upper(t, Basis::x, lo) == e11_upper(t, Basis::z, lo));
}

TEST_CASE("weaker decoys tighten the bound toward the exact yield", "[bounds]") {
  const ChannelParams p;
  const double exact = infinite_decoy_baseline(p, Basis::z).first;
  double prev = 0.0;
  for (double decoy : {0.05, 0.04, 0.03, 0.02, 0.01}) {
    const IntensityTriple a{0.0, decoy, 0.36};
    const double lo = y11_lower(build_gain_table(p, a, a), Basis::z);
    REQUIRE(lo <= exact);
    REQUIRE(lo > prev);
    prev = lo;
  }
}

TEST_CASE("compute_bounds bundles the per-operation results", "[bounds]") {
  const GainTable t = standard_table();
  const BoundResult b = compute_bounds(t);
  CHECK(b.ratios.alpha == abc_alpha(t.alice, t.bob).alpha);
  for (Basis w : all_bases) {
    const auto& pb = b.basis(w);
    CHECK(pb.y11_lower == y11_lower(t, w));
    CHECK(pb.g4 == g4(t, w));
    if (pb.y11_lower > 0.0) CHECK(pb.e11_upper == e11_upper(t, w, pb.y11_lower));
  }

  // a zero table has no provable yield; the error bound degrades to 1
  const BoundResult zb = compute_bounds(zero_table());
  CHECK(zb.z.y11_lower == 0.0);
  CHECK(zb.z.e11_upper == 1.0);
}
