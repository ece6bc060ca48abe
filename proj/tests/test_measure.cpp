#include <doctest.h>

#include "ensemble/errors.hpp"
#include "ensemble/measure.hpp"
#include "support.hpp"

using namespace ensemble;
using support::big;
using support::geom2;
using support::sym;
using support::three_point;

namespace {

oracle::Big g2(std::uint64_t a) { return oracle::geometric_mass(oracle::big(1, 2), a); }
oracle::Big tp(std::uint64_t a) { return a == 0 ? oracle::big(1, 2) : oracle::big(1, 4); }

std::vector<oracle::Word> random_subset(oracle::Lcg& rng, const std::vector<oracle::Word>& universe, std::uint64_t one_in) {
  std::vector<oracle::Word> s;
  for (const auto& w : universe)
    if (rng.below(one_in) == 0) s.push_back(w);
  return s;
}

}  // namespace

TEST_CASE("from_distribution") {
  const auto r = MeasureRepresentation::from_distribution(geom2());
  CHECK(r.eval(SymbolString{}) == Rational(1));
  CHECK(r(SymbolString{0}) == Rational(1, 2));
  CHECK(r.consistency_residual(SymbolString{}, 3) == Rational(1, 8));
  CHECK(r.mass(PrefixFreeSet{SymbolString{0}, SymbolString{1}}) == Rational(3, 4));
}

TEST_CASE("representation invariants: bounds and certified consistency gap") {
  for (const auto& p : {geom2(), three_point(), DiscreteDistribution::geometric(Rational(2, 5))}) {
    const auto r = MeasureRepresentation::from_distribution(p);
    for (const auto& w : oracle::words_up_to({0, 1, 2}, 3)) {
      const SymbolString sigma = support::str(w);
      const Rational v = r.eval(sigma);
      CHECK(v >= Rational(0));
      CHECK(v <= Rational(1));
      for (std::uint64_t m : {0, 1, 2, 3, 5, 12}) {
        Rational children(0);
        for (const Symbol a : r.alphabet().first(m)) children += r.eval(sigma.extended(a));
        CHECK(children <= v);
        CHECK(v - children <= r.consistency_residual(sigma, m));
      }
    }
  }
}

TEST_CASE("restrict") {
  const PrefixFreeSet e{SymbolString{0}, SymbolString{1, 0}, SymbolString{1, 1}};
  CHECK(restrict(e, SymbolString{1}).members == PrefixFreeSet{SymbolString{1, 0}, SymbolString{1, 1}});
  CHECK(restrict(e, SymbolString{}).members == e);
  CHECK(restrict(e, SymbolString{2}).members.empty());
  CHECK(restrict(e, SymbolString{0, 4}).members.empty());
  CHECK(restrict(e, SymbolString{1}).anchor == SymbolString{1});
}

TEST_CASE("check_restriction_bound examples") {
  const auto r = MeasureRepresentation::from_distribution(geom2());
  const auto b = check_restriction_bound(r, PrefixFreeSet{SymbolString{0, 0}, SymbolString{0, 1}}, SymbolString{0});
  CHECK(b.holds);
  CHECK(b.margin == Rational(1, 2) - (Rational(1, 4) + Rational(1, 8)));
  CHECK(b.margin == Rational(1, 8));
  const auto empty = check_restriction_bound(r, PrefixFreeSet{}, SymbolString{2});
  CHECK(empty.holds);
  CHECK(empty.margin == Rational(1, 8));
  const auto anchor = check_restriction_bound(r, PrefixFreeSet{SymbolString{1, 2}}, SymbolString{1, 2});
  CHECK(anchor.holds);
  CHECK(anchor.margin == Rational(0));
}

TEST_CASE("check_covering_equality: all length-2 extensions over the first m symbols") {
  const auto r = MeasureRepresentation::from_distribution(geom2());
  const SymbolString rho{1};
  Rational previous_gap(1);
  for (std::uint64_t m = 1; m <= 8; ++m) {
    std::vector<oracle::Word> e;
    std::vector<std::uint64_t> symbols;
    for (std::uint64_t a = 0; a < m; ++a) symbols.push_back(a);
    for (auto w : oracle::words_of_length(symbols, 2)) {
      w.insert(w.begin(), 1);
      e.push_back(w);
    }
    const auto report = check_covering_equality(r, PrefixFreeSet(support::strs(e)), rho, m);
    // gap = P(rho) (1 - (1 - 2^-m)^2), the mass outside the truncated square.
    const oracle::Big t = oracle::power(oracle::big(1, 2), m);
    const oracle::Big expected = oracle::big(1, 4) * (1 - (1 - t) * (1 - t));
    CHECK(big(report.gap) == expected);
    CHECK(report.equal_up_to_residual);
    CHECK(report.gap <= report.residual);
    CHECK(report.gap < previous_gap);
    CHECK(report.nodes == 1 + m);
    previous_gap = report.gap;
  }
}

TEST_CASE("check_covering_equality: trivial and exact covers") {
  const auto r = MeasureRepresentation::from_distribution(geom2());
  const auto self = check_covering_equality(r, PrefixFreeSet{SymbolString{0, 3}}, SymbolString{0, 3}, 4);
  CHECK(self.gap == Rational(0));
  CHECK(self.equal_up_to_residual);

  // Finite support inside the first m symbols: every depth-2 extension of lambda.
  const auto rt = MeasureRepresentation::from_distribution(three_point());
  const PrefixFreeSet all2(support::strs(oracle::words_of_length({0, 1, 2}, 2)));
  const auto exact = check_covering_equality(rt, all2, SymbolString{}, 3);
  CHECK(exact.gap == Rational(0));
  CHECK(exact.residual == Rational(0));
  CHECK(exact.equal_up_to_residual);
  // A mixed-depth cover.
  const PrefixFreeSet mixed{SymbolString{0}, SymbolString{1, 0}, SymbolString{1, 1}, SymbolString{1, 2}, SymbolString{2}};
  CHECK(check_covering_equality(rt, mixed, SymbolString{}, 3).gap == Rational(0));
}

TEST_CASE("check_covering_equality raises on an escaping extension") {
  const auto rt = MeasureRepresentation::from_distribution(three_point());
  try {
    (void)check_covering_equality(rt, PrefixFreeSet{SymbolString{0, 0}, SymbolString{0, 2}}, SymbolString{0}, 3);
    FAIL("expected CoverViolationError");
  } catch (const CoverViolationError& e) {
    CHECK(e.witness() == "[0 1]");
  }
}

TEST_CASE("open_set_measure examples") {
  const auto r = MeasureRepresentation::from_distribution(geom2());
  CHECK(open_set_measure(r, {SymbolString{0}, SymbolString{0, 1}}) == Rational(1, 2));
  CHECK(open_set_measure(r, {}) == Rational(0));
  CHECK(open_set_measure(r, {SymbolString{0}, SymbolString{1}, SymbolString{2}}) == Rational(7, 8));
}

TEST_CASE("open_set_measure of a single string is its cylinder value") {
  for (const auto& p : {geom2(), three_point()}) {
    const auto r = MeasureRepresentation::from_distribution(p);
    for (const auto& w : oracle::words_up_to({0, 1, 2}, 4)) {
      const SymbolString sigma = support::str(w);
      CHECK(open_set_measure(r, {sigma}) == r.eval(sigma));
      CHECK(open_set_measure(r, {sigma}) == cylinder_measure(p, sigma));
    }
  }
}

TEST_CASE("check_monotonicity examples") {
  const auto r = MeasureRepresentation::from_distribution(geom2());
  CHECK(check_monotonicity(r, PrefixFreeSet{SymbolString{0, 0}}, PrefixFreeSet{SymbolString{0}}, 8));
  const PrefixFreeSet e{SymbolString{1}, SymbolString{2, 2}};
  CHECK(check_monotonicity(r, e, e, 8));
  CHECK_THROWS_AS((void)check_monotonicity(r, PrefixFreeSet{SymbolString{0}}, PrefixFreeSet{SymbolString{0, 0}}, 8),
                  InclusionViolationError);
  // Over a finite alphabet a full fan of children covers the parent.
  const auto rt = MeasureRepresentation::from_distribution(three_point());
  CHECK(check_monotonicity(rt, PrefixFreeSet{SymbolString{}},
                           PrefixFreeSet{SymbolString{0}, SymbolString{1}, SymbolString{2}}, 3));
  // Over the naturals it does not: symbol 3 escapes.
  CHECK_THROWS_AS((void)check_monotonicity(r, PrefixFreeSet{SymbolString{}},
                                           PrefixFreeSet{SymbolString{0}, SymbolString{1}, SymbolString{2}}, 8),
                  InclusionViolationError);
}

TEST_CASE("inclusion_witness agrees with brute force") {
  const auto universe = oracle::words_up_to({0, 1, 2}, 3);
  const auto finite = three_point().alphabet();
  const auto naturals = CountableAlphabet::naturals();
  oracle::Lcg rng(23);
  int included = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto e = support::words(prefix_free_cover(support::strs(random_subset(rng, universe, 12))));
    auto f_raw = random_subset(rng, universe, 4);
    // Bias towards inclusions by adding some members of E.
    for (const auto& w : e)
      if (rng.below(2) == 0) f_raw.push_back(w);
    const auto f = support::words(prefix_free_cover(support::strs(f_raw)));
    const PrefixFreeSet pe(support::strs(e)), pf(support::strs(f));

    const bool fin = oracle::includes(e, f, {0, 1, 2}, false, 3);
    const auto wf = inclusion_witness(finite, pe, pf, 3);
    CHECK(fin == !wf.has_value());
    if (wf) {
      CHECK(pe.covers(*wf));
      CHECK_FALSE(pf.covers(*wf));
      // The witness is a string whose whole cylinder escapes F.
      for (const auto& member : pf) CHECK_FALSE(wf->comparable_with(member));
    }

    const bool inf = oracle::includes(e, f, {0, 1, 2}, true, 3);
    const auto wi = inclusion_witness(naturals, pe, pf, 8);
    CHECK(inf == !wi.has_value());
    if (wi) {
      CHECK(pe.covers(*wi));
      for (const auto& member : pf) CHECK_FALSE(wi->comparable_with(member));
    }
    included += inf;
  }
  CHECK(included > 100);
}

TEST_CASE("inclusion_witness budget on large finite alphabets") {
  // 40-symbol alphabet, F holds every child of lambda among the first 40: no
  // branch escapes within a scan of 10, and the alphabet is larger than 10.
  const auto big_finite = DiscreteDistribution::geometric(Rational(1, 2));
  std::vector<SymbolString> all;
  for (std::uint64_t a = 0; a < 12; ++a) all.push_back(SymbolString{a});
  CHECK_THROWS_AS((void)inclusion_witness(big_finite.alphabet(), PrefixFreeSet{SymbolString{}}, PrefixFreeSet(all), 10),
                  BudgetExhaustedError);
  const auto found = inclusion_witness(big_finite.alphabet(), PrefixFreeSet{SymbolString{}}, PrefixFreeSet(all), 13);
  REQUIRE(found.has_value());
  CHECK(*found == SymbolString{12});
}

TEST_CASE("finite subadditivity: every pair of depth-1 sets, random families at depth 3") {
  const auto r = MeasureRepresentation::from_distribution(geom2());
  const auto small = oracle::words_up_to({0, 1, 2}, 1);
  for (std::uint32_t a = 0; a < 16; ++a)
    for (std::uint32_t b = 0; b < 16; ++b) {
      std::vector<SymbolString> sa, sb;
      for (std::size_t i = 0; i < 4; ++i) {
        if (a & (1u << i)) sa.push_back(support::str(small[i]));
        if (b & (1u << i)) sb.push_back(support::str(small[i]));
      }
      std::vector<SymbolString> both = sa;
      both.insert(both.end(), sb.begin(), sb.end());
      CHECK(open_set_measure(r, both) <= open_set_measure(r, sa) + open_set_measure(r, sb));
    }

  const auto universe = oracle::words_up_to({0, 1, 2}, 3);
  oracle::Lcg rng(31);
  for (int trial = 0; trial < 1500; ++trial) {
    const auto k = 2 + rng.below(3);
    std::vector<oracle::Word> joined;
    Rational sum(0);
    for (std::uint64_t i = 0; i < k; ++i) {
      const auto s = random_subset(rng, universe, 8);
      sum += open_set_measure(r, support::strs(s));
      joined.insert(joined.end(), s.begin(), s.end());
    }
    const Rational whole = open_set_measure(r, support::strs(joined));
    CHECK(whole <= sum);
    CHECK(big(whole) == oracle::open_set_measure(joined, {0, 1, 2}, g2, oracle::big(1, 8), 3));
  }
}

TEST_CASE("disjoint additivity") {
  const auto universe = oracle::words_up_to({0, 1, 2}, 3);
  oracle::Lcg rng(37);
  int disjoint = 0;
  for (const auto& p : {geom2(), three_point()}) {
    const auto r = MeasureRepresentation::from_distribution(p);
    for (int trial = 0; trial < 4000; ++trial) {
      const auto a = support::strs(random_subset(rng, universe, 10));
      const auto b = support::strs(random_subset(rng, universe, 10));
      if (!open_sets_disjoint(a, b)) continue;
      ++disjoint;
      std::vector<SymbolString> both = a;
      both.insert(both.end(), b.begin(), b.end());
      CHECK(open_set_measure(r, both) == open_set_measure(r, a) + open_set_measure(r, b));
    }
  }
  CHECK(disjoint > 100);
}

TEST_CASE("restriction bound and monotonicity against the brute-force measure") {
  const auto universe = oracle::words_up_to({0, 1, 2}, 3);
  const auto nodes = oracle::words_up_to({0, 1, 2}, 2);
  const auto rt = MeasureRepresentation::from_distribution(three_point());
  oracle::Lcg rng(41);
  for (int trial = 0; trial < 600; ++trial) {
    const auto e = support::words(prefix_free_cover(support::strs(random_subset(rng, universe, 6))));
    const PrefixFreeSet pe(support::strs(e));
    CHECK(big(rt.mass(pe)) == oracle::open_set_measure(e, {0, 1, 2}, tp, 0, 3));
    for (const auto& rho : nodes) {
      const auto bound = check_restriction_bound(rt, pe, support::str(rho));
      CHECK(bound.holds);
      std::vector<oracle::Word> restricted;
      for (const auto& w : e)
        if (oracle::is_prefix(rho, w)) restricted.push_back(w);
      CHECK(big(bound.restricted_mass) == oracle::open_set_measure(restricted, {0, 1, 2}, tp, 0, 3));
    }
  }
}
