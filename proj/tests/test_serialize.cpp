#include <doctest.h>

#include <sstream>

#include "ensemble/errors.hpp"
#include "ensemble/serialize.hpp"
#include "support.hpp"

using namespace ensemble;
using support::geom2;
using support::sym;

TEST_CASE("distribution specs round-trip") {
  const auto g = distribution_from_json(Json::parse(R"({"family":"geometric","p":"1/2"})"));
  CHECK(g.mass(sym(2)) == Rational(1, 8));
  CHECK(distribution_to_json(g).dump() == R"({"family":"geometric","p":"1/2"})");

  const auto t = distribution_from_json(Json::parse(R"({"family":"table","masses":[["0","1/2"],["3","1/4"],[5,"1/4"]],"tail":"0"})"));
  CHECK(t.mass(sym(3)) == Rational(1, 4));
  CHECK(t.support_size() == 3u);
  const auto back = distribution_from_json(distribution_to_json(t));
  for (auto s : {0, 3, 5}) CHECK(back.mass(sym(s)) == t.mass(sym(s)));

  CHECK(distribution_from_json(Json::parse(R"({"family":"point","symbol":4})")).mass(sym(4)) == Rational(1));
  const auto prod = distribution_from_json(
      Json::parse(R"({"family":"product","factors":[{"family":"geometric","p":"1/2"},{"family":"point","symbol":1}]})"));
  const Symbol pair[2] = {sym(0), sym(1)};
  CHECK(prod.mass(prod.alphabet().join(pair)) == Rational(1, 2));
}

TEST_CASE("distribution spec errors") {
  CHECK_THROWS_WITH_AS(distribution_from_json(Json::parse(R"({"family":"zipf"})")), "unknown distribution family 'zipf'", Error);
  CHECK_THROWS_AS(distribution_from_json(Json::parse(R"({"family":"geometric","p":"1/0"})")), Error);
  CHECK_THROWS_AS(distribution_from_json(Json::parse(R"({"family":"geometric","p":0.5})")), Error);
  CHECK_THROWS_AS(distribution_from_json(Json::parse(R"({"family":"table","masses":[["0","1/2"]],"tail":"1/2"})")), Error);
  CHECK_THROWS_AS(distribution_from_json(Json::parse(R"({"p":"1/2"})")), Error);
}

TEST_CASE("events, random variables, rules and maps by name") {
  CHECK(event_from_json(Json("even")).member(sym(4)));
  CHECK(event_from_json(Json::parse(R"({"event":"set","members":[1,2]})")).member(sym(2)));
  const auto r = event_from_json(Json::parse(R"({"event":"residue","k":3,"r":1})"));
  CHECK(r.member(sym(7)));
  CHECK_FALSE(r.member(sym(6)));
  const auto both = event_from_json(Json::parse(R"({"event":"and","of":["odd",{"event":"at_least","k":5}]})"));
  CHECK(both.member(sym(5)));
  CHECK_FALSE(both.member(sym(3)));
  CHECK(event_from_json(Json::parse(R"({"event":"not","of":"even"})")).member(sym(1)));
  // No closed form for the intersection: a bracket around 1/48.
  const auto bracket = event_mass(geom2(), both);
  CHECK(bracket.lower <= Rational(1, 48));
  CHECK(Rational(1, 48) <= bracket.upper);
  CHECK_THROWS_AS(event_from_json(Json("prime")), Error);

  const auto n = CountableAlphabet::naturals();
  CHECK(random_variable_from_json(Json::parse(R"({"rv":"mod","k":3})"), n)(sym(8)) == sym(2));
  CHECK(random_variable_from_json(Json::parse(R"({"rv":"indicator","event":"odd"})"), n)(sym(3)) == sym(1));
  CHECK(random_variable_from_json(Json("identity"), n)(sym(9)) == sym(9));

  CHECK(selection_rule_from_name("after:2").name == "after:2");
  CHECK(selection_rule_from_name("every:3").decide(std::vector<Symbol>(6)) == Decision::yes);
  CHECK_THROWS_AS(selection_rule_from_name("sometimes"), Error);

  CHECK(index_map_from_name("affine 2 0").f(5) == 10);
  CHECK(index_map_from_name("shift 5").f(1) == 6);
  CHECK(index_map_from_name("swap_pairs").f(3) == 4);
  CHECK_THROWS_AS(index_map_from_name("affine 2"), Error);
}

TEST_CASE("stream files") {
  std::istringstream in("# provenance: x\n3\n\n  4 \n# note\n0\n");
  CHECK(parse_stream(in, CountableAlphabet::naturals(), "s") == std::vector<Symbol>{sym(3), sym(4), sym(0)});

  std::istringstream bad("1\n0\n7\n");
  try {
    (void)parse_stream(bad, CountableAlphabet::binary(), "bits.txt");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).rfind("bits.txt:3:", 0) == 0);
  }

  const auto pp = product_distribution({geom2(), geom2()});
  std::istringstream tuples("0,1\n2,0\n");
  const auto parsed = parse_stream(tuples, pp.alphabet(), "t");
  REQUIRE(parsed.size() == 2);
  CHECK(pp.alphabet().split(parsed[1]) == std::vector<Symbol>{sym(2), sym(0)});

  std::ostringstream out;
  write_stream(out, periodic_stream(CountableAlphabet::naturals(), {sym(1), sym(2)}), 3);
  CHECK(out.str() == "# provenance: periodic(1 2)\n1\n2\n1\n");
}

TEST_CASE("string files") {
  std::istringstream in("0 1 0\n-\n# c\n\n2\n");
  const auto s = parse_strings(in, "strings");
  REQUIRE(s.size() == 3);
  CHECK(s[0] == SymbolString{0, 1, 0});
  CHECK(s[1].empty());
  CHECK(s[2] == SymbolString{2});
  std::istringstream bad("0\n0 x\n");
  CHECK_THROWS_AS(parse_strings(bad, "f"), ParseError);
}

TEST_CASE("pipeline ops") {
  const auto alpha = periodic_stream(CountableAlphabet::naturals(), {sym(0), sym(1), sym(2), sym(3)});
  CHECK(apply_op(alpha, Json::parse(R"({"op":"identity"})")).prefix(8) == alpha.prefix(8));
  CHECK(apply_op(alpha, Json::parse(R"({"op":"condition","event":"even"})")).prefix(4) == SymbolString{0, 2, 0, 2});
  CHECK(apply_op(alpha, Json::parse(R"({"op":"characteristic","event":{"event":"set","members":[1]}})")).prefix(4) ==
        SymbolString{0, 1, 0, 0});
  CHECK(apply_op(alpha, Json::parse(R"({"op":"shuffle","map":"shift 1"})")).prefix(3) == SymbolString{1, 2, 3});
  CHECK(apply_op(alpha, Json::parse(R"({"op":"select","rule":"after:1"})")).prefix(2) == SymbolString{2, 2});
  CHECK(apply_op(alpha, Json::parse(R"({"op":"map","rv":{"rv":"mod","k":2}})")).prefix(4) == SymbolString{0, 1, 0, 1});
  CHECK(apply_op(alpha, Json::parse(R"({"op":"contract","cells":["even","odd"],"targets":[7,9]})")).prefix(3) ==
        SymbolString{7, 9, 7});
  CHECK_THROWS_WITH_AS(apply_op(alpha, Json::parse(R"({"op":"twist"})")), "unknown op 'twist'", Error);
  auto starved = apply_op(alpha, Json::parse(R"({"op":"condition","event":{"event":"set","members":[9]},"budget":50})"));
  CHECK_THROWS_AS(starved.next(), BudgetExhaustedError);

  const auto config = pipeline_from_json(Json::parse(R"({"distribution":{"family":"geometric","p":"1/2"},"seed":3,"n":10,"ops":[]})"));
  CHECK(config.seed == 3u);
  CHECK(config.n == 10);
  CHECK(config.distribution.has_value());
}

TEST_CASE("test definitions") {
  const auto def = test_from_json(Json::parse(
      R"({"distribution":{"family":"geometric","p":"1/2"},"generator":"explicit","levels":[["1"],["0 0 0 0","2"]]})"));
  CHECK(def.test.level(2) == PrefixFreeSet{SymbolString{2}, SymbolString{0, 0, 0, 0}});
  CHECK(verify_test(def.test, 2).pass);

  const auto run = test_from_json(
      Json::parse(R"({"distribution":{"family":"geometric","p":"1/2"},"generator":"run","symbol":0,"offset":1,"budget":{"max_level":3}})"));
  CHECK(run.test.budget().max_level == 3);
  CHECK_THROWS_AS((void)verify_test(run.test, 4), BudgetExhaustedError);

  const auto rel = test_from_json(Json::parse(
      R"({"distribution":{"family":"geometric","p":"1/2"},"generator":"oracle_prefix","oracles":[{"distribution":{"family":"geometric","p":"1/2"},"seed":7}]})"));
  REQUIRE(rel.oracles.size() == 1);
  OracleContext ctx(rel.oracles);
  CHECK(rel.test.level(3, ctx) == PrefixFreeSet{rel.oracles[0].prefix(3)});

  CHECK_THROWS_AS(test_from_json(Json::parse(R"({"distribution":{"family":"geometric","p":"1/2"},"generator":"magic"})")), Error);
}

TEST_CASE("report JSON uses num/den strings") {
  const auto t = MLTest::explicit_levels("c", geom2(), {{SymbolString{1}}});
  const Json j = to_json(verify_test(t, 2));
  CHECK(j["pass"] == true);
  CHECK(j["levels"][0]["mass"] == "1/4");
  CHECK(j["levels"][0]["bound"] == "1/2");
  CHECK(j["levels"][1]["mass"] == "0/1");

  const auto pb = shuffle_pullback(t, IndexMap::identity(), {.up_to_level = 1});
  const Json pj = to_json(pb);
  CHECK(pj.contains("identities"));
}
