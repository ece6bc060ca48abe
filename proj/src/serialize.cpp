#include "ensemble/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ensemble/errors.hpp"

namespace ensemble {
namespace {

Rational rational_field(const Json& j, const std::string& what) {
  try {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  } catch (const std::invalid_argument& e) {
    throw Error(what + ": " + e.what());
  }
  throw Error(what + " must be a \"num/den\" string");
}

std::uint64_t uint_field(const Json& j, const std::string& what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::size_t used = 0;
    try {
      const auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw Error(what + " must be a nonnegative integer");
}

const Json& require(const Json& spec, const char* key, const std::string& context) {
  if (!spec.is_object() || !spec.contains(key)) throw Error(context + " needs \"" + key + "\"");
  return spec.at(key);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

Json rational_json(const Rational& r) { return r.str(); }

Json symbols_json(const std::vector<std::uint64_t>& v) {
  Json out = Json::array();
  for (auto x : v) out.push_back(x);
  return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports a byte offset; translate it to a line number.
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
    throw ParseError(path, line, e.what());
  }
}

DiscreteDistribution distribution_from_json(const Json& spec) {
  const std::string family = require(spec, "family", "distribution").get<std::string>();
  if (family == "geometric") return DiscreteDistribution::geometric(rational_field(require(spec, "p", family), "p"));
  if (family == "table") {
    std::vector<std::pair<Symbol, Rational>> masses;
    for (const auto& entry : require(spec, "masses", family)) {
      if (!entry.is_array() || entry.size() != 2) throw Error("table entries are [symbol, mass] pairs");
      masses.emplace_back(Symbol{uint_field(entry[0], "table symbol")}, rational_field(entry[1], "table mass"));
    }
    if (spec.contains("tail") && !rational_field(spec.at("tail"), "tail").is_zero())
      throw Error("table tail must be 0: listed masses must sum to 1");
    return DiscreteDistribution::table(std::move(masses));
  }
  if (family == "point") return DiscreteDistribution::point_mass(Symbol{uint_field(require(spec, "symbol", family), "symbol")});
  if (family == "product") {
    std::vector<DiscreteDistribution> factors;
    for (const auto& f : require(spec, "factors", family)) factors.push_back(distribution_from_json(f));
    return product_distribution(factors);
  }
  throw Error("unknown distribution family '" + family + "'");
}

Json distribution_to_json(const DiscreteDistribution& p) {
  const FamilyInfo info = p.family();
  if (info.name == "geometric") return Json{{"family", "geometric"}, {"p", info.params.at(0).str()}};
  if (info.name == "table") {
    Json masses = Json::array();
    for (std::size_t i = 0; i < info.params.size(); ++i)
      masses.push_back(Json::array({std::to_string(p.alphabet().enumerate(i).id), info.params[i].str()}));
    return Json{{"family", "table"}, {"masses", masses}, {"tail", "0/1"}};
  }
  return Json{{"family", info.name}, {"describe", p.describe()}};
}

EventPredicate event_from_json(const Json& spec) {
  if (spec.is_string()) {
    const std::string name = spec.get<std::string>();
    if (name == "even") return EventPredicate::even();
    if (name == "odd") return EventPredicate::odd();
    if (name == "all") return EventPredicate::all();
    if (name == "none") return EventPredicate::none();
    throw Error("unknown event '" + name + "'");
  }
  const std::string kind = require(spec, "event", "event").get<std::string>();
  if (kind == "even" || kind == "odd" || kind == "all" || kind == "none") return event_from_json(Json(kind));
  if (kind == "set") {
    std::vector<Symbol> members;
    for (const auto& m : require(spec, "members", kind)) members.push_back(Symbol{uint_field(m, "set member")});
    return EventPredicate::set(std::move(members));
  }
  if (kind == "residue")
    return EventPredicate::residue(uint_field(require(spec, "k", kind), "k"), uint_field(require(spec, "r", kind), "r"));
  if (kind == "at_least") return EventPredicate::at_least(uint_field(require(spec, "k", kind), "k"));
  if (kind == "not") return EventPredicate::complement(event_from_json(require(spec, "of", kind)));
  if (kind == "and") {
    const Json& of = require(spec, "of", kind);
    if (!of.is_array() || of.size() < 2) throw Error("\"and\" needs at least two events");
    EventPredicate acc = event_from_json(of[0]);
    for (std::size_t i = 1; i < of.size(); ++i) acc = EventPredicate::intersection(acc, event_from_json(of[i]));
    return acc;
  }
  throw Error("unknown event '" + kind + "'");
}

RandomVariable random_variable_from_json(const Json& spec, const CountableAlphabet& domain) {
  const std::string kind = spec.is_string() ? spec.get<std::string>() : require(spec, "rv", "random variable").get<std::string>();
  if (kind == "identity") return RandomVariable::identity(domain);
  if (kind == "mod") return RandomVariable::modulo(domain, uint_field(require(spec, "k", kind), "k"));
  if (kind == "const") return RandomVariable::constant(domain, Symbol{uint_field(require(spec, "c", kind), "c")});
  if (kind == "indicator") return RandomVariable::indicator(domain, event_from_json(require(spec, "event", kind)));
  throw Error("unknown random variable '" + kind + "'");
}

SelectionRule selection_rule_from_name(const std::string& name) {
  if (name == "all") return SelectionRule::all();
  if (name == "even_length") return SelectionRule::even_length();
  const auto colon = name.find(':');
  if (colon != std::string::npos) {
    const std::string head = name.substr(0, colon);
    const std::uint64_t arg = uint_field(Json(name.substr(colon + 1)), "selection rule argument");
    if (head == "after") return SelectionRule::after(Symbol{arg});
    if (head == "every") return SelectionRule::every(arg);
  }
  throw Error("unknown selection rule '" + name + "'");
}

IndexMap index_map_from_name(const std::string& name) {
  std::istringstream in(name);
  std::string head;
  in >> head;
  if (head == "identity") return IndexMap::identity();
  if (head == "swap_pairs") return IndexMap::swap_pairs();
  if (head == "affine") {
    std::uint64_t a = 0;
    std::int64_t b = 0;
    if (in >> a >> b) return IndexMap::affine(a, b);
  }
  if (head == "shift") {
    std::int64_t s = 0;
    if (in >> s) return IndexMap::affine(1, s);
  }
  throw Error("unknown index map '" + name + "'");
}

std::vector<Symbol> parse_stream(std::istream& in, const CountableAlphabet& alphabet, const std::string& source) {
  std::vector<Symbol> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      const Symbol s = alphabet.parse_symbol(t);
      if (!alphabet.contains(s)) throw Error("symbol outside " + alphabet.label());
      out.push_back(s);
    } catch (const std::exception& e) {
      throw ParseError(source, number, "bad symbol '" + t + "': " + e.what());
    }
  }
  return out;
}

std::vector<Symbol> read_stream_file(const std::string& path, const CountableAlphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_stream(in, alphabet, path);
}

void write_stream(std::ostream& out, const EnsembleStream& stream, std::uint64_t n) {
  out << "# provenance: " << stream.provenance() << '\n';
  EnsembleStream s = stream.fresh();
  for (std::uint64_t i = 0; i < n; ++i) out << stream.alphabet().format(s.next()) << '\n';
}

SymbolString parse_string_line(const std::string& line) {
  const std::string t = trim(line);
  if (t == "-") return {};
  std::istringstream in(t);
  std::vector<Symbol> symbols;
  std::string token;
  while (in >> token) symbols.push_back(Symbol{uint_field(Json(token), "symbol")});
  return SymbolString(std::move(symbols));
}

std::vector<SymbolString> parse_strings(std::istream& in, const std::string& source) {
  std::vector<SymbolString> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      out.push_back(parse_string_line(t));
    } catch (const std::exception& e) {
      throw ParseError(source, number, e.what());
    }
  }
  return out;
}

std::vector<SymbolString> read_strings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_strings(in, path);
}

EnsembleStream apply_op(const EnsembleStream& input, const Json& op) {
  const std::string name = require(op, "op", "pipeline op").get<std::string>();
  const std::uint64_t budget = op.contains("budget") ? uint_field(op.at("budget"), "budget") : kDefaultScanBudget;
  if (name == "identity") return input.fresh();
  if (name == "shuffle") return shuffle(input, index_map_from_name(require(op, "map", name).get<std::string>()));
  if (name == "select")
    return select(input, selection_rule_from_name(require(op, "rule", name).get<std::string>()), budget);
  if (name == "condition") return condition(input, event_from_json(require(op, "event", name)), budget);
  if (name == "characteristic") return characteristic(input, event_from_json(require(op, "event", name)));
  if (name == "map") return map_stream(input, random_variable_from_json(require(op, "rv", name), input.alphabet()));
  if (name == "contract") {
    std::vector<EventPredicate> cells;
    std::vector<Symbol> targets;
    for (const auto& c : require(op, "cells", name)) cells.push_back(event_from_json(c));
    for (const auto& t : require(op, "targets", name)) targets.push_back(Symbol{uint_field(t, "target")});
    return contract(input, std::move(cells), std::move(targets));
  }
  throw Error("unknown op '" + name + "'");
}

PipelineConfig pipeline_from_json(const Json& spec) {
  if (!spec.is_object()) throw Error("pipeline must be a JSON object");
  PipelineConfig config;
  if (spec.contains("distribution")) config.distribution = distribution_from_json(spec.at("distribution"));
  if (spec.contains("seed")) config.seed = uint_field(spec.at("seed"), "seed");
  if (spec.contains("n")) config.n = uint_field(spec.at("n"), "n");
  if (spec.contains("ops")) {
    config.ops = spec.at("ops");
    if (!config.ops.is_array()) throw Error("\"ops\" must be a list");
  }
  if (spec.contains("out")) config.out = spec.at("out").get<std::string>();
  return config;
}

TestDefinition test_from_json(const Json& spec) {
  const DiscreteDistribution p = distribution_from_json(require(spec, "distribution", "test"));
  TestBudget budget;
  if (spec.contains("budget")) {
    const Json& b = spec.at("budget");
    if (b.contains("max_level")) budget.max_level = uint_field(b.at("max_level"), "max_level");
    if (b.contains("max_strings")) budget.max_strings = uint_field(b.at("max_strings"), "max_strings");
  }
  const std::string generator = spec.value("generator", std::string("explicit"));
  std::vector<EnsembleStream> oracles;
  if (spec.contains("oracles")) {
    for (const auto& o : spec.at("oracles"))
      oracles.push_back(sample_ensemble(distribution_from_json(require(o, "distribution", "oracle")),
                                        uint_field(require(o, "seed", "oracle"), "seed")));
  }
  if (generator == "explicit") {
    std::vector<std::vector<SymbolString>> levels;
    for (const auto& level : require(spec, "levels", generator)) {
      std::vector<SymbolString> strings;
      for (const auto& s : level) strings.push_back(parse_string_line(s.get<std::string>()));
      levels.push_back(std::move(strings));
    }
    return {MLTest::explicit_levels(spec.value("name", std::string("explicit")), p, std::move(levels), budget),
            std::move(oracles)};
  }
  if (generator == "run") {
    const std::uint64_t offset = spec.contains("offset") ? uint_field(spec.at("offset"), "offset") : 0;
    return {MLTest::run(p, Symbol{uint_field(require(spec, "symbol", generator), "symbol")}, offset, budget),
            std::move(oracles)};
  }
  if (generator == "zero_symbol") return {MLTest::zero_symbol(p, 1024, budget), std::move(oracles)};
  if (generator == "oracle_prefix") {
    const std::size_t index = spec.contains("oracle") ? uint_field(spec.at("oracle"), "oracle") : 0;
    return {MLTest::oracle_prefix(p, index, budget), std::move(oracles)};
  }
  throw Error("unknown test generator '" + generator + "'");
}

Json to_json(const TestReport& report) {
  Json levels = Json::array();
  for (const auto& l : report.levels) {
    Json j{{"level", l.level},      {"size", l.size},         {"prefix_free", l.prefix_free},
           {"mass", l.mass.str()},  {"bound", l.bound.str()}, {"margin", l.margin.str()},
           {"pass", l.pass}};
    if (!l.violation.empty()) j["violation"] = l.violation;
    levels.push_back(std::move(j));
  }
  Json out{{"test", report.test},
           {"pass", report.pass},
           {"budget", {{"max_level", report.budget.max_level}, {"max_strings", report.budget.max_strings}}},
           {"levels", levels}};
  if (report.first_failure) out["first_failure"] = *report.first_failure;
  return out;
}

Json to_json(const FrequencyReport& report) {
  Json symbols = Json::array();
  for (const auto& s : report.symbols)
    symbols.push_back({{"symbol", s.symbol.id},
                       {"count", s.count},
                       {"frequency", s.frequency},
                       {"mass", s.mass.str()},
                       {"deviation", s.deviation},
                       {"bound", s.bound},
                       {"pass", s.pass}});
  std::uint64_t total = 0;
  for (const auto& [s, c] : report.counts) total += c;
  return Json{{"check", "lln"},
              {"stream", report.stream},
              {"target", report.target},
              {"n", report.n},
              {"k_sigma", report.k_sigma},
              {"observed_symbols", report.counts.size()},
              {"counted", total},
              {"symbols", symbols},
              {"pass", report.pass},
              {"note", "sampled streams are pseudo-random surrogates; this checks a measure-one consequence"}};
}

Json to_json(const EquivalenceReport& report) {
  Json symbols = Json::array();
  for (const auto& s : report.symbols)
    symbols.push_back({{"symbol", s.symbol.id},
                       {"frequency_a", s.frequency_a},
                       {"frequency_b", s.frequency_b},
                       {"gap", s.gap},
                       {"bound", s.bound},
                       {"pass", s.pass}});
  return Json{{"check", "equivalence"}, {"n", report.n},      {"k_sigma", report.k_sigma},
              {"coverage", report.coverage}, {"symbols", symbols}, {"pass", report.pass}};
}

Json to_json(const IndependenceReport& report) {
  Json cells = Json::array();
  for (std::size_t i = 0; i < report.cells.size(); ++i)
    cells.push_back({{"cell", symbols_json(report.cells[i])},
                     {"count", report.joint_counts[i]},
                     {"expected", report.expected[i]}});
  return Json{{"check", "independence"},
              {"n", report.n},
              {"t", report.t},
              {"coordinates", report.coordinates},
              {"total_variation", report.total_variation},
              {"threshold", report.threshold},
              {"chi_square", report.chi_square},
              {"degrees_of_freedom", report.degrees_of_freedom},
              {"chi_square_quantile", report.chi_square_quantile},
              {"cells", cells},
              {"pass", report.pass},
              {"note", "sampled representatives only: a measure-one surrogate"}};
}

Json to_json(const EventIndependenceReport& report) {
  Json subsets = Json::array();
  for (const auto& s : report.subsets) {
    Json idx = Json::array();
    for (auto i : s.events) idx.push_back(i);
    subsets.push_back({{"events", idx}, {"joint", s.joint}, {"product", s.product}, {"gap", s.gap}});
  }
  return Json{{"check", "event_independence"}, {"n", report.n},
              {"events", report.events},       {"marginals", report.marginals},
              {"cell_counts", report.cell_counts}, {"subsets", subsets},
              {"max_gap", report.max_gap},     {"threshold", report.threshold},
              {"pass", report.pass}};
}

Json to_json(const Pullback& pullback) {
  Json identities = Json::array();
  for (const auto& id : pullback.identities)
    identities.push_back({{"level", id.level},
                          {"sigma", id.sigma.str()},
                          {"strings", id.strings},
                          {"truncated_mass", rational_json(id.truncated_mass)},
                          {"residual", rational_json(id.residual)},
                          {"target", rational_json(id.target)},
                          {"relation", id.relation == Relation::equal ? "equal" : "at_most"},
                          {"holds", id.holds}});
  Json levels = Json::array();
  for (const auto& level : pullback.levels) {
    Json strings = Json::array();
    for (const auto& s : level) strings.push_back(s.empty() ? "-" : s.str());
    levels.push_back(strings);
  }
  return Json{{"test", pullback.test.name()}, {"levels", levels}, {"identities", identities}};
}

}  // namespace ensemble
