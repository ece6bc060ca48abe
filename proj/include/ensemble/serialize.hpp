#pragma once

// Text formats: distribution specs, stream files, string lists, pipelines,
// test definitions and JSON reports. Rationals are always "num/den" strings.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensemble/mltest.hpp"
#include "ensemble/stats.hpp"
#include "ensemble/transform.hpp"

namespace ensemble {

using Json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path);
Json read_json_file(const std::string& path);

/// {"family":"geometric","p":"1/2"}
/// {"family":"table","masses":[["0","1/2"],...],"tail":"0"}
/// {"family":"product","factors":[spec, spec, ...]}
DiscreteDistribution distribution_from_json(const Json& spec);
Json distribution_to_json(const DiscreteDistribution& p);

/// "even" | "odd" | "all" | "none" |
/// {"event":"set","members":[..]} | {"event":"residue","k":3,"r":1} |
/// {"event":"at_least","k":2} | {"event":"not","of":event} | {"event":"and","of":[event, event]}
EventPredicate event_from_json(const Json& spec);
/// "identity" | {"rv":"mod","k":2} | {"rv":"const","c":3} | {"rv":"indicator","event":event}
RandomVariable random_variable_from_json(const Json& spec, const CountableAlphabet& domain);
/// "all" | "even_length" | "after:c" | "every:k"
SelectionRule selection_rule_from_name(const std::string& name);
/// "identity" | "affine a b" | "shift s" | "swap_pairs"
IndexMap index_map_from_name(const std::string& name);

/// '#' lines are comments; otherwise one symbol per line (decimal id, or
/// comma-joined component ids for product alphabets).
std::vector<Symbol> parse_stream(std::istream& in, const CountableAlphabet& alphabet, const std::string& source);
std::vector<Symbol> read_stream_file(const std::string& path, const CountableAlphabet& alphabet);
void write_stream(std::ostream& out, const EnsembleStream& stream, std::uint64_t n);

/// One string per line, ids separated by spaces; "-" is the empty string.
/// Blank and '#' lines are skipped.
std::vector<SymbolString> parse_strings(std::istream& in, const std::string& source);
std::vector<SymbolString> read_strings_file(const std::string& path);
SymbolString parse_string_line(const std::string& line);

/// Applies one pipeline op {"op": name, ...} to a stream.
EnsembleStream apply_op(const EnsembleStream& input, const Json& op);

struct PipelineConfig {
  std::optional<DiscreteDistribution> distribution;
  std::optional<std::uint64_t> seed;
  std::uint64_t n = 0;
  Json ops = Json::array();
  std::optional<std::string> out;
};

/// {"distribution": spec, "seed": 1, "n": 1000, "ops": [...], "out": path}
PipelineConfig pipeline_from_json(const Json& spec);

/// {"distribution": spec, "generator": "explicit", "levels": [["0 0", "1"], ...]}
/// {"generator": "run", "symbol": 0, "offset": 1} | {"generator": "zero_symbol"}
/// {"generator": "oracle_prefix", "oracle": 0, "oracles": [{"distribution": spec, "seed": 7}]}
/// optional "budget": {"max_level": 64, "max_strings": 1048576}
struct TestDefinition {
  MLTest test;
  std::vector<EnsembleStream> oracles;
};
TestDefinition test_from_json(const Json& spec);

Json to_json(const TestReport& report);
Json to_json(const FrequencyReport& report);
Json to_json(const EquivalenceReport& report);
Json to_json(const IndependenceReport& report);
Json to_json(const EventIndependenceReport& report);
Json to_json(const Pullback& pullback);

}  // namespace ensemble
