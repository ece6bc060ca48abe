// ensemble: command-line front end.
//
// Exit status: 0 pass / success, 1 check failed, 2 error or exhausted budget.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ensemble/errors.hpp"
#include "ensemble/measure.hpp"
#include "ensemble/rng.hpp"
#include "ensemble/serialize.hpp"

namespace {

using namespace ensemble;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kError = 2;

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void emit_json(const Json& j, const std::string& path) {
  Output out(path);
  out.stream() << j.dump(2) << '\n';
}

std::vector<Symbol> parse_symbol_list(const std::string& text) {
  std::vector<Symbol> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const auto v = std::stoull(item, &used);
    if (used != item.size()) throw Error("bad symbol '" + item + "' in list");
    out.push_back(Symbol{v});
  }
  return out;
}

// A stream from a recorded file over the distribution's alphabet, or sampled with the seed.
EnsembleStream source_stream(const DiscreteDistribution& p, const std::string& in_path,
                             const std::optional<std::uint64_t>& seed) {
  if (!in_path.empty()) return recorded_stream(p.alphabet(), read_stream_file(in_path, p.alphabet()), "file(" + in_path + ")");
  if (!seed) throw Error("--seed is required when sampling (there is no implicit entropy)");
  return sample_ensemble(p, *seed);
}

struct GenArgs {
  std::string dist;
  std::optional<std::uint64_t> seed;
  std::uint64_t n = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  const DiscreteDistribution p = distribution_from_json(read_json_file(a.dist));
  const EnsembleStream s = sample_ensemble(p, *a.seed);
  Output out(a.out);
  write_stream(out.stream(), s, a.n);
  return kPass;
}

struct TransformArgs {
  std::string pipeline;
  std::string in;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> n;
};

int cmd_transform(const TransformArgs& a) {
  const PipelineConfig config = pipeline_from_json(read_json_file(a.pipeline));
  const std::optional<std::uint64_t> seed = a.seed ? a.seed : config.seed;
  std::optional<EnsembleStream> stream;
  std::optional<std::uint64_t> available;
  if (!a.in.empty()) {
    const CountableAlphabet alphabet = config.distribution ? config.distribution->alphabet() : CountableAlphabet::naturals();
    auto symbols = read_stream_file(a.in, alphabet);
    available = symbols.size();
    stream.emplace(recorded_stream(alphabet, std::move(symbols), "file(" + a.in + ")"));
  } else {
    if (!config.distribution) throw Error("pipeline needs a \"distribution\" or --in");
    if (!seed) throw Error("pipeline needs a \"seed\" or --seed when sampling");
    stream.emplace(sample_ensemble(*config.distribution, *seed));
  }
  for (const auto& op : config.ops) stream.emplace(apply_op(*stream, op));

  std::uint64_t n = a.n ? *a.n : config.n;
  if (n == 0 && !available) throw Error("give \"n\" in the pipeline or --n");
  const std::string out_path = !a.out.empty() ? a.out : config.out.value_or("");
  Output out(out_path);
  out.stream() << "# provenance: " << stream->provenance() << '\n';
  EnsembleStream s = stream->fresh();
  for (std::uint64_t i = 0; n == 0 || i < n; ++i) {
    Symbol x;
    try {
      x = s.next();
    } catch (const StreamExhaustedError&) {
      if (n != 0) throw;
      break;  // recorded input consumed
    }
    out.stream() << s.alphabet().format(x) << '\n';
  }
  return kPass;
}

struct MeasureArgs {
  std::string dist;
  std::string strings;
  std::string set;
  std::string out;
};

int cmd_measure(const MeasureArgs& a) {
  const DiscreteDistribution p = distribution_from_json(read_json_file(a.dist));
  Json result{{"distribution", p.describe()}};
  if (!a.strings.empty()) {
    Json rows = Json::array();
    for (const auto& s : read_strings_file(a.strings))
      rows.push_back({{"string", s.empty() ? "-" : s.str()}, {"mass", string_mass(p, s).str()}});
    result["strings"] = rows;
  }
  if (!a.set.empty()) {
    const PrefixFreeSet set(read_strings_file(a.set));
    Json members = Json::array();
    for (const auto& s : set) members.push_back({{"string", s.empty() ? "-" : s.str()}, {"mass", string_mass(p, s).str()}});
    result["set"] = {{"size", set.size()}, {"members", members}, {"mass", set_mass(p, set).str()}};
  }
  emit_json(result, a.out);
  return kPass;
}

struct VerifyArgs {
  std::string test;
  std::uint64_t levels = 8;
  std::string out;
};

int cmd_verify_test(const VerifyArgs& a) {
  TestDefinition def = test_from_json(read_json_file(a.test));
  OracleContext context(def.oracles);
  const TestReport report = verify_test(def.test, a.levels, &context);
  Json j = to_json(report);
  j["oracle_positions_read"] = context.positions_read();
  emit_json(j, a.out);
  if (!report.pass && report.first_failure)
    std::cerr << "level " << *report.first_failure << " violates its bound (mass "
              << report.levels[*report.first_failure - 1].mass << ")\n";
  return report.pass ? kPass : kFail;
}

struct LlnArgs {
  std::string dist;
  std::string target;
  std::string in;
  std::optional<std::uint64_t> seed;
  std::uint64_t n = 1'000'000;
  std::string symbols = "0,1,2,3,4";
  double k = 4;
  std::string out;
};

int cmd_lln(const LlnArgs& a) {
  const DiscreteDistribution p = distribution_from_json(read_json_file(a.dist));
  const DiscreteDistribution target = a.target.empty() ? p : distribution_from_json(read_json_file(a.target));
  const EnsembleStream s = source_stream(p, a.in, a.seed);
  const FrequencyReport report = lln_check(s, target, a.n, parse_symbol_list(a.symbols), a.k);
  emit_json(to_json(report), a.out);
  return report.pass ? kPass : kFail;
}

struct IndependenceArgs {
  std::vector<std::string> dists;
  std::vector<std::string> ins;
  std::optional<std::uint64_t> seed;
  std::uint64_t n = 1'000'000;
  std::uint64_t t = 4;
  double threshold = 0.01;
  std::string out;
};

int cmd_independence(const IndependenceArgs& a) {
  if (a.dists.size() < 2) throw Error("independence needs at least two --dist files");
  if (!a.ins.empty() && a.ins.size() != a.dists.size()) throw Error("give one --in per --dist, or none and --seed");
  if (a.ins.empty() && !a.seed) throw Error("--seed is required when sampling (there is no implicit entropy)");
  std::vector<DiscreteDistribution> targets;
  std::vector<EnsembleStream> streams;
  const std::vector<std::uint64_t> seeds = split_seeds(a.seed.value_or(0), a.dists.size());
  for (std::size_t i = 0; i < a.dists.size(); ++i) {
    targets.push_back(distribution_from_json(read_json_file(a.dists[i])));
    streams.push_back(a.ins.empty() ? sample_ensemble(targets.back(), seeds[i])
                                    : source_stream(targets.back(), a.ins[i], std::nullopt));
  }
  const IndependenceReport report = independence_check(streams, targets, a.n, a.t, a.threshold);
  emit_json(to_json(report), a.out);
  return report.pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact cylinder measures, ensemble transforms, finite-stage Martin-Lof tests and frequency checks"};
  app.require_subcommand(1);
  int status = kPass;

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "sample n symbols i.i.d. from a distribution");
  g->add_option("dist", gen.dist, "distribution spec (JSON)")->required()->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "generator seed")->required();
  g->add_option("--n", gen.n, "number of symbols")->required();
  g->add_option("--out", gen.out, "output file (default stdout)");
  g->callback([&] { status = cmd_gen(gen); });

  TransformArgs tr;
  auto* t = app.add_subcommand("transform", "apply a pipeline of transforms to a sampled or recorded stream");
  t->add_option("pipeline", tr.pipeline, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  t->add_option("--in", tr.in, "recorded input stream")->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "output file (default: pipeline \"out\" or stdout)");
  t->add_option("--seed", tr.seed, "seed (overrides the pipeline's)");
  t->add_option("--n", tr.n, "number of output symbols (overrides the pipeline's)");
  t->callback([&] { status = cmd_transform(tr); });

  MeasureArgs me;
  auto* m = app.add_subcommand("measure", "exact cylinder and open-set masses");
  m->add_option("dist", me.dist, "distribution spec (JSON)")->required()->check(CLI::ExistingFile);
  auto* strings_opt = m->add_option("--strings", me.strings, "strings file")->check(CLI::ExistingFile);
  auto* set_opt = m->add_option("--prefix-free-set", me.set, "prefix-free set file")->check(CLI::ExistingFile);
  m->add_option("--out", me.out, "report file (default stdout)");
  m->callback([&] {
    if (strings_opt->count() + set_opt->count() == 0) throw CLI::ValidationError("give --strings or --prefix-free-set");
    status = cmd_measure(me);
  });

  VerifyArgs ve;
  auto* v = app.add_subcommand("verify-test", "check prefix-freeness and mass < 2^-n for levels 1..L");
  v->add_option("test", ve.test, "test definition (JSON)")->required()->check(CLI::ExistingFile);
  v->add_option("--levels", ve.levels, "highest level to verify")->capture_default_str();
  v->add_option("--out", ve.out, "report file (default stdout)");
  v->callback([&] { status = cmd_verify_test(ve); });

  LlnArgs ll;
  auto* l = app.add_subcommand("lln", "frequency check of a stream against a target distribution");
  l->add_option("dist", ll.dist, "distribution the stream is sampled from / recorded over")->required()->check(CLI::ExistingFile);
  l->add_option("--target", ll.target, "target distribution (default: dist)")->check(CLI::ExistingFile);
  l->add_option("--in", ll.in, "recorded stream (otherwise sample with --seed)")->check(CLI::ExistingFile);
  l->add_option("--seed", ll.seed, "generator seed when sampling");
  l->add_option("--n", ll.n, "sample count")->capture_default_str();
  l->add_option("--symbols", ll.symbols, "comma-separated symbols to check")->capture_default_str();
  l->add_option("--k", ll.k, "sigma multiplier")->capture_default_str();
  l->add_option("--out", ll.out, "report file (default stdout)");
  l->callback([&] { status = cmd_lln(ll); });

  IndependenceArgs in;
  auto* i = app.add_subcommand("independence", "joint frequencies of several streams against the product of targets");
  i->add_option("--dist", in.dists, "target distribution per coordinate (repeat)")->required()->check(CLI::ExistingFile);
  i->add_option("--in", in.ins, "recorded stream per coordinate (repeat)")->check(CLI::ExistingFile);
  i->add_option("--seed", in.seed, "root seed; coordinates get split child seeds");
  i->add_option("--n", in.n, "sample count")->capture_default_str();
  i->add_option("--t", in.t, "cells per coordinate before \"other\"")->capture_default_str();
  i->add_option("--threshold", in.threshold, "total-variation threshold")->capture_default_str();
  i->add_option("--out", in.out, "report file (default stdout)");
  i->callback([&] { status = cmd_independence(in); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kError;
  } catch (const BudgetExhaustedError& e) {
    std::cerr << "ensemble: budget exhausted: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "ensemble: error: " << e.what() << '\n';
    return kError;
  }
  return status;
}
