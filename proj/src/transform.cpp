#include "ensemble/transform.hpp"

#include <algorithm>
#include <memory>
#include <unordered_set>

#include "ensemble/errors.hpp"

namespace ensemble {

IndexMap IndexMap::identity() {
  return {"identity", [](std::uint64_t k) { return k; }};
}

IndexMap IndexMap::affine(std::uint64_t a, std::int64_t b) {
  if (a == 0 || static_cast<std::int64_t>(a) + b < 1)
    throw PreconditionError("affine index map must send 1.. into positive integers");
  return {"affine " + std::to_string(a) + " " + std::to_string(b),
          [a, b](std::uint64_t k) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(a * k) + b); }};
}

IndexMap IndexMap::swap_pairs() {
  return {"swap_pairs", [](std::uint64_t k) { return k % 2 == 1 ? k + 1 : k - 1; }};
}

SelectionRule SelectionRule::all() {
  return {"all", [](std::span<const Symbol>) { return Decision::yes; }};
}

SelectionRule SelectionRule::even_length() {
  return {"even_length", [](std::span<const Symbol> s) { return s.size() % 2 == 0 ? Decision::yes : Decision::no; }};
}

SelectionRule SelectionRule::after(Symbol c) {
  return {"after:" + std::to_string(c.id),
          [c](std::span<const Symbol> s) { return !s.empty() && s.back() == c ? Decision::yes : Decision::no; }};
}

SelectionRule SelectionRule::every(std::uint64_t k) {
  if (k == 0) throw PreconditionError("every:k needs k >= 1");
  return {"every:" + std::to_string(k),
          [k](std::span<const Symbol> s) { return s.size() % k == 0 ? Decision::yes : Decision::no; }};
}

EnsembleStream shuffle(const EnsembleStream& alpha, IndexMap f) {
  auto parent = alpha.factory();
  auto map = f.f;
  EnsembleStream::Factory factory = [parent, map]() -> EnsembleStream::Source {
    struct State {
      EnsembleStream::Source source;
      std::vector<Symbol> buffer;  // alpha(1..buffer.size())
      std::unordered_set<std::uint64_t> seen;
      std::uint64_t k = 0;
    };
    auto state = std::make_shared<State>();
    state->source = parent();
    return [state, map]() {
      const std::uint64_t k = ++state->k;
      const std::uint64_t i = map(k);
      if (i == 0) throw PreconditionError("index map sent " + std::to_string(k) + " to 0");
      if (!state->seen.insert(i).second)
        throw InjectivityError("index map is not injective", "f(" + std::to_string(k) + ") = " + std::to_string(i));
      while (state->buffer.size() < i) state->buffer.push_back(state->source());
      return state->buffer[i - 1];
    };
  };
  return EnsembleStream(alpha.alphabet(), "shuffle[" + f.name + "](" + alpha.provenance() + ")", std::move(factory),
                        alpha.law());
}

EnsembleStream select(const EnsembleStream& alpha, SelectionRule f, std::uint64_t budget) {
  auto parent = alpha.factory();
  auto decide = f.decide;
  EnsembleStream::Factory factory = [parent, decide, budget]() -> EnsembleStream::Source {
    struct State {
      EnsembleStream::Source source;
      std::vector<Symbol> prefix;
    };
    auto state = std::make_shared<State>();
    state->source = parent();
    return [state, decide, budget]() {
      for (std::uint64_t steps = 0;; ++steps) {
        if (steps >= budget) throw BudgetExhaustedError("selection found no YES", steps);
        const Decision d = decide(state->prefix);
        if (d == Decision::undefined)
          throw UndefinedSelectorError("selection rule undefined on prefix of length",
                                       std::to_string(state->prefix.size()));
        const Symbol next = state->source();
        state->prefix.push_back(next);
        if (d == Decision::yes) return next;
      }
    };
  };
  return EnsembleStream(alpha.alphabet(), "select[" + f.name + "](" + alpha.provenance() + ")", std::move(factory),
                        alpha.law());
}

EnsembleStream condition(const EnsembleStream& alpha, const EventPredicate& b, std::uint64_t budget) {
  auto parent = alpha.factory();
  EnsembleStream::Factory factory = [parent, b, budget]() -> EnsembleStream::Source {
    auto source = std::make_shared<EnsembleStream::Source>(parent());
    return [source, b, budget]() {
      for (std::uint64_t steps = 0; steps < budget; ++steps) {
        const Symbol s = (*source)();
        if (b.member(s)) return s;
      }
      throw BudgetExhaustedError("no element of " + b.name() + " found", budget);
    };
  };
  std::optional<DiscreteDistribution> law;
  if (alpha.law()) law = conditional_distribution(*alpha.law(), b);
  return EnsembleStream(restrict_alphabet(alpha.alphabet(), b), "condition[" + b.name() + "](" + alpha.provenance() + ")",
                        std::move(factory), std::move(law));
}

EnsembleStream map_stream(const EnsembleStream& alpha, const RandomVariable& x) {
  auto parent = alpha.factory();
  EnsembleStream::Factory factory = [parent, x]() -> EnsembleStream::Source {
    auto source = std::make_shared<EnsembleStream::Source>(parent());
    return [source, x]() { return x((*source)()); };
  };
  std::optional<DiscreteDistribution> law;
  if (alpha.law()) law = pushforward(*alpha.law(), x);
  return EnsembleStream(x.codomain(), "map[" + x.name() + "](" + alpha.provenance() + ")", std::move(factory),
                        std::move(law));
}

EnsembleStream characteristic(const EnsembleStream& alpha, const EventPredicate& a) {
  return map_stream(alpha, RandomVariable::indicator(alpha.alphabet(), a));
}

EnsembleStream contract(const EnsembleStream& alpha, std::vector<EventPredicate> cells, std::vector<Symbol> targets,
                        std::uint64_t spot_check) {
  for (const Symbol s : alpha.alphabet().first(spot_check)) {
    std::size_t hits = 0;
    for (const auto& cell : cells) hits += cell.member(s) ? 1 : 0;
    if (hits != 1)
      throw PartitionError(hits == 0 ? "symbol lies in no cell" : "symbol lies in several cells",
                           alpha.alphabet().format(s));
  }
  std::optional<DiscreteDistribution> law;
  if (alpha.law()) law = contraction_distribution(*alpha.law(), cells, targets);
  const RandomVariable x = RandomVariable::relabel(alpha.alphabet(), std::move(cells), std::move(targets));
  EnsembleStream mapped = map_stream(alpha, x);
  return EnsembleStream(mapped.alphabet(), mapped.provenance(), mapped.factory(), std::move(law));
}

EnsembleStream product_stream(std::span<const EnsembleStream> streams) {
  if (streams.size() < 2) throw PreconditionError("product stream needs at least two streams");
  std::vector<CountableAlphabet> alphabets;
  std::vector<EnsembleStream::Factory> parents;
  std::vector<DiscreteDistribution> laws;
  std::string provenance = "product(";
  for (std::size_t i = 0; i < streams.size(); ++i) {
    alphabets.push_back(streams[i].alphabet());
    parents.push_back(streams[i].factory());
    if (streams[i].law()) laws.push_back(*streams[i].law());
    provenance += (i ? ", " : "") + streams[i].provenance();
  }
  provenance += ")";
  auto alphabet = CountableAlphabet::product(alphabets);
  EnsembleStream::Factory factory = [parents, alphabet]() -> EnsembleStream::Source {
    auto sources = std::make_shared<std::vector<EnsembleStream::Source>>();
    for (const auto& p : parents) sources->push_back(p());
    return [sources, alphabet]() {
      std::vector<Symbol> parts;
      parts.reserve(sources->size());
      for (auto& s : *sources) parts.push_back(s());
      return alphabet.join(parts);
    };
  };
  std::optional<DiscreteDistribution> law;
  if (laws.size() == streams.size()) law = product_distribution(laws);
  return EnsembleStream(std::move(alphabet), std::move(provenance), std::move(factory), std::move(law));
}

}  // namespace ensemble
