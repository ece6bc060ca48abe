#pragma once

// Events (decidable subsets of an alphabet), random variables, certified
// event masses, and the distributions they induce: conditioning,
// pushforward and contraction.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ensemble/distribution.hpp"

namespace ensemble {

class EventPredicate {
 public:
  /// Exact P(A) for the distributions the event knows a closed form for.
  using ClosedForm = std::function<std::optional<Rational>(const DiscreteDistribution&)>;

  EventPredicate(std::string name, std::function<bool(Symbol)> member, ClosedForm closed_form = {});

  static EventPredicate all();
  static EventPredicate none();
  static EventPredicate set(std::vector<Symbol> members);
  /// Ids congruent to r mod k. Closed form for the geometric family.
  static EventPredicate residue(std::uint64_t k, std::uint64_t r);
  static EventPredicate even() { return residue(2, 0); }
  static EventPredicate odd() { return residue(2, 1); }
  /// Ids >= k.
  static EventPredicate at_least(std::uint64_t k);
  static EventPredicate complement(const EventPredicate& a);
  static EventPredicate intersection(const EventPredicate& a, const EventPredicate& b);

  [[nodiscard]] bool member(Symbol s) const { return member_(s); }
  [[nodiscard]] bool operator()(Symbol s) const { return member_(s); }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::optional<Rational> closed_form(const DiscreteDistribution& p) const;
  /// Members when the event is a finite set.
  [[nodiscard]] const std::optional<std::vector<Symbol>>& finite_members() const noexcept { return finite_; }

 private:
  std::string name_;
  std::function<bool(Symbol)> member_;
  ClosedForm closed_form_;
  std::optional<std::vector<Symbol>> finite_;
};

/// The members of `alphabet` in B, in alphabet order: a finite list when
/// either side is finite, a lazily scanned subset otherwise.
CountableAlphabet restrict_alphabet(const CountableAlphabet& alphabet, const EventPredicate& b);

/// lower <= P(A) <= upper. Exact when the two coincide.
struct MassBracket {
  Rational lower;
  Rational upper;
  /// Enumeration depth used when the bracket came from a partial sum.
  std::uint64_t depth = 0;
  [[nodiscard]] bool exact() const { return lower == upper; }
};

/// Certifies P(A): a registered closed form, else an exhaustive sum over a
/// finite alphabet, else a partial sum over the first `depth` symbols with
/// tail_bound(depth) as slack. depth 0 picks the first index whose tail bound
/// drops below 2^-40.
MassBracket event_mass(const DiscreteDistribution& p, const EventPredicate& a, std::uint64_t depth = 0);

class RandomVariable {
 public:
  RandomVariable(std::string name, CountableAlphabet domain, CountableAlphabet codomain,
                 std::function<Symbol(Symbol)> apply,
                 std::function<std::optional<EventPredicate>(Symbol)> preimage = {});

  static RandomVariable identity(const CountableAlphabet& alphabet);
  static RandomVariable constant(const CountableAlphabet& domain, Symbol c);
  /// n -> n mod k onto {0, ..., k-1}.
  static RandomVariable modulo(const CountableAlphabet& domain, std::uint64_t k);
  /// The characteristic function of A, onto {0, 1}.
  static RandomVariable indicator(const CountableAlphabet& domain, const EventPredicate& a);
  /// Maps members of cells[i] to targets[i]. Symbols in no cell raise PartitionError.
  static RandomVariable relabel(const CountableAlphabet& domain, std::vector<EventPredicate> cells,
                                std::vector<Symbol> targets);

  /// Throws ensemble::Error if the image leaves the codomain.
  [[nodiscard]] Symbol operator()(Symbol a) const;
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const CountableAlphabet& domain() const noexcept { return domain_; }
  [[nodiscard]] const CountableAlphabet& codomain() const noexcept { return codomain_; }
  /// {a : X(a) = x} as an event, when the variable can describe it.
  [[nodiscard]] std::optional<EventPredicate> preimage(Symbol x) const;

 private:
  std::string name_;
  CountableAlphabet domain_;
  CountableAlphabet codomain_;
  std::function<Symbol(Symbol)> apply_;
  std::function<std::optional<EventPredicate>(Symbol)> preimage_;
};

struct ConditioningOptions {
  /// Truncation depth for certifying P(B) when no closed form exists (0 = auto).
  std::uint64_t depth = 0;
};

/// P_B(a) = P(a) / P(B) on the alphabet B. With an exact P(B) the masses are
/// exact. With only a partial-sum lower bound S over the first `depth`
/// symbols, the result is P conditioned on the truncated event (B restricted
/// to those symbols), normalized by S. Throws ZeroConditioningError when the
/// certified P(B) (or its lower bound) is 0.
DiscreteDistribution conditional_distribution(const DiscreteDistribution& p, const EventPredicate& b,
                                              ConditioningOptions options = {});

/// X(P)(x) = P(X = x). Masses come from the certified mass of X's preimage
/// events; otherwise they are partial sums (lower bounds) and tail_bound
/// absorbs the difference.
DiscreteDistribution pushforward(const DiscreteDistribution& p, const RandomVariable& x);

/// Q(targets[i]) = P(cells[i]) on the finite alphabet of targets. A single
/// cell lacking an exact mass receives the complement of the others.
DiscreteDistribution contraction_distribution(const DiscreteDistribution& p, const std::vector<EventPredicate>& cells,
                                              const std::vector<Symbol>& targets);

/// The distribution Q on B u {a}: Q(x) = P(x) for x in B and Q(a) = P(not B),
/// with filler a the least-index symbol outside B. Requires an exact P(B).
struct FillerSpace {
  DiscreteDistribution q;
  Symbol filler;
  Rational p_b;
};
FillerSpace filler_distribution(const DiscreteDistribution& p, const EventPredicate& b);

}  // namespace ensemble
