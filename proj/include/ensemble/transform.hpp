#pragma once

// The algebra of operations on ensembles: shuffling, selection, conditioning,
// mixing (characteristic sequences), contraction, random-variable images and
// products. Each output carries the distribution the corresponding closure
// theorem prescribes for it, when the parent's law is known.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ensemble/events.hpp"
#include "ensemble/stream.hpp"

namespace ensemble {

/// An index map f on the positive integers; output(k) = alpha(f(k)).
struct IndexMap {
  std::string name;
  std::function<std::uint64_t(std::uint64_t)> f;

  static IndexMap identity();
  /// k -> a k + b, requires a >= 1 and a + b >= 1.
  static IndexMap affine(std::uint64_t a, std::int64_t b);
  /// 1 <-> 2, 3 <-> 4, ...
  static IndexMap swap_pairs();
};

enum class Decision { yes, no, undefined };

/// A generalized selection function: decides from alpha restricted to m
/// whether alpha(m+1) is selected. decide(lambda) gates alpha(1).
struct SelectionRule {
  std::string name;
  std::function<Decision(std::span<const Symbol>)> decide;

  static SelectionRule all();
  /// YES iff the prefix length is even; selects alpha(1), alpha(3), ...
  static SelectionRule even_length();
  /// YES iff the prefix is nonempty and ends with c.
  static SelectionRule after(Symbol c);
  /// YES iff the prefix length is a multiple of k.
  static SelectionRule every(std::uint64_t k);
};

/// output(k) = alpha(f(k)). Injectivity is checked lazily over the images seen
/// so far (InjectivityError on a repeat); parent symbols are buffered only up
/// to the running maximum of f.
EnsembleStream shuffle(const EnsembleStream& alpha, IndexMap f);

/// Scans prefixes alpha restricted to m for m = 0, 1, ... and emits alpha(m+1)
/// whenever decide returns YES, so output(k) = alpha(s_f(alpha, k) + 1).
/// UNDEFINED raises UndefinedSelectorError; more than `budget` consecutive
/// NO answers raise BudgetExhaustedError.
EnsembleStream select(const EnsembleStream& alpha, SelectionRule f, std::uint64_t budget = kDefaultScanBudget);

/// Deletes the symbols outside B. More than `budget` consecutive deletions
/// raise BudgetExhaustedError.
EnsembleStream condition(const EnsembleStream& alpha, const EventPredicate& b,
                         std::uint64_t budget = kDefaultScanBudget);

/// Pointwise image X(alpha).
EnsembleStream map_stream(const EnsembleStream& alpha, const RandomVariable& x);

/// The 0/1 sequence of memberships in A; map_stream with the indicator of A.
EnsembleStream characteristic(const EnsembleStream& alpha, const EventPredicate& a);

/// Replaces members of cells[i] by targets[i]. The partition is spot-checked
/// on the first `spot_check` symbols of the alphabet (PartitionError naming a
/// symbol in no cell or in two cells); later symbols in no cell fail on emission.
EnsembleStream contract(const EnsembleStream& alpha, std::vector<EventPredicate> cells, std::vector<Symbol> targets,
                        std::uint64_t spot_check = 64);

/// Componentwise zip onto the product alphabet; needs at least two streams.
EnsembleStream product_stream(std::span<const EnsembleStream> streams);

}  // namespace ensemble
