#pragma once

// Measure representations on the Baire space, restriction sets E[rho], open
// set measures, and exact or depth-bounded checks of the basic inequalities
// they satisfy.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ensemble/distribution.hpp"

namespace ensemble {

class MeasureRepresentation {
 public:
  using Eval = std::function<Rational(const SymbolString&)>;
  /// Certified bound on r(sigma) - sum over the first m symbols a of r(sigma a).
  using Residual = std::function<Rational(const SymbolString&, std::uint64_t)>;

  MeasureRepresentation(CountableAlphabet alphabet, Eval eval, Residual residual);

  /// r(sigma) = P(sigma), with residual P(sigma) * tail_bound(m).
  static MeasureRepresentation from_distribution(const DiscreteDistribution& p);

  [[nodiscard]] Rational eval(const SymbolString& sigma) const { return eval_(sigma); }
  [[nodiscard]] Rational operator()(const SymbolString& sigma) const { return eval_(sigma); }
  [[nodiscard]] Rational consistency_residual(const SymbolString& sigma, std::uint64_t m) const {
    return residual_(sigma, m);
  }
  [[nodiscard]] const CountableAlphabet& alphabet() const noexcept { return alphabet_; }
  /// r(E) = sum of r over the members of E.
  [[nodiscard]] Rational mass(const PrefixFreeSet& e) const;

 private:
  CountableAlphabet alphabet_;
  Eval eval_;
  Residual residual_;
};

/// E[rho]: the members of `base` that extend `anchor`.
struct RestrictionSet {
  PrefixFreeSet base;
  SymbolString anchor;
  PrefixFreeSet members;
};

RestrictionSet restrict(const PrefixFreeSet& e, const SymbolString& rho);

struct RestrictionBound {
  bool holds = false;
  Rational restricted_mass;  // r(E[rho])
  Rational anchor_mass;      // r(rho)
  Rational margin;           // r(rho) - r(E[rho])
};

/// r(E[rho]) <= r(rho), computed exactly.
RestrictionBound check_restriction_bound(const MeasureRepresentation& r, const PrefixFreeSet& e,
                                         const SymbolString& rho);

struct CoveringReport {
  bool equal_up_to_residual = false;
  Rational gap;       // r(rho) - r(E[rho])
  Rational residual;  // mass left unexplored by the truncation
  Rational restricted_mass;
  Rational anchor_mass;
  std::uint64_t nodes = 0;  // internal nodes visited
};

/// Walks the extensions of rho over the first m symbols. Every node must either
/// be covered by E[rho] or be a proper prefix of one of its members; a node
/// that is neither escapes the cover and raises CoverViolationError. Mass
/// beyond the first m symbols below each internal node is summed as residual,
/// and gap <= residual is the verdict.
CoveringReport check_covering_equality(const MeasureRepresentation& r, const PrefixFreeSet& e, const SymbolString& rho,
                                       std::uint64_t m);

/// r(prefix_free_cover(S)).
Rational open_set_measure(const MeasureRepresentation& r, const std::vector<SymbolString>& s);

/// A string in [[E]] \ [[F]], if one exists. For alphabets with more than m
/// symbols the search for a branch that avoids F scans at most m symbols per
/// node (always enough for infinite alphabets once m > |F|), otherwise
/// BudgetExhaustedError.
std::optional<SymbolString> inclusion_witness(const CountableAlphabet& alphabet, const PrefixFreeSet& e,
                                              const PrefixFreeSet& f, std::uint64_t m);

/// Verifies [[E]] within [[F]] (InclusionViolationError with the escaping
/// string otherwise) and returns r(E) <= r(F).
bool check_monotonicity(const MeasureRepresentation& r, const PrefixFreeSet& e, const PrefixFreeSet& f,
                        std::uint64_t m);

}  // namespace ensemble
