#pragma once

// Finite-stage Martin-Lof tests: leveled prefix-free sets C_n with
// lambda_P([[C_n]]) < 2^-n, verified exactly level by level; stream membership;
// relative tests with logged oracle access; the pullback constructions that
// carry a test on a transformed space back to the original space; and the
// product-slice measure identity.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ensemble/events.hpp"
#include "ensemble/stream.hpp"
#include "ensemble/transform.hpp"

namespace ensemble {

/// Oracle sequences a relative test may query, with a log of every position read.
class OracleContext {
 public:
  OracleContext() = default;
  /// Takes fresh copies; the caller's streams are not advanced.
  explicit OracleContext(std::span<const EnsembleStream> oracles);

  [[nodiscard]] std::size_t size() const noexcept { return oracles_.size(); }
  /// beta_i(position), 1-based position. Logged.
  Symbol read(std::size_t oracle, std::uint64_t position);
  /// beta_i restricted to n. Logs positions 1..n.
  SymbolString prefix(std::size_t oracle, std::uint64_t n);
  [[nodiscard]] const std::vector<std::set<std::uint64_t>>& access_log() const noexcept { return log_; }
  [[nodiscard]] std::uint64_t positions_read() const;

 private:
  std::vector<EnsembleStream> oracles_;
  std::vector<std::vector<Symbol>> buffers_;
  std::vector<std::set<std::uint64_t>> log_;
};

struct TestBudget {
  std::uint64_t max_level = 64;
  std::uint64_t max_strings = std::uint64_t{1} << 20;  // per level
};

class MLTest {
 public:
  /// Raw level contents; validated into a PrefixFreeSet on materialization.
  using Generator = std::function<std::vector<SymbolString>(std::uint64_t level, OracleContext&)>;

  MLTest(std::string name, DiscreteDistribution p, Generator generator, TestBudget budget = {});

  /// Level i (1-based) is levels[i-1]; later levels are empty.
  static MLTest explicit_levels(std::string name, DiscreteDistribution p, std::vector<std::vector<SymbolString>> levels,
                                TestBudget budget = {});
  /// C_n = {c^(n + offset)}.
  static MLTest run(DiscreteDistribution p, Symbol c, std::uint64_t offset = 0, TestBudget budget = {});
  /// C_n = {a^n} for the first zero-mass symbol a among the first `scan` symbols.
  static MLTest zero_symbol(DiscreteDistribution p, std::uint64_t scan = 1024, TestBudget budget = {});
  /// C_n = {beta_i restricted to n}, a test relative to oracle i.
  static MLTest oracle_prefix(DiscreteDistribution p, std::size_t oracle = 0, TestBudget budget = {});

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const DiscreteDistribution& distribution() const noexcept { return p_; }
  [[nodiscard]] const TestBudget& budget() const noexcept { return budget_; }

  /// Generator output for level n, budget-checked but not validated.
  std::vector<SymbolString> raw_level(std::uint64_t level, OracleContext& context) const;
  /// Validated level; NotPrefixFreeError on a violating pair.
  PrefixFreeSet level(std::uint64_t level, OracleContext& context) const;
  PrefixFreeSet level(std::uint64_t level) const;

 private:
  std::string name_;
  DiscreteDistribution p_;
  Generator generator_;
  TestBudget budget_;
};

struct LevelReport {
  std::uint64_t level = 0;
  std::size_t size = 0;
  bool prefix_free = false;
  std::string violation;  // the offending pair when not prefix-free
  Rational mass;
  Rational bound;   // 2^-level
  Rational margin;  // bound - mass
  bool pass = false;
};

struct TestReport {
  std::string test;
  std::vector<LevelReport> levels;
  bool pass = true;
  std::optional<std::uint64_t> first_failure;
  TestBudget budget;
};

/// Materializes levels 1..up_to_level and checks prefix-freeness and
/// mass < 2^-n exactly. BudgetExhaustedError past the budget.
TestReport verify_test(const MLTest& t, std::uint64_t up_to_level, OracleContext* context = nullptr);

struct HitResult {
  bool hit = false;
  std::optional<SymbolString> witness;
};

/// Whether some member of C_level is a prefix of alpha restricted to depth.
HitResult prefix_hits(const EnsembleStream& alpha, const MLTest& t, std::uint64_t level, std::uint64_t depth);
HitResult prefix_hits(const SymbolString& prefix, const PrefixFreeSet& c);

struct RelativeHitResult {
  bool hit = false;
  std::optional<SymbolString> witness;
  std::vector<std::set<std::uint64_t>> positions_read;  // per oracle
};

RelativeHitResult evaluate_relative_test(const MLTest& t, std::span<const EnsembleStream> oracles,
                                         const EnsembleStream& alpha, std::uint64_t level, std::uint64_t depth);

// ---------------------------------------------------------------------------
// Pullbacks. Each builds D_n as the union of F(sigma) over sigma in C_n,
// materialized over a truncated alphabet, and records per sigma the measure
// identity (or inequality) that makes D a test: the exact mass of the
// materialized F(sigma), a closed-form residual for what truncation left out,
// and the target value.

enum class Relation { equal, at_most };

struct PullbackIdentity {
  std::uint64_t level = 0;
  SymbolString sigma;
  std::size_t strings = 0;  // |F(sigma)| as materialized
  Rational truncated_mass;
  Rational residual;
  Rational target;
  /// equal: truncated <= target <= truncated + residual. at_most: truncated <= target.
  Relation relation = Relation::equal;
  bool holds = false;
};

struct Pullback {
  MLTest test;  // D, over the original space
  std::vector<PrefixFreeSet> levels;
  std::vector<PullbackIdentity> identities;
  [[nodiscard]] bool identities_hold() const;
};

struct PullbackOptions {
  std::uint64_t up_to_level = 8;
  /// Alphabet truncation for unconstrained positions (ignored for finite alphabets smaller than m).
  std::uint64_t m = 40;
  /// Longest string considered in F(sigma).
  std::uint64_t depth = 64;
  std::uint64_t max_strings = std::uint64_t{1} << 20;  // per level
};

/// F(sigma): strings tau of length max f({1..|sigma|}) with tau(f(k)) = sigma(k),
/// free positions over the first m symbols. Target P(sigma).
Pullback shuffle_pullback(const MLTest& t, const IndexMap& f, PullbackOptions options = {});

/// F(sigma): tau over the first m symbols, |tau| <= depth, from which f selects
/// exactly sigma with the last symbol of tau selected. Target P(sigma), at_most.
Pullback selection_pullback(const MLTest& t, const SelectionRule& f, PullbackOptions options = {});

struct ConditioningPullback {
  Pullback pullback;  // over the filler space Q on B + {a}
  DiscreteDistribution q;
  std::optional<Symbol> filler;
  Rational p_b;
};

/// T is a test for P_B. F(sigma) = {a^k1 sigma_1 ... a^kL sigma_L : k_i <= K}
/// over Q, with residual L Q(a)^(K+1) Q(sigma) / P(B)^L. When Q(a) = 0 (or
/// B is everything) F(sigma) = {sigma}.
ConditioningPullback conditioning_pullback(const MLTest& t, const DiscreteDistribution& p, const EventPredicate& b,
                                           std::uint64_t k, PullbackOptions options = {});

/// T is a test for X(P). F(sigma) = strings tau over the first m domain
/// symbols with X(tau(i)) = sigma(i). Target X(P)(sigma).
Pullback map_pullback(const MLTest& t, const DiscreteDistribution& p, const RandomVariable& x,
                      PullbackOptions options = {});

/// T is a test for P2. F(sigma2) = {sigma1 x sigma2 : sigma1 over the first m
/// symbols of P1}, a test for P1 x P2. Target P2(sigma2).
Pullback marginal_pullback(const MLTest& t, const DiscreteDistribution& p1, PullbackOptions options = {});

struct FubiniSlice {
  Rational lhs;  // P1(F(W, x)) P2(x)
  Rational rhs;  // lambda_{P1 x P2}([[W]] cap [empty x x])
  bool equal = false;
  PrefixFreeSet f;  // F(W, x)
};

/// W over the product alphabet of P1 x P2; every member must have length <= |x|.
FubiniSlice check_fubini_slice(const DiscreteDistribution& p1, const DiscreteDistribution& p2, const PrefixFreeSet& w,
                               const SymbolString& x);

}  // namespace ensemble
