#pragma once

// Discrete probability spaces over countable alphabets, with exact rational
// masses and a certified tail bound, plus the generalized Bernoulli measure of
// cylinder sets.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ensemble/alphabet.hpp"
#include "ensemble/rational.hpp"
#include "ensemble/strings.hpp"

namespace ensemble {

/// Names the analytic family a distribution belongs to, so that events can
/// register closed forms for it ("geometric" with params {p}, "table", ...).
struct FamilyInfo {
  std::string name;
  std::vector<Rational> params;
};

class DiscreteDistribution {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    [[nodiscard]] virtual const CountableAlphabet& alphabet() const = 0;
    /// Called only for symbols of alphabet().
    [[nodiscard]] virtual Rational mass(Symbol symbol) const = 0;
    /// Upper bound on the mass of symbols with enumeration index >= m. The
    /// default is 1 - (mass of the first m symbols), which is exact for
    /// distributions whose masses are exact.
    [[nodiscard]] virtual Rational tail_bound(std::uint64_t m) const;
    /// False when masses are only partial-sum lower bounds.
    [[nodiscard]] virtual bool masses_exact() const { return true; }
    [[nodiscard]] virtual FamilyInfo family() const = 0;
    [[nodiscard]] virtual std::string describe() const = 0;

   private:
    mutable std::mutex prefix_mutex_;
    mutable std::vector<Rational> prefix_sums_{Rational(0)};
  };

  explicit DiscreteDistribution(std::shared_ptr<const Impl> impl);

  /// mass(n) = p (1-p)^n on the naturals; p in (0, 1].
  static DiscreteDistribution geometric(const Rational& p);
  /// Finite alphabet of the listed symbols, in listed order. Masses must be
  /// nonnegative and sum to exactly 1; zero masses are allowed.
  static DiscreteDistribution table(std::vector<std::pair<Symbol, Rational>> masses);
  static DiscreteDistribution point_mass(Symbol c);

  [[nodiscard]] const CountableAlphabet& alphabet() const { return impl_->alphabet(); }
  /// Throws ForeignSymbolError for symbols outside the alphabet.
  [[nodiscard]] Rational mass(Symbol symbol) const;
  [[nodiscard]] Rational tail_bound(std::uint64_t m) const { return impl_->tail_bound(m); }
  /// Smallest m with tail_bound(m) < eps; BudgetExhaustedError past `limit`.
  [[nodiscard]] std::uint64_t index_for_tail(const Rational& eps, std::uint64_t limit = std::uint64_t{1} << 20) const;
  [[nodiscard]] FamilyInfo family() const { return impl_->family(); }
  [[nodiscard]] bool masses_exact() const { return impl_->masses_exact(); }
  [[nodiscard]] std::string describe() const { return impl_->describe(); }
  /// Size of the alphabet when finite.
  [[nodiscard]] std::optional<std::uint64_t> support_size() const { return alphabet().size(); }

  [[nodiscard]] const std::shared_ptr<const Impl>& impl() const noexcept { return impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

/// P(sigma) = product of P(sigma(k)); 1 for lambda.
Rational string_mass(const DiscreteDistribution& p, const SymbolString& sigma);
/// Sum of string masses; equals the measure of the generated open set.
Rational set_mass(const DiscreteDistribution& p, const PrefixFreeSet& s);
/// Generalized Bernoulli measure of the cylinder of sigma.
Rational cylinder_measure(const DiscreteDistribution& p, const SymbolString& sigma);

struct Truncation {
  std::vector<Symbol> symbols;
  Rational residual;
};

/// First m symbols in enumeration order plus tail_bound(m).
Truncation truncate_alphabet(const DiscreteDistribution& p, std::uint64_t m);

/// Product distribution on the Cantor-paired product alphabet.
DiscreteDistribution product_distribution(const std::vector<DiscreteDistribution>& factors);

}  // namespace ensemble
