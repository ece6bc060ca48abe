#pragma once

// Ensembles as lazy, seed-reproducible streams.
//
// A stream is a single-consumer cursor over a factory. The factory restarts
// the sequence from position 1, so `fresh()` yields an independent stream with
// the same provenance and therefore the same symbols. Transforms capture their
// parents' factories and never disturb the parent's cursor.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ensemble/distribution.hpp"

namespace ensemble {

inline constexpr std::uint64_t kDefaultScanBudget = 10'000'000;

class EnsembleStream {
 public:
  using Source = std::function<Symbol()>;
  using Factory = std::function<Source()>;

  /// `law` is the distribution the stream is an ensemble for, when known.
  EnsembleStream(CountableAlphabet alphabet, std::string provenance, Factory factory,
                 std::optional<DiscreteDistribution> law = std::nullopt);
  EnsembleStream(EnsembleStream&&) noexcept = default;
  EnsembleStream& operator=(EnsembleStream&&) noexcept = default;
  EnsembleStream(const EnsembleStream&) = delete;
  EnsembleStream& operator=(const EnsembleStream&) = delete;

  /// Next symbol. Throws ensemble::Error if it falls outside the alphabet.
  Symbol next();
  std::vector<Symbol> take(std::size_t n);
  /// alpha restricted to n, computed on a fresh copy; this cursor does not move.
  [[nodiscard]] SymbolString prefix(std::size_t n) const;
  /// Number of symbols consumed so far.
  [[nodiscard]] std::uint64_t position() const noexcept { return position_; }

  [[nodiscard]] EnsembleStream fresh() const;
  [[nodiscard]] const CountableAlphabet& alphabet() const noexcept { return alphabet_; }
  [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }
  [[nodiscard]] const std::optional<DiscreteDistribution>& law() const noexcept { return law_; }
  [[nodiscard]] const Factory& factory() const noexcept { return factory_; }

 private:
  CountableAlphabet alphabet_;
  std::string provenance_;
  Factory factory_;
  std::optional<DiscreteDistribution> law_;
  Source source_;
  std::uint64_t position_ = 0;
};

/// i.i.d. draws by inverse CDF over the enumeration order. Each draw takes u
/// uniform in [0, 1) and emits the first symbol whose cumulative mass exceeds
/// u, so u sits in the left-closed interval of its symbol and zero-mass
/// symbols (zero-width intervals) are never emitted. The cumulative table is
/// extended on demand.
EnsembleStream sample_ensemble(const DiscreteDistribution& p, std::uint64_t seed);

/// A finite stream; reading past the end throws StreamExhaustedError.
EnsembleStream recorded_stream(const CountableAlphabet& alphabet, std::vector<Symbol> symbols, std::string provenance);

/// pattern, pattern, pattern, ...
EnsembleStream periodic_stream(const CountableAlphabet& alphabet, std::vector<Symbol> pattern);

}  // namespace ensemble
