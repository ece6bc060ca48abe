#include "ensemble/stream.hpp"

#include <algorithm>
#include <memory>
#include <mutex>

#include "ensemble/errors.hpp"
#include "ensemble/rng.hpp"

namespace ensemble {
namespace {

constexpr std::uint64_t kCdfLimit = std::uint64_t{1} << 22;

// Cumulative masses in enumeration order, exact and as monotone doubles.
// Shared by every restart of one sampler.
class CdfTable {
 public:
  explicit CdfTable(DiscreteDistribution p) : p_(std::move(p)) {}

  /// Copies entries [from, from + count) into `out`; returns false at the end of a finite alphabet.
  bool extend(std::vector<double>& out, std::size_t count) {
    std::lock_guard lock(mutex_);
    const std::size_t want = out.size() + count;
    const auto size = p_.alphabet().size();
    while (doubles_.size() < want) {
      const std::uint64_t j = doubles_.size();
      if (size && j >= *size) break;
      if (j >= kCdfLimit) throw BudgetExhaustedError("extending the sampling table of " + p_.describe(), j);
      exact_ += p_.mass(p_.alphabet().enumerate(j));
      const double d = exact_.to_double();
      doubles_.push_back(doubles_.empty() ? d : std::max(d, doubles_.back()));
    }
    const std::size_t from = out.size();
    if (from >= doubles_.size()) return false;
    out.insert(out.end(), doubles_.begin() + static_cast<std::ptrdiff_t>(from),
               doubles_.begin() + static_cast<std::ptrdiff_t>(std::min(want, doubles_.size())));
    return true;
  }

  [[nodiscard]] const DiscreteDistribution& distribution() const { return p_; }

 private:
  DiscreteDistribution p_;
  std::mutex mutex_;
  Rational exact_{0};
  std::vector<double> doubles_;
};

}  // namespace

EnsembleStream::EnsembleStream(CountableAlphabet alphabet, std::string provenance, Factory factory,
                               std::optional<DiscreteDistribution> law)
    : alphabet_(std::move(alphabet)),
      provenance_(std::move(provenance)),
      factory_(std::move(factory)),
      law_(std::move(law)) {
  if (!factory_) throw Error("stream without a factory");
}

Symbol EnsembleStream::next() {
  if (!source_) source_ = factory_();
  const Symbol s = source_();
  ++position_;
  if (!alphabet_.contains(s))
    throw Error("stream " + provenance_ + " emitted " + std::to_string(s.id) + " outside " + alphabet_.label());
  return s;
}

std::vector<Symbol> EnsembleStream::take(std::size_t n) {
  std::vector<Symbol> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(next());
  return out;
}

SymbolString EnsembleStream::prefix(std::size_t n) const { return SymbolString(fresh().take(n)); }

EnsembleStream EnsembleStream::fresh() const { return EnsembleStream(alphabet_, provenance_, factory_, law_); }

EnsembleStream sample_ensemble(const DiscreteDistribution& p, std::uint64_t seed) {
  auto table = std::make_shared<CdfTable>(p);
  const bool finite = p.alphabet().is_finite();
  EnsembleStream::Factory factory = [table, seed, finite]() -> EnsembleStream::Source {
    struct State {
      SplitMix64 rng;
      std::vector<double> cum;
      bool complete = false;
    };
    auto state = std::make_shared<State>(State{SplitMix64(seed), {}, false});
    return [table, state, finite]() {
      double u = state->rng.uniform();
      auto& cum = state->cum;
      while (!state->complete && (cum.empty() || !(u < cum.back())))
        state->complete = !table->extend(cum, std::max<std::size_t>(16, cum.size()));
      if (cum.empty() || !(u < cum.back())) {
        // Only reachable when the listed masses sum to less than one (partial-sum
        // lower bounds): rescale onto the certified part.
        if (!finite || cum.empty() || cum.back() <= 0) throw Error("sampling table does not cover u");
        u *= cum.back();
      }
      const auto it = std::upper_bound(cum.begin(), cum.end(), u);
      return table->distribution().alphabet().enumerate(static_cast<std::uint64_t>(it - cum.begin()));
    };
  };
  return EnsembleStream(p.alphabet(), "sample(" + p.describe() + ", seed=" + std::to_string(seed) + ")",
                        std::move(factory), p);
}

EnsembleStream recorded_stream(const CountableAlphabet& alphabet, std::vector<Symbol> symbols,
                               std::string provenance) {
  auto data = std::make_shared<const std::vector<Symbol>>(std::move(symbols));
  EnsembleStream::Factory factory = [data]() -> EnsembleStream::Source {
    auto cursor = std::make_shared<std::size_t>(0);
    return [data, cursor]() {
      if (*cursor >= data->size()) throw StreamExhaustedError(data->size());
      return (*data)[(*cursor)++];
    };
  };
  return EnsembleStream(alphabet, std::move(provenance), std::move(factory));
}

EnsembleStream periodic_stream(const CountableAlphabet& alphabet, std::vector<Symbol> pattern) {
  if (pattern.empty()) throw PreconditionError("periodic stream needs a nonempty pattern");
  std::string provenance = "periodic(";
  for (std::size_t i = 0; i < pattern.size(); ++i) provenance += (i ? " " : "") + alphabet.format(pattern[i]);
  provenance += ")";
  auto data = std::make_shared<const std::vector<Symbol>>(std::move(pattern));
  EnsembleStream::Factory factory = [data]() -> EnsembleStream::Source {
    auto cursor = std::make_shared<std::size_t>(0);
    return [data, cursor]() { return (*data)[(*cursor)++ % data->size()]; };
  };
  return EnsembleStream(alphabet, std::move(provenance), std::move(factory));
}

}  // namespace ensemble
