#include "ensemble/distribution.hpp"

#include <unordered_map>

#include "ensemble/errors.hpp"

namespace ensemble {

Rational DiscreteDistribution::Impl::tail_bound(std::uint64_t m) const {
  const auto n = alphabet().size();
  if (n && m > *n) m = *n;
  std::lock_guard lock(prefix_mutex_);
  while (prefix_sums_.size() <= m) {
    const std::uint64_t j = prefix_sums_.size() - 1;
    prefix_sums_.push_back(prefix_sums_.back() + mass(alphabet().enumerate(j)));
  }
  return max(Rational(0), Rational(1) - prefix_sums_[m]);
}

namespace {

class GeometricImpl final : public DiscreteDistribution::Impl {
 public:
  explicit GeometricImpl(Rational p) : p_(std::move(p)), q_(Rational(1) - p_), alphabet_(CountableAlphabet::naturals()) {}
  const CountableAlphabet& alphabet() const override { return alphabet_; }
  Rational mass(Symbol s) const override { return p_ * pow(q_, s.id); }
  Rational tail_bound(std::uint64_t m) const override {
    if (q_.is_zero()) return Rational(m == 0 ? 1 : 0);
    return pow(q_, m);
  }
  FamilyInfo family() const override { return {"geometric", {p_}}; }
  std::string describe() const override { return "geometric(p=" + p_.str() + ")"; }

 private:
  Rational p_;
  Rational q_;
  CountableAlphabet alphabet_;
};

class TableImpl final : public DiscreteDistribution::Impl {
 public:
  explicit TableImpl(std::vector<std::pair<Symbol, Rational>> masses) : entries_(std::move(masses)) {
    if (entries_.empty()) throw Error("table distribution needs at least one symbol");
    std::vector<Symbol> symbols;
    Rational total(0);
    for (const auto& [symbol, mass] : entries_) {
      if (mass.sign() < 0) throw Error("negative mass for symbol " + std::to_string(symbol.id));
      symbols.push_back(symbol);
      lookup_.emplace(symbol.id, mass);
      total += mass;
    }
    if (total != Rational(1)) throw Error("table masses sum to " + total.str() + ", expected 1/1");
    alphabet_ = CountableAlphabet::finite(std::move(symbols));
  }
  const CountableAlphabet& alphabet() const override { return alphabet_; }
  Rational mass(Symbol s) const override { return lookup_.at(s.id); }
  FamilyInfo family() const override {
    FamilyInfo info{"table", {}};
    for (const auto& entry : entries_) info.params.push_back(entry.second);
    return info;
  }
  std::string describe() const override {
    std::string out = "table{";
    for (std::size_t i = 0; i < entries_.size(); ++i)
      out += (i ? "," : "") + std::to_string(entries_[i].first.id) + ":" + entries_[i].second.str();
    return out + "}";
  }

 private:
  std::vector<std::pair<Symbol, Rational>> entries_;
  std::unordered_map<std::uint64_t, Rational> lookup_;
  CountableAlphabet alphabet_ = CountableAlphabet::naturals();
};

class ProductImpl final : public DiscreteDistribution::Impl {
 public:
  explicit ProductImpl(std::vector<DiscreteDistribution> factors) : factors_(std::move(factors)) {
    std::vector<CountableAlphabet> alphabets;
    for (const auto& f : factors_) alphabets.push_back(f.alphabet());
    alphabet_ = CountableAlphabet::product(std::move(alphabets));
  }
  const CountableAlphabet& alphabet() const override { return alphabet_; }
  Rational mass(Symbol s) const override {
    const auto parts = alphabet_.split(s);
    Rational out(1);
    for (std::size_t i = 0; i < parts.size() && !out.is_zero(); ++i) out *= factors_[i].mass(parts[i]);
    return out;
  }
  bool masses_exact() const override {
    for (const auto& f : factors_)
      if (!f.masses_exact()) return false;
    return true;
  }
  FamilyInfo family() const override { return {"product", {}}; }
  std::string describe() const override {
    std::string out = "product(";
    for (std::size_t i = 0; i < factors_.size(); ++i) out += (i ? " x " : "") + factors_[i].describe();
    return out + ")";
  }

 private:
  std::vector<DiscreteDistribution> factors_;
  CountableAlphabet alphabet_ = CountableAlphabet::naturals();
};

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {
  if (!impl_) throw Error("null distribution");
}

DiscreteDistribution DiscreteDistribution::geometric(const Rational& p) {
  if (p.sign() <= 0 || p > Rational(1)) throw Error("geometric parameter must lie in (0, 1], got " + p.str());
  return DiscreteDistribution(std::make_shared<const GeometricImpl>(p));
}

DiscreteDistribution DiscreteDistribution::table(std::vector<std::pair<Symbol, Rational>> masses) {
  return DiscreteDistribution(std::make_shared<const TableImpl>(std::move(masses)));
}

DiscreteDistribution DiscreteDistribution::point_mass(Symbol c) { return table({{c, Rational(1)}}); }

Rational DiscreteDistribution::mass(Symbol symbol) const {
  if (!alphabet().contains(symbol))
    throw ForeignSymbolError("symbol " + std::to_string(symbol.id) + " not in alphabet " + alphabet().label());
  return impl_->mass(symbol);
}

std::uint64_t DiscreteDistribution::index_for_tail(const Rational& eps, std::uint64_t limit) const {
  if (tail_bound(0) < eps) return 0;
  std::uint64_t hi = 1;
  while (!(tail_bound(hi) < eps)) {
    if (hi >= limit) throw BudgetExhaustedError("tail bound stays above " + eps.str(), limit);
    hi = std::min(hi * 2, limit);
  }
  std::uint64_t lo = hi / 2;  // tail(lo) >= eps
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (tail_bound(mid) < eps ? hi : lo) = mid;
  }
  return hi;
}

Rational string_mass(const DiscreteDistribution& p, const SymbolString& sigma) {
  Rational out(1);
  for (Symbol a : sigma) {
    out *= p.mass(a);  // checks membership even after a zero factor
  }
  return out;
}

Rational set_mass(const DiscreteDistribution& p, const PrefixFreeSet& s) {
  Rational total(0);
  for (const auto& sigma : s) total += string_mass(p, sigma);
  return total;
}

Rational cylinder_measure(const DiscreteDistribution& p, const SymbolString& sigma) { return string_mass(p, sigma); }

Truncation truncate_alphabet(const DiscreteDistribution& p, std::uint64_t m) {
  if (m == 0) throw PreconditionError("truncation depth must be at least 1");
  return Truncation{p.alphabet().first(m), p.tail_bound(m)};
}

DiscreteDistribution product_distribution(const std::vector<DiscreteDistribution>& factors) {
  if (factors.size() < 2) throw PreconditionError("product distribution needs at least two factors");
  return DiscreteDistribution(std::make_shared<const ProductImpl>(factors));
}

}  // namespace ensemble
