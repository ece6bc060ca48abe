#include "ensemble/events.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "ensemble/errors.hpp"

namespace ensemble {
namespace {

std::optional<Rational> geometric_q(const DiscreteDistribution& p) {
  const FamilyInfo info = p.family();
  if (info.name != "geometric" || info.params.size() != 1) return std::nullopt;
  return Rational(1) - info.params[0];
}

std::uint64_t auto_depth(const DiscreteDistribution& p) {
  if (const auto n = p.support_size()) return *n;
  try {
    return std::max<std::uint64_t>(1, p.index_for_tail(Rational::pow2(-40), std::uint64_t{1} << 16));
  } catch (const BudgetExhaustedError&) {
    return std::uint64_t{1} << 16;
  }
}

/// Symbols of `members` that lie in the alphabet of p, ordered by enumeration index.
std::vector<Symbol> ordered_members(const CountableAlphabet& alphabet, const std::vector<Symbol>& members) {
  std::vector<std::pair<std::uint64_t, Symbol>> indexed;
  for (Symbol s : members) {
    if (!alphabet.contains(s)) continue;
    if (const auto i = alphabet.index_of(s)) indexed.emplace_back(*i, s);
  }
  std::sort(indexed.begin(), indexed.end());
  std::vector<Symbol> out;
  for (const auto& [i, s] : indexed) out.push_back(s);
  return out;
}

std::vector<Symbol> finite_alphabet_members(const CountableAlphabet& alphabet, const std::function<bool(Symbol)>& keep) {
  std::vector<Symbol> out;
  const std::uint64_t n = *alphabet.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    const Symbol s = alphabet.enumerate(i);
    if (keep(s)) out.push_back(s);
  }
  return out;
}

class ConditionalImpl final : public DiscreteDistribution::Impl {
 public:
  ConditionalImpl(DiscreteDistribution base, CountableAlphabet alphabet, Rational normalizer, bool exact,
                  std::string label)
      : base_(std::move(base)),
        alphabet_(std::move(alphabet)),
        normalizer_(std::move(normalizer)),
        exact_(exact),
        label_(std::move(label)) {}
  const CountableAlphabet& alphabet() const override { return alphabet_; }
  Rational mass(Symbol s) const override { return base_.mass(s) / normalizer_; }
  bool masses_exact() const override { return exact_ && base_.masses_exact(); }
  FamilyInfo family() const override { return {"conditional", {normalizer_}}; }
  std::string describe() const override { return label_; }

 private:
  DiscreteDistribution base_;
  CountableAlphabet alphabet_;
  Rational normalizer_;
  bool exact_;
  std::string label_;
};

class PushforwardImpl final : public DiscreteDistribution::Impl {
 public:
  PushforwardImpl(DiscreteDistribution base, RandomVariable x)
      : base_(std::move(base)), x_(std::move(x)), depth_(auto_depth(base_)) {
    exact_ = base_.masses_exact() && (base_.support_size().has_value() || x_.codomain().is_finite());
    if (exact_ && !base_.support_size()) {
      for (Symbol y : x_.codomain().first(*x_.codomain().size())) {
        const auto event = x_.preimage(y);
        if (!event || !event_mass(base_, *event).exact()) {
          exact_ = false;
          break;
        }
      }
    }
  }
  const CountableAlphabet& alphabet() const override { return x_.codomain(); }
  Rational mass(Symbol y) const override {
    {
      std::lock_guard lock(mutex_);
      if (const auto it = cache_.find(y.id); it != cache_.end()) return it->second;
    }
    Rational value = compute(y);
    std::lock_guard lock(mutex_);
    cache_.emplace(y.id, value);
    return value;
  }
  bool masses_exact() const override { return exact_; }
  FamilyInfo family() const override { return {"pushforward", {}}; }
  std::string describe() const override { return x_.name() + "(" + base_.describe() + ")"; }

 private:
  Rational compute(Symbol y) const {
    if (const auto event = x_.preimage(y)) return event_mass(base_, *event, depth_).lower;
    Rational total(0);
    for (std::uint64_t j = 0; j < depth_; ++j) {
      const Symbol a = base_.alphabet().enumerate(j);
      if (x_(a) == y) total += base_.mass(a);
    }
    return total;
  }

  DiscreteDistribution base_;
  RandomVariable x_;
  std::uint64_t depth_;
  bool exact_ = false;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, Rational> cache_;
};

class FiniteMassesImpl final : public DiscreteDistribution::Impl {
 public:
  FiniteMassesImpl(std::vector<Symbol> symbols, std::vector<Rational> masses, bool exact, std::string label)
      : alphabet_(CountableAlphabet::finite(std::move(symbols))), exact_(exact), label_(std::move(label)) {
    for (std::uint64_t i = 0; i < masses.size(); ++i) masses_.emplace(alphabet_.enumerate(i).id, masses[i]);
  }
  const CountableAlphabet& alphabet() const override { return alphabet_; }
  Rational mass(Symbol s) const override { return masses_.at(s.id); }
  bool masses_exact() const override { return exact_; }
  FamilyInfo family() const override { return {"contraction", {}}; }
  std::string describe() const override { return label_; }

 private:
  CountableAlphabet alphabet_;
  std::unordered_map<std::uint64_t, Rational> masses_;
  bool exact_;
  std::string label_;
};

class FillerImpl final : public DiscreteDistribution::Impl {
 public:
  FillerImpl(DiscreteDistribution base, CountableAlphabet alphabet, Symbol filler, Rational filler_mass, std::string label)
      : base_(std::move(base)),
        alphabet_(std::move(alphabet)),
        filler_(filler),
        filler_mass_(std::move(filler_mass)),
        label_(std::move(label)) {}
  const CountableAlphabet& alphabet() const override { return alphabet_; }
  Rational mass(Symbol s) const override { return s == filler_ ? filler_mass_ : base_.mass(s); }
  bool masses_exact() const override { return base_.masses_exact(); }
  FamilyInfo family() const override { return {"filler", {filler_mass_}}; }
  std::string describe() const override { return label_; }

 private:
  DiscreteDistribution base_;
  CountableAlphabet alphabet_;
  Symbol filler_;
  Rational filler_mass_;
  std::string label_;
};

}  // namespace

EventPredicate::EventPredicate(std::string name, std::function<bool(Symbol)> member, ClosedForm closed_form)
    : name_(std::move(name)), member_(std::move(member)), closed_form_(std::move(closed_form)) {}

std::optional<Rational> EventPredicate::closed_form(const DiscreteDistribution& p) const {
  if (!closed_form_) return std::nullopt;
  return closed_form_(p);
}

EventPredicate EventPredicate::all() {
  return EventPredicate("all", [](Symbol) { return true; }, [](const DiscreteDistribution&) { return Rational(1); });
}

EventPredicate EventPredicate::none() {
  EventPredicate e("none", [](Symbol) { return false; }, [](const DiscreteDistribution&) { return Rational(0); });
  e.finite_ = std::vector<Symbol>{};
  return e;
}

EventPredicate EventPredicate::set(std::vector<Symbol> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  std::string name = "{";
  for (std::size_t i = 0; i < members.size(); ++i) name += (i ? "," : "") + std::to_string(members[i].id);
  name += "}";
  auto lookup = std::make_shared<const std::unordered_set<std::uint64_t>>([&] {
    std::unordered_set<std::uint64_t> ids;
    for (Symbol s : members) ids.insert(s.id);
    return ids;
  }());
  EventPredicate e(
      std::move(name), [lookup](Symbol s) { return lookup->contains(s.id); },
      [members](const DiscreteDistribution& p) -> std::optional<Rational> {
        Rational total(0);
        for (Symbol s : members)
          if (p.alphabet().contains(s)) total += p.mass(s);
        return total;
      });
  e.finite_ = std::move(members);
  return e;
}

EventPredicate EventPredicate::residue(std::uint64_t k, std::uint64_t r) {
  if (k == 0) throw PreconditionError("residue modulus must be positive");
  std::string name = k == 2 ? (r == 0 ? "even" : r == 1 ? "odd" : "none")
                            : "mod" + std::to_string(k) + "=" + std::to_string(r);
  return EventPredicate(
      std::move(name), [k, r](Symbol s) { return s.id % k == r; },
      [k, r](const DiscreteDistribution& p) -> std::optional<Rational> {
        if (r >= k) return Rational(0);
        const auto q = geometric_q(p);
        if (!q) return std::nullopt;
        // sum_j p q^(r + jk) = p q^r / (1 - q^k)
        const Rational pp = Rational(1) - *q;
        return pp * pow(*q, r) / (Rational(1) - pow(*q, k));
      });
}

EventPredicate EventPredicate::at_least(std::uint64_t k) {
  std::vector<Symbol> below;
  for (std::uint64_t i = 0; i < k; ++i) below.push_back(Symbol{i});
  EventPredicate e = complement(set(std::move(below)));
  e.name_ = ">=" + std::to_string(k);
  return e;
}

EventPredicate EventPredicate::complement(const EventPredicate& a) {
  return EventPredicate(
      "not(" + a.name() + ")", [m = a.member_](Symbol s) { return !m(s); },
      [a](const DiscreteDistribution& p) -> std::optional<Rational> {
        const auto inner = a.closed_form(p);
        if (!inner) return std::nullopt;
        return Rational(1) - *inner;
      });
}

EventPredicate EventPredicate::intersection(const EventPredicate& a, const EventPredicate& b) {
  std::optional<std::vector<Symbol>> finite;
  if (a.finite_ || b.finite_) {
    const auto& source = a.finite_ ? *a.finite_ : *b.finite_;
    const auto& other = a.finite_ ? b : a;
    finite.emplace();
    for (Symbol s : source)
      if (other.member(s)) finite->push_back(s);
  }
  if (finite) {
    EventPredicate e = set(*finite);
    e.name_ = "(" + a.name() + "&" + b.name() + ")";
    return e;
  }
  return EventPredicate("(" + a.name() + "&" + b.name() + ")",
                        [ma = a.member_, mb = b.member_](Symbol s) { return ma(s) && mb(s); });
}

CountableAlphabet restrict_alphabet(const CountableAlphabet& alphabet, const EventPredicate& b) {
  if (b.finite_members()) return CountableAlphabet::finite(ordered_members(alphabet, *b.finite_members()), b.name());
  if (alphabet.is_finite())
    return CountableAlphabet::finite(finite_alphabet_members(alphabet, [&](Symbol s) { return b.member(s); }), b.name());
  return CountableAlphabet::subset(alphabet, [b](Symbol s) { return b.member(s); }, b.name());
}

MassBracket event_mass(const DiscreteDistribution& p, const EventPredicate& a, std::uint64_t depth) {
  if (p.masses_exact()) {
    if (const auto cf = a.closed_form(p)) return MassBracket{*cf, *cf, 0};
  }
  const auto& alphabet = p.alphabet();
  if (alphabet.is_finite()) depth = *alphabet.size();
  if (depth == 0) depth = auto_depth(p);
  Rational lower(0);
  for (std::uint64_t j = 0; j < depth; ++j) {
    const Symbol s = alphabet.enumerate(j);
    if (a.member(s)) lower += p.mass(s);
  }
  return MassBracket{lower, lower + p.tail_bound(depth), depth};
}

RandomVariable::RandomVariable(std::string name, CountableAlphabet domain, CountableAlphabet codomain,
                               std::function<Symbol(Symbol)> apply,
                               std::function<std::optional<EventPredicate>(Symbol)> preimage)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      codomain_(std::move(codomain)),
      apply_(std::move(apply)),
      preimage_(std::move(preimage)) {}

Symbol RandomVariable::operator()(Symbol a) const {
  const Symbol y = apply_(a);
  if (!codomain_.contains(y))
    throw Error(name_ + " maps " + std::to_string(a.id) + " outside its codomain " + codomain_.label());
  return y;
}

std::optional<EventPredicate> RandomVariable::preimage(Symbol x) const {
  if (!preimage_) return std::nullopt;
  return preimage_(x);
}

RandomVariable RandomVariable::identity(const CountableAlphabet& alphabet) {
  return RandomVariable("identity", alphabet, alphabet, [](Symbol a) { return a; },
                        [](Symbol x) -> std::optional<EventPredicate> { return EventPredicate::set({x}); });
}

RandomVariable RandomVariable::constant(const CountableAlphabet& domain, Symbol c) {
  return RandomVariable("const" + std::to_string(c.id), domain, CountableAlphabet::finite({c}),
                        [c](Symbol) { return c; },
                        [c](Symbol x) -> std::optional<EventPredicate> {
                          return x == c ? EventPredicate::all() : EventPredicate::none();
                        });
}

RandomVariable RandomVariable::modulo(const CountableAlphabet& domain, std::uint64_t k) {
  if (k == 0) throw PreconditionError("modulus must be positive");
  std::vector<Symbol> residues;
  for (std::uint64_t r = 0; r < k; ++r) residues.push_back(Symbol{r});
  return RandomVariable("mod" + std::to_string(k), domain, CountableAlphabet::finite(std::move(residues)),
                        [k](Symbol a) { return Symbol{a.id % k}; },
                        [k](Symbol x) -> std::optional<EventPredicate> { return EventPredicate::residue(k, x.id); });
}

RandomVariable RandomVariable::indicator(const CountableAlphabet& domain, const EventPredicate& a) {
  return RandomVariable("chi[" + a.name() + "]", domain, CountableAlphabet::binary(),
                        [a](Symbol s) { return Symbol{a.member(s) ? 1U : 0U}; },
                        [a](Symbol x) -> std::optional<EventPredicate> {
                          return x.id == 1 ? a : EventPredicate::complement(a);
                        });
}

RandomVariable RandomVariable::relabel(const CountableAlphabet& domain, std::vector<EventPredicate> cells,
                                       std::vector<Symbol> targets) {
  if (cells.empty() || cells.size() != targets.size())
    throw PreconditionError("relabel needs one target per cell");
  std::string name = "contract[";
  for (std::size_t i = 0; i < cells.size(); ++i)
    name += (i ? "," : "") + cells[i].name() + "->" + std::to_string(targets[i].id);
  name += "]";
  auto shared_cells = std::make_shared<const std::vector<EventPredicate>>(std::move(cells));
  auto codomain = CountableAlphabet::finite(targets);
  return RandomVariable(
      std::move(name), domain, std::move(codomain),
      [shared_cells, targets](Symbol a) {
        for (std::size_t i = 0; i < shared_cells->size(); ++i)
          if ((*shared_cells)[i].member(a)) return targets[i];
        throw PartitionError("symbol in no partition cell", std::to_string(a.id));
      },
      [shared_cells, targets](Symbol x) -> std::optional<EventPredicate> {
        for (std::size_t i = 0; i < targets.size(); ++i)
          if (targets[i] == x) return (*shared_cells)[i];
        return EventPredicate::none();
      });
}

DiscreteDistribution conditional_distribution(const DiscreteDistribution& p, const EventPredicate& b,
                                              ConditioningOptions options) {
  const MassBracket cert = event_mass(p, b, options.depth);
  const std::string label = p.describe() + "|" + b.name();
  if (cert.exact()) {
    if (cert.lower.is_zero()) throw ZeroConditioningError("P(" + b.name() + ") = 0");
    return DiscreteDistribution(
        std::make_shared<const ConditionalImpl>(p, restrict_alphabet(p.alphabet(), b), cert.lower, true, label));
  }
  if (cert.lower.is_zero())
    throw ZeroConditioningError("lower bound for P(" + b.name() + ") is 0 after " + std::to_string(cert.depth) +
                                " symbols");
  std::vector<Symbol> kept;
  for (std::uint64_t j = 0; j < cert.depth; ++j) {
    const Symbol s = p.alphabet().enumerate(j);
    if (b.member(s)) kept.push_back(s);
  }
  auto alphabet = CountableAlphabet::finite(std::move(kept), b.name() + "@" + std::to_string(cert.depth));
  return DiscreteDistribution(
      std::make_shared<const ConditionalImpl>(p, std::move(alphabet), cert.lower, false, label + "@truncated"));
}

DiscreteDistribution pushforward(const DiscreteDistribution& p, const RandomVariable& x) {
  return DiscreteDistribution(std::make_shared<const PushforwardImpl>(p, x));
}

DiscreteDistribution contraction_distribution(const DiscreteDistribution& p, const std::vector<EventPredicate>& cells,
                                              const std::vector<Symbol>& targets) {
  if (cells.empty() || cells.size() != targets.size())
    throw PreconditionError("contraction needs one target per cell");
  std::vector<MassBracket> brackets;
  std::size_t inexact = 0, missing = cells.size();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    brackets.push_back(event_mass(p, cells[i]));
    if (!brackets.back().exact()) {
      ++inexact;
      missing = i;
    }
  }
  std::vector<Rational> masses;
  for (const auto& b : brackets) masses.push_back(b.lower);
  bool exact = p.masses_exact() && inexact == 0;
  if (p.masses_exact() && inexact == 1) {
    Rational rest(1);
    for (std::size_t i = 0; i < masses.size(); ++i)
      if (i != missing) rest -= masses[i];
    masses[missing] = rest;
    exact = true;
  }
  std::string label = "contract(" + p.describe() + ")";
  return DiscreteDistribution(std::make_shared<const FiniteMassesImpl>(targets, std::move(masses), exact, label));
}

FillerSpace filler_distribution(const DiscreteDistribution& p, const EventPredicate& b) {
  const MassBracket cert = event_mass(p, b);
  if (!cert.exact()) throw Error("filler space needs an exact P(" + b.name() + ")");
  if (cert.lower.is_zero()) throw ZeroConditioningError("P(" + b.name() + ") = 0");
  const auto& alphabet = p.alphabet();
  const std::uint64_t scan = alphabet.size().value_or(std::uint64_t{1} << 16);
  std::optional<Symbol> filler;
  for (std::uint64_t j = 0; j < scan && !filler; ++j) {
    const Symbol s = alphabet.enumerate(j);
    if (!b.member(s)) filler = s;
  }
  if (!filler) throw PreconditionError("no symbol outside " + b.name() + " to use as filler");
  const Symbol a = *filler;
  CountableAlphabet q_alphabet = CountableAlphabet::naturals();
  auto keep = [b, a](Symbol s) { return s == a || b.member(s); };
  if (alphabet.is_finite()) {
    q_alphabet = CountableAlphabet::finite(finite_alphabet_members(alphabet, keep));
  } else {
    q_alphabet = CountableAlphabet::subset(alphabet, keep, b.name() + "+" + std::to_string(a.id));
  }
  std::string label = "filler(" + p.describe() + "," + b.name() + "->" + std::to_string(a.id) + ")";
  auto q = DiscreteDistribution(
      std::make_shared<const FillerImpl>(p, std::move(q_alphabet), a, Rational(1) - cert.lower, std::move(label)));
  return FillerSpace{std::move(q), a, cert.lower};
}

}  // namespace ensemble
