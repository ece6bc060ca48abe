#include <algorithm>
#include <set>

#include "ensemble/errors.hpp"
#include "ensemble/mltest.hpp"

namespace ensemble {
namespace {

// Calls visit(choice) for every element of choices[0] x choices[1] x ...
template <typename Visit>
void for_each_choice(const std::vector<std::vector<Symbol>>& choices, Visit&& visit) {
  for (const auto& c : choices)
    if (c.empty()) return;
  std::vector<std::size_t> at(choices.size(), 0);
  std::vector<Symbol> current(choices.size());
  for (std::size_t i = 0; i < choices.size(); ++i) current[i] = choices[i][0];
  while (true) {
    visit(current);
    std::size_t i = choices.size();
    while (i > 0) {
      --i;
      if (++at[i] < choices[i].size()) {
        current[i] = choices[i][at[i]];
        break;
      }
      at[i] = 0;
      current[i] = choices[i][0];
      if (i == 0) return;
    }
    if (choices.empty()) return;
  }
}

std::uint64_t checked_count(const std::vector<std::vector<Symbol>>& choices, std::uint64_t budget,
                            const std::string& what) {
  std::uint64_t count = 1;
  for (const auto& c : choices) {
    if (c.empty()) return 0;
    if (count > budget / c.size()) throw BudgetExhaustedError(what, budget);
    count *= c.size();
  }
  return count;
}

struct Truncated {
  std::vector<Symbol> symbols;
  Rational sum;
  Rational tail;
};

Truncated truncate(const DiscreteDistribution& p, std::uint64_t m) {
  Truncated out;
  out.symbols = p.alphabet().first(m);
  out.sum = Rational(0);
  for (const Symbol s : out.symbols) out.sum += p.mass(s);
  out.tail = p.tail_bound(out.symbols.size());
  return out;
}

// Shared bookkeeping: D levels plus identities, with a per-level string budget.
class Builder {
 public:
  Builder(const MLTest& t, PullbackOptions options) : t_(t), options_(options) {}

  template <typename Expand>
  Pullback build(std::string name, const DiscreteDistribution& domain, Expand&& expand) {
    std::vector<std::vector<SymbolString>> raw_levels;
    std::vector<PrefixFreeSet> levels;
    std::vector<PullbackIdentity> identities;
    for (std::uint64_t n = 1; n <= options_.up_to_level; ++n) {
      std::vector<SymbolString> d;
      for (const auto& sigma : t_.level(n)) {
        PullbackIdentity id;
        id.level = n;
        id.sigma = sigma;
        const std::size_t before = d.size();
        expand(sigma, d, id, options_.max_strings - std::min<std::uint64_t>(d.size(), options_.max_strings));
        id.strings = d.size() - before;
        if (d.size() > options_.max_strings)
          throw BudgetExhaustedError("pullback level " + std::to_string(n) + " too large", d.size());
        id.holds = id.relation == Relation::equal
                       ? id.truncated_mass <= id.target && id.target <= id.truncated_mass + id.residual
                       : id.truncated_mass <= id.target;
        identities.push_back(std::move(id));
      }
      levels.emplace_back(d);
      raw_levels.push_back(std::move(d));
    }
    return Pullback{MLTest::explicit_levels(std::move(name), domain, std::move(raw_levels)), std::move(levels),
                    std::move(identities)};
  }

 private:
  const MLTest& t_;
  PullbackOptions options_;
};

}  // namespace

bool Pullback::identities_hold() const {
  return std::all_of(identities.begin(), identities.end(), [](const auto& id) { return id.holds; });
}

Pullback shuffle_pullback(const MLTest& t, const IndexMap& f, PullbackOptions options) {
  const DiscreteDistribution& p = t.distribution();
  const Truncated trunc = truncate(p, options.m);
  auto expand = [&](const SymbolString& sigma, std::vector<SymbolString>& d, PullbackIdentity& id,
                    std::uint64_t budget) {
    std::vector<std::uint64_t> image;
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 1; k <= sigma.size(); ++k) {
      const std::uint64_t i = f.f(k);
      if (i == 0) throw PreconditionError("index map sent " + std::to_string(k) + " to 0");
      if (!seen.insert(i).second)
        throw InjectivityError("index map is not injective", "f(" + std::to_string(k) + ") = " + std::to_string(i));
      image.push_back(i);
    }
    const std::uint64_t length = image.empty() ? 0 : *std::max_element(image.begin(), image.end());
    if (length > options.depth)
      throw BudgetExhaustedError("shuffled string length " + std::to_string(length) + " exceeds depth", options.depth);
    std::vector<std::vector<Symbol>> choices(length, trunc.symbols);
    for (std::size_t k = 0; k < image.size(); ++k) choices[image[k] - 1] = {sigma[k]};
    checked_count(choices, budget, "shuffle pullback of [" + sigma.str() + "]");
    id.truncated_mass = Rational(0);
    for_each_choice(choices, [&](const std::vector<Symbol>& tau) {
      SymbolString s(tau);
      id.truncated_mass += string_mass(p, s);
      d.push_back(std::move(s));
    });
    const std::uint64_t free = length - sigma.size();
    id.target = string_mass(p, sigma);
    id.residual = id.target * (pow(trunc.sum + trunc.tail, free) - pow(trunc.sum, free));
    id.relation = Relation::equal;
  };
  return Builder(t, options).build("shuffle_pullback[" + f.name + "](" + t.name() + ")", p, expand);
}

Pullback selection_pullback(const MLTest& t, const SelectionRule& f, PullbackOptions options) {
  const DiscreteDistribution& p = t.distribution();
  const Truncated trunc = truncate(p, options.m);
  auto expand = [&](const SymbolString& sigma, std::vector<SymbolString>& d, PullbackIdentity& id,
                    std::uint64_t budget) {
    id.relation = Relation::at_most;
    id.target = string_mass(p, sigma);
    id.residual = Rational(0);
    id.truncated_mass = Rational(0);
    if (sigma.empty()) {
      d.emplace_back();
      id.truncated_mass = Rational(1);
      return;
    }
    // Depth-first over tau; `selected` counts symbols of sigma already matched.
    struct Node {
      std::vector<Symbol> tau;
      std::size_t selected;
    };
    std::vector<Node> stack{{{}, 0}};
    std::uint64_t produced = 0;
    while (!stack.empty()) {
      Node node = std::move(stack.back());
      stack.pop_back();
      if (node.tau.size() >= options.depth) continue;
      const Decision decision = f.decide(node.tau);
      if (decision == Decision::undefined)
        throw UndefinedSelectorError("selection rule undefined on prefix", "[" + SymbolString(node.tau).str() + "]");
      if (decision == Decision::yes) {
        node.tau.push_back(sigma[node.selected]);
        if (node.selected + 1 == sigma.size()) {
          if (++produced > budget) throw BudgetExhaustedError("selection pullback of [" + sigma.str() + "]", budget);
          SymbolString s(std::move(node.tau));
          id.truncated_mass += string_mass(p, s);
          d.push_back(std::move(s));
        } else {
          stack.push_back({std::move(node.tau), node.selected + 1});
        }
        continue;
      }
      for (auto it = trunc.symbols.rbegin(); it != trunc.symbols.rend(); ++it) {
        auto next = node.tau;
        next.push_back(*it);
        stack.push_back({std::move(next), node.selected});
      }
    }
  };
  return Builder(t, options).build("selection_pullback[" + f.name + "](" + t.name() + ")", p, expand);
}

ConditioningPullback conditioning_pullback(const MLTest& t, const DiscreteDistribution& p, const EventPredicate& b,
                                           std::uint64_t k, PullbackOptions options) {
  const MassBracket cert = event_mass(p, b);
  if (!cert.exact()) throw Error("conditioning pullback needs an exact P(" + b.name() + ")");
  if (cert.lower.is_zero()) throw ZeroConditioningError("P(" + b.name() + ") = 0");
  const Rational p_b = cert.lower;

  // Filler space. With P(B) = 1 a filler (if any) has mass 0 and never appears.
  std::optional<DiscreteDistribution> q;
  std::optional<Symbol> filler;
  try {
    FillerSpace fs = filler_distribution(p, b);
    q = fs.q;
    filler = fs.filler;
  } catch (const PreconditionError&) {
    q = p;  // B is the whole (scanned) alphabet
  }
  const Rational q_a = Rational(1) - p_b;
  const bool trivial = q_a.is_zero();

  auto expand = [&](const SymbolString& sigma, std::vector<SymbolString>& d, PullbackIdentity& id,
                    std::uint64_t budget) {
    for (const Symbol s : sigma)
      if (!b.member(s)) throw ForeignSymbolError("test string [" + sigma.str() + "] leaves " + b.name());
    const std::uint64_t length = sigma.size();
    const Rational q_sigma = string_mass(*q, sigma);
    id.relation = Relation::equal;
    id.target = q_sigma / pow(p_b, length);
    if (trivial || length == 0) {
      d.push_back(sigma);
      id.truncated_mass = q_sigma;
      id.residual = Rational(0);
      return;
    }
    // Gap exponents k_1..k_L in [0, K], odometer order.
    std::uint64_t count = 1;
    for (std::uint64_t i = 0; i < length; ++i) {
      if (count > budget / (k + 1)) throw BudgetExhaustedError("conditioning pullback of [" + sigma.str() + "]", budget);
      count *= k + 1;
    }
    std::vector<std::uint64_t> gaps(length, 0);
    id.truncated_mass = Rational(0);
    while (true) {
      std::vector<Symbol> tau;
      for (std::uint64_t i = 0; i < length; ++i) {
        tau.insert(tau.end(), gaps[i], *filler);
        tau.push_back(sigma[i]);
      }
      SymbolString s(std::move(tau));
      id.truncated_mass += string_mass(*q, s);
      d.push_back(std::move(s));
      std::uint64_t i = length;
      while (i > 0 && gaps[i - 1] == k) gaps[--i] = 0;
      if (i == 0) break;
      ++gaps[i - 1];
    }
    // sum_{k_i > K} terms are bounded by a union bound over which gap overflows.
    id.residual = Rational(static_cast<std::int64_t>(length)) * pow(q_a, k + 1) * q_sigma / pow(p_b, length);
  };
  Pullback pb = Builder(t, options).build("conditioning_pullback[" + b.name() + ", K=" + std::to_string(k) + "](" +
                                              t.name() + ")",
                                          *q, expand);
  return ConditioningPullback{std::move(pb), *q, filler, p_b};
}

Pullback map_pullback(const MLTest& t, const DiscreteDistribution& p, const RandomVariable& x, PullbackOptions options) {
  const Truncated trunc = truncate(p, options.m);
  auto expand = [&](const SymbolString& sigma, std::vector<SymbolString>& d, PullbackIdentity& id,
                    std::uint64_t budget) {
    std::vector<std::vector<Symbol>> choices;
    Rational truncated_product(1), widened_product(1), target_lower(1), target_upper(1);
    for (const Symbol y : sigma) {
      std::vector<Symbol> preimage;
      Rational mass(0);
      for (const Symbol a : trunc.symbols) {
        if (x(a) == y) {
          preimage.push_back(a);
          mass += p.mass(a);
        }
      }
      truncated_product *= mass;
      widened_product *= mass + trunc.tail;
      if (const auto event = x.preimage(y)) {
        const MassBracket bracket = event_mass(p, *event);
        target_lower *= bracket.lower;
        target_upper *= min(Rational(1), bracket.upper);
      } else {
        target_lower *= mass;
        target_upper *= mass + trunc.tail;
      }
      choices.push_back(std::move(preimage));
    }
    checked_count(choices, budget, "map pullback of [" + sigma.str() + "]");
    id.truncated_mass = Rational(0);
    if (sigma.empty()) {
      d.emplace_back();
      id.truncated_mass = Rational(1);
    } else {
      for_each_choice(choices, [&](const std::vector<Symbol>& tau) {
        SymbolString s(tau);
        id.truncated_mass += string_mass(p, s);
        d.push_back(std::move(s));
      });
    }
    id.relation = Relation::equal;
    id.residual = widened_product - truncated_product;
    id.target = target_lower;
    // An inexact target is itself a bracket; require the two brackets to meet.
    if (target_lower != target_upper) id.target = max(target_lower, min(target_upper, id.truncated_mass));
  };
  return Builder(t, options).build("map_pullback[" + x.name() + "](" + t.name() + ")", p, expand);
}

Pullback marginal_pullback(const MLTest& t, const DiscreteDistribution& p1, PullbackOptions options) {
  const DiscreteDistribution& p2 = t.distribution();
  const DiscreteDistribution joint = product_distribution({p1, p2});
  const Truncated trunc = truncate(p1, options.m);
  auto expand = [&](const SymbolString& sigma2, std::vector<SymbolString>& d, PullbackIdentity& id,
                    std::uint64_t budget) {
    const std::vector<std::vector<Symbol>> choices(sigma2.size(), trunc.symbols);
    checked_count(choices, budget, "marginal pullback of [" + sigma2.str() + "]");
    id.truncated_mass = Rational(0);
    if (sigma2.empty()) {
      d.emplace_back();
      id.truncated_mass = Rational(1);
    } else {
      for_each_choice(choices, [&](const std::vector<Symbol>& sigma1) {
        std::vector<Symbol> pairs;
        for (std::size_t i = 0; i < sigma1.size(); ++i) {
          const Symbol parts[2] = {sigma1[i], sigma2[i]};
          pairs.push_back(joint.alphabet().join(parts));
        }
        SymbolString s(std::move(pairs));
        id.truncated_mass += string_mass(joint, s);
        d.push_back(std::move(s));
      });
    }
    const std::uint64_t length = sigma2.size();
    id.relation = Relation::equal;
    id.target = string_mass(p2, sigma2);
    id.residual = id.target * (pow(trunc.sum + trunc.tail, length) - pow(trunc.sum, length));
  };
  return Builder(t, options).build("marginal_pullback(" + t.name() + ")", joint, expand);
}

}  // namespace ensemble
