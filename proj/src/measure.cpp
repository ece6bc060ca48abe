#include "ensemble/measure.hpp"

#include <set>

#include "ensemble/errors.hpp"

namespace ensemble {
namespace {

bool is_proper_prefix_of_member(const PrefixFreeSet& s, const SymbolString& tau) {
  for (const auto& member : s)
    if (member.size() > tau.size() && tau.is_prefix_of(member)) return true;
  return false;
}

}  // namespace

MeasureRepresentation::MeasureRepresentation(CountableAlphabet alphabet, Eval eval, Residual residual)
    : alphabet_(std::move(alphabet)), eval_(std::move(eval)), residual_(std::move(residual)) {}

MeasureRepresentation MeasureRepresentation::from_distribution(const DiscreteDistribution& p) {
  return MeasureRepresentation(
      p.alphabet(), [p](const SymbolString& sigma) { return string_mass(p, sigma); },
      [p](const SymbolString& sigma, std::uint64_t m) { return string_mass(p, sigma) * p.tail_bound(m); });
}

Rational MeasureRepresentation::mass(const PrefixFreeSet& e) const {
  Rational total(0);
  for (const auto& sigma : e) total += eval_(sigma);
  return total;
}

RestrictionSet restrict(const PrefixFreeSet& e, const SymbolString& rho) {
  std::vector<SymbolString> kept;
  for (const auto& sigma : e)
    if (rho.is_prefix_of(sigma)) kept.push_back(sigma);
  return RestrictionSet{e, rho, PrefixFreeSet(std::move(kept))};
}

RestrictionBound check_restriction_bound(const MeasureRepresentation& r, const PrefixFreeSet& e,
                                         const SymbolString& rho) {
  RestrictionBound out;
  out.restricted_mass = r.mass(restrict(e, rho).members);
  out.anchor_mass = r.eval(rho);
  out.margin = out.anchor_mass - out.restricted_mass;
  out.holds = out.margin.sign() >= 0;
  return out;
}

CoveringReport check_covering_equality(const MeasureRepresentation& r, const PrefixFreeSet& e, const SymbolString& rho,
                                       std::uint64_t m) {
  const PrefixFreeSet restricted = restrict(e, rho).members;
  const std::vector<Symbol> children = r.alphabet().first(m);
  CoveringReport out;
  out.residual = Rational(0);

  std::vector<SymbolString> stack{rho};
  while (!stack.empty()) {
    SymbolString tau = std::move(stack.back());
    stack.pop_back();
    if (restricted.covers(tau)) continue;
    if (!is_proper_prefix_of_member(restricted, tau))
      throw CoverViolationError("extension of the anchor escapes E[rho]", "[" + tau.str() + "]");
    ++out.nodes;
    out.residual += r.consistency_residual(tau, m);
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(tau.extended(*it));
  }
  out.restricted_mass = r.mass(restricted);
  out.anchor_mass = r.eval(rho);
  out.gap = out.anchor_mass - out.restricted_mass;
  out.equal_up_to_residual = out.gap.sign() >= 0 && out.gap <= out.residual;
  return out;
}

Rational open_set_measure(const MeasureRepresentation& r, const std::vector<SymbolString>& s) {
  return r.mass(prefix_free_cover(s));
}

std::optional<SymbolString> inclusion_witness(const CountableAlphabet& alphabet, const PrefixFreeSet& e,
                                              const PrefixFreeSet& f, std::uint64_t m) {
  const auto size = alphabet.size();
  const bool enumerate_all = size && *size <= m;
  std::vector<SymbolString> stack(e.strings().rbegin(), e.strings().rend());
  while (!stack.empty()) {
    SymbolString tau = std::move(stack.back());
    stack.pop_back();
    if (f.covers(tau)) continue;
    std::set<Symbol> next;
    for (const auto& member : f)
      if (member.size() > tau.size() && tau.is_prefix_of(member)) next.insert(member[tau.size()]);
    if (next.empty()) return tau;
    const std::uint64_t scan = enumerate_all ? *size : m;
    std::vector<Symbol> explored;
    for (std::uint64_t j = 0; j < scan; ++j) {
      const Symbol a = alphabet.enumerate(j);
      if (!next.contains(a)) return tau.extended(a);
      explored.push_back(a);
    }
    if (!enumerate_all)
      throw BudgetExhaustedError("no branch avoiding F below [" + tau.str() + "] among the first symbols", m);
    for (auto it = explored.rbegin(); it != explored.rend(); ++it) stack.push_back(tau.extended(*it));
  }
  return std::nullopt;
}

bool check_monotonicity(const MeasureRepresentation& r, const PrefixFreeSet& e, const PrefixFreeSet& f,
                        std::uint64_t m) {
  if (const auto witness = inclusion_witness(r.alphabet(), e, f, m))
    throw InclusionViolationError("[[E]] is not contained in [[F]]", "[" + witness->str() + "]");
  return r.mass(e) <= r.mass(f);
}

}  // namespace ensemble
