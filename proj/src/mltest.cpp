#include "ensemble/mltest.hpp"

#include <algorithm>

#include "ensemble/errors.hpp"

namespace ensemble {

OracleContext::OracleContext(std::span<const EnsembleStream> oracles)
    : buffers_(oracles.size()), log_(oracles.size()) {
  for (const auto& o : oracles) oracles_.push_back(o.fresh());
}

Symbol OracleContext::read(std::size_t oracle, std::uint64_t position) {
  if (oracle >= oracles_.size())
    throw PreconditionError("oracle " + std::to_string(oracle) + " requested but only " +
                            std::to_string(oracles_.size()) + " supplied");
  if (position == 0) throw PreconditionError("oracle positions start at 1");
  auto& buffer = buffers_[oracle];
  while (buffer.size() < position) buffer.push_back(oracles_[oracle].next());
  log_[oracle].insert(position);
  return buffer[position - 1];
}

SymbolString OracleContext::prefix(std::size_t oracle, std::uint64_t n) {
  std::vector<Symbol> out;
  for (std::uint64_t i = 1; i <= n; ++i) out.push_back(read(oracle, i));
  return SymbolString(std::move(out));
}

std::uint64_t OracleContext::positions_read() const {
  std::uint64_t total = 0;
  for (const auto& positions : log_) total += positions.size();
  return total;
}

MLTest::MLTest(std::string name, DiscreteDistribution p, Generator generator, TestBudget budget)
    : name_(std::move(name)), p_(std::move(p)), generator_(std::move(generator)), budget_(budget) {}

MLTest MLTest::explicit_levels(std::string name, DiscreteDistribution p, std::vector<std::vector<SymbolString>> levels,
                               TestBudget budget) {
  auto shared = std::make_shared<const std::vector<std::vector<SymbolString>>>(std::move(levels));
  return MLTest(
      std::move(name), std::move(p),
      [shared](std::uint64_t n, OracleContext&) {
        return n <= shared->size() ? (*shared)[n - 1] : std::vector<SymbolString>{};
      },
      budget);
}

MLTest MLTest::run(DiscreteDistribution p, Symbol c, std::uint64_t offset, TestBudget budget) {
  return MLTest(
      "run(" + std::to_string(c.id) + ", +" + std::to_string(offset) + ")", std::move(p),
      [c, offset](std::uint64_t n, OracleContext&) {
        return std::vector<SymbolString>{SymbolString(std::vector<Symbol>(n + offset, c))};
      },
      budget);
}

MLTest MLTest::zero_symbol(DiscreteDistribution p, std::uint64_t scan, TestBudget budget) {
  std::optional<Symbol> zero;
  for (const Symbol s : p.alphabet().first(scan)) {
    if (p.mass(s).is_zero()) {
      zero = s;
      break;
    }
  }
  if (!zero) throw PreconditionError("no zero-mass symbol among the first " + std::to_string(scan));
  const Symbol a = *zero;
  return MLTest(
      "zero_symbol(" + std::to_string(a.id) + ")", std::move(p),
      [a](std::uint64_t n, OracleContext&) {
        return std::vector<SymbolString>{SymbolString(std::vector<Symbol>(n, a))};
      },
      budget);
}

MLTest MLTest::oracle_prefix(DiscreteDistribution p, std::size_t oracle, TestBudget budget) {
  return MLTest(
      "oracle_prefix(" + std::to_string(oracle) + ")", std::move(p),
      [oracle](std::uint64_t n, OracleContext& context) {
        return std::vector<SymbolString>{context.prefix(oracle, n)};
      },
      budget);
}

std::vector<SymbolString> MLTest::raw_level(std::uint64_t level, OracleContext& context) const {
  if (level == 0) throw PreconditionError("test levels start at 1");
  if (level > budget_.max_level) throw BudgetExhaustedError("level " + std::to_string(level) + " of " + name_, budget_.max_level);
  auto strings = generator_(level, context);
  if (strings.size() > budget_.max_strings)
    throw BudgetExhaustedError("level " + std::to_string(level) + " of " + name_ + " too large", strings.size());
  return strings;
}

PrefixFreeSet MLTest::level(std::uint64_t level, OracleContext& context) const {
  return PrefixFreeSet(raw_level(level, context));
}

PrefixFreeSet MLTest::level(std::uint64_t level) const {
  OracleContext none;
  return this->level(level, none);
}

TestReport verify_test(const MLTest& t, std::uint64_t up_to_level, OracleContext* context) {
  OracleContext none;
  OracleContext& ctx = context ? *context : none;
  TestReport report;
  report.test = t.name();
  report.budget = t.budget();
  for (std::uint64_t n = 1; n <= up_to_level; ++n) {
    LevelReport level;
    level.level = n;
    level.bound = Rational::pow2(-static_cast<int>(n));
    auto raw = t.raw_level(n, ctx);
    level.size = raw.size();
    try {
      const PrefixFreeSet c(std::move(raw));
      level.prefix_free = true;
      level.size = c.size();
      level.mass = set_mass(t.distribution(), c);
    } catch (const NotPrefixFreeError& e) {
      level.violation = e.what();
      // Measure of the generated open set, for the report only.
      level.mass = set_mass(t.distribution(), prefix_free_cover(t.raw_level(n, ctx)));
    }
    level.margin = level.bound - level.mass;
    level.pass = level.prefix_free && level.mass < level.bound;
    if (!level.pass && report.pass) {
      report.pass = false;
      report.first_failure = n;
    }
    report.levels.push_back(std::move(level));
  }
  return report;
}

HitResult prefix_hits(const SymbolString& prefix, const PrefixFreeSet& c) {
  for (const auto& sigma : c)
    if (sigma.is_prefix_of(prefix)) return {true, sigma};
  return {};
}

HitResult prefix_hits(const EnsembleStream& alpha, const MLTest& t, std::uint64_t level, std::uint64_t depth) {
  return prefix_hits(alpha.prefix(depth), t.level(level));
}

RelativeHitResult evaluate_relative_test(const MLTest& t, std::span<const EnsembleStream> oracles,
                                         const EnsembleStream& alpha, std::uint64_t level, std::uint64_t depth) {
  OracleContext context(oracles);
  const PrefixFreeSet c = t.level(level, context);
  const HitResult hit = prefix_hits(alpha.prefix(depth), c);
  return {hit.hit, hit.witness, context.access_log()};
}

FubiniSlice check_fubini_slice(const DiscreteDistribution& p1, const DiscreteDistribution& p2, const PrefixFreeSet& w,
                               const SymbolString& x) {
  const DiscreteDistribution joint = product_distribution({p1, p2});
  const auto& alphabet = joint.alphabet();
  std::vector<SymbolString> f;
  FubiniSlice out;
  out.rhs = Rational(0);
  for (const auto& word : w) {
    if (word.size() > x.size())
      throw PreconditionError("member [" + word.str(alphabet) + "] is longer than x (" + std::to_string(x.size()) + ")");
    std::vector<Symbol> s1, s2;
    for (const Symbol s : word) {
      const auto parts = alphabet.split(s);
      s1.push_back(parts[0]);
      s2.push_back(parts[1]);
    }
    const SymbolString sigma2(std::move(s2));
    if (!sigma2.is_prefix_of(x)) continue;
    // [[w]] cap [empty x x] is the cylinder of w continued by the rest of x in
    // the second coordinate.
    Rational rest(1);
    for (std::size_t i = word.size(); i < x.size(); ++i) rest *= p2.mass(x[i]);
    out.rhs += string_mass(joint, word) * rest;
    f.emplace_back(std::move(s1));
  }
  out.f = PrefixFreeSet(std::move(f));
  out.lhs = set_mass(p1, out.f) * string_mass(p2, x);
  out.equal = out.lhs == out.rhs;
  return out;
}

}  // namespace ensemble
