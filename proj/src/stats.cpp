#include "ensemble/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>

#include "ensemble/errors.hpp"
#include "ensemble/transform.hpp"

namespace ensemble {

FrequencyReport lln_check(const EnsembleStream& alpha, const DiscreteDistribution& p, std::uint64_t n,
                          const std::vector<Symbol>& symbols, double k_sigma) {
  if (n < 1000) throw PreconditionError("lln_check needs n >= 1000");
  FrequencyReport report;
  report.stream = alpha.provenance();
  report.target = p.describe();
  report.n = n;
  report.k_sigma = k_sigma;
  EnsembleStream s = alpha.fresh();
  for (std::uint64_t i = 0; i < n; ++i) ++report.counts[s.next()];
  const double dn = static_cast<double>(n);
  for (const Symbol a : symbols) {
    SymbolFrequency f;
    f.symbol = a;
    const auto it = report.counts.find(a);
    f.count = it == report.counts.end() ? 0 : it->second;
    f.frequency = static_cast<double>(f.count) / dn;
    f.mass = p.mass(a);
    const double m = f.mass.to_double();
    f.deviation = std::abs(f.frequency - m);
    f.bound = k_sigma * std::sqrt(m * (1 - m) / dn);
    f.pass = f.deviation <= f.bound;
    report.pass = report.pass && f.pass;
    report.symbols.push_back(f);
  }
  return report;
}

EquivalenceReport equivalence_check(const EnsembleStream& alpha, const EnsembleStream& beta, std::uint64_t n,
                                    double k_sigma, double eps) {
  if (n == 0) throw PreconditionError("equivalence_check needs n >= 1");
  std::map<Symbol, std::uint64_t> ca, cb, pooled;
  EnsembleStream a = alpha.fresh(), b = beta.fresh();
  for (std::uint64_t i = 0; i < n; ++i) {
    const Symbol x = a.next(), y = b.next();
    ++ca[x];
    ++cb[y];
    ++pooled[x];
    ++pooled[y];
  }
  std::vector<std::pair<std::uint64_t, Symbol>> order;
  for (const auto& [s, c] : pooled) order.emplace_back(c, s);
  std::sort(order.begin(), order.end(), [](const auto& l, const auto& r) {
    return l.first != r.first ? l.first > r.first : l.second < r.second;
  });
  EquivalenceReport report;
  report.n = n;
  report.k_sigma = k_sigma;
  const double dn = static_cast<double>(n);
  std::uint64_t covered = 0;
  for (const auto& [count, s] : order) {
    if (static_cast<double>(covered) >= (1 - eps) * 2 * dn) break;
    covered += count;
    EquivalenceEntry e;
    e.symbol = s;
    e.frequency_a = static_cast<double>(ca[s]) / dn;
    e.frequency_b = static_cast<double>(cb[s]) / dn;
    const double p = static_cast<double>(count) / (2 * dn);
    e.gap = std::abs(e.frequency_a - e.frequency_b);
    e.bound = k_sigma * std::sqrt(2 * p * (1 - p) / dn);
    e.pass = e.gap <= e.bound;
    report.pass = report.pass && e.pass;
    report.symbols.push_back(e);
  }
  report.coverage = static_cast<double>(covered) / (2 * dn);
  return report;
}

IndependenceReport independence_check(std::span<const EnsembleStream> streams,
                                      std::span<const DiscreteDistribution> targets, std::uint64_t n, std::uint64_t t,
                                      double threshold) {
  const std::size_t m = streams.size();
  if (m < 2) throw PreconditionError("independence_check needs at least two streams");
  if (targets.size() != m) throw PreconditionError("one target distribution per stream");
  if (n == 0 || t == 0) throw PreconditionError("independence_check needs n >= 1 and t >= 1");
  const std::uint64_t radix = t + 1;
  std::uint64_t cells = 1;
  for (std::size_t i = 0; i < m; ++i) {
    if (cells > (std::uint64_t{1} << 20) / radix) throw PreconditionError("too many independence cells");
    cells *= radix;
  }

  // Marginal cell probabilities of each target: first t symbols, then the rest.
  std::vector<std::vector<Symbol>> heads(m);
  std::vector<std::vector<double>> marginal(m);
  for (std::size_t i = 0; i < m; ++i) {
    heads[i] = targets[i].alphabet().first(t);
    Rational rest(1);
    for (const Symbol s : heads[i]) {
      const Rational p = targets[i].mass(s);
      marginal[i].push_back(p.to_double());
      rest -= p;
    }
    marginal[i].resize(t, 0.0);
    marginal[i].push_back(max(Rational(0), rest).to_double());
  }

  IndependenceReport report;
  report.n = n;
  report.t = t;
  report.coordinates = m;
  report.threshold = threshold;
  report.joint_counts.assign(cells, 0);
  EnsembleStream joint = product_stream(streams);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto parts = joint.alphabet().split(joint.next());
    std::uint64_t cell = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto it = std::find(heads[i].begin(), heads[i].end(), parts[i]);
      cell = cell * radix + static_cast<std::uint64_t>(it - heads[i].begin());
    }
    ++report.joint_counts[cell];
  }

  const double dn = static_cast<double>(n);
  std::uint64_t positive = 0;
  for (std::uint64_t cell = 0; cell < cells; ++cell) {
    std::vector<std::uint64_t> label(m);
    double expected = 1;
    std::uint64_t rest = cell;
    for (std::size_t i = m; i-- > 0;) {
      label[i] = rest % radix;
      rest /= radix;
      expected *= marginal[i][label[i]];
    }
    const double observed = static_cast<double>(report.joint_counts[cell]);
    report.total_variation += std::abs(observed / dn - expected) / 2;
    if (expected > 0) {
      ++positive;
      const double e = expected * dn;
      report.chi_square += (observed - e) * (observed - e) / e;
    } else if (observed > 0) {
      report.chi_square = std::numeric_limits<double>::infinity();
    }
    report.cells.push_back(std::move(label));
    report.expected.push_back(expected);
  }
  report.degrees_of_freedom = positive > 1 ? positive - 1 : 0;
  if (report.degrees_of_freedom == 0) {
    report.chi_square_quantile = 0;
  } else {
    const boost::math::chi_squared dist(static_cast<double>(report.degrees_of_freedom));
    report.chi_square_quantile = boost::math::quantile(dist, 1 - 1e-4);
  }
  report.pass = report.total_variation <= threshold && report.chi_square <= report.chi_square_quantile;
  return report;
}

EventIndependenceReport event_independence_check(const EnsembleStream& alpha, const std::vector<EventPredicate>& events,
                                                 std::uint64_t n, double threshold) {
  const std::size_t m = events.size();
  if (m > 16) throw PreconditionError("event_independence_check supports at most 16 events");
  if (m < 2) throw PreconditionError("event_independence_check needs at least two events");
  if (n == 0) throw PreconditionError("event_independence_check needs n >= 1");
  EventIndependenceReport report;
  report.n = n;
  report.threshold = threshold;
  for (const auto& e : events) report.events.push_back(e.name());
  const std::size_t cells = std::size_t{1} << m;
  report.cell_counts.assign(cells, 0);
  EnsembleStream s = alpha.fresh();
  for (std::uint64_t k = 0; k < n; ++k) {
    const Symbol a = s.next();
    std::size_t bits = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (events[i].member(a)) bits |= std::size_t{1} << i;
    ++report.cell_counts[bits];
  }
  const double dn = static_cast<double>(n);
  // count of positions in every event of `subset` = sum over cells containing subset
  auto frequency_of = [&](std::size_t subset) {
    std::uint64_t c = 0;
    for (std::size_t cell = 0; cell < cells; ++cell)
      if ((cell & subset) == subset) c += report.cell_counts[cell];
    return static_cast<double>(c) / dn;
  };
  for (std::size_t i = 0; i < m; ++i) report.marginals.push_back(frequency_of(std::size_t{1} << i));
  for (std::size_t subset = 1; subset < cells; ++subset) {
    if (std::popcount(subset) < 2) continue;
    SubsetGap g;
    g.product = 1;
    for (std::size_t i = 0; i < m; ++i) {
      if (subset & (std::size_t{1} << i)) {
        g.events.push_back(i);
        g.product *= report.marginals[i];
      }
    }
    g.joint = frequency_of(subset);
    g.gap = std::abs(g.joint - g.product);
    report.max_gap = std::max(report.max_gap, g.gap);
    report.subsets.push_back(std::move(g));
  }
  report.pass = report.max_gap <= threshold;
  return report;
}

}  // namespace ensemble
