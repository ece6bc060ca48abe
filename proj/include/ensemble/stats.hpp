#pragma once

// Frequency and independence checks on finite prefixes of ensembles. These
// test measure-one consequences (laws of large numbers) of the closure
// theorems on sampled streams; they do not and cannot decide randomness.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ensemble/events.hpp"
#include "ensemble/stream.hpp"

namespace ensemble {

struct SymbolFrequency {
  Symbol symbol;
  std::uint64_t count = 0;
  double frequency = 0;
  Rational mass;
  double deviation = 0;  // |count/n - mass|
  double bound = 0;      // k sqrt(p(1-p)/n)
  bool pass = false;
};

struct FrequencyReport {
  std::string stream;
  std::string target;
  std::uint64_t n = 0;
  double k_sigma = 4;
  std::map<Symbol, std::uint64_t> counts;  // every observed symbol; sums to n
  std::vector<SymbolFrequency> symbols;
  bool pass = true;
};

/// Reads n symbols from a fresh copy of alpha; passes iff every listed symbol
/// deviates from its target mass by at most k sqrt(p(1-p)/n). n >= 1000.
FrequencyReport lln_check(const EnsembleStream& alpha, const DiscreteDistribution& p, std::uint64_t n,
                          const std::vector<Symbol>& symbols, double k_sigma = 4);

struct EquivalenceEntry {
  Symbol symbol;
  double frequency_a = 0;
  double frequency_b = 0;
  double gap = 0;
  double bound = 0;  // k sqrt(2 p(1-p)/n), p pooled
  bool pass = false;
};

struct EquivalenceReport {
  std::uint64_t n = 0;
  double k_sigma = 4;
  double coverage = 0;  // pooled mass of the compared symbols
  std::vector<EquivalenceEntry> symbols;
  bool pass = true;
};

/// Two-sample frequency comparison over the most frequent symbols covering at
/// least 1 - eps of the pooled sample.
EquivalenceReport equivalence_check(const EnsembleStream& alpha, const EnsembleStream& beta, std::uint64_t n,
                                    double k_sigma = 4, double eps = 1e-3);

struct IndependenceReport {
  std::uint64_t n = 0;
  std::uint64_t t = 0;
  std::size_t coordinates = 0;
  /// Cell labels: per coordinate the index of one of the first t symbols, or t for "other".
  std::vector<std::vector<std::uint64_t>> cells;
  std::vector<std::uint64_t> joint_counts;
  std::vector<double> expected;  // product of target marginals
  double chi_square = 0;
  std::uint64_t degrees_of_freedom = 0;
  double chi_square_quantile = 0;  // at 1 - 1e-4
  double total_variation = 0;
  double threshold = 0;
  bool pass = false;
};

/// Empirical joint law of (alpha_1(k), ..., alpha_m(k)) over first-t-symbol
/// cells plus "other", against the product of the targets. Passes iff TV <=
/// threshold and chi-square is below its 1 - 1e-4 quantile.
IndependenceReport independence_check(std::span<const EnsembleStream> streams,
                                      std::span<const DiscreteDistribution> targets, std::uint64_t n,
                                      std::uint64_t t = 4, double threshold = 0.01);

struct SubsetGap {
  std::vector<std::size_t> events;  // indices i_1 < ... < i_k, k >= 2
  double joint = 0;                 // frequency of the intersection
  double product = 0;               // product of marginal frequencies
  double gap = 0;
};

struct EventIndependenceReport {
  std::uint64_t n = 0;
  std::vector<std::string> events;
  std::vector<double> marginals;
  std::vector<std::uint64_t> cell_counts;  // 2^m cells indexed by membership bits
  std::vector<SubsetGap> subsets;
  double max_gap = 0;
  double threshold = 0;
  bool pass = false;
};

/// Checks freq(A_i1 & ... & A_ik) = freq(A_i1) ... freq(A_ik) within threshold
/// for every subset of at least two events. At most 16 events.
EventIndependenceReport event_independence_check(const EnsembleStream& alpha, const std::vector<EventPredicate>& events,
                                                 std::uint64_t n, double threshold = 0.01);

}  // namespace ensemble
