#pragma once

// Glue between the library types and the oracle's plain vectors.

#include <string>
#include <vector>

#include "ensemble/distribution.hpp"
#include "ensemble/rational.hpp"
#include "ensemble/strings.hpp"
#include "oracles.hpp"

namespace support {

inline ensemble::SymbolString str(const oracle::Word& w) {
  std::vector<ensemble::Symbol> s;
  for (auto id : w) s.push_back(ensemble::Symbol{id});
  return ensemble::SymbolString(std::move(s));
}

inline oracle::Word word(const ensemble::SymbolString& s) {
  oracle::Word w;
  for (auto a : s) w.push_back(a.id);
  return w;
}

inline std::vector<ensemble::SymbolString> strs(const std::vector<oracle::Word>& ws) {
  std::vector<ensemble::SymbolString> out;
  for (const auto& w : ws) out.push_back(str(w));
  return out;
}

inline std::vector<oracle::Word> words(const ensemble::PrefixFreeSet& s) {
  std::vector<oracle::Word> out;
  for (const auto& x : s) out.push_back(word(x));
  return out;
}

inline ensemble::Rational rat(const oracle::Big& b) { return ensemble::Rational(b); }
inline oracle::Big big(const ensemble::Rational& r) { return r.to_big(); }

inline ensemble::Symbol sym(std::uint64_t id) { return ensemble::Symbol{id}; }

/// 1/2, 1/4, 1/4 on {0, 1, 2}.
inline ensemble::DiscreteDistribution three_point() {
  using ensemble::Rational;
  return ensemble::DiscreteDistribution::table(
      {{sym(0), Rational(1, 2)}, {sym(1), Rational(1, 4)}, {sym(2), Rational(1, 4)}});
}

inline ensemble::DiscreteDistribution geom2() { return ensemble::DiscreteDistribution::geometric(ensemble::Rational(1, 2)); }

}  // namespace support
