#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "ensemble/alphabet.hpp"

namespace ensemble {

/// A finite string over an alphabet; the empty string is lambda.
class SymbolString {
 public:
  SymbolString() = default;
  explicit SymbolString(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}
  SymbolString(std::initializer_list<std::uint64_t> ids);

  [[nodiscard]] std::size_t size() const noexcept { return symbols_.size(); }
  [[nodiscard]] bool empty() const noexcept { return symbols_.empty(); }
  /// Zero-based access; the k-th symbol of the string is (*this)[k-1].
  [[nodiscard]] Symbol operator[](std::size_t i) const { return symbols_[i]; }
  [[nodiscard]] std::span<const Symbol> view() const noexcept { return symbols_; }
  [[nodiscard]] const std::vector<Symbol>& symbols() const noexcept { return symbols_; }
  [[nodiscard]] auto begin() const noexcept { return symbols_.begin(); }
  [[nodiscard]] auto end() const noexcept { return symbols_.end(); }

  [[nodiscard]] SymbolString prefix(std::size_t n) const;
  [[nodiscard]] bool is_prefix_of(const SymbolString& other) const noexcept;
  [[nodiscard]] bool comparable_with(const SymbolString& other) const noexcept {
    return is_prefix_of(other) || other.is_prefix_of(*this);
  }
  [[nodiscard]] SymbolString extended(Symbol a) const;
  [[nodiscard]] SymbolString concat(const SymbolString& tail) const;
  void push_back(Symbol a) { symbols_.push_back(a); }

  /// Space-separated ids ("0 1 0"); lambda renders as "".
  [[nodiscard]] std::string str() const;
  [[nodiscard]] std::string str(const CountableAlphabet& alphabet) const;

  friend bool operator==(const SymbolString&, const SymbolString&) = default;
  /// Shortlex: by length, then lexicographically by symbol id.
  friend std::strong_ordering operator<=>(const SymbolString& lhs, const SymbolString& rhs);

 private:
  std::vector<Symbol> symbols_;
};

/// A finite set of strings in which no member is a proper prefix of another.
/// Members are kept in shortlex order.
class PrefixFreeSet {
 public:
  PrefixFreeSet() = default;
  /// Validates; throws NotPrefixFreeError naming a violating pair. Duplicates collapse.
  explicit PrefixFreeSet(std::vector<SymbolString> strings);
  PrefixFreeSet(std::initializer_list<SymbolString> strings)
      : PrefixFreeSet(std::vector<SymbolString>(strings)) {}

  [[nodiscard]] std::size_t size() const noexcept { return strings_.size(); }
  [[nodiscard]] bool empty() const noexcept { return strings_.empty(); }
  [[nodiscard]] const std::vector<SymbolString>& strings() const noexcept { return strings_; }
  [[nodiscard]] auto begin() const noexcept { return strings_.begin(); }
  [[nodiscard]] auto end() const noexcept { return strings_.end(); }
  [[nodiscard]] bool contains(const SymbolString& s) const;
  /// True iff some member is a prefix of `s` (s lies in the open set).
  [[nodiscard]] bool covers(const SymbolString& s) const;
  [[nodiscard]] const SymbolString* covering_member(const SymbolString& s) const;
  [[nodiscard]] std::size_t max_length() const noexcept;

  friend bool operator==(const PrefixFreeSet&, const PrefixFreeSet&) = default;

 private:
  std::vector<SymbolString> strings_;
};

/// The shortlex-minimal strings of S with no proper prefix inside S.
/// Generates the same open set as S and is prefix-free.
PrefixFreeSet prefix_free_cover(std::vector<SymbolString> strings);

/// True iff no member of `a` is comparable with a member of `b`, i.e. the
/// generated open sets are disjoint.
bool open_sets_disjoint(std::span<const SymbolString> a, std::span<const SymbolString> b);

}  // namespace ensemble
