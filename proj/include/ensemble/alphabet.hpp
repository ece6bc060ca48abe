#pragma once

// Countable alphabets: an injective enumeration plus a membership decider.
//
// Symbols are identified by a natural-number id. For the naturals (and for
// finite tables listing 0..k-1) the id coincides with the enumeration index;
// for subsets and finite lists it does not, and `index_of` recovers the index.
// Product symbols are Cantor-paired ids, right-nested for arity > 2.

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ensemble {

struct Symbol {
  std::uint64_t id = 0;
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

/// Cantor pairing (x+y)(x+y+1)/2 + y. Throws ensemble::Error on overflow.
std::uint64_t cantor_pair(std::uint64_t x, std::uint64_t y);
std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t z);

class CountableAlphabet {
 public:
  class Impl;

  static CountableAlphabet naturals();
  /// Finite alphabet enumerated in the given order. Duplicates are rejected.
  static CountableAlphabet finite(std::vector<Symbol> symbols, std::string label = {});
  static CountableAlphabet binary();
  /// The members of `parent` accepted by `member`, in parent order. When the
  /// subset is finite but `known_size` is absent, enumeration past the last
  /// member fails after `scan_limit` parent indices.
  static CountableAlphabet subset(const CountableAlphabet& parent, std::function<bool(Symbol)> member,
                                  std::string label, std::optional<std::uint64_t> known_size = std::nullopt,
                                  std::uint64_t scan_limit = std::uint64_t{1} << 20);
  /// Cartesian product enumerated along Cantor diagonals of the factor indices.
  static CountableAlphabet product(std::vector<CountableAlphabet> factors);

  [[nodiscard]] Symbol enumerate(std::uint64_t index) const;
  [[nodiscard]] bool contains(Symbol symbol) const;
  [[nodiscard]] std::optional<std::uint64_t> index_of(Symbol symbol) const;
  /// nullopt for infinite alphabets.
  [[nodiscard]] std::optional<std::uint64_t> size() const;
  [[nodiscard]] bool is_finite() const { return size().has_value(); }
  [[nodiscard]] const std::string& label() const;

  /// First min(m, size) symbols in enumeration order.
  [[nodiscard]] std::vector<Symbol> first(std::uint64_t m) const;

  [[nodiscard]] bool is_product() const;
  /// Flat factor list of a product alphabet; empty otherwise.
  [[nodiscard]] const std::vector<CountableAlphabet>& factors() const;
  [[nodiscard]] std::vector<Symbol> split(Symbol symbol) const;
  [[nodiscard]] Symbol join(std::span<const Symbol> components) const;

  /// Decimal id, or comma-joined component ids for products.
  [[nodiscard]] std::string format(Symbol symbol) const;
  [[nodiscard]] Symbol parse_symbol(std::string_view text) const;

  [[nodiscard]] bool same_as(const CountableAlphabet& other) const noexcept { return impl_ == other.impl_; }

 private:
  explicit CountableAlphabet(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace ensemble
