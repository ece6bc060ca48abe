#include "ensemble/strings.hpp"

#include <algorithm>

#include "ensemble/errors.hpp"

namespace ensemble {
namespace {

bool lex_less(const SymbolString& a, const SymbolString& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

SymbolString::SymbolString(std::initializer_list<std::uint64_t> ids) {
  symbols_.reserve(ids.size());
  for (auto id : ids) symbols_.push_back(Symbol{id});
}

SymbolString SymbolString::prefix(std::size_t n) const {
  n = std::min(n, symbols_.size());
  return SymbolString(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(n)));
}

bool SymbolString::is_prefix_of(const SymbolString& other) const noexcept {
  return size() <= other.size() && std::equal(begin(), end(), other.begin());
}

SymbolString SymbolString::extended(Symbol a) const {
  SymbolString out = *this;
  out.symbols_.push_back(a);
  return out;
}

SymbolString SymbolString::concat(const SymbolString& tail) const {
  SymbolString out = *this;
  out.symbols_.insert(out.symbols_.end(), tail.begin(), tail.end());
  return out;
}

std::string SymbolString::str() const {
  std::string out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) out += (i ? " " : "") + std::to_string(symbols_[i].id);
  return out;
}

std::string SymbolString::str(const CountableAlphabet& alphabet) const {
  std::string out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) out += (i ? " " : "") + alphabet.format(symbols_[i]);
  return out;
}

std::strong_ordering operator<=>(const SymbolString& lhs, const SymbolString& rhs) {
  if (lhs.size() != rhs.size()) return lhs.size() <=> rhs.size();
  return std::lexicographical_compare_three_way(lhs.begin(), lhs.end(), rhs.begin(), rhs.end());
}

PrefixFreeSet::PrefixFreeSet(std::vector<SymbolString> strings) {
  // In plain lexicographic order every extension of x follows x contiguously,
  // so checking neighbours suffices.
  std::sort(strings.begin(), strings.end(), lex_less);
  strings.erase(std::unique(strings.begin(), strings.end()), strings.end());
  for (std::size_t i = 1; i < strings.size(); ++i) {
    if (strings[i - 1].is_prefix_of(strings[i])) throw NotPrefixFreeError(strings[i - 1].str(), strings[i].str());
  }
  std::sort(strings.begin(), strings.end());
  strings_ = std::move(strings);
}

bool PrefixFreeSet::contains(const SymbolString& s) const { return std::binary_search(begin(), end(), s); }

bool PrefixFreeSet::covers(const SymbolString& s) const { return covering_member(s) != nullptr; }

const SymbolString* PrefixFreeSet::covering_member(const SymbolString& s) const {
  for (const auto& member : strings_) {
    if (member.size() > s.size()) break;  // shortlex: remaining members are longer
    if (member.is_prefix_of(s)) return &member;
  }
  return nullptr;
}

std::size_t PrefixFreeSet::max_length() const noexcept { return strings_.empty() ? 0 : strings_.back().size(); }

PrefixFreeSet prefix_free_cover(std::vector<SymbolString> strings) {
  std::sort(strings.begin(), strings.end(), lex_less);
  strings.erase(std::unique(strings.begin(), strings.end()), strings.end());
  std::vector<SymbolString> minimal;
  for (auto& s : strings) {
    // Lexicographic order puts every proper prefix of s before it, and the
    // most recent kept string is the only candidate prefix.
    if (!minimal.empty() && minimal.back().is_prefix_of(s)) continue;
    minimal.push_back(std::move(s));
  }
  return PrefixFreeSet(std::move(minimal));
}

bool open_sets_disjoint(std::span<const SymbolString> a, std::span<const SymbolString> b) {
  for (const auto& x : a)
    for (const auto& y : b)
      if (x.comparable_with(y)) return false;
  return true;
}

}  // namespace ensemble
