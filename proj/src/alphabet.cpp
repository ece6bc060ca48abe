#include "ensemble/alphabet.hpp"

#include <charconv>
#include <cmath>
#include <mutex>
#include <unordered_map>
#include <utility>

#include "ensemble/errors.hpp"

namespace ensemble {

std::uint64_t cantor_pair(std::uint64_t x, std::uint64_t y) {
  __extension__ using u128 = unsigned __int128;
  const u128 s = static_cast<u128>(x) + y;
  const u128 z = s * (s + 1) / 2 + y;
  if (z > std::numeric_limits<std::uint64_t>::max()) throw Error("cantor pairing overflow");
  return static_cast<std::uint64_t>(z);
}

std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t z) {
  __extension__ using u128 = unsigned __int128;
  auto w = static_cast<std::uint64_t>((std::sqrt(8.0L * static_cast<long double>(z) + 1.0L) - 1.0L) / 2.0L);
  auto tri = [](std::uint64_t v) { return static_cast<u128>(v) * (v + 1) / 2; };
  while (tri(w) > z) --w;
  while (tri(w + 1) <= z) ++w;
  const auto y = static_cast<std::uint64_t>(z - tri(w));
  return {w - y, y};
}

class CountableAlphabet::Impl {
 public:
  explicit Impl(std::string label) : label_(std::move(label)) {}
  virtual ~Impl() = default;
  virtual Symbol enumerate(std::uint64_t index) const = 0;
  virtual bool contains(Symbol symbol) const = 0;
  virtual std::optional<std::uint64_t> index_of(Symbol symbol) const = 0;
  virtual std::optional<std::uint64_t> size() const = 0;
  virtual const std::vector<CountableAlphabet>* factors() const { return nullptr; }
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

namespace {

class NaturalsImpl final : public CountableAlphabet::Impl {
 public:
  NaturalsImpl() : Impl("N") {}
  Symbol enumerate(std::uint64_t index) const override { return Symbol{index}; }
  bool contains(Symbol) const override { return true; }
  std::optional<std::uint64_t> index_of(Symbol s) const override { return s.id; }
  std::optional<std::uint64_t> size() const override { return std::nullopt; }
};

class FiniteImpl final : public CountableAlphabet::Impl {
 public:
  FiniteImpl(std::vector<Symbol> symbols, std::string label)
      : Impl(std::move(label)), symbols_(std::move(symbols)) {
    for (std::uint64_t i = 0; i < symbols_.size(); ++i) {
      if (!index_.emplace(symbols_[i].id, i).second)
        throw Error("duplicate symbol " + std::to_string(symbols_[i].id) + " in finite alphabet");
    }
  }
  Symbol enumerate(std::uint64_t index) const override {
    if (index >= symbols_.size())
      throw std::out_of_range("index " + std::to_string(index) + " beyond finite alphabet " + label());
    return symbols_[index];
  }
  bool contains(Symbol s) const override { return index_.contains(s.id); }
  std::optional<std::uint64_t> index_of(Symbol s) const override {
    const auto it = index_.find(s.id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::uint64_t> size() const override { return symbols_.size(); }

 private:
  std::vector<Symbol> symbols_;
  std::unordered_map<std::uint64_t, std::uint64_t> index_;
};

class SubsetImpl final : public CountableAlphabet::Impl {
 public:
  SubsetImpl(CountableAlphabet parent, std::function<bool(Symbol)> member, std::string label,
             std::optional<std::uint64_t> known_size, std::uint64_t scan_limit)
      : Impl(std::move(label)),
        parent_(std::move(parent)),
        member_(std::move(member)),
        known_size_(known_size),
        scan_limit_(scan_limit) {}

  Symbol enumerate(std::uint64_t index) const override {
    std::lock_guard lock(mutex_);
    if (known_size_ && index >= *known_size_)
      throw std::out_of_range("index " + std::to_string(index) + " beyond subset " + label());
    std::uint64_t idle = 0;
    while (members_.size() <= index) {
      const auto parent_size = parent_.size();
      if (parent_size && next_parent_ >= *parent_size)
        throw std::out_of_range("index " + std::to_string(index) + " beyond subset " + label());
      if (idle++ >= scan_limit_) throw BudgetExhaustedError("enumerating subset " + label(), idle);
      const Symbol candidate = parent_.enumerate(next_parent_++);
      if (member_(candidate)) {
        members_.push_back(candidate);
        idle = 0;
      }
    }
    return members_[index];
  }

  bool contains(Symbol s) const override { return parent_.contains(s) && member_(s); }

  std::optional<std::uint64_t> index_of(Symbol s) const override {
    if (!contains(s)) return std::nullopt;
    const auto parent_index = parent_.index_of(s);
    if (!parent_index) return std::nullopt;
    std::lock_guard lock(mutex_);
    while (next_parent_ <= *parent_index) {
      const Symbol candidate = parent_.enumerate(next_parent_++);
      if (member_(candidate)) members_.push_back(candidate);
    }
    for (std::uint64_t i = members_.size(); i-- > 0;)
      if (members_[i] == s) return i;
    return std::nullopt;
  }

  std::optional<std::uint64_t> size() const override { return known_size_; }

 private:
  CountableAlphabet parent_;
  std::function<bool(Symbol)> member_;
  std::optional<std::uint64_t> known_size_;
  std::uint64_t scan_limit_;
  mutable std::mutex mutex_;
  mutable std::vector<Symbol> members_;
  mutable std::uint64_t next_parent_ = 0;
};

// Binary product head x tail along Cantor diagonals of (head index, tail index).
class ProductImpl final : public CountableAlphabet::Impl {
 public:
  ProductImpl(std::vector<CountableAlphabet> factors, CountableAlphabet head, CountableAlphabet tail, std::string label)
      : Impl(std::move(label)), factors_(std::move(factors)), head_(std::move(head)), tail_(std::move(tail)) {
    const auto hs = head_.size(), ts = tail_.size();
    if (hs && ts) size_ = *hs * *ts;
    dense_ = !hs && !ts;
  }

  Symbol enumerate(std::uint64_t index) const override {
    if (size_ && index >= *size_) throw std::out_of_range("index beyond product alphabet " + label());
    std::uint64_t ih = 0, it = 0;
    if (dense_) {
      std::tie(ih, it) = cantor_unpair(index);
    } else {
      std::tie(ih, it) = sparse_pair(index);
    }
    return Symbol{cantor_pair(head_.enumerate(ih).id, tail_.enumerate(it).id)};
  }

  bool contains(Symbol s) const override {
    const auto [h, t] = cantor_unpair(s.id);
    return head_.contains(Symbol{h}) && tail_.contains(Symbol{t});
  }

  std::optional<std::uint64_t> index_of(Symbol s) const override {
    const auto [h, t] = cantor_unpair(s.id);
    const auto ih = head_.index_of(Symbol{h});
    const auto it = tail_.index_of(Symbol{t});
    if (!ih || !it) return std::nullopt;
    if (dense_) return cantor_pair(*ih, *it);
    // Count valid index pairs preceding (ih, it) in diagonal order.
    const auto hs = head_.size(), ts = tail_.size();
    const std::uint64_t diag = *ih + *it;
    std::uint64_t count = 0;
    for (std::uint64_t d = 0; d < diag; ++d) count += valid_on_diagonal(d, hs, ts);
    for (std::uint64_t y = 0; y < *it; ++y) {
      const std::uint64_t x = diag - y;
      if ((!hs || x < *hs) && (!ts || y < *ts)) ++count;
    }
    return count;
  }

  std::optional<std::uint64_t> size() const override { return size_; }
  const std::vector<CountableAlphabet>* factors() const override { return &factors_; }
  const CountableAlphabet& tail() const { return tail_; }

 private:
  static std::uint64_t valid_on_diagonal(std::uint64_t d, std::optional<std::uint64_t> hs,
                                         std::optional<std::uint64_t> ts) {
    // pairs (x, y) with x + y = d, x < hs, y < ts
    std::uint64_t lo = 0, hi = d;  // range of y
    if (hs && d >= *hs) lo = d - *hs + 1;
    if (ts && *ts == 0) return 0;
    if (ts) hi = std::min(hi, *ts - 1);
    return hi >= lo ? hi - lo + 1 : 0;
  }

  std::pair<std::uint64_t, std::uint64_t> sparse_pair(std::uint64_t index) const {
    const auto hs = head_.size(), ts = tail_.size();
    std::uint64_t d = 0, before = 0;
    for (;; ++d) {
      const std::uint64_t n = valid_on_diagonal(d, hs, ts);
      if (before + n > index) break;
      before += n;
    }
    std::uint64_t skip = index - before;
    for (std::uint64_t y = 0; y <= d; ++y) {
      const std::uint64_t x = d - y;
      if ((!hs || x < *hs) && (!ts || y < *ts)) {
        if (skip == 0) return {x, y};
        --skip;
      }
    }
    throw Error("product enumeration inconsistency");
  }

  std::vector<CountableAlphabet> factors_;
  CountableAlphabet head_;
  CountableAlphabet tail_;
  std::optional<std::uint64_t> size_;
  bool dense_ = false;
};

}  // namespace

CountableAlphabet CountableAlphabet::naturals() {
  static const auto impl = std::make_shared<const NaturalsImpl>();
  return CountableAlphabet(impl);
}

CountableAlphabet CountableAlphabet::finite(std::vector<Symbol> symbols, std::string label) {
  if (label.empty()) {
    label = "{";
    for (std::size_t i = 0; i < symbols.size(); ++i) label += (i ? "," : "") + std::to_string(symbols[i].id);
    label += "}";
  }
  return CountableAlphabet(std::make_shared<const FiniteImpl>(std::move(symbols), std::move(label)));
}

CountableAlphabet CountableAlphabet::binary() {
  static const CountableAlphabet bits = finite({Symbol{0}, Symbol{1}});
  return bits;
}

CountableAlphabet CountableAlphabet::subset(const CountableAlphabet& parent, std::function<bool(Symbol)> member,
                                            std::string label, std::optional<std::uint64_t> known_size,
                                            std::uint64_t scan_limit) {
  return CountableAlphabet(
      std::make_shared<const SubsetImpl>(parent, std::move(member), std::move(label), known_size, scan_limit));
}

CountableAlphabet CountableAlphabet::product(std::vector<CountableAlphabet> factors) {
  if (factors.size() < 2) throw PreconditionError("product alphabet needs at least two factors");
  std::string label;
  for (std::size_t i = 0; i < factors.size(); ++i) label += (i ? "x" : "") + factors[i].label();
  CountableAlphabet tail = factors.size() == 2
                               ? factors[1]
                               : product(std::vector<CountableAlphabet>(factors.begin() + 1, factors.end()));
  CountableAlphabet head = factors[0];
  return CountableAlphabet(
      std::make_shared<const ProductImpl>(std::move(factors), std::move(head), std::move(tail), std::move(label)));
}

Symbol CountableAlphabet::enumerate(std::uint64_t index) const { return impl_->enumerate(index); }
bool CountableAlphabet::contains(Symbol symbol) const { return impl_->contains(symbol); }
std::optional<std::uint64_t> CountableAlphabet::index_of(Symbol symbol) const { return impl_->index_of(symbol); }
std::optional<std::uint64_t> CountableAlphabet::size() const { return impl_->size(); }
const std::string& CountableAlphabet::label() const { return impl_->label(); }

std::vector<Symbol> CountableAlphabet::first(std::uint64_t m) const {
  const auto n = size();
  const std::uint64_t count = n ? std::min(m, *n) : m;
  std::vector<Symbol> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(enumerate(i));
  return out;
}

bool CountableAlphabet::is_product() const { return impl_->factors() != nullptr; }

const std::vector<CountableAlphabet>& CountableAlphabet::factors() const {
  static const std::vector<CountableAlphabet> none;
  const auto* f = impl_->factors();
  return f ? *f : none;
}

std::vector<Symbol> CountableAlphabet::split(Symbol symbol) const {
  const auto& fs = factors();
  if (fs.empty()) return {symbol};
  std::vector<Symbol> out;
  std::uint64_t rest = symbol.id;
  for (std::size_t i = 0; i + 1 < fs.size(); ++i) {
    const auto [h, t] = cantor_unpair(rest);
    out.push_back(Symbol{h});
    rest = t;
  }
  out.push_back(Symbol{rest});
  return out;
}

Symbol CountableAlphabet::join(std::span<const Symbol> components) const {
  const auto& fs = factors();
  if (fs.empty()) {
    if (components.size() != 1) throw PreconditionError("join on a non-product alphabet needs one component");
    return components[0];
  }
  if (components.size() != fs.size())
    throw PreconditionError("expected " + std::to_string(fs.size()) + " components, got " +
                            std::to_string(components.size()));
  std::uint64_t code = components.back().id;
  for (std::size_t i = components.size() - 1; i-- > 0;) code = cantor_pair(components[i].id, code);
  return Symbol{code};
}

std::string CountableAlphabet::format(Symbol symbol) const {
  if (!is_product()) return std::to_string(symbol.id);
  std::string out;
  const auto parts = split(symbol);
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + std::to_string(parts[i].id);
  return out;
}

Symbol CountableAlphabet::parse_symbol(std::string_view text) const {
  auto parse_id = [&](std::string_view part) {
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty())
      throw Error("malformed symbol '" + std::string(text) + "'");
    return Symbol{value};
  };
  Symbol result;
  if (!is_product()) {
    result = parse_id(text);
  } else {
    std::vector<Symbol> parts;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      parts.push_back(parse_id(text.substr(start, comma == std::string_view::npos ? comma : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    result = join(parts);
  }
  if (!contains(result)) throw ForeignSymbolError("symbol '" + std::string(text) + "' not in alphabet " + label());
  return result;
}

}  // namespace ensemble
