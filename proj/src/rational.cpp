#include "ensemble/rational.hpp"

#include <cctype>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace ensemble {
namespace {

__extension__ using i128 = __int128;
__extension__ using u128 = unsigned __int128;
using boost::multiprecision::cpp_int;

constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

std::uint64_t gcd64(std::uint64_t u, std::uint64_t v) {
  if (u == 0) return v;
  if (v == 0) return u;
  const int shift = __builtin_ctzll(u | v);
  u >>= __builtin_ctzll(u);
  do {
    v >>= __builtin_ctzll(v);
    if (u > v) std::swap(u, v);
    v -= u;
  } while (v != 0);
  return u << shift;
}

std::uint64_t uabs(std::int64_t x) {
  return x < 0 ? static_cast<std::uint64_t>(-(x + 1)) + 1 : static_cast<std::uint64_t>(x);
}

u128 uabs128(i128 x) { return x < 0 ? static_cast<u128>(-x) : static_cast<u128>(x); }

bool fits(i128 num, i128 den) { return num <= kMax && num >= -kMax && den <= kMax; }

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (num == std::numeric_limits<std::int64_t>::min() ||
      den == std::numeric_limits<std::int64_t>::min()) {
    assign_big(BigRational(cpp_int(num), cpp_int(den)));
    return;
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const auto g = static_cast<std::int64_t>(gcd64(uabs(num), static_cast<std::uint64_t>(den)));
  num_ = num / g;
  den_ = den / g;
}

Rational::Rational(const BigRational& big) { assign_big(big); }

void Rational::assign_big(BigRational value) {
  const cpp_int& n = boost::multiprecision::numerator(value);
  const cpp_int& d = boost::multiprecision::denominator(value);
  if (abs(n) <= cpp_int(kMax) && d <= cpp_int(kMax)) {
    num_ = n.convert_to<std::int64_t>();
    den_ = d.convert_to<std::int64_t>();
    big_.reset();
  } else {
    num_ = 0;
    den_ = 1;
    big_ = std::make_shared<const BigRational>(std::move(value));
  }
}

Rational Rational::pow2(int exponent) {
  if (exponent >= 0 && exponent <= 62) return Rational(std::int64_t{1} << exponent);
  if (exponent < 0 && exponent >= -62) return Rational(1, std::int64_t{1} << -exponent);
  cpp_int p = cpp_int(1) << (exponent < 0 ? -exponent : exponent);
  return exponent < 0 ? Rational(BigRational(cpp_int(1), p)) : Rational(BigRational(p));
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  auto valid_integer = [](std::string_view s, bool allow_sign) {
    if (allow_sign && !s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  const auto slash = text.find('/');
  const std::string_view num_text = text.substr(0, slash);
  const std::string_view den_text = slash == std::string_view::npos ? "1" : text.substr(slash + 1);
  if (!valid_integer(num_text, true) || !valid_integer(den_text, false))
    throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
  std::string num_str(num_text);
  if (num_str.front() == '+') num_str.erase(0, 1);
  const cpp_int num(num_str);
  const cpp_int den{std::string(den_text)};
  if (den == 0) throw std::invalid_argument("rational with zero denominator '" + std::string(text) + "'");
  return Rational(BigRational(num, den));
}

bool Rational::is_zero() const noexcept { return big_ ? big_->is_zero() : num_ == 0; }

int Rational::sign() const noexcept {
  if (big_) return big_->sign();
  return (num_ > 0) - (num_ < 0);
}

BigRational Rational::to_big() const {
  if (big_) return *big_;
  return BigRational(cpp_int(num_), cpp_int(den_));
}

double Rational::to_double() const {
  if (big_) return big_->convert_to<double>();
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::str() const {
  if (big_) {
    return boost::multiprecision::numerator(*big_).str() + "/" +
           boost::multiprecision::denominator(*big_).str();
  }
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational& Rational::operator+=(const Rational& rhs) {
  if (!big_ && !rhs.big_) {
    const std::int64_t a = num_, b = den_, c = rhs.num_, d = rhs.den_;
    if (b == d) {
      const i128 t = static_cast<i128>(a) + c;
      const auto g = static_cast<i128>(gcd64(static_cast<std::uint64_t>(uabs128(t)), static_cast<std::uint64_t>(b)));
      const i128 n = t / g, den = b / g;
      if (fits(n, den)) {
        num_ = static_cast<std::int64_t>(n);
        den_ = static_cast<std::int64_t>(den);
        return *this;
      }
    } else {
      const auto g = static_cast<std::int64_t>(gcd64(static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(d)));
      const std::int64_t b1 = b / g, d1 = d / g;
      const i128 t = static_cast<i128>(a) * d1 + static_cast<i128>(c) * b1;
      const auto g2 = static_cast<std::int64_t>(
          gcd64(static_cast<std::uint64_t>(uabs128(t) % static_cast<u128>(g)), static_cast<std::uint64_t>(g)));
      const i128 n = t / g2;
      const i128 den = static_cast<i128>(b1) * (d / g2);
      if (fits(n, den)) {
        num_ = static_cast<std::int64_t>(n);
        den_ = static_cast<std::int64_t>(den);
        return *this;
      }
    }
  }
  assign_big(to_big() + rhs.to_big());
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

Rational& Rational::operator*=(const Rational& rhs) {
  if (!big_ && !rhs.big_) {
    const std::int64_t a = num_, b = den_, c = rhs.num_, d = rhs.den_;
    if (a == 0 || c == 0) {
      num_ = 0;
      den_ = 1;
      return *this;
    }
    const auto g1 = static_cast<std::int64_t>(gcd64(uabs(a), static_cast<std::uint64_t>(d)));
    const auto g2 = static_cast<std::int64_t>(gcd64(uabs(c), static_cast<std::uint64_t>(b)));
    const i128 n = static_cast<i128>(a / g1) * (c / g2);
    const i128 den = static_cast<i128>(b / g2) * (d / g1);
    if (fits(n, den)) {
      num_ = static_cast<std::int64_t>(n);
      den_ = static_cast<std::int64_t>(den);
      return *this;
    }
  }
  assign_big(to_big() * rhs.to_big());
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.is_zero()) throw std::domain_error("rational division by zero");
  if (!rhs.big_) {
    const Rational reciprocal = rhs.num_ < 0 ? Rational(-rhs.den_, -rhs.num_) : Rational(rhs.den_, rhs.num_);
    return *this *= reciprocal;
  }
  assign_big(to_big() / rhs.to_big());
  return *this;
}

Rational Rational::operator-() const {
  Rational out = *this;
  if (big_) {
    out.big_ = std::make_shared<const BigRational>(-*big_);
  } else {
    out.num_ = -num_;
  }
  return out;
}

bool operator==(const Rational& lhs, const Rational& rhs) {
  if (!lhs.big_ && !rhs.big_) return lhs.num_ == rhs.num_ && lhs.den_ == rhs.den_;
  // Canonical forms: a demoted value can never equal a big one.
  if (lhs.big_ && rhs.big_) return *lhs.big_ == *rhs.big_;
  return false;
}

std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs) {
  if (!lhs.big_ && !rhs.big_) {
    const i128 l = static_cast<i128>(lhs.num_) * rhs.den_;
    const i128 r = static_cast<i128>(rhs.num_) * lhs.den_;
    return l <=> r;
  }
  const BigRational l = lhs.to_big(), r = rhs.to_big();
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational pow(Rational base, std::uint64_t exponent) {
  Rational result(1);
  while (exponent != 0) {
    if (exponent & 1U) result *= base;
    exponent >>= 1U;
    if (exponent != 0) base *= base;
  }
  return result;
}

Rational abs(const Rational& value) { return value.sign() < 0 ? -value : value; }
Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

std::ostream& operator<<(std::ostream& os, const Rational& value) { return os << value.str(); }

}  // namespace ensemble
