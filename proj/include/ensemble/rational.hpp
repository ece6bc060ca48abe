#pragma once

// Exact rational numbers.
//
// Values live in a pair of int64 words while they fit and fall back to an
// arbitrary-precision boost::multiprecision::cpp_rational otherwise. Results
// that fit again are demoted, so the common desk-scale case (dyadic masses,
// short strings) never allocates.

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace ensemble {

using BigRational = boost::multiprecision::cpp_rational;

class Rational {
 public:
  constexpr Rational() noexcept = default;
  constexpr Rational(std::int64_t value) noexcept : num_(value) {}  // NOLINT implicit
  Rational(std::int64_t num, std::int64_t den);
  explicit Rational(const BigRational& big);

  static Rational pow2(int exponent);  // 2^exponent, exponent may be negative

  /// Parses "num/den" or "num". Throws std::invalid_argument on malformed input.
  static Rational parse(std::string_view text);

  [[nodiscard]] bool is_big() const noexcept { return big_ != nullptr; }
  [[nodiscard]] bool is_zero() const noexcept;
  [[nodiscard]] int sign() const noexcept;

  [[nodiscard]] BigRational to_big() const;
  [[nodiscard]] double to_double() const;

  /// Canonical "num/den" with den > 0; integers keep the "/1".
  [[nodiscard]] std::string str() const;

  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
  Rational operator-() const;

  friend bool operator==(const Rational& lhs, const Rational& rhs);
  friend std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs);

 private:
  void assign_big(BigRational value);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  std::shared_ptr<const BigRational> big_;
};

Rational pow(Rational base, std::uint64_t exponent);
Rational abs(const Rational& value);
Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

std::ostream& operator<<(std::ostream& os, const Rational& value);

}  // namespace ensemble
