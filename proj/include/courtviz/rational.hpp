#pragma once

#include <compare>
#include <cstdint>
#include <numeric>

#include "courtviz/error.hpp"

namespace courtviz {

/// Exact fraction with a positive denominator, always stored in lowest terms.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw Error(ErrorCode::kInvalidArgument, "rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  constexpr double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  constexpr std::int64_t floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }
  constexpr std::int64_t ceil() const { return -Rational(-num_, den_).floor(); }
  constexpr Rational frac() const { return *this - Rational(floor()); }

  friend constexpr Rational operator+(Rational a, Rational b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend constexpr Rational operator-(Rational a, Rational b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend constexpr Rational operator*(Rational a, Rational b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend constexpr Rational operator/(Rational a, Rational b) {
    if (b.num_ == 0) throw Error(ErrorCode::kInvalidArgument, "rational division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }

  friend constexpr bool operator==(Rational a, Rational b) = default;
  friend constexpr std::strong_ordering operator<=>(Rational a, Rational b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace courtviz
