#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mirs {

struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact rational arithmetic on 128-bit integers with overflow detection and
/// eager cross-reduction.  Denominator is kept positive and the fraction
/// reduced.
class Rational {
 public:
  using Int = __int128;

  Rational() = default;
  Rational(std::int64_t n) : num_(n), den_(1) {}
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    Int g = gcdx(a.den_, b.den_);
    Int bd = b.den_ / g;
    Int n = checked_add(checked_mul(a.num_, bd), checked_mul(b.num_, a.den_ / g));
    Int d = checked_mul(a.den_, bd);
    return make(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    Int g1 = gcdx(absx(a.num_), b.den_);
    Int g2 = gcdx(absx(b.num_), a.den_);
    Int n = checked_mul(a.num_ / g1, b.num_ / g2);
    Int d = checked_mul(a.den_ / g2, b.den_ / g1);
    return make_reduced(n, d);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    Rational inv;
    inv.num_ = b.den_;
    inv.den_ = b.num_;
    if (inv.den_ < 0) {
      inv.num_ = -inv.num_;
      inv.den_ = -inv.den_;
    }
    return a * inv;
  }
  Rational operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return checked_mul(a.num_, b.den_) < checked_mul(b.num_, a.den_);
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  double to_double() const { return double(num_) / double(den_); }

  std::string str() const {
    if (den_ == 1) return int_str(num_);
    return int_str(num_) + "/" + int_str(den_);
  }

  static Rational binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return Rational(0);
    Rational r(1);
    for (std::int64_t i = 0; i < k; ++i) r = r * Rational(n - i) / Rational(i + 1);
    return r;
  }
  static Rational factorial(std::int64_t n) {
    Rational r(1);
    for (std::int64_t i = 2; i <= n; ++i) r *= Rational(i);
    return r;
  }

 private:
  void assign(Int n, Int d) { *this = make(n, d); }

  static Int absx(Int v) { return v < 0 ? -v : v; }

  static Int gcdx(Int a, Int b) {
    a = absx(a);
    b = absx(b);
    while (b) {
      Int t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  static Int checked_mul(Int a, Int b) {
    Int r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("Rational: 128-bit overflow");
    return r;
  }
  static Int checked_add(Int a, Int b) {
    Int r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("Rational: 128-bit overflow");
    return r;
  }

  static Rational make(Int n, Int d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    Int g = gcdx(n, d);
    Rational r;
    r.num_ = n / g;
    r.den_ = d / g;
    return r;
  }
  static Rational make_reduced(Int n, Int d) {  // inputs already co-prime up to sign
    if (d < 0) {
      n = -n;
      d = -d;
    }
    Rational r;
    r.num_ = n;
    r.den_ = d;
    return r;
  }

  static std::string int_str(Int v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? (unsigned __int128)(-v) : (unsigned __int128)v;
    std::string s;
    while (u) {
      s += char('0' + (int)(u % 10));
      u /= 10;
    }
    if (neg) s += '-';
    return std::string(s.rbegin(), s.rend());
  }

  Int num_ = 0;
  Int den_ = 1;
};

}  // namespace mirs
