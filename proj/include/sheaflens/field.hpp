#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sheaflens {

// GF(2).
struct F2 {
  std::uint8_t v = 0;

  F2() = default;
  F2(int x) : v(static_cast<std::uint8_t>(x & 1)) {}

  static F2 zero() { return F2(0); }
  static F2 one() { return F2(1); }

  bool is_zero() const { return v == 0; }
  F2 inverse() const {
    if (v == 0) throw std::domain_error("inverse of zero in F2");
    return F2(1);
  }

  friend F2 operator+(F2 a, F2 b) { return F2(a.v ^ b.v); }
  friend F2 operator-(F2 a, F2 b) { return F2(a.v ^ b.v); }
  friend F2 operator*(F2 a, F2 b) { return F2(a.v & b.v); }
  friend F2 operator-(F2 a) { return a; }
  friend bool operator==(F2 a, F2 b) { return a.v == b.v; }
  friend bool operator!=(F2 a, F2 b) { return a.v != b.v; }
  friend std::ostream& operator<<(std::ostream& os, F2 a) { return os << int(a.v); }
};

// Exact rationals over 64-bit integers, normalized with positive denominator.
// Matrices in this project stay at desk scale, so 64-bit magnitudes suffice.
struct Rat {
  long long num = 0;
  long long den = 1;

  Rat() = default;
  Rat(long long n) : num(n), den(1) {}
  Rat(long long n, long long d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  static Rat zero() { return Rat(0); }
  static Rat one() { return Rat(1); }

  bool is_zero() const { return num == 0; }
  Rat inverse() const {
    if (num == 0) throw std::domain_error("inverse of zero rational");
    return Rat(den, num);
  }

  double to_double() const { return double(num) / double(den); }

  friend Rat operator+(const Rat& a, const Rat& b) {
    long long g = std::gcd(a.den, b.den);
    return Rat(a.num * (b.den / g) + b.num * (a.den / g), (a.den / g) * b.den);
  }
  friend Rat operator-(const Rat& a, const Rat& b) { return a + Rat(-b.num, b.den); }
  friend Rat operator*(const Rat& a, const Rat& b) {
    long long g1 = std::gcd(a.num < 0 ? -a.num : a.num, b.den);
    long long g2 = std::gcd(b.num < 0 ? -b.num : b.num, a.den);
    return Rat((a.num / g1) * (b.num / g2), (a.den / g2) * (b.den / g1));
  }
  friend Rat operator-(const Rat& a) { return Rat(-a.num, a.den); }
  friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend std::ostream& operator<<(std::ostream& os, const Rat& a) {
    os << a.num;
    if (a.den != 1) os << '/' << a.den;
    return os;
  }
};

}  // namespace sheaflens
