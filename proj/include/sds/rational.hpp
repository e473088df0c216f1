#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace sds {

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.  Backed by GMP; the GMP types stay out of this header.
class ExactRational {
 public:
  ExactRational();
  ExactRational(long long value);  // NOLINT(google-explicit-constructor)
  ExactRational(long long num, long long den);
  ExactRational(const ExactRational& other);
  ExactRational(ExactRational&& other) noexcept;
  ExactRational& operator=(const ExactRational& other);
  ExactRational& operator=(ExactRational&& other) noexcept;
  ~ExactRational();

  /// Parses "n", "-n" or "n/d" in base 10.
  static ExactRational parse(const std::string& text);
  /// Exact binary value of a finite double.
  static ExactRational from_double(double value);
  /// Simplest rational within |value|*rel_tol of value, via continued fractions.
  static ExactRational nearest_simple(double value, double rel_tol = 1e-14,
                                      std::uint64_t max_denominator = 1ULL << 40);
  static ExactRational pow2(long exponent);
  /// Largest rational g with a/g and b/g integers; gcd(0, b) = |b|.
  static ExactRational gcd(const ExactRational& a, const ExactRational& b);

  ExactRational operator+(const ExactRational& rhs) const;
  ExactRational operator-(const ExactRational& rhs) const;
  ExactRational operator*(const ExactRational& rhs) const;
  ExactRational operator/(const ExactRational& rhs) const;
  ExactRational operator-() const;
  ExactRational& operator+=(const ExactRational& rhs);
  ExactRational& operator-=(const ExactRational& rhs);
  ExactRational& operator*=(const ExactRational& rhs);

  bool operator==(const ExactRational& rhs) const;
  std::strong_ordering operator<=>(const ExactRational& rhs) const;

  ExactRational abs() const;
  /// Largest integer not exceeding the value.
  ExactRational floor() const;
  int sign() const;
  bool is_zero() const { return sign() == 0; }

  std::string numerator_string() const;
  std::string denominator_string() const;
  /// "num/den", or just "num" when the denominator is 1.
  std::string to_string() const;
  double to_double() const;

  /// Exponent of 2 in the denominator, and the odd part of the denominator if
  /// it fits in 64 bits.
  long denominator_two_adic_valuation() const;
  std::optional<std::uint64_t> denominator_odd_part() const;
  bool denominator_is_power_of_two() const;

  /// Prime factorization exponents for num and den (both must fit in 64 bits).
  /// Used for exact lattice detection.
  bool fits_u64_parts() const;
  std::uint64_t numerator_u64() const;    // |numerator|
  std::uint64_t denominator_u64() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  explicit ExactRational(std::unique_ptr<Impl> impl);
};

}  // namespace sds
