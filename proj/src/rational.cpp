#include "sds/rational.hpp"

#include <gmpxx.h>

#include <cmath>

#include "sds/errors.hpp"

namespace sds {

struct ExactRational::Impl {
  mpq_class value;
};

ExactRational::ExactRational() : impl_(std::make_unique<Impl>()) {}

ExactRational::ExactRational(long long value) : impl_(std::make_unique<Impl>()) {
  impl_->value = mpz_class(std::to_string(value));
}

ExactRational::ExactRational(long long num, long long den) : impl_(std::make_unique<Impl>()) {
  if (den == 0) throw DomainError("ExactRational: zero denominator");
  impl_->value = mpq_class(mpz_class(std::to_string(num)), mpz_class(std::to_string(den)));
  impl_->value.canonicalize();
}

ExactRational::ExactRational(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

ExactRational::ExactRational(const ExactRational& other)
    : impl_(std::make_unique<Impl>(*other.impl_)) {}

ExactRational::ExactRational(ExactRational&& other) noexcept = default;

ExactRational& ExactRational::operator=(const ExactRational& other) {
  if (this != &other) impl_ = std::make_unique<Impl>(*other.impl_);
  return *this;
}

ExactRational& ExactRational::operator=(ExactRational&& other) noexcept = default;
ExactRational::~ExactRational() = default;

ExactRational ExactRational::parse(const std::string& text) {
  auto impl = std::make_unique<Impl>();
  try {
    impl->value = mpq_class(text, 10);
  } catch (const std::invalid_argument&) {
    throw ConfigError("not a rational number: '" + text + "'");
  }
  if (impl->value.get_den() == 0) throw ConfigError("zero denominator in '" + text + "'");
  impl->value.canonicalize();
  return ExactRational(std::move(impl));
}

ExactRational ExactRational::from_double(double value) {
  if (!std::isfinite(value)) throw DomainError("ExactRational::from_double: non-finite input");
  auto impl = std::make_unique<Impl>();
  impl->value = mpq_class(value);
  return ExactRational(std::move(impl));
}

ExactRational ExactRational::nearest_simple(double value, double rel_tol,
                                            std::uint64_t max_denominator) {
  if (!std::isfinite(value)) throw DomainError("ExactRational::nearest_simple: non-finite input");
  const ExactRational exact = from_double(value);
  if (value == 0.0) return exact;
  // Continued-fraction convergents of the exact binary value.
  mpq_class x = exact.impl_->value;
  mpz_class h_prev = 0, h = 1, k_prev = 1, k = 0;
  mpq_class rem = x;
  const double tol = std::abs(value) * rel_tol;
  for (int iter = 0; iter < 200; ++iter) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), rem.get_num_mpz_t(), rem.get_den_mpz_t());
    mpz_class h_next = a * h + h_prev;
    mpz_class k_next = a * k + k_prev;
    if (k_next > mpz_class(std::to_string(max_denominator))) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    mpq_class approx(h, k);
    approx.canonicalize();
    if (std::abs(approx.get_d() - value) <= tol) {
      auto impl = std::make_unique<Impl>();
      impl->value = approx;
      return ExactRational(std::move(impl));
    }
    mpq_class frac = rem - mpq_class(a);
    if (frac == 0) break;
    rem = 1 / frac;
  }
  return exact;
}

ExactRational ExactRational::pow2(long exponent) {
  auto impl = std::make_unique<Impl>();
  mpz_class p = 1;
  mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(std::labs(exponent)));
  impl->value = exponent >= 0 ? mpq_class(p) : mpq_class(mpz_class(1), p);
  return ExactRational(std::move(impl));
}

ExactRational ExactRational::gcd(const ExactRational& a, const ExactRational& b) {
  // gcd(p/q, r/s) = gcd(p s, r q) / (q s), then canonicalized.
  const mpq_class& x = a.impl_->value;
  const mpq_class& y = b.impl_->value;
  mpz_class num, den;
  mpz_class ps = x.get_num() * y.get_den();
  mpz_class rq = y.get_num() * x.get_den();
  mpz_gcd(num.get_mpz_t(), ps.get_mpz_t(), rq.get_mpz_t());
  den = x.get_den() * y.get_den();
  auto impl = std::make_unique<Impl>();
  impl->value = mpq_class(num, den);
  impl->value.canonicalize();
  return ExactRational(std::move(impl));
}

ExactRational ExactRational::floor() const {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), impl_->value.get_num_mpz_t(), impl_->value.get_den_mpz_t());
  auto impl = std::make_unique<Impl>();
  impl->value = mpq_class(q);
  return ExactRational(std::move(impl));
}

#define SDS_RATIONAL_BINOP(op)                                            \
  ExactRational ExactRational::operator op(const ExactRational& rhs) const { \
    auto impl = std::make_unique<Impl>();                                 \
    impl->value = impl_->value op rhs.impl_->value;                       \
    return ExactRational(std::move(impl));                                \
  }
SDS_RATIONAL_BINOP(+)
SDS_RATIONAL_BINOP(-)
SDS_RATIONAL_BINOP(*)
#undef SDS_RATIONAL_BINOP

ExactRational ExactRational::operator/(const ExactRational& rhs) const {
  if (rhs.is_zero()) throw DomainError("ExactRational: division by zero");
  auto impl = std::make_unique<Impl>();
  impl->value = impl_->value / rhs.impl_->value;
  return ExactRational(std::move(impl));
}

ExactRational ExactRational::operator-() const {
  auto impl = std::make_unique<Impl>();
  impl->value = -impl_->value;
  return ExactRational(std::move(impl));
}

ExactRational& ExactRational::operator+=(const ExactRational& rhs) {
  impl_->value += rhs.impl_->value;
  return *this;
}
ExactRational& ExactRational::operator-=(const ExactRational& rhs) {
  impl_->value -= rhs.impl_->value;
  return *this;
}
ExactRational& ExactRational::operator*=(const ExactRational& rhs) {
  impl_->value *= rhs.impl_->value;
  return *this;
}

bool ExactRational::operator==(const ExactRational& rhs) const {
  return impl_->value == rhs.impl_->value;
}

std::strong_ordering ExactRational::operator<=>(const ExactRational& rhs) const {
  const int c = cmp(impl_->value, rhs.impl_->value);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

ExactRational ExactRational::abs() const {
  auto impl = std::make_unique<Impl>();
  impl->value = ::abs(impl_->value);
  return ExactRational(std::move(impl));
}

int ExactRational::sign() const { return sgn(impl_->value); }

std::string ExactRational::numerator_string() const { return impl_->value.get_num().get_str(); }
std::string ExactRational::denominator_string() const { return impl_->value.get_den().get_str(); }

std::string ExactRational::to_string() const {
  if (impl_->value.get_den() == 1) return numerator_string();
  return numerator_string() + "/" + denominator_string();
}

double ExactRational::to_double() const { return impl_->value.get_d(); }

long ExactRational::denominator_two_adic_valuation() const {
  return static_cast<long>(mpz_scan1(impl_->value.get_den_mpz_t(), 0));
}

std::optional<std::uint64_t> ExactRational::denominator_odd_part() const {
  mpz_class odd;
  mpz_fdiv_q_2exp(odd.get_mpz_t(), impl_->value.get_den_mpz_t(),
                  static_cast<mp_bitcnt_t>(denominator_two_adic_valuation()));
  if (mpz_sizeinbase(odd.get_mpz_t(), 2) > 64) return std::nullopt;
  return static_cast<std::uint64_t>(std::stoull(odd.get_str()));
}

bool ExactRational::denominator_is_power_of_two() const {
  return mpz_popcount(impl_->value.get_den_mpz_t()) == 1;
}

bool ExactRational::fits_u64_parts() const {
  return mpz_sizeinbase(impl_->value.get_num_mpz_t(), 2) <= 64 &&
         mpz_sizeinbase(impl_->value.get_den_mpz_t(), 2) <= 64;
}

std::uint64_t ExactRational::numerator_u64() const {
  mpz_class n = ::abs(impl_->value.get_num());
  return static_cast<std::uint64_t>(std::stoull(n.get_str()));
}

std::uint64_t ExactRational::denominator_u64() const {
  return static_cast<std::uint64_t>(std::stoull(impl_->value.get_den().get_str()));
}

}  // namespace sds
