#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "sds/errors.hpp"
#include "sds/hyperbolic.hpp"
#include "sds/rng.hpp"

using namespace sds;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Direct evaluation of log((|z - conj w| + |z - w|) / (|z - conj w| - |z - w|)) in 50 digits.
double poincare_oracle(HalfPlanePoint z, HalfPlanePoint w) {
  const big dx = big(z.re) - big(w.re);
  const big s = sqrt(dx * dx + (big(z.im) - big(w.im)) * (big(z.im) - big(w.im)));
  const big t = sqrt(dx * dx + (big(z.im) + big(w.im)) * (big(z.im) + big(w.im)));
  return static_cast<double>(log((t + s) / (t - s)));
}

double rel_or_abs(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("poincare distance at reference points") {
  CHECK(poincare({0, 1}, {0, 1}) == 0.0);
  CHECK(poincare({0, 2}, {0, 7}) == doctest::Approx(std::log(3.5)).epsilon(1e-14));
  const double golden = 2.0 * std::log((1.0 + std::sqrt(5.0)) / 2.0);
  CHECK(std::abs(poincare_oracle({0, 1}, {1, 1}) - 0.9624236501192069) < 1e-15);
  CHECK(std::abs(poincare({0, 1}, {1, 1}) - 0.9624236501192069) < 1e-12);
  CHECK(std::abs(golden - 0.9624236501192069) < 1e-15);
}

TEST_CASE("poincare distance agrees with a 50-digit oracle, including nearby points") {
  Substream s(11, 0, 0);
  for (int k = 0; k < 2000; ++k) {
    const HalfPlanePoint z{10 * s.uniform() - 5, 5 * s.uniform() + 1e-3};
    const double scale = std::pow(10.0, -12.0 * s.uniform());
    const HalfPlanePoint w{z.re + scale * (s.uniform() - 0.5), z.im * (1 + scale * (s.uniform() - 0.5))};
    const double got = poincare(z, w);
    const double want = poincare_oracle(z, w);
    CHECK(std::abs(got - want) <= 1e-12 * std::max(want, 1e-300) + 1e-300);
  }
}

TEST_CASE("non-positive imaginary parts are domain errors") {
  CHECK_THROWS_AS(poincare({0, 0}, {0, 1}), DomainError);
  CHECK_THROWS_AS(poincare({0, 1}, {0, -1}), DomainError);
  CHECK_THROWS_AS(extended_distance({1, 0}, {1, 1}), DomainError);
}

TEST_CASE("extended distance") {
  CHECK(extended_distance({2, 3}, {2, 3}) == 0.0);
  CHECK(extended_distance({2, 3}, {2, 0.5}) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(extended_distance({0, 1}, {1, 1}) == doctest::Approx(poincare({0, 1}, {1, 1})).epsilon(1e-15));
}

TEST_CASE("metric axioms and dilation invariance") {
  Substream s(12, 0, 0);
  auto point = [&s] { return ExtendedPoint{10 * s.uniform(), std::exp(6 * s.uniform() - 3)}; };
  for (int k = 0; k < 10000; ++k) {
    const ExtendedPoint p = point(), q = point(), r = point();
    const double pq = extended_distance(p, q), qp = extended_distance(q, p);
    CHECK(pq >= 0.0);
    CHECK(rel_or_abs(pq, qp) < 1e-12);
    CHECK(extended_distance(p, p) < 1e-12);
    CHECK(extended_distance(p, r) <= pq + extended_distance(q, r) + 1e-10);
    const double c = std::exp(4 * s.uniform() - 2);
    const HalfPlanePoint z{p.base, p.height}, w{q.base, q.height};
    CHECK(rel_or_abs(poincare({c * z.re, c * z.im}, {c * w.re, c * w.im}), poincare(z, w)) < 1e-12);
  }
}
