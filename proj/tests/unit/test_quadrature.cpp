#include <doctest.h>

#include <cmath>
#include <vector>

#include "sds/quadrature.hpp"

using namespace sds;

TEST_CASE("finite integrals of smooth and kinked integrands") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 50.0) ==
        doctest::Approx(1.0 - std::exp(-50.0)).epsilon(1e-12));
  const std::vector<double> kink{0.3};
  CHECK(integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, kink) ==
        doctest::Approx(0.045 + 0.245).epsilon(1e-12));
  // integrable endpoint singularity
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 4.0) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("tail integrals: convergence and divergence detection") {
  const TailIntegral e = integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0);
  CHECK(e.status == Convergence::converged);
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-8));

  const TailIntegral p = integrate_to_infinity([](double x) { return std::pow(1.0 + x, -1.5); }, 0.0);
  CHECK(p.status == Convergence::converged);
  CHECK(p.value == doctest::Approx(2.0).epsilon(1e-3));

  const TailIntegral h = integrate_to_infinity([](double x) { return 1.0 / (1.0 + x); }, 0.0);
  CHECK(h.status == Convergence::diverged);
  CHECK(std::isinf(h.value));

  const TailIntegral q = integrate_to_infinity([](double x) { return std::pow(1.0 + x, -0.8); }, 0.0);
  CHECK(q.status == Convergence::diverged);
  CHECK(q.partials.size() == q.cutoffs.size());
}
