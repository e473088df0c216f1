#include <doctest.h>

#include <cmath>
#include <vector>

#include "sds/distributions.hpp"
#include "sds/errors.hpp"

using namespace sds;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("sampling stays in the support") {
  const auto tp = DistributionSpec::two_point({{2.0, 0.5}, {0.5, 0.5}});
  const auto c = DistributionSpec::constant(1.0);
  const auto e = DistributionSpec::exponential(1.0);
  int twos = 0;
  for (std::uint64_t k = 0; k < 2000; ++k) {
    Substream s(9, 0, k);
    const double v = tp.sample(s);
    CHECK((v == 2.0 || v == 0.5));
    twos += v == 2.0;
    Substream s2(9, 1, k);
    CHECK(c.sample(s2) == 1.0);
    Substream s3(9, 2, k);
    CHECK(e.sample(s3) >= 0.0);
  }
  CHECK(std::abs(twos - 1000) < 6 * std::sqrt(500.0));
}

TEST_CASE("sampling is a deterministic function of the substream") {
  const auto ln = DistributionSpec::lognormal(0.0, 1.0);
  Substream a(5, 6, 7), b(5, 6, 7);
  for (int i = 0; i < 10; ++i) CHECK(ln.sample(a) == ln.sample(b));
}

TEST_CASE("distribution functions") {
  CHECK(DistributionSpec::exponential(1.0).cdf(0.0) == 0.0);
  CHECK(DistributionSpec::uniform(0.0, 1.0).cdf(0.25) == doctest::Approx(0.25));
  const auto p = DistributionSpec::pareto_type(2.0);
  CHECK(p.cdf(1.0) == doctest::Approx(0.75).epsilon(1e-14));
  const double oracle = simpson([](double x) { return 2.0 * std::pow(1.0 + x, -3.0); }, 0.0, 1.0);
  CHECK(p.cdf(1.0) == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(p.survival(1e6) == doctest::Approx(std::pow(1.0 + 1e6, -2.0)).epsilon(1e-12));
}

TEST_CASE("quantile inverts the distribution function") {
  for (const auto& law : {DistributionSpec::exponential(2.0), DistributionSpec::uniform(-1.0, 3.0),
                          DistributionSpec::lognormal(0.5, 0.7), DistributionSpec::pareto_type(0.6)}) {
    for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(law.cdf(law.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
  }
}

TEST_CASE("tabulated densities have a piecewise-linear distribution function") {
  const auto t = DistributionSpec::tabulated({0.0, 1.0, 2.0}, {2.0 / 3.0, 2.0 / 3.0, 0.0});
  // masses: [0,1] -> 2/3, [1,2] -> 1/3
  CHECK(t.cdf(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(t.cdf(0.5) == doctest::Approx(1.0 / 3.0));
  CHECK(t.cdf(1.5) == doctest::Approx(2.0 / 3.0 + 1.0 / 6.0));
  CHECK(t.quantile(5.0 / 6.0) == doctest::Approx(1.5));
}

TEST_CASE("log-power tail law matches its closed-form survival") {
  const auto law = DistributionSpec::log_power_tail(1.0);
  const double e = std::exp(1.0);
  auto survival = [e](double x) { return std::sqrt(e) / 3.0 * (std::log(e + x) + 2.0) / std::sqrt(e + x); };
  for (double x : {0.0, 1.0, 10.0, 1e3, 1e6, 1e9})
    CHECK(law.survival(x) == doctest::Approx(survival(x)).epsilon(1e-4));
  CHECK(law.density(1.0) == doctest::Approx(std::sqrt(e) / 6.0 * std::log(e + 1.0) / std::pow(e + 1.0, 1.5)).epsilon(1e-4));
}

TEST_CASE("malformed laws are configuration errors") {
  CHECK_THROWS_AS(DistributionSpec::two_point({{1.0, -0.5}, {2.0, 1.5}}), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::tabulated({0.0, 2.0, 1.0}, {1.0, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::uniform(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::exponential(-1.0), ConfigError);
}

TEST_CASE("log-moment regimes") {
  const auto centered = moment_report(DistributionSpec::two_point({{2.0, 0.5}, {0.5, 0.5}}));
  CHECK(centered.mean_log == doctest::Approx(0.0));
  CHECK(centered.regime == Regime::centered);
  const auto contractive = moment_report(DistributionSpec::lognormal(-0.5, 1.0));
  CHECK(contractive.mean_log == doctest::Approx(-0.5));
  CHECK(contractive.regime == Regime::contractive);
  const auto expanding = moment_report(DistributionSpec::constant(2.0));
  CHECK(expanding.mean_log == doctest::Approx(std::log(2.0)));
  CHECK(expanding.regime == Regime::expanding);
  CHECK(moment_report(DistributionSpec::uniform(0.0, 1.0)).mean_log == doctest::Approx(-1.0));
  CHECK_THROWS_AS(moment_report(DistributionSpec::uniform(-1.0, 1.0)), DomainError);
  CHECK_THROWS_AS(DistributionSpec::tabulated({0.0, 1.0, 2.0}, {1.0, 1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(moment_report(DistributionSpec::two_point({{0.0, 0.5}, {1.0, 0.5}})), DomainError);
}

TEST_CASE("lattice spans of log-support") {
  const auto a = lattice_span(DistributionSpec::two_point({{2.0, 0.5}, {0.5, 0.5}}));
  REQUIRE(a.span);
  CHECK(*a.span == doctest::Approx(std::log(2.0)));
  const auto b = lattice_span(DistributionSpec::two_point({{4.0, 0.5}, {0.5, 0.5}}));
  REQUIRE(b.span);
  // exponents 2 and -1 of the base 2 have gcd 1
  CHECK(*b.span == doctest::Approx(std::log(2.0)));
  const auto c = lattice_span(DistributionSpec::two_point({{8.0, 0.5}, {4.0, 0.5}}));
  REQUIRE(c.span);
  CHECK(*c.span == doctest::Approx(std::log(2.0)));
  const auto d = lattice_span(DistributionSpec::two_point({{9.0, 0.5}, {1.0 / 27.0, 0.5}}));
  REQUIRE(d.span);
  CHECK(*d.span == doctest::Approx(std::log(3.0)));
  const auto ln = lattice_span(DistributionSpec::lognormal(0.0, 1.0));
  CHECK(!ln.span);
  const auto irr = lattice_span(DistributionSpec::two_point({{2.0, 0.5}, {3.0, 0.5}}));
  CHECK(!irr.span);
  CHECK(irr.proved_non_lattice);
}
