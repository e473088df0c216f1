#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "sds/dyadic.hpp"
#include "sds/errors.hpp"
#include "sds/rng.hpp"

using namespace sds;

namespace {

const ExactRational one(1), half(1, 2), third(1, 3);

}  // namespace

TEST_CASE("exact steps") {
  CHECK(exact_step(1, one) == one);
  CHECK(exact_step(1, third) == third);
  CHECK(exact_step(-1, one) == half);
  CHECK(exact_step(-1, ExactRational(2, 3)) == ExactRational(2, 3));
  CHECK(exact_step(1, one, 3) == ExactRational(2));
  CHECK(exact_step(-1, ExactRational(3), 3) == ExactRational(0));
  CHECK_THROWS_AS(exact_step(1, ExactRational(-1, 2)), DomainError);
  CHECK_THROWS_AS(exact_step(0, one), ConfigError);
  CHECK_THROWS_AS(exact_step(1, one, 5), ConfigError);
}

TEST_CASE("piecewise-affine form of single steps") {
  const std::vector<int> plus{1};
  const auto f = piecewise_affine_form(plus);
  CHECK(f.M() == 1);
  CHECK(f.S() == 1);
  REQUIRE(f.pieces() == 2);
  CHECK(f.slope(0) == ExactRational(-2));
  CHECK(f.intercept(0) == one);
  CHECK(f.slope(1) == ExactRational(2));
  CHECK(f.intercept(1) == ExactRational(-1));
  CHECK(f.image_index() == 1);
  CHECK(f.delta() == 1);

  const std::vector<int> minus{-1};
  const auto g = piecewise_affine_form(minus);
  CHECK(g.M() == 0);
  CHECK(g.S() == -1);
  REQUIRE(g.pieces() == 1);
  CHECK(g.slope(0) == -half);
  CHECK(g.intercept(0) == one);
  CHECK(g.image_index() == 2);
}

TEST_CASE("piecewise-affine form agrees with direct iteration at breakpoints and midpoints") {
  for (std::uint64_t r = 0; r < 200; ++r) {
    Substream len(17, r, 0, stream_domain::auxiliary);
    const std::size_t n = 1 + static_cast<std::size_t>(20 * len.uniform());
    const auto eps = random_signs(17, r, n);
    const auto f = piecewise_affine_form(eps);
    const auto walk = sign_walk(eps);
    CHECK(f.S() == walk.back());
    CHECK(f.M() == *std::max_element(walk.begin(), walk.end()));
    const ExactRational w = ExactRational::pow2(-f.M());
    for (std::size_t j = 0; j <= 2 * f.pieces(); ++j) {
      const ExactRational x = ExactRational(static_cast<long long>(j)) * w * half;
      CHECK(f.evaluate(x) == exact_trajectory(eps, x).back());
    }
  }
}

TEST_CASE("ladder identity and the 2/3 witness") {
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto eps = random_signs(23, r, 400);
    const auto at_one = ladder_identity_check(eps, one);
    for (const auto& e : at_one) CHECK((e.value == one || e.value.is_zero()));
    ladder_identity_check(eps, third);
    for (const auto& [t, d] : ladder_distances(eps, one, third)) CHECK(d == ExactRational(2, 3));
  }
  const std::vector<int> plus{1};
  const auto e = ladder_identity_check(plus, ExactRational(1, 5));
  REQUIRE(e.size() == 1);
  CHECK(e[0].epoch == 1);
  CHECK(e[0].value == ExactRational(3, 5));
}

TEST_CASE("exact normalized distance is nonincreasing for the dyadic example") {
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto eps = random_signs(29, r, 200);
    const auto d = exact_normalized_distance(eps, ExactRational(0), one);
    CHECK(d.front() == one);
    for (std::size_t n = 1; n < d.size(); ++n) CHECK(d[n] <= d[n - 1]);
  }
}

TEST_CASE("the chain on D_r") {
  CHECK(dyadic_level(1, half) == 1);
  const auto down = dyadic_chain_step(1, half, 1);
  CHECK(down.next.is_zero());
  CHECK(down.level == 0);
  const auto up = dyadic_chain_step(1, half, -1);
  CHECK(up.next == ExactRational(3, 4));
  CHECK(up.level == 2);
  const auto from_one = dyadic_chain_step(1, one, -1);
  CHECK(from_one.next == half);
  CHECK(from_one.level == 1);
  const auto fixed = dyadic_chain_step(3, third, 1);
  CHECK(fixed.next == third);
  CHECK(fixed.level == 0);
  CHECK_THROWS_AS(dyadic_level(1, third), DomainError);
  CHECK_THROWS_AS(dyadic_level(3, ExactRational(4, 3)), DomainError);
  CHECK_THROWS_AS(in_dyadic_class(2, half), ConfigError);

  for (long r : {1L, 3L, 5L, 7L}) {
    ExactRational x(1, r);
    for (std::uint64_t k = 0; k < 200; ++k) {
      Substream s(31, static_cast<std::uint64_t>(r), k);
      x = dyadic_chain_step(r, x, s.uniform() < 0.5 ? 1 : -1).next;
      CHECK(in_dyadic_class(r, x));
    }
  }
}

TEST_CASE("exact orbits of dyadic seeds stay dyadic; orbits of 1/3 keep odd part 1 or 3") {
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto eps = random_signs(37, r, 30);
    for (const auto& x : exact_trajectory(eps, ExactRational(5, 8))) CHECK(x.denominator_is_power_of_two());
    for (const auto& x : exact_trajectory(eps, third)) {
      const auto odd = x.denominator_odd_part();
      CHECK((odd == 1u || odd == 3u));
    }
  }
}

TEST_CASE("comparison birth-death chain") {
  CHECK(birth_death_classification(0.6) == BirthDeath::positive_recurrent);
  CHECK(birth_death_classification(0.5) == BirthDeath::null_recurrent);
  CHECK(birth_death_classification(0.4) == BirthDeath::transient);
  CHECK_THROWS_AS(birth_death_classification(1.0), ConfigError);
}

TEST_CASE("attractor probes") {
  const std::vector<ExactRational> seeds{one};
  const auto p = attractor_probe(2, seeds, 12);
  CHECK(!p.truncated);
  CHECK(p.max == one);
  CHECK(p.min.is_zero());
  CHECK(p.distance_to(2.0 / 3.0) < 1e-3);

  // Exhaustive enumeration of all words of length <= 12 applied to 1.
  std::set<ExactRational> oracle;
  std::function<void(const ExactRational&, int)> walk = [&](const ExactRational& x, int d) {
    oracle.insert(x);
    if (d == 0) return;
    walk((ExactRational(2) * x - one).abs(), d - 1);
    walk((x * half - one).abs(), d - 1);
  };
  walk(one, 12);
  CHECK(p.points == oracle.size());
  CHECK(p.points == 130);
  double gap = 0.0;
  for (auto it = std::next(oracle.begin()); it != oracle.end(); ++it)
    gap = std::max(gap, (*it - *std::prev(it)).to_double());
  CHECK(p.largest_gap == gap);
  CHECK(gap == std::ldexp(1.0, -4));
  CHECK(attractor_probe(2, seeds, 16).largest_gap == std::ldexp(1.0, -6));

  const auto q = attractor_probe(3, seeds, 16);
  CHECK(q.max > ExactRational(10));

  const auto capped = attractor_probe(2, seeds, 30, 1000);
  CHECK(capped.truncated);
  CHECK(capped.points <= 1000);
}
