#include <doctest.h>

#include <cmath>

#include "sds/errors.hpp"
#include "sds/maps.hpp"

using namespace sds;

TEST_CASE("map evaluation") {
  CHECK(MapDescriptor::refl_affine(2, 1).apply(0.5) == 0.0);
  CHECK(MapDescriptor::refl_translate(3).apply(1) == 2.0);
  CHECK(MapDescriptor::affine(0.5, 1).apply(2) == 2.0);
  const auto comp = MapDescriptor::composite({MapDescriptor::refl_affine(2, 1), MapDescriptor::refl_translate(3)});
  CHECK(comp.apply(2.0) == 0.0);  // |2*2 - 1| = 3, |3 - 3| = 0
  CHECK_THROWS_AS(MapDescriptor::refl_translate(1).apply(-0.5), DomainError);
  CHECK_THROWS_AS(MapDescriptor::refl_affine(1, 1).apply(-0.5), DomainError);
}

TEST_CASE("lipschitz constants and displacements") {
  CHECK(MapDescriptor::refl_affine(2, 1).lipschitz() == 2.0);
  CHECK(MapDescriptor::refl_translate(5).lipschitz() == 1.0);
  const auto comp = MapDescriptor::composite({MapDescriptor::refl_affine(2, 1), MapDescriptor::refl_affine(0.5, 1)});
  CHECK(comp.lipschitz() == 1.0);
  CHECK(comp.lipschitz_is_bound());
  CHECK(!MapDescriptor::affine(2, 0).lipschitz_is_bound());
  CHECK(MapDescriptor::refl_affine(2, 1).displacement(0) == 1.0);
  CHECK(MapDescriptor::refl_translate(3).displacement(0) == 3.0);
  CHECK(MapDescriptor::affine(2, 0).displacement(0) == 0.0);
}

TEST_CASE("lift to the extended space") {
  const ExtendedPoint p = MapDescriptor::refl_affine(2, 1).lift_apply({0.5, 1});
  CHECK(p.base == 0.0);
  CHECK(p.height == 2.0);
  const ExtendedPoint q = MapDescriptor::refl_translate(0).lift_apply({3, 1});
  CHECK(q.base == 3.0);
  CHECK(q.height == 1.0);
}

TEST_CASE("malformed maps and systems") {
  CHECK_THROWS_AS(MapDescriptor::affine(0, 1), ConfigError);
  CHECK_THROWS_AS(MapDescriptor::refl_affine(1, 0), ConfigError);
  CHECK_THROWS_AS(MapDescriptor::composite({}), ConfigError);
  CHECK_THROWS_AS(SystemSpec(Family::reflected_rw, DistributionSpec::constant(1), DistributionSpec::constant(1)),
                  ConfigError);
  CHECK_THROWS_AS(SystemSpec(Family::affine, std::nullopt, DistributionSpec::constant(1)), ConfigError);
  CHECK_THROWS_AS(SystemSpec(Family::affine, DistributionSpec::uniform(-1, 1), DistributionSpec::constant(1)),
                  ConfigError);
  CHECK_THROWS_AS(SystemSpec(Family::affine, std::vector<JointPair>{{2, 1, 0.3}, {0.5, 1, 0.3}}), ConfigError);
  CHECK_THROWS_AS(SystemSpec(Family::reflected_affine, std::vector<JointPair>{{2, -1, 1.0}}), ConfigError);
  CHECK_THROWS_AS(family_from_string("linear"), ConfigError);
  CHECK(family_from_string("reflected_affine") == Family::reflected_affine);
}

TEST_CASE("joint pairs are drawn with their weights") {
  const SystemSpec sys(Family::reflected_affine, std::vector<JointPair>{{2, 1, 0.25}, {0.5, 1, 0.75}});
  int first = 0;
  const int n = 40000;
  for (int k = 0; k < n; ++k) {
    Substream s(3, 0, k);
    const auto p = sys.draw(s);
    CHECK(((p.a == 2 && p.b == 1) || (p.a == 0.5 && p.b == 1)));
    first += p.a == 2;
  }
  CHECK(std::abs(first - n / 4) < 6 * std::sqrt(n * 0.25 * 0.75));
}

TEST_CASE("random maps satisfy their Lipschitz bound and the lift is nonexpansive") {
  const SystemSpec systems[] = {
      SystemSpec(Family::affine, DistributionSpec::lognormal(0, 1), DistributionSpec::uniform(-2, 2)),
      SystemSpec(Family::reflected_affine, DistributionSpec::lognormal(0, 1), DistributionSpec::exponential(1)),
      SystemSpec(Family::reflected_rw, std::nullopt, DistributionSpec::uniform(-3, 3)),
  };
  for (const auto& sys : systems) {
    for (std::uint64_t k = 0; k < 10000; ++k) {
      Substream s(4, static_cast<std::uint64_t>(sys.family()), k);
      const auto p = sys.draw(s);
      const MapDescriptor f = sys.make_map(p);
      const double x = 5 * s.uniform(), y = 5 * s.uniform();
      CHECK(std::abs(f.apply(x) - f.apply(y)) <= f.lipschitz() * std::abs(x - y) * (1 + 1e-14) + 1e-14);
      CHECK(f.lipschitz() == sys.lipschitz(p));
      CHECK(static_cast<double>(sys.apply(p, x)) == doctest::Approx(f.apply(x)).epsilon(1e-14));
      const ExtendedPoint u{x, std::exp(4 * s.uniform() - 2)}, v{y, std::exp(4 * s.uniform() - 2)};
      CHECK(extended_distance(f.lift_apply(u), f.lift_apply(v)) <= extended_distance(u, v) + 1e-12);
    }
  }
}
