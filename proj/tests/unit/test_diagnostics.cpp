#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "sds/diagnostics.hpp"
#include "sds/errors.hpp"

using namespace sds;

namespace {

SimulationPlan make_plan(std::shared_ptr<const SystemSpec> sys, std::vector<double> starts, std::uint64_t horizon,
                         std::uint64_t replicas = 1, std::uint64_t seed = 1) {
  SimulationPlan p;
  p.system = std::move(sys);
  p.starting_points = std::move(starts);
  p.horizon = horizon;
  p.replicas = replicas;
  p.seed = seed;
  return p;
}

std::shared_ptr<const SystemSpec> dyadic_pair() {
  return std::make_shared<SystemSpec>(Family::reflected_affine,
                                      std::vector<JointPair>{{2.0, 1.0, 0.5}, {0.5, 1.0, 0.5}});
}

}  // namespace

TEST_CASE("coinciding starts give a zero contraction statistic") {
  auto sys = std::make_shared<SystemSpec>(Family::reflected_rw, std::nullopt, DistributionSpec::exponential(1));
  const auto b = simulate_replica(make_plan(sys, {2.0, 2.0}, 1000), 0);
  const auto e = local_contraction_stat(b, 0, 1, 3.0);
  CHECK(e.visits > 0);
  CHECK(e.distance_sup == 0.0);
  CHECK(e.verdict == Verdict::vanishing_indicative);
  const auto nd = normalized_distance(b, 0, 1);
  for (double v : nd.values) CHECK(v == 0.0);
}

TEST_CASE("windows without visits are inconclusive") {
  auto sys = std::make_shared<SystemSpec>(Family::affine, DistributionSpec::constant(2), DistributionSpec::constant(1));
  const auto b = simulate_replica(make_plan(sys, {1.0, 2.0}, 100), 0);
  const auto e = local_contraction_stat(b, 0, 1, 3.0);
  CHECK(e.visits == 0);
  CHECK(e.verdict == Verdict::inconclusive);
  const auto esc = extended_escape_stat(b, 0, 0.5, 0.5);
  CHECK(esc.visits == 0);
  CHECK(esc.verdict == Verdict::inconclusive);
}

TEST_CASE("distance at strict ascending ladder epochs of the dyadic example") {
  // Double precision loses the orbit of 1/3 after ~50 expansions; keep S small.
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto b = simulate_replica(make_plan(dyadic_pair(), {1.0, 1.0 / 3.0}, 30, 20, 5), r);
    const auto e = local_contraction_stat(b, 0, 1, 1.0, {1.0, LadderKind::ascending_strict});
    if (e.visits == 0) continue;
    CHECK(e.distance_sup == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(e.distance_inf == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(e.verdict == Verdict::bounded_away);
  }
}

TEST_CASE("reflected random walks couple monotonically") {
  auto sys = std::make_shared<SystemSpec>(Family::reflected_rw, std::nullopt, DistributionSpec::exponential(1));
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto b = simulate_replica(make_plan(sys, {0.0, 5.0}, 5000, 20, 2), r);
    for (std::size_t n = 1; n < b.size(); ++n)
      CHECK(std::abs(b.paths[0][n] - b.paths[1][n]) <= std::abs(b.paths[0][n - 1] - b.paths[1][n - 1]) + 1e-12);
    const auto nd = normalized_distance(b, 0, 1);
    CHECK(nd.monotone);
  }
}

TEST_CASE("reflected random walk paths from 0 and 5 contract on [0, 3]") {
  auto sys = std::make_shared<SystemSpec>(Family::reflected_rw, std::nullopt, DistributionSpec::exponential(1));
  const auto plan = make_plan(sys, {0.0, 5.0}, 100000, 100, 12);
  int small = 0;
  for (std::uint64_t r = 0; r < plan.replicas; ++r) {
    ContractionTracker t(plan.horizon, 3.0, TailWindow{}, 1e-3);
    run_replica(plan, r, [&](const StepView& v) {
      t.observe(v.step, v.log_product, static_cast<double>(v.state[0]), static_cast<double>(v.state[1]));
    });
    const auto e = t.finish();
    CHECK(e.visits > 0);
    small += e.distance_sup < 1e-3;
  }
  CHECK(small >= 99);
}

TEST_CASE("normalized distance") {
  const std::shared_ptr<const SystemSpec> systems[] = {
      dyadic_pair(),
      std::make_shared<SystemSpec>(Family::affine, DistributionSpec::lognormal(0, 0.5), DistributionSpec::uniform(-1, 1)),
      std::make_shared<SystemSpec>(Family::reflected_affine, DistributionSpec::uniform(0.5, 1.8),
                                   DistributionSpec::exponential(1)),
  };
  for (const auto& sys : systems) {
    const auto b = simulate_replica(make_plan(sys, {0.25, 1.75}, 300, 1, 6), 0);
    const auto nd = normalized_distance(b, 0, 1);
    CHECK(nd.values[0] == 1.5);
    for (std::size_t n = 0; n < nd.values.size(); ++n) {
      CHECK(nd.values[n] <= 1.5 * (1 + 1e-9));
      const double d = std::abs(b.paths[0][n] - b.paths[1][n]);
      CHECK(std::abs(nd.values[n] * std::exp(b.log_product[n]) - d) <= 1e-10 * std::max(d, 1e-300));
    }
    if (sys->family() == Family::reflected_affine) CHECK(nd.monotone);
  }
}

TEST_CASE("escape statistic under deterministic contraction") {
  auto sys = std::make_shared<SystemSpec>(Family::affine, std::vector<JointPair>{{0.5, 0.0, 1.0}});
  const auto b = simulate_replica(make_plan(sys, {1.0}, 60), 0);
  std::vector<double> series;
  const auto r = extended_escape_stat(b, 0, 3.0, 0.5, {}, &series);
  for (std::size_t n = 0; n < series.size(); ++n) CHECK(series[n] <= std::ldexp(1.0, -static_cast<int>(n)) * (1 + 1e-12));
  CHECK(r.visits == 61);
  CHECK(r.tail_visits == 31);
  CHECK(r.tail_sup == doctest::Approx(std::ldexp(1.0, -30)));
  CHECK(r.verdict == Verdict::vanishing_indicative);
}

TEST_CASE("trichotomy classification") {
  ClassifyThresholds th;
  auto expanding = std::make_shared<SystemSpec>(Family::affine, DistributionSpec::constant(2), DistributionSpec::constant(1));
  const auto t = classify(simulate(make_plan(expanding, {0.0}, 200, 30, 1)), 0, th);
  CHECK(t.verdict == Classification::transient_indicative);
  CHECK(system_regime(*expanding) == Regime::expanding);

  auto rw = std::make_shared<SystemSpec>(Family::reflected_rw, std::nullopt, DistributionSpec::exponential(1));
  const auto r = classify(simulate(make_plan(rw, {0.0}, 20000, 40, 2)), 0, th);
  CHECK(r.verdict == Classification::recurrent_indicative);

  CHECK_THROWS_AS(classify(simulate(make_plan(rw, {0.0}, 100, 10, 2)), 0, th), ConfigError);
  CHECK(system_regime(*dyadic_pair()) == Regime::centered);
}

TEST_CASE("Furstenberg limits of contractive affine recursions") {
  auto det = std::make_shared<SystemSpec>(Family::affine, std::vector<JointPair>{{0.5, 1.0, 1.0}});
  const auto paths = right_process(make_plan(det, {0.0}, 80, 5));
  const auto rep = furstenberg_limit(*det, paths, 0, 1e-12);
  CHECK(rep.converged == 5);
  CHECK(rep.mean == doctest::Approx(2.0));
  CHECK(rep.dispersion == 0.0);

  auto sym = std::make_shared<SystemSpec>(Family::affine, std::vector<JointPair>{{0.5, 1.0, 0.5}, {0.5, -1.0, 0.5}});
  const auto sp = right_process(make_plan(sym, {0.0}, 80, 200, 3));
  const auto loose = furstenberg_limit(*sym, sp, 0, 1e-9);
  const auto tight = furstenberg_limit(*sym, sp, 0, 1e-15);
  CHECK(loose.converged == 200);
  for (std::size_t r = 0; r < 200; ++r) {
    CHECK(std::abs(*loose.limits[r]) <= 2.0);
    if (tight.limits[r]) CHECK(std::abs(*tight.limits[r] - *loose.limits[r]) <= 1e-9);
  }
  CHECK(loose.dispersion > 0.1);

  auto centered = std::make_shared<SystemSpec>(Family::affine, std::vector<JointPair>{{2.0, 1.0, 0.5}, {0.5, 1.0, 0.5}});
  CHECK_THROWS_AS(furstenberg_limit(*centered, paths, 0, 1e-9), DomainError);
  CHECK_THROWS_AS(furstenberg_limit(*dyadic_pair(), paths, 0, 1e-9), ConfigError);
}

TEST_CASE("contraction summaries") {
  std::vector<ContractionEntry> entries(10);
  for (std::size_t k = 0; k < 10; ++k) entries[k].verdict = k < 9 ? Verdict::vanishing_indicative : Verdict::inconclusive;
  CHECK(summarize_contraction(entries, 0.9).verdict == Verdict::vanishing_indicative);
  CHECK(summarize_contraction(entries, 0.95).verdict == Verdict::inconclusive);
}
