#include <doctest.h>

#include <string>

#include "sds/config.hpp"
#include "sds/errors.hpp"

using namespace sds;

namespace {

const char* kSimulate = R"(
kind = "simulate"
[system]
family = "reflected_affine"
a_law = {type = "lognormal", mu = 0.0, sigma = 1.0}
b_law = {type = "exponential", rate = 1.0}
[plan]
horizon = 100
replicas = 4
seed = 9
starting_points = [0.0, 1.5]
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("a simulate config parses with its values") {
  const auto c = parse_config(kSimulate);
  CHECK(c.kind == ExperimentKind::simulate);
  REQUIRE(c.plan);
  CHECK(c.plan->horizon == 100);
  CHECK(c.plan->replicas == 4);
  CHECK(c.plan->seed == 9);
  CHECK(c.plan->starting_points == std::vector<double>{0.0, 1.5});
  CHECK(c.plan->record.mode == RecordMode::full);
  CHECK(c.system->family() == Family::reflected_affine);
  CHECK(c.simulate.format == "csv");
  CHECK(c.echo_json.find("\"horizon\"") != std::string::npos);
}

TEST_CASE("defaults") {
  const auto c = parse_config(R"(
kind = "classify"
[system]
family = "reflected_rw"
b_law = {type = "uniform", lo = -1.0, hi = 1.0}
[plan]
)");
  CHECK(c.plan->horizon == 1000);
  CHECK(c.plan->replicas == 1);
  CHECK(c.plan->seed == 0);
  CHECK(c.plan->starting_points == std::vector<double>{0.0});
  CHECK(c.classify.index == 0);
}

TEST_CASE("two-point joint pairs and two_point laws") {
  const auto c = parse_config(R"(
kind = "simulate"
[system]
family = "reflected_affine"
joint = [{a = 2.0, b = 1.0, weight = 0.5}, {a = 0.5, b = 1.0, weight = 0.5}]
[plan]
horizon = 3
)");
  CHECK(c.system->joint_pairs().size() == 2);
  const auto d = parse_config(R"(
kind = "criteria"
[criteria]
law = {type = "two_point", values = [[2.0, 0.5], [0.5, 0.5]]}
)");
  REQUIRE(d.criteria.law);
  CHECK(d.criteria.law->atoms().size() == 2);
}

TEST_CASE("errors name the offending key") {
  CHECK(error_of(std::string(kSimulate) + "bogus = 1\n") == "plan.bogus: unknown key");
  CHECK(error_of(R"(
kind = "simulate"
[system]
family = "reflected_rw"
b_law = {type = "exponential", rate = 1.0}
[plan]
horizon = -5
)") == "plan.horizon: must be >= 0, got -5");
  CHECK(error_of(R"(kind = "teleport")").find("kind:") == 0);
  CHECK(error_of(R"(
kind = "simulate"
[system]
family = "reflected_rw"
b_law = {type = "exponential", rate = "fast"}
[plan]
)") == "system.b_law.rate: expected a number");
  CHECK(error_of(R"(
kind = "simulate"
[system]
family = "reflected_rw"
b_law = {type = "exponential", rate = -1.0}
[plan]
)").find("system.b_law") == 0);
  CHECK(error_of(R"(
kind = "simulate"
[system]
family = "reflected_rw"
b_law = {type = "exponential"}
)") == "plan: required for kind simulate");
  CHECK(error_of(R"(
kind = "dyadic"
[dyadic]
p = 1.5
)") == "dyadic.p: must be in (0, 1)");
  CHECK(error_of(R"(
kind = "dyadic"
[probe]
base = 2
)") == "probe: not used by kind dyadic");
  CHECK(error_of(R"(
kind = "dyadic"
[dyadic]
x = "1/0"
)").find("dyadic.x") == 0);
  CHECK(error_of("kind = \"dyadic\"\n[dyadic\n").find("config syntax error") == 0);
  CHECK(error_of(R"(kind = "wiener_hopf")") == "wiener_hopf.mu0: required");
}

TEST_CASE("criteria law falls back to the system's b law") {
  const auto c = parse_config(R"(
kind = "criteria"
[system]
family = "reflected_rw"
b_law = {type = "pareto_type", a = 0.75}
)");
  REQUIRE(c.criteria.law);
  CHECK(c.criteria.law->name() == c.system->b_law()->name());
}

TEST_CASE("seed override reaches every seeded section") {
  auto c = parse_config(kSimulate);
  override_seed(c, 77);
  CHECK(c.plan->seed == 77);
  auto d = parse_config("kind = \"dyadic\"\n[dyadic]\nseed = 3\n");
  override_seed(d, 5);
  CHECK(d.dyadic.seed == 5);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), ConfigError);
}
