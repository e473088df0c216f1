#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sds/diagnostics.hpp"
#include "sds/distributions.hpp"
#include "sds/engine.hpp"
#include "sds/maps.hpp"
#include "sds/measures.hpp"

namespace sds {

enum class ExperimentKind { simulate, classify, invariant, ratio, kac, criteria, wiener_hopf, dyadic, probe };

std::string_view to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// A validated experiment description.  See docs/config.md for the schema.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::simulate;
  std::string source;       ///< path or label of the config text
  std::string output_dir;   ///< empty: resolved by the runner
  std::string echo_json;    ///< the parsed config rendered as JSON

  std::shared_ptr<const SystemSpec> system;
  std::optional<SimulationPlan> plan;

  struct Simulate {
    std::string format = "csv";  ///< csv | binary
  } simulate;

  struct Classify {
    std::size_t index = 0;
    ClassifyThresholds thresholds;
  } classify;

  struct Invariant {
    std::string source = "terminal";  ///< terminal | occupation
    std::size_t index = 0;
    std::uint64_t burn_in = 0;
    std::size_t bins = 200;
    double lo = 0.0;
    double hi = 10.0;
  } invariant;

  struct Ratio {
    std::size_t index = 0;
    Interval phi{0.0, 0.5};
    Interval psi{0.5, 1.0};
    std::uint64_t series_stride = 1000;
  } ratio;

  struct Kac {
    double t = 0.5;
  } kac;

  struct Criteria {
    std::optional<DistributionSpec> law;
  } criteria;

  struct WienerHopf {
    std::optional<DistributionSpec> mu0;
    std::uint64_t paths = 100000;
    std::uint64_t max_steps = 1000000;
    std::uint64_t seed = 0;
    std::size_t grid_points = 8001;
  } wiener_hopf;

  struct Dyadic {
    std::string x = "1";
    std::string y = "1/3";
    std::uint64_t epochs = 10;
    std::uint64_t max_steps = 100000;
    double p = 0.5;  ///< probability of f_1
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
  } dyadic;

  struct Probe {
    int base = 2;
    std::vector<std::string> seeds{"1"};
    int depth = 12;
    std::uint64_t cap = std::uint64_t{1} << 20;
  } probe;
};

/// Parses and validates a TOML config; unknown keys and bad values throw
/// ConfigError naming the key.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::string& path);

/// Replaces every seed in the config (plan, wiener_hopf, dyadic).
void override_seed(ExperimentConfig& config, std::uint64_t seed);

}  // namespace sds
