#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sds/maps.hpp"

namespace sds {

/// Relative slack used when comparing log-products for ladder epochs, so that
/// lattice walks summed in floating point keep their ties.
inline constexpr double kLadderSlack = 1e-9;

enum class RecordMode { full, strided, summary };

struct RecordPolicy {
  RecordMode mode = RecordMode::full;
  /// For strided recording: keep every stride-th step, every step where S ties
  /// or passes its running maximum or minimum (all ladder epochs), and the
  /// final step.
  std::uint64_t stride = 1;

  static RecordPolicy full() { return {}; }
  static RecordPolicy strided(std::uint64_t k) { return {RecordMode::strided, k}; }
  static RecordPolicy summary() { return {RecordMode::summary, 0}; }
};

struct SimulationPlan {
  std::shared_ptr<const SystemSpec> system;
  std::vector<double> starting_points;
  std::uint64_t horizon = 1;
  std::uint64_t replicas = 1;
  std::uint64_t seed = 0;
  bool track_extended = false;
  double extended_height = 1.0;
  RecordPolicy record;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Coupled paths of one replica: every starting point is driven by the same
/// map sequence.  S (log of the Lipschitz product) is the primary product
/// state; A_{0,n} = exp(S_n) is derived on demand.
struct TrajectoryBundle {
  std::shared_ptr<const SystemSpec> system;
  std::uint64_t replica = 0;
  std::uint64_t horizon = 0;
  std::vector<double> starting_points;
  /// Recorded step indices, strictly increasing, starting at 0.
  std::vector<std::uint64_t> steps;
  /// paths[i][k] = X^{x_i} at steps[k].
  std::vector<std::vector<double>> paths;
  std::vector<double> log_product;  ///< S at steps[k]
  std::vector<double> running_max;  ///< M = max(0, S_1..S_n) at steps[k]
  /// (a_n, b_n) for n = 1..horizon, stored at index n-1; only with full recording.
  std::vector<SystemSpec::Params> params;
  bool track_extended = false;
  double extended_height = 1.0;
  /// Set by embedded_bundle when requested epochs ran past the horizon.
  bool truncated = false;

  std::size_t size() const noexcept { return steps.size(); }
  bool is_full() const noexcept { return !params.empty() || horizon == 0; }
  double product(std::size_t k) const;
  ExtendedPoint extended(std::size_t i, std::size_t k) const;
};

/// State of one replica right after step `step` (step 0 is the start).
struct StepView {
  std::uint64_t step;
  double log_product;                  ///< S_step
  std::span<const long double> state;  ///< X_step for every starting point
  const SystemSpec::Params* params;    ///< (a_step, b_step); null at step 0
};

/// Runs one replica and hands every step to `observer`.  Step n >= 1 draws
/// its map from Substream(seed, replica, n).  Throws SimulationError on NaN.
void run_replica(const SimulationPlan& plan, std::uint64_t replica,
                 const std::function<void(const StepView&)>& observer);

/// Runs one replica and records it according to plan.record.
TrajectoryBundle simulate_replica(const SimulationPlan& plan, std::uint64_t replica);

/// Runs body(i) for i in [0, count) on up to `workers` threads.  The first
/// exception thrown by any body is rethrown after all threads join.
void parallel_for(std::uint64_t count, unsigned workers,
                  const std::function<void(std::uint64_t)>& body);

/// Simulates every replica and reduces each bundle with `fn` as soon as it is
/// produced; results are indexed by replica, independent of worker count.
template <class Fn>
auto map_replicas(const SimulationPlan& plan, unsigned workers, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, const TrajectoryBundle&>> {
  plan.validate();
  using R = std::invoke_result_t<Fn&, const TrajectoryBundle&>;
  std::vector<R> out(plan.replicas);
  parallel_for(plan.replicas, workers, [&](std::uint64_t r) {
    const TrajectoryBundle b = simulate_replica(plan, r);
    out[r] = fn(b);
  });
  return out;
}

/// All bundles; intended for modest horizons.
std::vector<TrajectoryBundle> simulate(const SimulationPlan& plan, unsigned workers = 1);

/// R_n^x = F_1 o ... o F_n (x) for the affine family, kept as the affine
/// function x -> A_{0,n} x + c_n with c_n = c_{n-1} + A_{0,n-1} b_n.
struct RightProcessPath {
  std::uint64_t replica = 0;
  std::vector<double> starting_points;
  std::vector<std::vector<double>> values;  ///< values[i][n], n = 0..horizon
  std::vector<double> log_slope;           ///< S_n
};

/// Throws ConfigError for non-affine families (no incremental form).
RightProcessPath right_process_replica(const SimulationPlan& plan, std::uint64_t replica);
std::vector<RightProcessPath> right_process(const SimulationPlan& plan, unsigned workers = 1);

enum class LadderKind { ascending_nonstrict, ascending_strict, descending_nonstrict, descending_strict };

std::string_view to_string(LadderKind k);

struct LadderDecomposition {
  LadderKind kind = LadderKind::ascending_nonstrict;
  std::vector<std::uint64_t> epochs;  ///< excludes the initial epoch 0
  std::vector<double> ladder_values;
};

/// Ladder epochs of a walk given with its initial value at index 0.
LadderDecomposition ladder_epochs(std::span<const double> series, LadderKind kind);

/// Partial sums (0, b_1, b_1 + b_2, ...) of the recorded displacement
/// parameters; requires a fully recorded bundle.
std::vector<double> b_walk(const TrajectoryBundle& bundle);

/// The bundle sampled at step 0 and at the given epochs.  Epochs past the
/// horizon are dropped and flagged; epochs that were not recorded throw.
TrajectoryBundle embedded_bundle(const TrajectoryBundle& bundle, const LadderDecomposition& epochs);

/// Y_n = lip(F_n) Y_{n-1} + d(F_n(o), o) started at d(x_i, o): dominates
/// d(X_n^{x_i}, o) pathwise.  Requires a fully recorded bundle.
std::vector<double> affine_majorant(const TrajectoryBundle& bundle, std::size_t i);

}  // namespace sds
