#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sds/distributions.hpp"
#include "sds/engine.hpp"
#include "sds/measures.hpp"

namespace sds {

enum class Verdict { vanishing_indicative, bounded_away, inconclusive };
std::string_view to_string(Verdict v);

/// Which steps a tail statistic looks at.
struct TailWindow {
  /// Final fraction of the horizon (steps n >= (1 - tail_fraction) * horizon).
  double tail_fraction = 0.5;
  /// Optionally keep only ladder epochs of S inside that window.
  std::optional<LadderKind> ladder;
};

struct ContractionEntry {
  std::uint64_t replica = 0;
  std::size_t x_index = 0;
  std::size_t y_index = 0;
  double radius = 0.0;
  double threshold = 0.0;
  std::uint64_t window_start = 0;
  std::uint64_t window_steps = 0;  ///< steps inspected in the window
  std::uint64_t visits = 0;        ///< inspected steps with X^x <= r
  double distance_sup = 0.0;       ///< sup |X^x - X^y| 1[X^x <= r]
  double distance_inf = 0.0;       ///< inf of |X^x - X^y| over visits
  double normalized_sup = 0.0;     ///< sup D_n over inspected steps
  double escape_sup = 0.0;         ///< sup A_{0,n} 1[X^x <= r]
  Verdict verdict = Verdict::inconclusive;
};

/// Streaming form of local_contraction_stat.
class ContractionTracker {
 public:
  ContractionTracker(std::uint64_t horizon, double radius, TailWindow window, double threshold);
  void observe(std::uint64_t step, double log_product, double x, double y);
  ContractionEntry finish() const;

 private:
  std::uint64_t start_;
  double radius_;
  TailWindow window_;
  ContractionEntry e_;
  double level_ = 0.0;
  double dist_inf_;
};

/// Tail statistics of |X^x - X^y| 1[X^x <= r] for one replica.  Zero visits
/// in the window give an inconclusive verdict.
ContractionEntry local_contraction_stat(const TrajectoryBundle& bundle, std::size_t x_index,
                                        std::size_t y_index, double radius,
                                        const TailWindow& window = {}, double threshold = 1e-6);

struct ContractionSummary {
  std::size_t replicas = 0;
  double threshold = 0.0;
  double vanishing_fraction = 0.0;
  double bounded_away_fraction = 0.0;
  double required_fraction = 0.9;
  Verdict verdict = Verdict::inconclusive;
};

ContractionSummary summarize_contraction(std::span<const ContractionEntry> entries,
                                         double required_fraction = 0.9);

struct NormalizedDistance {
  std::vector<std::uint64_t> steps;
  std::vector<double> values;  ///< D_n at the recorded steps
  double tail_sup = 0.0;       ///< sup over the final half of the recorded steps
  bool monotone_checked = false;
  bool monotone = true;
  std::uint64_t first_violation = 0;
};

/// D_n = d(X_n^x, X_n^y) / A_{0,n} evaluated as exp(log d - S_n).  For the
/// reflected-affine family the series is checked to be nonincreasing up to
/// rounding.  Once d is exactly 0 the series stays 0.
NormalizedDistance normalized_distance(const TrajectoryBundle& bundle, std::size_t x_index,
                                       std::size_t y_index);

struct EscapeThresholds {
  double vanishing = 1e-3;
  double returning = 0.5;
};

struct EscapeReport {
  std::uint64_t replica = 0;
  double radius = 0.0;
  double tail_fraction = 0.0;
  std::uint64_t visits = 0;
  std::uint64_t tail_visits = 0;
  double tail_sup = 0.0;  ///< sup of A_{0,n} over the tail visits
  EscapeThresholds thresholds;
  Verdict verdict = Verdict::inconclusive;
};

/// Streaming form of extended_escape_stat.  The tail is the final
/// tail_fraction of the visits to [0, r], not of the horizon.
class EscapeTracker {
 public:
  EscapeTracker(double radius, double tail_fraction, EscapeThresholds thresholds = {});
  void observe(double log_product, double x) {
    if (x <= radius_) visit_log_.push_back(log_product);
  }
  EscapeReport finish() const;

 private:
  double radius_;
  double tail_fraction_;
  EscapeThresholds thresholds_;
  std::vector<double> visit_log_;
};

/// A_{0,n} 1[X_n <= r] along one path; `series` is filled when requested.
EscapeReport extended_escape_stat(const TrajectoryBundle& bundle, std::size_t index, double radius,
                                  double tail_fraction, EscapeThresholds thresholds = {},
                                  std::vector<double>* series = nullptr);

enum class Classification { recurrent_indicative, transient_indicative, inconclusive };
std::string_view to_string(Classification c);

struct ClassifyThresholds {
  double window_quantile = 0.9;  ///< r0 = this quantile of first-quarter values
  double escape_factor = 10.0;   ///< transient when the final-quarter min exceeds factor * r0
  double agreement = 0.95;       ///< fraction of replicas required
  std::size_t min_replicas = 30;
};

/// Per-replica reduction used by classify.
struct ReplicaClassification {
  std::uint64_t replica = 0;
  std::uint64_t horizon = 0;
  double r0 = 0.0;
  double final_min = 0.0;
  bool returned = false;  ///< final-quarter min <= r0
  bool escaped = false;   ///< final-quarter min > escape_factor * r0
};

class ClassifyTracker {
 public:
  ClassifyTracker(std::uint64_t horizon, ClassifyThresholds thresholds = {});
  void observe(std::uint64_t step, double x);
  ReplicaClassification finish(std::uint64_t replica) const;

 private:
  std::uint64_t horizon_;
  ClassifyThresholds thresholds_;
  std::vector<double> first_;
  double final_min_;
};

ReplicaClassification classify_replica(const TrajectoryBundle& bundle, std::size_t index,
                                       ClassifyThresholds thresholds = {});

struct ClassificationReport {
  Classification verdict = Classification::inconclusive;
  std::uint64_t horizon = 0;
  std::size_t replicas = 0;
  ClassifyThresholds thresholds;
  double returned_fraction = 0.0;
  double escaped_fraction = 0.0;
};

/// Finite-horizon heuristic over replicas; throws ConfigError below
/// thresholds.min_replicas.
ClassificationReport classify(std::span<const ReplicaClassification> replicas,
                              ClassifyThresholds thresholds = {});
ClassificationReport classify(std::span<const TrajectoryBundle> bundles, std::size_t index,
                              ClassifyThresholds thresholds = {});

/// Regime of the Lipschitz constants of a system.
Regime system_regime(const SystemSpec& system);

struct FurstenbergReport {
  std::vector<std::optional<double>> limits;  ///< per replica; empty when not converged
  std::size_t converged = 0;
  double mean = 0.0;
  double dispersion = 0.0;  ///< standard deviation of the converged limits
  std::optional<EmpiricalMeasure> law;
};

/// Declares R_n converged when its last two values differ by less than tol.
/// Throws ConfigError for non-affine systems and DomainError unless the
/// regime is contractive.
FurstenbergReport furstenberg_limit(const SystemSpec& system,
                                    std::span<const RightProcessPath> paths, std::size_t index,
                                    double tol);

}  // namespace sds
