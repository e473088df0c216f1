#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sds/distributions.hpp"
#include "sds/maps.hpp"

namespace sds {

/// Histogram-style measure.  Bin k is [bin_edges[k], bin_edges[k+1]] with its
/// mass spread uniformly; a zero-width bin is an atom.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;

  /// Empty histogram over nondecreasing edges (at least two).
  static EmpiricalMeasure histogram(std::vector<double> bin_edges);
  /// One atom per distinct sample value, unit mass per sample.
  static EmpiricalMeasure from_samples(std::vector<double> samples);

  /// Adds mass to the bin containing x.  Values outside the edges are
  /// counted in out_of_range() and carry no mass.
  void add(double x, double weight = 1.0);
  /// Adds the masses of a histogram with identical edges.
  void merge(const EmpiricalMeasure& other);

  const std::vector<double>& bin_edges() const noexcept { return edges_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  double total_mass() const noexcept { return total_; }
  std::uint64_t sample_count() const noexcept { return count_; }
  std::uint64_t out_of_range() const noexcept { return outside_; }

  /// Mass of (-inf, x], right-continuous.
  double mass_up_to(double x) const;
  /// Mass of (-inf, x).
  double mass_below(double x) const;
  /// Normalized distribution function; requires positive total mass.
  double cdf(double x) const;
  double cdf_left(double x) const;

  bool is_normalized(double tol = 1e-9) const noexcept;
  EmpiricalMeasure normalized() const;

  /// Rows "edge_lo,edge_hi,mass" with a header line.
  std::string to_csv() const;

 private:
  void rebuild() const;

  std::vector<double> edges_;
  std::vector<double> masses_;
  double total_ = 0.0;
  std::uint64_t count_ = 0;
  std::uint64_t outside_ = 0;
  mutable std::vector<double> cum_;
  mutable bool dirty_ = true;
};

/// A reference distribution function with its jump points.
struct CdfReference {
  std::function<double(double)> cdf;
  std::vector<double> jumps;

  static CdfReference of(const DistributionSpec& law);
};

/// Sup over the measure's edges and the reference's jumps of the CDF gap,
/// using both one-sided limits at each point.  Throws DomainError if `emp` is
/// not normalized.
double ks_distance(const EmpiricalMeasure& emp, const CdfReference& reference);
double ks_distance(const EmpiricalMeasure& emp, const EmpiricalMeasure& reference);

/// Span of an additive lattice carrying a discrete law, from exact rational
/// images of its atoms; empty for continuous laws.
std::optional<double> additive_lattice_span(const DistributionSpec& law);

struct InvariantDensity {
  std::vector<double> grid;
  std::vector<double> density;  ///< 1 - F(x)
  TailIntegral total_mass;      ///< integral of 1 - F over [0, infinity)
};

/// Invariant density of the reflected random walk |x - B|.  Throws
/// DomainError for negative support or a lattice law.
InvariantDensity reflected_rw_invariant_density(const DistributionSpec& b_law,
                                                std::span<const double> grid);

/// Distribution function of the normalized invariant law (1 - F(x)) dx / E B,
/// tabulated once.  Throws DomainError when E B is infinite.
CdfReference reflected_rw_stationary_cdf(const DistributionSpec& b_law);

EmpiricalMeasure occupation_measure(std::span<const double> path, std::uint64_t burn_in,
                                    std::vector<double> bin_edges);

/// Half-open interval [lo, hi).
struct Interval {
  double lo;
  double hi;
  bool contains(double x) const noexcept { return x >= lo && x < hi; }
};

/// Running occupation ratio of two intervals.
class RatioAccumulator {
 public:
  RatioAccumulator(Interval phi, Interval psi) : phi_(phi), psi_(psi) {}
  void observe(double x) noexcept {
    phi_visits_ += phi_.contains(x);
    psi_visits_ += psi_.contains(x);
  }
  std::uint64_t phi_visits() const noexcept { return phi_visits_; }
  std::uint64_t psi_visits() const noexcept { return psi_visits_; }
  /// NaN while psi has no visits.
  double ratio() const noexcept;

 private:
  Interval phi_, psi_;
  std::uint64_t phi_visits_ = 0, psi_visits_ = 0;
};

struct RatioReport {
  std::vector<double> series;  ///< ratio after each path element (NaN before psi is visited)
  double final_ratio = 0.0;
  std::uint64_t phi_visits = 0;
  std::uint64_t psi_visits = 0;
  bool defined = false;  ///< false when psi was never visited
};

RatioReport ratio_estimate(std::span<const double> path, Interval phi, Interval psi,
                           bool keep_series = true);

struct KacReport {
  double mean_return_time = 0.0;
  double standard_error = 0.0;
  std::uint64_t returns = 0;
  std::uint64_t censored = 0;
  double censored_fraction = 0.0;
  bool valid = false;  ///< censoring below 1%
  double nu_total = 0.0;
  double nu_u = 0.0;
  double prediction = 0.0;  ///< nu_total / nu_u
};

/// Mean first return time to U = [0, t) for the reflected random walk,
/// started from the normalized restriction of the closed-form invariant
/// density to U.  Replica r draws its start from Substream(seed, r, 0,
/// initial_state) and its maps exactly as the engine does.
KacReport kac_return_time(const SystemSpec& system, double t, std::uint64_t replicas,
                          std::uint64_t horizon, std::uint64_t seed, unsigned workers = 1);

enum class CriterionStatus { holds, fails, undecided };
std::string_view to_string(CriterionStatus s);

struct Criterion {
  CriterionStatus status = CriterionStatus::undecided;
  double value = 0.0;  ///< integral value (inf when divergent) or last g(y) for (iv)
  std::vector<double> cutoffs;
  std::vector<double> partials;
};

struct CriteriaReport {
  Criterion mean;            ///< (i) E B < inf
  Criterion sqrt_mean;       ///< (ii) E sqrt(B) < inf
  Criterion tail_square;     ///< (iii) integral of (1 - F)^2 < inf
  Criterion tail_product;    ///< (iv) (1 - F(y)) int_0^y (F(y) - F(x)) dx -> 0
  Criterion sqrt_positive;   ///< E sqrt(B+) < inf, drift > 0 case
  Criterion sqrt_cubed;      ///< E (sqrt(B+))^3 < inf, centered case
  double mean_positive = 0.0;  ///< E B+
  double mean_negative = 0.0;  ///< E B-
};

/// Evaluates the recurrence conditions by tail quadrature.  Throws
/// IdentityViolation if a stronger condition holds while a weaker one fails.
CriteriaReport recurrence_criteria(const DistributionSpec& b_law);

struct WienerHopfReport {
  double grid_half_width = 0.0;
  std::size_t grid_points = 0;
  double phi_mass = 0.0;  ///< mass of the symmetric density (trapezoid on the grid, quadrature beyond)
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate = 0.0;
  double acceptance_se = 0.0;  ///< standard error of the rate at 1/2
  std::uint64_t paths = 0;
  std::uint64_t censored = 0;  ///< paths without a ladder epoch within the step cap
  double ks = 0.0;             ///< ladder law vs mu0
};

/// Builds the symmetric law with density phi0(x) + phi0(-x) - (phi0 * phi0~)(x),
/// samples it by rejection, and compares the first non-strict ascending
/// ladder height of the walk with mu0.  Path p draws from Substream(seed, p,
/// 0, auxiliary).  Throws DomainError if mu0 is not absolutely continuous on
/// [0, inf) with a nonincreasing density.
WienerHopfReport wiener_hopf_check(const DistributionSpec& mu0, std::uint64_t paths,
                                   std::uint64_t max_steps, std::uint64_t seed,
                                   unsigned workers = 1, std::size_t grid_points = 8001);

}  // namespace sds
