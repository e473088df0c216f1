#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sds/quadrature.hpp"
#include "sds/rng.hpp"

namespace sds {

namespace law {

/// Finitely many atoms (value, weight); "two-point" is the common case.
struct TwoPoint {
  std::vector<std::pair<double, double>> atoms;
};
struct Uniform {
  double lo;
  double hi;
};
struct Exponential {
  double rate;
};
struct LogNormal {
  double mu;
  double sigma;
};
/// Density a (1+x)^{-(1+a)} on [0, infinity).
struct ParetoType {
  double a;
};
struct Constant {
  double c;
};
/// Piecewise-linear CDF through the cumulative trapezoid of the tabulated
/// density; the law is uniform inside each grid cell.
struct TabulatedDensity {
  std::vector<double> grid;
  std::vector<double> density;
};

}  // namespace law

/// An immutable, validated law for a real map parameter.
class DistributionSpec {
 public:
  using Variant = std::variant<law::TwoPoint, law::Uniform, law::Exponential, law::LogNormal,
                               law::ParetoType, law::Constant, law::TabulatedDensity>;

  /// Validates and normalizes; throws ConfigError on malformed input.
  explicit DistributionSpec(Variant v);

  static DistributionSpec two_point(std::vector<std::pair<double, double>> atoms);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec exponential(double rate);
  static DistributionSpec lognormal(double mu, double sigma);
  static DistributionSpec pareto_type(double a);
  static DistributionSpec constant(double c);
  static DistributionSpec tabulated(std::vector<double> grid, std::vector<double> density);
  /// Tabulated density proportional to (log(c + x))^b / (c + x)^{3/2} on
  /// [0, 1e18], c = exp(max(1, 2b/3)) so that it is decreasing; geometric grid
  /// from 1e-3 plus the origin, normalized by its own trapezoid mass.
  static DistributionSpec log_power_tail(double b = 1.0, std::size_t points = 40000);

  const Variant& variant() const noexcept { return v_; }
  std::string name() const;

  /// Consumes exactly one uniform from the stream.
  double sample(Substream& stream) const;
  /// Inverse CDF on (0,1); sample() is quantile(stream.uniform()).
  double quantile(double u) const;

  double cdf(double x) const;
  /// 1 - cdf(x), computed without cancellation where the variant allows.
  double survival(double x) const;
  /// Lebesgue density; 0 for discrete laws.
  double density(double x) const;

  bool is_discrete() const noexcept;
  /// Atoms of a discrete law (Constant included); empty otherwise.
  std::vector<std::pair<double, double>> atoms() const;
  double support_lo() const noexcept;
  double support_hi() const noexcept;
  /// Points where cdf or density may have a kink (support edges, grid, atoms).
  std::vector<double> kinks() const;

  /// E[g(X)] for nonnegative g vanishing outside (lo, hi), with the tail
  /// ladder applied on unbounded sides.
  TailIntegral expect_nonnegative(const std::function<double(double)>& g, double lo,
                                  double hi) const;

 private:
  Variant v_;
  // TabulatedDensity cache: cumulative mass at grid nodes.
  std::vector<double> node_cdf_;
};

enum class Regime { contractive, centered, expanding, undefined };
std::string_view to_string(Regime r);

struct LogPlusMoment {
  double order = 0.0;
  double value = 0.0;
  Convergence status = Convergence::undecided;
};

struct MomentReport {
  double mean_log = 0.0;           ///< E log X (may be +-inf)
  double second_moment_log = 0.0;  ///< E (log X)^2
  LogPlusMoment logplus;           ///< E (log+ X)^order, order = 2 + epsilon
  Regime regime = Regime::undefined;
  bool closed_form = false;
};

/// Log-moment summary of a law used for the Lipschitz constants A_n.
/// Throws DomainError if the law puts mass at or below 0.
MomentReport moment_report(const DistributionSpec& spec, double epsilon = 0.1);

/// E (log+ X)^order for any law (used for the displacement law B_n).
LogPlusMoment logplus_moment(const DistributionSpec& spec, double order);

struct LatticeResult {
  std::optional<double> span;  ///< maximal kappa with log(support) in kappa*Z
  bool proved_non_lattice = false;
  /// When a span exists: support values equal base^k_i with these exponents.
  std::optional<std::pair<std::string, std::vector<long long>>> base_and_exponents;
};

/// Maximal lattice span of log(support) for positive discrete laws, by exact
/// prime-exponent arithmetic.  Continuous laws return no span.
LatticeResult lattice_span(const DistributionSpec& spec);

}  // namespace sds
