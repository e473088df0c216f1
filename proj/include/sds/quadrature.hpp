#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace sds {

/// Outcome of an improper integral evaluated over a growing cutoff ladder.
enum class Convergence { converged, diverged, undecided };

std::string_view to_string(Convergence c);

struct TailIntegral {
  Convergence status = Convergence::undecided;
  /// Best estimate (extrapolated when the increments decay geometrically);
  /// +infinity when diverged.
  double value = 0.0;
  /// Partial integrals up to each cutoff.
  std::vector<double> cutoffs;
  std::vector<double> partials;
  /// Ratio of the last two cutoff increments.
  double increment_ratio = 0.0;
};

struct TailRules {
  std::vector<double> cutoffs{1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
  /// Relative change below which the partials are considered stable.
  double stable_rel = 1e-4;
  /// Increment ratio at or below which the tail is summed geometrically.
  double geometric_ratio = 0.9;
  /// Increment ratio at or above which the integral is declared divergent.
  double divergent_ratio = 0.98;
};

/// Integral of a nonnegative function over a finite interval (adaptive
/// Gauss-Kronrod on geometrically split panels; tanh-sinh on panels touching 0
/// to absorb integrable endpoint singularities).  Kinks of the integrand
/// should be passed as breakpoints.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 std::span<const double> breakpoints = {});

/// Integral of a nonnegative function over [lo, infinity) with divergence
/// detection on the cutoff ladder.  Requires lo < first cutoff.
TailIntegral integrate_to_infinity(const std::function<double(double)>& f, double lo,
                                   const TailRules& rules = {},
                                   std::span<const double> breakpoints = {});

}  // namespace sds
