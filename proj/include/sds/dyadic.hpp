#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sds/rational.hpp"

namespace sds {

/// base 2: eps = +1 gives |2x - 1|, eps = -1 gives |x/2 - 1|; base 3 likewise
/// with 3.  Throws DomainError for x < 0, ConfigError for other eps or base.
ExactRational exact_step(int eps, const ExactRational& x, int base = 2);

/// X_0 = x, X_n = exact_step(eps_n, X_{n-1}).
std::vector<ExactRational> exact_trajectory(std::span<const int> eps, const ExactRational& x,
                                            int base = 2);

/// Signs eps_1..eps_n with P(+1) = p_plus; eps_n is decided by the first
/// uniform of Substream(seed, replica, n), as the engine draws a two-point
/// joint law listing the expanding map first.
std::vector<int> random_signs(std::uint64_t seed, std::uint64_t replica, std::size_t n,
                              double p_plus = 0.5);

/// The n-th iterate of the base-2 system as a continuous piecewise-affine map
/// of [0, 1]: on I_j = [j 2^-M, (j+1) 2^-M] (j from 0) it is
/// slope_sign(j) 2^S x + intercept(j).
class PiecewiseAffineMap {
 public:
  /// The identity (n = 0).
  PiecewiseAffineMap();

  int M() const noexcept { return m_; }
  int S() const noexcept { return s_; }
  std::size_t pieces() const noexcept { return sign_.size(); }
  int slope_sign(std::size_t j) const { return sign_.at(j); }
  ExactRational slope(std::size_t j) const;
  const ExactRational& intercept(std::size_t j) const { return intercept_.at(j); }
  ExactRational breakpoint(std::size_t j) const;
  /// -sign of the first piece's slope.
  int delta() const noexcept { return -sign_.front(); }
  /// The integer L with common piece image [(L-1) 2^-(M-S), L 2^-(M-S)].
  std::int64_t image_index() const noexcept { return image_index_; }

  ExactRational evaluate(const ExactRational& x) const;

  /// Post-composes with f_eps.
  void compose(int eps);
  /// Throws IdentityViolation unless: 2^M pieces, slopes +-2^S alternating in
  /// sign, continuity at breakpoints, identical piece images of the stated form.
  void verify() const;

 private:
  int m_ = 0;
  int s_ = 0;
  std::vector<int> sign_;
  std::vector<ExactRational> intercept_;
  std::int64_t image_index_ = 1;
};

/// Built by induction over eps, verifying the invariants after every step.
PiecewiseAffineMap piecewise_affine_form(std::span<const int> eps);

/// Partial sums (0, eps_1, eps_1 + eps_2, ...) as doubles for ladder_epochs.
std::vector<double> sign_walk(std::span<const int> eps);

struct LadderIdentityEpoch {
  std::uint64_t k = 0;      ///< ladder index, 1-based
  std::uint64_t epoch = 0;  ///< time of the k-th strict ascending ladder epoch
  ExactRational value;      ///< X at that epoch
  int branch = 0;           ///< 0: f_1^(k)(x), 1: 1 - f_1^(k)(x)
};

/// At every strict ascending ladder epoch of the sign walk, checks that
/// X equals f_1^(k)(x) or 1 - f_1^(k)(x).  Throws IdentityViolation otherwise.
std::vector<LadderIdentityEpoch> ladder_identity_check(std::span<const int> eps,
                                                       const ExactRational& x);

/// |X^x - X^y| at the strict ascending ladder epochs, with the epochs.
std::vector<std::pair<std::uint64_t, ExactRational>> ladder_distances(std::span<const int> eps,
                                                                     const ExactRational& x,
                                                                     const ExactRational& y);

/// Exact D_n = |X_n^x - X_n^y| / 2^{S_n} for n = 0..|eps|.
std::vector<ExactRational> exact_normalized_distance(std::span<const int> eps,
                                                     const ExactRational& x,
                                                     const ExactRational& y);

/// Level n of x = k / (r 2^n) in D_r; throws DomainError if x is not in D_r.
long dyadic_level(long r, const ExactRational& x);
bool in_dyadic_class(long r, const ExactRational& x);

struct ChainStep {
  ExactRational next;
  long level = 0;
};

/// One transition of the chain on D_r.  Asserts closure and, from levels
/// n >= 1, the level move (eps = +1 down, eps = -1 up) with IdentityViolation.
ChainStep dyadic_chain_step(long r, const ExactRational& x, int eps);

enum class BirthDeath { positive_recurrent, null_recurrent, transient };
std::string_view to_string(BirthDeath b);

/// Comparison chain with downward probability p.
BirthDeath birth_death_classification(double p);

struct ProbeReport {
  int base = 2;
  int depth_reached = 0;
  bool truncated = false;
  std::size_t points = 0;
  ExactRational min;
  ExactRational max;
  double largest_gap = 0.0;
  std::vector<double> sorted_points;

  double distance_to(double x) const;
};

/// All images of the seeds under words of length <= depth, deduplicated,
/// stopping with `truncated` once more than `cap` points would be held.
ProbeReport attractor_probe(int base, std::span<const ExactRational> seeds, int depth,
                            std::size_t cap = std::size_t{1} << 20);

}  // namespace sds
