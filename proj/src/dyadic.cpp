#include "sds/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sds/engine.hpp"
#include "sds/errors.hpp"
#include "sds/rng.hpp"

namespace sds {
namespace {

void check_eps(int eps) {
  if (eps != 1 && eps != -1) throw ConfigError("eps must be +1 or -1, got " + std::to_string(eps));
}

const ExactRational& one() {
  static const ExactRational v(1);
  return v;
}

}  // namespace

ExactRational exact_step(int eps, const ExactRational& x, int base) {
  check_eps(eps);
  if (base != 2 && base != 3) throw ConfigError("exact_step: base must be 2 or 3");
  if (x.sign() < 0) throw DomainError("exact_step: x must be >= 0, got " + x.to_string());
  const ExactRational b(base);
  if (eps == 1) return (b * x - one()).abs();
  return (x / b - one()).abs();
}

std::vector<ExactRational> exact_trajectory(std::span<const int> eps, const ExactRational& x,
                                            int base) {
  std::vector<ExactRational> out;
  out.reserve(eps.size() + 1);
  out.push_back(x);
  for (int e : eps) out.push_back(exact_step(e, out.back(), base));
  return out;
}

std::vector<int> random_signs(std::uint64_t seed, std::uint64_t replica, std::size_t n,
                              double p_plus) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) throw ConfigError("random_signs: p_plus must be in [0, 1]");
  std::vector<int> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Substream s(seed, replica, k + 1, stream_domain::maps);
    out[k] = s.uniform() <= p_plus ? 1 : -1;
  }
  return out;
}

std::vector<double> sign_walk(std::span<const int> eps) {
  std::vector<double> w(eps.size() + 1, 0.0);
  for (std::size_t k = 0; k < eps.size(); ++k) w[k + 1] = w[k] + eps[k];
  return w;
}

// ---------------------------------------------------------------------------

PiecewiseAffineMap::PiecewiseAffineMap() : sign_{1}, intercept_{ExactRational(0)} {}

ExactRational PiecewiseAffineMap::slope(std::size_t j) const {
  return sign_.at(j) > 0 ? ExactRational::pow2(s_) : -ExactRational::pow2(s_);
}

ExactRational PiecewiseAffineMap::breakpoint(std::size_t j) const {
  if (j > pieces()) throw ConfigError("breakpoint index out of range");
  return ExactRational(static_cast<long long>(j)) * ExactRational::pow2(-m_);
}

ExactRational PiecewiseAffineMap::evaluate(const ExactRational& x) const {
  if (x.sign() < 0 || x > one()) throw DomainError("PiecewiseAffineMap: x outside [0, 1]");
  const double jd = (x * ExactRational::pow2(m_)).floor().to_double();
  const std::size_t j = std::min(static_cast<std::size_t>(jd), pieces() - 1);
  return slope(j) * x + intercept_[j];
}

void PiecewiseAffineMap::compose(int eps) {
  check_eps(eps);
  const ExactRational two(2);
  const ExactRational half(1, 2);
  const std::int64_t ratio = std::int64_t{1} << (m_ - s_);  // 1 / w, w = 2^(S - M)
  const std::int64_t L = image_index_;
  if (eps == -1) {
    // y -> 1 - y/2 on [0, 1]
    for (std::size_t j = 0; j < pieces(); ++j) {
      sign_[j] = -sign_[j];
      intercept_[j] = one() - intercept_[j] * half;
    }
    --s_;
    image_index_ = 2 * ratio - L + 1;
    return;
  }
  // eps = +1: y -> |2y - 1|.  The kink y = 1/2 is interior to the common
  // image [(L-1) w, L w] only when w = 1.
  if (ratio == 1) {
    std::vector<int> sign;
    std::vector<ExactRational> icpt;
    sign.reserve(2 * pieces());
    icpt.reserve(2 * pieces());
    for (std::size_t j = 0; j < pieces(); ++j) {
      // Increasing pieces run through [0, 1/2] first.
      const bool lower_first = sign_[j] > 0;
      for (int half_index = 0; half_index < 2; ++half_index) {
        const bool lower = (half_index == 0) == lower_first;
        if (lower) {
          sign.push_back(-sign_[j]);
          icpt.push_back(one() - two * intercept_[j]);
        } else {
          sign.push_back(sign_[j]);
          icpt.push_back(two * intercept_[j] - one());
        }
      }
    }
    sign_ = std::move(sign);
    intercept_ = std::move(icpt);
    ++m_;
    ++s_;
    image_index_ = 1;
    return;
  }
  // Image inside [1/2, 1] when (L-1) w >= 1/2, i.e. 2(L-1) >= ratio.
  const bool upper = 2 * (L - 1) >= ratio;
  for (std::size_t j = 0; j < pieces(); ++j) {
    if (upper) {
      intercept_[j] = two * intercept_[j] - one();
    } else {
      sign_[j] = -sign_[j];
      intercept_[j] = one() - two * intercept_[j];
    }
  }
  ++s_;
  image_index_ = upper ? L - ratio / 2 : ratio / 2 - L + 1;
}

void PiecewiseAffineMap::verify() const {
  auto fail = [&](const std::string& what) {
    throw IdentityViolation("piecewise-affine iterate (M=" + std::to_string(m_) +
                            ", S=" + std::to_string(s_) + "): " + what);
  };
  if (m_ < s_) fail("M < S");
  if (m_ > 62) fail("M too large to index");
  if (pieces() != (std::size_t{1} << m_)) fail("piece count is not 2^M");
  const std::int64_t ratio = std::int64_t{1} << (m_ - s_);
  if (image_index_ < 1 || image_index_ > ratio) fail("image index out of [1, 2^(M-S)]");
  const ExactRational w = ExactRational::pow2(s_ - m_);
  const ExactRational lo = ExactRational(image_index_ - 1) * w;
  const ExactRational hi = ExactRational(image_index_) * w;
  for (std::size_t j = 0; j < pieces(); ++j) {
    if (j > 0 && sign_[j] != -sign_[j - 1]) fail("slopes do not alternate at piece " + std::to_string(j));
    const ExactRational a = breakpoint(j), b = breakpoint(j + 1);
    const ExactRational sl = slope(j);
    const ExactRational va = sl * a + intercept_[j];
    const ExactRational vb = sl * b + intercept_[j];
    if (std::min(va, vb) != lo || std::max(va, vb) != hi)
      fail("piece " + std::to_string(j) + " image differs from the common interval");
    if (j + 1 < pieces()) {
      const ExactRational vn = slope(j + 1) * b + intercept_[j + 1];
      if (vn != vb) fail("discontinuity at breakpoint " + b.to_string());
    }
  }
}

PiecewiseAffineMap piecewise_affine_form(std::span<const int> eps) {
  PiecewiseAffineMap f;
  f.verify();
  int sum = 0, max = 0;
  for (int e : eps) {
    f.compose(e);
    sum += e;
    max = std::max(max, sum);
    if (f.S() != sum || f.M() != max)
      throw IdentityViolation("piecewise-affine iterate: (M, S) disagree with the sign walk");
    f.verify();
  }
  return f;
}

// ---------------------------------------------------------------------------

std::vector<LadderIdentityEpoch> ladder_identity_check(std::span<const int> eps,
                                                       const ExactRational& x) {
  const auto traj = exact_trajectory(eps, x, 2);
  const auto walk = sign_walk(eps);
  const auto ladder = ladder_epochs(walk, LadderKind::ascending_strict);
  std::vector<LadderIdentityEpoch> out;
  ExactRational fk = x;
  for (std::size_t k = 0; k < ladder.epochs.size(); ++k) {
    fk = exact_step(1, fk, 2);
    const std::uint64_t t = ladder.epochs[k];
    const ExactRational& v = traj[t];
    LadderIdentityEpoch e{k + 1, t, v, 0};
    if (v == fk) {
      e.branch = 0;
    } else if (v == one() - fk) {
      e.branch = 1;
    } else {
      throw IdentityViolation("ladder identity: X at epoch " + std::to_string(t) + " is " +
                              v.to_string() + ", neither f1^(" + std::to_string(k + 1) +
                              ")(x) = " + fk.to_string() + " nor its complement");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::pair<std::uint64_t, ExactRational>> ladder_distances(std::span<const int> eps,
                                                                     const ExactRational& x,
                                                                     const ExactRational& y) {
  const auto tx = exact_trajectory(eps, x, 2);
  const auto ty = exact_trajectory(eps, y, 2);
  const auto ladder = ladder_epochs(sign_walk(eps), LadderKind::ascending_strict);
  std::vector<std::pair<std::uint64_t, ExactRational>> out;
  for (std::uint64_t t : ladder.epochs) out.emplace_back(t, (tx[t] - ty[t]).abs());
  return out;
}

std::vector<ExactRational> exact_normalized_distance(std::span<const int> eps,
                                                     const ExactRational& x,
                                                     const ExactRational& y) {
  const auto tx = exact_trajectory(eps, x, 2);
  const auto ty = exact_trajectory(eps, y, 2);
  std::vector<ExactRational> out;
  out.reserve(tx.size());
  long s = 0;
  for (std::size_t n = 0; n < tx.size(); ++n) {
    if (n > 0) s += eps[n - 1];
    out.push_back((tx[n] - ty[n]).abs() * ExactRational::pow2(-s));
  }
  return out;
}

// ---------------------------------------------------------------------------

bool in_dyadic_class(long r, const ExactRational& x) {
  if (r < 1 || r % 2 == 0) throw ConfigError("D_r: r must be an odd positive integer");
  if (x.sign() < 0 || x > one()) return false;
  const auto odd = x.denominator_odd_part();
  return odd && *odd == static_cast<std::uint64_t>(r);
}

long dyadic_level(long r, const ExactRational& x) {
  if (!in_dyadic_class(r, x))
    throw DomainError("D_r: " + x.to_string() + " is not in D_" + std::to_string(r));
  return x.denominator_two_adic_valuation();
}

ChainStep dyadic_chain_step(long r, const ExactRational& x, int eps) {
  const long n = dyadic_level(r, x);
  ChainStep out;
  out.next = exact_step(eps, x, 2);
  if (!in_dyadic_class(r, out.next))
    throw IdentityViolation("D_r closure: f(" + x.to_string() + ") = " + out.next.to_string() +
                            " left D_" + std::to_string(r));
  out.level = out.next.denominator_two_adic_valuation();
  if (n >= 1) {
    const long expected = eps == 1 ? n - 1 : n + 1;
    if (out.level != expected)
      throw IdentityViolation("D_r level move: from level " + std::to_string(n) + " expected " +
                              std::to_string(expected) + ", got " + std::to_string(out.level));
  }
  return out;
}

std::string_view to_string(BirthDeath b) {
  switch (b) {
    case BirthDeath::positive_recurrent: return "positive-recurrent";
    case BirthDeath::null_recurrent: return "null-recurrent";
    case BirthDeath::transient: return "transient";
  }
  return "transient";
}

BirthDeath birth_death_classification(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("birth_death_classification: p must be in (0, 1)");
  if (p > 0.5) return BirthDeath::positive_recurrent;
  if (p == 0.5) return BirthDeath::null_recurrent;
  return BirthDeath::transient;
}

// ---------------------------------------------------------------------------

double ProbeReport::distance_to(double x) const {
  if (sorted_points.empty()) return std::numeric_limits<double>::infinity();
  const auto it = std::lower_bound(sorted_points.begin(), sorted_points.end(), x);
  double d = std::numeric_limits<double>::infinity();
  if (it != sorted_points.end()) d = *it - x;
  if (it != sorted_points.begin()) d = std::min(d, x - *(it - 1));
  return d;
}

ProbeReport attractor_probe(int base, std::span<const ExactRational> seeds, int depth,
                            std::size_t cap) {
  if (base != 2 && base != 3) throw ConfigError("attractor_probe: base must be 2 or 3");
  if (seeds.empty()) throw ConfigError("attractor_probe: no seeds");
  if (depth < 0) throw ConfigError("attractor_probe: depth must be >= 0");
  ProbeReport rep;
  rep.base = base;
  std::set<ExactRational> all(seeds.begin(), seeds.end());
  std::vector<ExactRational> frontier(all.begin(), all.end());
  for (int d = 1; d <= depth && !rep.truncated; ++d) {
    std::vector<ExactRational> next;
    for (const auto& p : frontier) {
      for (int e : {1, -1}) {
        ExactRational q = exact_step(e, p, base);
        if (all.size() >= cap) {
          rep.truncated = true;
          break;
        }
        if (all.insert(q).second) next.push_back(std::move(q));
      }
      if (rep.truncated) break;
    }
    frontier = std::move(next);
    rep.depth_reached = rep.truncated ? d - 1 : d;
  }
  rep.points = all.size();
  rep.min = *all.begin();
  rep.max = *all.rbegin();
  rep.sorted_points.reserve(all.size());
  for (const auto& p : all) rep.sorted_points.push_back(p.to_double());
  for (std::size_t k = 1; k < rep.sorted_points.size(); ++k)
    rep.largest_gap = std::max(rep.largest_gap, rep.sorted_points[k] - rep.sorted_points[k - 1]);
  return rep;
}

}  // namespace sds
