#include "sds/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sds/errors.hpp"

namespace sds {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_ladder_epoch(LadderKind kind, double s, double level) {
  const double slack = kLadderSlack * std::max(1.0, std::abs(level));
  switch (kind) {
    case LadderKind::ascending_nonstrict: return s >= level - slack;
    case LadderKind::ascending_strict: return s > level + slack;
    case LadderKind::descending_nonstrict: return s <= level + slack;
    case LadderKind::descending_strict: return s < level - slack;
  }
  return false;
}

double distance_over_product(double d, double log_product) {
  return d == 0.0 ? 0.0 : std::exp(std::log(d) - log_product);
}

// Type-7 sample quantile.
double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double f = pos - static_cast<double>(lo);
  if (f == 0.0) return v[lo];
  return v[lo] + f * (v[hi] - v[lo]);
}

void check_index(const TrajectoryBundle& b, std::size_t i, const char* what) {
  if (i >= b.paths.size())
    throw ConfigError(std::string(what) + ": starting point index " + std::to_string(i) +
                      " out of range");
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::vanishing_indicative: return "vanishing-indicative";
    case Verdict::bounded_away: return "bounded-away";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::recurrent_indicative: return "recurrent-indicative";
    case Classification::transient_indicative: return "transient-indicative";
    case Classification::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

// ---------------------------------------------------------------------------

ContractionTracker::ContractionTracker(std::uint64_t horizon, double radius, TailWindow window,
                                       double threshold)
    : radius_(radius), window_(window), dist_inf_(kInf) {
  if (!(radius > 0.0)) throw ConfigError("contraction: radius must be > 0");
  if (!(window.tail_fraction > 0.0 && window.tail_fraction <= 1.0))
    throw ConfigError("contraction: tail_fraction must be in (0, 1]");
  const double tail = std::floor(window.tail_fraction * static_cast<double>(horizon));
  start_ = horizon - static_cast<std::uint64_t>(tail);
  e_.radius = radius;
  e_.threshold = threshold;
  e_.window_start = start_;
}

void ContractionTracker::observe(std::uint64_t step, double log_product, double x, double y) {
  bool epoch = false;
  if (window_.ladder && step > 0) {
    epoch = is_ladder_epoch(*window_.ladder, log_product, level_);
    if (epoch) level_ = log_product;
  }
  if (step < start_) return;
  if (window_.ladder && !epoch) return;
  ++e_.window_steps;
  const double d = std::abs(x - y);
  e_.normalized_sup = std::max(e_.normalized_sup, distance_over_product(d, log_product));
  if (x <= radius_) {
    ++e_.visits;
    e_.distance_sup = std::max(e_.distance_sup, d);
    dist_inf_ = std::min(dist_inf_, d);
    e_.escape_sup = std::max(e_.escape_sup, std::exp(log_product));
  }
}

ContractionEntry ContractionTracker::finish() const {
  ContractionEntry e = e_;
  e.distance_inf = e.visits > 0 ? dist_inf_ : 0.0;
  if (e.visits == 0)
    e.verdict = Verdict::inconclusive;
  else if (e.distance_sup < e.threshold)
    e.verdict = Verdict::vanishing_indicative;
  else if (e.distance_inf > e.threshold)
    e.verdict = Verdict::bounded_away;
  else
    e.verdict = Verdict::inconclusive;
  return e;
}

ContractionEntry local_contraction_stat(const TrajectoryBundle& bundle, std::size_t x_index,
                                        std::size_t y_index, double radius,
                                        const TailWindow& window, double threshold) {
  check_index(bundle, x_index, "local_contraction_stat");
  check_index(bundle, y_index, "local_contraction_stat");
  ContractionTracker t(bundle.horizon, radius, window, threshold);
  for (std::size_t k = 0; k < bundle.size(); ++k)
    t.observe(bundle.steps[k], bundle.log_product[k], bundle.paths[x_index][k],
              bundle.paths[y_index][k]);
  ContractionEntry e = t.finish();
  e.replica = bundle.replica;
  e.x_index = x_index;
  e.y_index = y_index;
  return e;
}

ContractionSummary summarize_contraction(std::span<const ContractionEntry> entries,
                                         double required_fraction) {
  ContractionSummary s;
  s.replicas = entries.size();
  s.required_fraction = required_fraction;
  if (entries.empty()) return s;
  s.threshold = entries.front().threshold;
  std::size_t vanish = 0, away = 0;
  for (const auto& e : entries) {
    vanish += e.verdict == Verdict::vanishing_indicative;
    away += e.verdict == Verdict::bounded_away;
  }
  const double n = static_cast<double>(entries.size());
  s.vanishing_fraction = static_cast<double>(vanish) / n;
  s.bounded_away_fraction = static_cast<double>(away) / n;
  if (s.vanishing_fraction >= required_fraction)
    s.verdict = Verdict::vanishing_indicative;
  else if (s.bounded_away_fraction >= required_fraction)
    s.verdict = Verdict::bounded_away;
  return s;
}

NormalizedDistance normalized_distance(const TrajectoryBundle& bundle, std::size_t x_index,
                                       std::size_t y_index) {
  check_index(bundle, x_index, "normalized_distance");
  check_index(bundle, y_index, "normalized_distance");
  NormalizedDistance out;
  out.steps = bundle.steps;
  out.values.reserve(bundle.size());
  out.monotone_checked = true;
  bool zero = false;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t k = 0; k < bundle.size(); ++k) {
    const double x = bundle.paths[x_index][k], y = bundle.paths[y_index][k];
    const double d = std::abs(x - y);
    zero = zero || d == 0.0;
    const double D = zero ? 0.0 : distance_over_product(d, bundle.log_product[k]);
    if (k > 0 && out.monotone) {
      const double slack = 8.0 * eps * std::max({std::abs(x), std::abs(y), 1.0}) *
                           std::exp(-bundle.log_product[k]);
      if (D > out.values.back() * (1.0 + 1e-9) + slack) {
        out.monotone = false;
        out.first_violation = bundle.steps[k];
      }
    }
    out.values.push_back(D);
  }
  for (std::size_t k = out.values.size() / 2; k < out.values.size(); ++k)
    out.tail_sup = std::max(out.tail_sup, out.values[k]);
  return out;
}

// ---------------------------------------------------------------------------

EscapeTracker::EscapeTracker(double radius, double tail_fraction, EscapeThresholds thresholds)
    : radius_(radius), tail_fraction_(tail_fraction), thresholds_(thresholds) {
  if (!(radius >= 0.0)) throw ConfigError("escape: radius must be >= 0");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ConfigError("escape: tail_fraction must be in (0, 1]");
}

EscapeReport EscapeTracker::finish() const {
  EscapeReport r;
  r.radius = radius_;
  r.tail_fraction = tail_fraction_;
  r.thresholds = thresholds_;
  r.visits = visit_log_.size();
  if (r.visits == 0) return r;
  r.tail_visits = static_cast<std::uint64_t>(
      std::ceil(tail_fraction_ * static_cast<double>(r.visits)));
  r.tail_visits = std::clamp<std::uint64_t>(r.tail_visits, 1, r.visits);
  double m = -kInf;
  for (std::size_t k = r.visits - r.tail_visits; k < r.visits; ++k) m = std::max(m, visit_log_[k]);
  r.tail_sup = std::exp(m);
  if (r.tail_sup < thresholds_.vanishing)
    r.verdict = Verdict::vanishing_indicative;
  else if (r.tail_sup > thresholds_.returning)
    r.verdict = Verdict::bounded_away;
  return r;
}

EscapeReport extended_escape_stat(const TrajectoryBundle& bundle, std::size_t index, double radius,
                                  double tail_fraction, EscapeThresholds thresholds,
                                  std::vector<double>* series) {
  check_index(bundle, index, "extended_escape_stat");
  EscapeTracker t(radius, tail_fraction, thresholds);
  if (series) series->clear();
  for (std::size_t k = 0; k < bundle.size(); ++k) {
    const double x = bundle.paths[index][k];
    t.observe(bundle.log_product[k], x);
    if (series) series->push_back(x <= radius ? std::exp(bundle.log_product[k]) : 0.0);
  }
  EscapeReport r = t.finish();
  r.replica = bundle.replica;
  return r;
}

// ---------------------------------------------------------------------------

ClassifyTracker::ClassifyTracker(std::uint64_t horizon, ClassifyThresholds thresholds)
    : horizon_(horizon), thresholds_(thresholds), final_min_(kInf) {
  if (horizon < 4) throw ConfigError("classify: horizon must be >= 4");
  first_.reserve(horizon / 4 + 1);
}

void ClassifyTracker::observe(std::uint64_t step, double x) {
  const std::uint64_t quarter = horizon_ / 4;
  if (step <= quarter) first_.push_back(x);
  if (step >= horizon_ - quarter) final_min_ = std::min(final_min_, x);
}

ReplicaClassification ClassifyTracker::finish(std::uint64_t replica) const {
  ReplicaClassification r;
  r.replica = replica;
  r.horizon = horizon_;
  r.r0 = quantile_of(first_, thresholds_.window_quantile);
  r.final_min = final_min_;
  r.returned = r.final_min <= r.r0;
  r.escaped = r.final_min > thresholds_.escape_factor * r.r0;
  return r;
}

ReplicaClassification classify_replica(const TrajectoryBundle& bundle, std::size_t index,
                                       ClassifyThresholds thresholds) {
  check_index(bundle, index, "classify");
  ClassifyTracker t(bundle.horizon, thresholds);
  for (std::size_t k = 0; k < bundle.size(); ++k) t.observe(bundle.steps[k], bundle.paths[index][k]);
  return t.finish(bundle.replica);
}

ClassificationReport classify(std::span<const ReplicaClassification> replicas,
                              ClassifyThresholds thresholds) {
  if (replicas.size() < thresholds.min_replicas)
    throw ConfigError("classify: needs at least " + std::to_string(thresholds.min_replicas) +
                      " replicas, got " + std::to_string(replicas.size()));
  ClassificationReport rep;
  rep.replicas = replicas.size();
  rep.thresholds = thresholds;
  rep.horizon = replicas.front().horizon;
  std::size_t ret = 0, esc = 0;
  for (const auto& r : replicas) {
    ret += r.returned;
    esc += r.escaped;
  }
  const double n = static_cast<double>(replicas.size());
  rep.returned_fraction = static_cast<double>(ret) / n;
  rep.escaped_fraction = static_cast<double>(esc) / n;
  if (rep.returned_fraction >= thresholds.agreement)
    rep.verdict = Classification::recurrent_indicative;
  else if (rep.escaped_fraction >= thresholds.agreement)
    rep.verdict = Classification::transient_indicative;
  return rep;
}

ClassificationReport classify(std::span<const TrajectoryBundle> bundles, std::size_t index,
                              ClassifyThresholds thresholds) {
  std::vector<ReplicaClassification> per;
  per.reserve(bundles.size());
  for (const auto& b : bundles) per.push_back(classify_replica(b, index, thresholds));
  return classify(per, thresholds);
}

// ---------------------------------------------------------------------------

Regime system_regime(const SystemSpec& system) {
  if (system.family() == Family::reflected_rw) return Regime::centered;
  if (!system.joint_pairs().empty()) {
    double mean = 0.0, second = 0.0;
    for (const auto& p : system.joint_pairs()) {
      const double l = std::log(p.a);
      mean += p.weight * l;
      second += p.weight * l * l;
    }
    if (std::abs(mean) <= 1e-12 * std::max(1.0, std::sqrt(second))) return Regime::centered;
    return mean < 0.0 ? Regime::contractive : Regime::expanding;
  }
  return moment_report(*system.a_law()).regime;
}

FurstenbergReport furstenberg_limit(const SystemSpec& system,
                                    std::span<const RightProcessPath> paths, std::size_t index,
                                    double tol) {
  if (system.family() != Family::affine)
    throw ConfigError("furstenberg_limit: only defined for the affine family");
  if (system_regime(system) != Regime::contractive)
    throw DomainError("furstenberg_limit: regime is not contractive, the limit does not exist");
  if (!(tol > 0.0)) throw ConfigError("furstenberg_limit: tol must be > 0");
  FurstenbergReport rep;
  std::vector<double> found;
  for (const auto& p : paths) {
    if (index >= p.values.size()) throw ConfigError("furstenberg_limit: index out of range");
    const auto& v = p.values[index];
    if (v.size() >= 2 && std::abs(v.back() - v[v.size() - 2]) < tol) {
      rep.limits.emplace_back(v.back());
      found.push_back(v.back());
    } else {
      rep.limits.emplace_back(std::nullopt);
    }
  }
  rep.converged = found.size();
  if (!found.empty()) {
    long double s = 0.0L;
    for (double x : found) s += x;
    rep.mean = static_cast<double>(s / found.size());
    long double ss = 0.0L;
    for (double x : found) ss += (x - rep.mean) * (x - rep.mean);
    rep.dispersion = static_cast<double>(std::sqrt(ss / found.size()));
    rep.law = EmpiricalMeasure::from_samples(found).normalized();
  }
  return rep;
}

}  // namespace sds
