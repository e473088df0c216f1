#include "sds/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "sds/engine.hpp"
#include "sds/errors.hpp"
#include "sds/rational.hpp"

namespace sds {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> positive_kinks(const DistributionSpec& law) {
  std::vector<double> out;
  for (double k : law.kinks())
    if (k > 0.0 && std::isfinite(k)) out.push_back(k);
  return out;
}

// Integral of a nonnegative function over [0, infinity); exact cutoff when
// the integrand vanishes beyond a finite point.
TailIntegral half_line_integral(const std::function<double(double)>& f, double vanish_beyond,
                                std::span<const double> breakpoints) {
  if (std::isfinite(vanish_beyond)) {
    TailIntegral t;
    t.status = Convergence::converged;
    t.value = integrate(f, 0.0, std::max(vanish_beyond, 0.0), breakpoints);
    t.cutoffs = {vanish_beyond};
    t.partials = {t.value};
    return t;
  }
  return integrate_to_infinity(f, 0.0, TailRules{}, breakpoints);
}

CriterionStatus status_of(Convergence c) {
  switch (c) {
    case Convergence::converged: return CriterionStatus::holds;
    case Convergence::diverged: return CriterionStatus::fails;
    case Convergence::undecided: return CriterionStatus::undecided;
  }
  return CriterionStatus::undecided;
}

Criterion criterion_of(const TailIntegral& t) {
  return {status_of(t.status), t.value, t.cutoffs, t.partials};
}

}  // namespace

// ---------------------------------------------------------------------------
// EmpiricalMeasure

EmpiricalMeasure EmpiricalMeasure::histogram(std::vector<double> bin_edges) {
  if (bin_edges.size() < 2) throw ConfigError("histogram: need at least two bin edges");
  for (std::size_t i = 0; i < bin_edges.size(); ++i) {
    if (!std::isfinite(bin_edges[i])) throw ConfigError("histogram: non-finite bin edge");
    if (i > 0 && bin_edges[i] < bin_edges[i - 1]) throw ConfigError("histogram: edges must be nondecreasing");
  }
  EmpiricalMeasure m;
  m.masses_.assign(bin_edges.size() - 1, 0.0);
  m.edges_ = std::move(bin_edges);
  return m;
}

EmpiricalMeasure EmpiricalMeasure::from_samples(std::vector<double> samples) {
  if (samples.empty()) throw ConfigError("from_samples: no samples");
  for (double x : samples)
    if (!std::isfinite(x)) throw DomainError("from_samples: non-finite sample");
  std::sort(samples.begin(), samples.end());
  EmpiricalMeasure m;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    if (!m.edges_.empty()) m.masses_.push_back(0.0);
    m.edges_.push_back(samples[i]);
    m.edges_.push_back(samples[i]);
    m.masses_.push_back(static_cast<double>(j - i));
    i = j;
  }
  m.total_ = static_cast<double>(samples.size());
  m.count_ = samples.size();
  return m;
}

void EmpiricalMeasure::add(double x, double weight) {
  ++count_;
  if (!(x >= edges_.front() && x <= edges_.back())) {
    ++outside_;
    return;
  }
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  std::size_t bin = static_cast<std::size_t>(it - edges_.begin());
  bin = bin >= edges_.size() ? masses_.size() - 1 : bin - 1;
  // Prefer an atom sitting exactly at x.
  while (bin > 0 && edges_[bin] == x && edges_[bin - 1] == x) --bin;
  masses_[bin] += weight;
  total_ += weight;
  dirty_ = true;
}

void EmpiricalMeasure::merge(const EmpiricalMeasure& other) {
  if (other.edges_ != edges_) throw ConfigError("merge: histograms have different edges");
  for (std::size_t k = 0; k < masses_.size(); ++k) masses_[k] += other.masses_[k];
  total_ += other.total_;
  count_ += other.count_;
  outside_ += other.outside_;
  dirty_ = true;
}

void EmpiricalMeasure::rebuild() const {
  if (!dirty_) return;
  cum_.assign(masses_.size() + 1, 0.0);
  for (std::size_t k = 0; k < masses_.size(); ++k) cum_[k + 1] = cum_[k] + masses_[k];
  dirty_ = false;
}

double EmpiricalMeasure::mass_up_to(double x) const {
  if (edges_.empty()) return 0.0;
  rebuild();
  const std::size_t idx =
      static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
  if (idx == 0) return 0.0;
  double m = cum_[idx - 1];
  if (idx < edges_.size()) {
    const double lo = edges_[idx - 1], hi = edges_[idx];
    m += masses_[idx - 1] * (x - lo) / (hi - lo);
  }
  return m;
}

double EmpiricalMeasure::mass_below(double x) const {
  if (edges_.empty()) return 0.0;
  rebuild();
  const std::size_t idx =
      static_cast<std::size_t>(std::lower_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
  if (idx == 0) return 0.0;
  double m = cum_[idx - 1];
  if (idx < edges_.size()) {
    const double lo = edges_[idx - 1], hi = edges_[idx];
    m += masses_[idx - 1] * (x - lo) / (hi - lo);
  }
  return m;
}

double EmpiricalMeasure::cdf(double x) const {
  if (!(total_ > 0.0)) throw DomainError("cdf: measure has no mass");
  return std::min(1.0, mass_up_to(x) / total_);
}

double EmpiricalMeasure::cdf_left(double x) const {
  if (!(total_ > 0.0)) throw DomainError("cdf: measure has no mass");
  return std::min(1.0, mass_below(x) / total_);
}

bool EmpiricalMeasure::is_normalized(double tol) const noexcept {
  return std::abs(total_ - 1.0) <= tol;
}

EmpiricalMeasure EmpiricalMeasure::normalized() const {
  if (!(total_ > 0.0)) throw DomainError("normalized: measure has no mass");
  EmpiricalMeasure m = *this;
  for (double& v : m.masses_) v /= total_;
  m.total_ = 1.0;
  m.dirty_ = true;
  return m;
}

std::string EmpiricalMeasure::to_csv() const {
  std::string out = "edge_lo,edge_hi,mass\n";
  char buf[96];
  for (std::size_t k = 0; k < masses_.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", edges_[k], edges_[k + 1], masses_[k]);
    out += buf;
  }
  return out;
}

CdfReference CdfReference::of(const DistributionSpec& law) {
  CdfReference r;
  r.cdf = [law](double x) { return law.cdf(x); };
  for (const auto& [v, w] : law.atoms()) r.jumps.push_back(v);
  return r;
}

namespace {

double ks_sweep(const EmpiricalMeasure& emp, const std::function<double(double)>& ref,
                const std::function<double(double)>& ref_left, std::vector<double> points) {
  if (!emp.is_normalized()) throw DomainError("ks_distance: empirical measure is not normalized");
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double d = 0.0;
  for (double p : points) {
    d = std::max(d, std::abs(emp.cdf_left(p) - ref_left(p)));
    d = std::max(d, std::abs(emp.cdf(p) - ref(p)));
  }
  return std::min(d, 1.0);
}

}  // namespace

double ks_distance(const EmpiricalMeasure& emp, const CdfReference& reference) {
  std::vector<double> points = emp.bin_edges();
  points.insert(points.end(), reference.jumps.begin(), reference.jumps.end());
  const auto& F = reference.cdf;
  return ks_sweep(emp, F, [&F](double x) { return F(std::nextafter(x, -kInf)); }, std::move(points));
}

double ks_distance(const EmpiricalMeasure& emp, const EmpiricalMeasure& reference) {
  if (!reference.is_normalized()) throw DomainError("ks_distance: reference measure is not normalized");
  std::vector<double> points = emp.bin_edges();
  points.insert(points.end(), reference.bin_edges().begin(), reference.bin_edges().end());
  return ks_sweep(
      emp, [&reference](double x) { return reference.cdf(x); },
      [&reference](double x) { return reference.cdf_left(x); }, std::move(points));
}

// ---------------------------------------------------------------------------
// Closed-form invariant density and estimators

std::optional<double> additive_lattice_span(const DistributionSpec& law) {
  if (!law.is_discrete()) return std::nullopt;
  ExactRational span;
  for (const auto& [v, w] : law.atoms()) {
    if (v == 0.0) continue;
    span = ExactRational::gcd(span, ExactRational::nearest_simple(std::abs(v)));
  }
  return span.to_double();
}

InvariantDensity reflected_rw_invariant_density(const DistributionSpec& b_law,
                                                std::span<const double> grid) {
  if (b_law.support_lo() < 0.0)
    throw DomainError("invariant density: the closed form needs B supported on [0, inf)");
  if (const auto span = additive_lattice_span(b_law))
    throw DomainError("invariant density: lattice law (span " + std::to_string(*span) +
                      ") is not covered by the closed form");
  InvariantDensity out;
  out.grid.assign(grid.begin(), grid.end());
  out.density.reserve(grid.size());
  for (double x : grid) out.density.push_back(x < 0.0 ? 0.0 : b_law.survival(x));
  const auto kinks = positive_kinks(b_law);
  out.total_mass = half_line_integral([&b_law](double x) { return b_law.survival(x); },
                                      b_law.support_hi(), kinks);
  return out;
}

EmpiricalMeasure occupation_measure(std::span<const double> path, std::uint64_t burn_in,
                                    std::vector<double> bin_edges) {
  if (burn_in >= path.size()) throw ConfigError("occupation_measure: burn_in must be below the path length");
  EmpiricalMeasure m = EmpiricalMeasure::histogram(std::move(bin_edges));
  for (std::size_t k = burn_in; k < path.size(); ++k) m.add(path[k]);
  return m;
}

double RatioAccumulator::ratio() const noexcept {
  if (psi_visits_ == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(phi_visits_) / static_cast<double>(psi_visits_);
}

RatioReport ratio_estimate(std::span<const double> path, Interval phi, Interval psi,
                           bool keep_series) {
  RatioAccumulator acc(phi, psi);
  RatioReport r;
  if (keep_series) r.series.reserve(path.size());
  for (double x : path) {
    acc.observe(x);
    if (keep_series) r.series.push_back(acc.ratio());
  }
  r.phi_visits = acc.phi_visits();
  r.psi_visits = acc.psi_visits();
  r.defined = r.psi_visits > 0;
  r.final_ratio = acc.ratio();
  return r;
}

namespace {

// Cumulative integral of a nonnegative function over increasing nodes, by
// Simpson's rule per cell, with a trapezoid-shaped density inside each cell
// for evaluation and inversion.
class CumulativeTable {
 public:
  CumulativeTable(const std::function<double(double)>& f, std::vector<double> nodes)
      : x_(std::move(nodes)) {
    f_.resize(x_.size());
    for (std::size_t k = 0; k < x_.size(); ++k) f_[k] = f(x_[k]);
    cum_.assign(x_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
      const double h = x_[k + 1] - x_[k];
      const double mid = f(x_[k] + 0.5 * h);
      cum_[k + 1] = cum_[k] + h * (f_[k] + 4.0 * mid + f_[k + 1]) / 6.0;
    }
  }

  double total() const { return cum_.back(); }

  double mass_to(double x) const {
    if (x <= x_.front()) return 0.0;
    if (x >= x_.back()) return cum_.back();
    const std::size_t k =
        static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / h;
    const double cell = cum_[k + 1] - cum_[k];
    const double fa = f_[k], fb = f_[k + 1];
    const double lin = 0.5 * (fa + fb);
    const double frac = lin > 0.0 ? (fa * s + 0.5 * (fb - fa) * s * s) / lin : s;
    return cum_[k] + cell * frac;
  }

  double inverse(double m) const {
    m = std::clamp(m, 0.0, cum_.back());
    std::size_t k =
        static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), m) - cum_.begin());
    k = std::clamp<std::size_t>(k, 1, cum_.size() - 1) - 1;
    const double h = x_[k + 1] - x_[k];
    const double cell = cum_[k + 1] - cum_[k];
    const double q = cell > 0.0 ? std::clamp((m - cum_[k]) / cell, 0.0, 1.0) : 0.0;
    const double fa = f_[k], fb = f_[k + 1];
    const double lin = 0.5 * (fa + fb);
    double s;
    if (std::abs(fb - fa) <= 1e-14 * std::max(fa, fb) || lin <= 0.0) {
      s = q;
    } else {
      // fa s + (fb - fa) s^2 / 2 = q lin
      const double A = 0.5 * (fb - fa), B = fa, C = -q * lin;
      s = (-2.0 * C) / (B + std::sqrt(std::max(0.0, B * B - 4.0 * A * C)));
    }
    return x_[k] + std::clamp(s, 0.0, 1.0) * h;
  }

 private:
  std::vector<double> x_, f_, cum_;
};

std::vector<double> uniform_nodes(double lo, double hi, std::size_t cells,
                                  std::span<const double> extra = {}) {
  std::vector<double> v(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k)
    v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(cells);
  v.back() = hi;
  for (double e : extra)
    if (e > lo && e < hi) v.push_back(e);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

CdfReference reflected_rw_stationary_cdf(const DistributionSpec& b_law) {
  const InvariantDensity inv = reflected_rw_invariant_density(b_law, {});
  if (inv.total_mass.status != Convergence::converged)
    throw DomainError("stationary law: E B is not finite, the invariant measure is not normalizable");
  const double mean = inv.total_mass.value;
  const auto kinks = positive_kinks(b_law);
  std::vector<double> nodes;
  if (std::isfinite(b_law.support_hi())) {
    nodes = uniform_nodes(0.0, b_law.support_hi(), 1 << 14, kinks);
  } else {
    const double body = b_law.quantile(0.999);
    nodes = uniform_nodes(0.0, body, 1 << 14, kinks);
    const double far = std::max(b_law.quantile(1.0 - 1e-12), 2.0 * body);
    const std::size_t tail_nodes = 4096;
    for (std::size_t k = 1; k <= tail_nodes; ++k)
      nodes.push_back(body * std::pow(far / body, static_cast<double>(k) / tail_nodes));
  }
  auto table = std::make_shared<CumulativeTable>(
      [&b_law](double x) { return b_law.survival(x); }, std::move(nodes));
  CdfReference r;
  r.cdf = [table, mean](double x) { return x <= 0.0 ? 0.0 : std::min(1.0, table->mass_to(x) / mean); };
  return r;
}

KacReport kac_return_time(const SystemSpec& system, double t, std::uint64_t replicas,
                          std::uint64_t horizon, std::uint64_t seed, unsigned workers) {
  if (system.family() != Family::reflected_rw)
    throw ConfigError("kac: the closed-form invariant measure is available for reflected_rw only");
  if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("kac: U = [0, t) needs finite t > 0");
  if (replicas == 0 || horizon == 0) throw ConfigError("kac: replicas and horizon must be >= 1");
  if (!system.b_law()) throw ConfigError("kac: needs an independent b_law");
  const DistributionSpec& b = *system.b_law();
  std::vector<double> grid;
  const InvariantDensity dens = reflected_rw_invariant_density(b, grid);
  if (dens.total_mass.status != Convergence::converged)
    throw ConfigError("kac: invariant measure has infinite mass (not positive recurrent)");

  KacReport rep;
  rep.nu_total = dens.total_mass.value;
  const auto kinks = positive_kinks(b);
  auto surv = [&b](double x) { return b.survival(x); };
  rep.nu_u = integrate(surv, 0.0, t, kinks);
  if (!(rep.nu_u > 0.0)) throw ConfigError("kac: U carries no invariant mass");
  rep.prediction = rep.nu_total / rep.nu_u;

  const CumulativeTable start(surv, uniform_nodes(0.0, t, 4096, kinks));
  std::vector<std::uint64_t> times(replicas, 0);
  parallel_for(replicas, workers, [&](std::uint64_t r) {
    Substream init(seed, r, 0, stream_domain::initial_state);
    long double x = std::min(start.inverse(init.uniform() * start.total()), std::nextafter(t, 0.0));
    for (std::uint64_t n = 1; n <= horizon; ++n) {
      Substream s(seed, r, n, stream_domain::maps);
      x = system.apply(system.draw(s), x);
      if (x >= 0.0L && x < static_cast<long double>(t)) {
        times[r] = n;
        return;
      }
    }
  });

  long double sum = 0.0L, sum_sq = 0.0L;
  for (std::uint64_t v : times) {
    if (v == 0) {
      ++rep.censored;
      continue;
    }
    ++rep.returns;
    sum += v;
    sum_sq += static_cast<long double>(v) * v;
  }
  rep.censored_fraction = static_cast<double>(rep.censored) / static_cast<double>(replicas);
  rep.valid = rep.censored_fraction < 0.01 && rep.returns > 0;
  if (rep.returns > 0) {
    const long double n = rep.returns;
    rep.mean_return_time = static_cast<double>(sum / n);
    const long double var = n > 1 ? (sum_sq - sum * sum / n) / (n - 1) : 0.0L;
    rep.standard_error = static_cast<double>(std::sqrt(std::max(var, 0.0L) / n));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Recurrence criteria

std::string_view to_string(CriterionStatus s) {
  switch (s) {
    case CriterionStatus::holds: return "holds";
    case CriterionStatus::fails: return "fails";
    case CriterionStatus::undecided: return "numerically-undecided";
  }
  return "numerically-undecided";
}

CriteriaReport recurrence_criteria(const DistributionSpec& b_law) {
  CriteriaReport rep;
  const double hi = b_law.support_hi();
  const auto kinks = positive_kinks(b_law);
  auto surv = [&b_law](double x) { return x < 0.0 ? 1.0 : b_law.survival(x); };

  // (i) E B+ = int S
  rep.mean = criterion_of(half_line_integral(surv, hi, kinks));
  rep.mean_positive = rep.mean.value;

  // E (B+)^p = int S(s^{1/p}) ds
  auto power_moment = [&](double p) {
    std::vector<double> bp;
    for (double k : kinks) bp.push_back(std::pow(k, p));
    auto g = [&surv, p](double s) { return surv(std::pow(s, 1.0 / p)); };
    return criterion_of(half_line_integral(g, std::pow(hi, p), bp));
  };
  rep.sqrt_mean = power_moment(0.5);
  rep.sqrt_positive = rep.sqrt_mean;
  rep.sqrt_cubed = power_moment(1.5);

  // (iii) int S^2
  rep.tail_square = criterion_of(
      half_line_integral([&surv](double x) { return surv(x) * surv(x); }, hi, kinks));

  // (iv) g(y) = S(y) (int_0^y S - y S(y))
  {
    Criterion& c = rep.tail_product;
    double acc = 0.0, prev = 0.0;
    for (double y : {1e2, 1e3, 1e4, 1e5, 1e6}) {
      acc += integrate(surv, prev, y, kinks);
      prev = y;
      const double sy = surv(y);
      const double g = sy * std::max(0.0, acc - y * sy);
      c.cutoffs.push_back(y);
      c.partials.push_back(g);
    }
    const std::size_t n = c.partials.size();
    const double last = c.partials[n - 1], before = c.partials[n - 2];
    c.value = last;
    if (last < 1e-3) {
      c.status = CriterionStatus::holds;
    } else if (last > before) {
      c.status = CriterionStatus::fails;
    } else {
      const double ratio = last / before;
      c.status = ratio <= 0.9    ? CriterionStatus::holds
                 : ratio >= 0.98 ? CriterionStatus::fails
                                 : CriterionStatus::undecided;
    }
  }

  if (b_law.support_lo() < 0.0) {
    rep.mean_negative = half_line_integral(
                            [&b_law](double x) { return b_law.cdf(-x); }, -b_law.support_lo(), {})
                            .value;
  }

  const Criterion* chain[] = {&rep.mean, &rep.sqrt_mean, &rep.tail_square, &rep.tail_product};
  static const char* names[] = {"(i)", "(ii)", "(iii)", "(iv)"};
  for (int k = 0; k + 1 < 4; ++k) {
    if (chain[k]->status == CriterionStatus::holds && chain[k + 1]->status == CriterionStatus::fails)
      throw IdentityViolation(std::string("recurrence criteria: ") + names[k] + " holds but " +
                              names[k + 1] + " fails for " + b_law.name());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Wiener-Hopf

WienerHopfReport wiener_hopf_check(const DistributionSpec& mu0, std::uint64_t paths,
                                   std::uint64_t max_steps, std::uint64_t seed, unsigned workers,
                                   std::size_t grid_points) {
  if (mu0.is_discrete()) throw DomainError("wiener_hopf: mu0 must be absolutely continuous");
  if (mu0.support_lo() < 0.0) throw DomainError("wiener_hopf: mu0 must live on [0, inf)");
  if (paths == 0 || max_steps == 0) throw ConfigError("wiener_hopf: paths and max_steps must be >= 1");
  if (grid_points < 5) throw ConfigError("wiener_hopf: grid too coarse");
  if (grid_points % 2 == 0) ++grid_points;

  WienerHopfReport rep;
  rep.paths = paths;
  const double hi = mu0.support_hi();
  const double far = std::isfinite(hi) ? hi : mu0.quantile(1.0 - 1e-15);
  const double G = std::isfinite(hi) ? hi : mu0.quantile(1.0 - 1e-4);
  const auto kinks = mu0.kinks();
  // int_lo^hi phi0(v) phi0(v + x) dv by adaptive quadrature.
  auto product_integral = [&](double x, double lo, double hi_v) {
    if (!(hi_v > lo)) return 0.0;
    std::vector<double> bp;
    for (double kk : kinks) {
      if (kk > lo && kk < hi_v) bp.push_back(kk);
      if (kk - x > lo && kk - x < hi_v) bp.push_back(kk - x);
    }
    return integrate([&](double v) { return mu0.density(v) * mu0.density(v + x); }, lo, hi_v, bp);
  };
  const std::size_t half = (grid_points - 1) / 2;  // nodes x_k = k h, k = 0..half
  const double h = G / static_cast<double>(half);
  rep.grid_half_width = G;
  rep.grid_points = grid_points;

  std::vector<double> d(half + 1);
  for (std::size_t k = 0; k <= half; ++k) d[k] = mu0.density(h * static_cast<double>(k));
  for (std::size_t k = 0; k < half; ++k) {
    if (d[k + 1] > d[k] * (1.0 + 1e-12) + 1e-300) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "wiener_hopf: density of mu0 increases between x=%.9g and x=%.9g", h * k,
                    h * (k + 1));
      throw DomainError(buf);
    }
  }

  // c(x_k) = int_0^inf phi0(v) phi0(v + x_k) dv: trapezoid rule on the grid, quadrature beyond G.
  std::vector<double> conv(half + 1, 0.0);
  for (std::size_t k = 0; k <= half; ++k) {
    const std::size_t top = half - k;
    double s = 0.0;
    for (std::size_t j = 0; j <= top; ++j) {
      const double w = (j == 0 || j == top) ? 0.5 : 1.0;
      s += w * d[j] * d[j + k];
    }
    const double xk = h * static_cast<double>(k);
    conv[k] = (top == 0 ? 0.0 : h * s) + product_integral(xk, G - xk, far - xk);
  }
  double mass = 0.0;
  for (std::size_t k = 0; k <= half; ++k) {
    const double phi = d[k] - conv[k];
    const double w = (k == half) ? 0.5 : 1.0;
    mass += (k == 0 ? 1.0 : 2.0) * w * phi;  // symmetric; node 0 counted once
  }
  // Beyond the grid: int_G^inf (phi0 - c) = S(G) - int_0^inf phi0(v) S(v + G) dv.
  double tail = 0.0;
  if (far > G) {
    std::vector<double> bp;
    for (double kk : kinks)
      if (kk - G > 0.0 && kk - G < far - G) bp.push_back(kk - G);
    tail = mu0.survival(G) -
           integrate([&](double v) { return mu0.density(v) * mu0.survival(v + G); }, 0.0, far - G, bp);
  }
  rep.phi_mass = h * mass + 2.0 * tail;

  auto convolution = [&](double x) {
    if (x <= G) {
      const double pos = x / h;
      const std::size_t k = std::min(static_cast<std::size_t>(pos), half - 1);
      const double f = pos - static_cast<double>(k);
      return conv[k] * (1.0 - f) + conv[k + 1] * f;
    }
    return product_integral(x, 0.0, far - x);
  };

  std::vector<double> ladder(paths, 0.0);
  std::vector<std::uint64_t> proposals(paths, 0), accepted(paths, 0);
  std::vector<char> done(paths, 0);
  parallel_for(paths, workers, [&](std::uint64_t p) {
    Substream s(seed, p, 0, stream_domain::auxiliary);
    long double walk = 0.0L;
    for (std::uint64_t n = 1; n <= max_steps; ++n) {
      double x;
      for (;;) {
        const double sign = s.uniform() < 0.5 ? -1.0 : 1.0;
        const double r = mu0.quantile(s.uniform());
        const double u = s.uniform();
        ++proposals[p];
        const double f0 = mu0.density(r);
        if (f0 > 0.0 && u * f0 <= f0 - convolution(r)) {
          ++accepted[p];
          x = sign * r;
          break;
        }
      }
      walk += x;
      if (walk >= 0.0L) {
        ladder[p] = static_cast<double>(walk);
        done[p] = 1;
        return;
      }
    }
  });

  std::vector<double> heights;
  heights.reserve(paths);
  for (std::uint64_t p = 0; p < paths; ++p) {
    rep.proposals += proposals[p];
    rep.accepted += accepted[p];
    if (done[p])
      heights.push_back(ladder[p]);
    else
      ++rep.censored;
  }
  rep.acceptance_rate = static_cast<double>(rep.accepted) / static_cast<double>(rep.proposals);
  rep.acceptance_se = std::sqrt(0.25 / static_cast<double>(rep.proposals));
  if (!heights.empty())
    rep.ks = ks_distance(EmpiricalMeasure::from_samples(std::move(heights)).normalized(),
                         CdfReference::of(mu0));
  else
    rep.ks = 1.0;
  return rep;
}

}  // namespace sds
