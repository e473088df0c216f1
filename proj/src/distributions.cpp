#include "sds/distributions.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "sds/errors.hpp"
#include "sds/rational.hpp"

namespace sds {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

law::TwoPoint normalize(law::TwoPoint tp) {
  require(!tp.atoms.empty(), "two_point: no atoms");
  std::map<double, double> merged;
  double total = 0.0;
  for (auto [v, w] : tp.atoms) {
    require(std::isfinite(v), "two_point: non-finite value");
    require(std::isfinite(w) && w >= 0.0, "two_point: negative or non-finite weight");
    merged[v] += w;
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-9, "two_point: weights sum to " + std::to_string(total));
  law::TwoPoint out;
  for (auto [v, w] : merged)
    if (w > 0.0) out.atoms.emplace_back(v, w / total);
  return out;
}

}  // namespace

DistributionSpec::DistributionSpec(Variant v) : v_(std::move(v)) {
  std::visit(
      overloaded{
          [&](law::TwoPoint& tp) { tp = normalize(std::move(tp)); },
          [](const law::Uniform& u) {
            require(std::isfinite(u.lo) && std::isfinite(u.hi) && u.lo < u.hi,
                    "uniform: need finite lo < hi");
          },
          [](const law::Exponential& e) {
            require(std::isfinite(e.rate) && e.rate > 0.0, "exponential: rate must be > 0");
          },
          [](const law::LogNormal& l) {
            require(std::isfinite(l.mu) && std::isfinite(l.sigma) && l.sigma > 0.0,
                    "lognormal: need finite mu and sigma > 0");
          },
          [](const law::ParetoType& p) {
            require(std::isfinite(p.a) && p.a > 0.0, "pareto_type: a must be > 0");
          },
          [](const law::Constant& c) { require(std::isfinite(c.c), "constant: non-finite value"); },
          [&](law::TabulatedDensity& t) {
            require(t.grid.size() >= 2, "tabulated: need at least two grid points");
            require(t.grid.size() == t.density.size(), "tabulated: grid/density size mismatch");
            for (std::size_t i = 0; i < t.grid.size(); ++i) {
              require(std::isfinite(t.grid[i]), "tabulated: non-finite grid point");
              require(std::isfinite(t.density[i]) && t.density[i] >= 0.0,
                      "tabulated: negative or non-finite density at index " + std::to_string(i));
              if (i > 0)
                require(t.grid[i] > t.grid[i - 1],
                        "tabulated: grid not increasing at index " + std::to_string(i));
            }
            node_cdf_.assign(t.grid.size(), 0.0);
            for (std::size_t i = 1; i < t.grid.size(); ++i)
              node_cdf_[i] = node_cdf_[i - 1] +
                             0.5 * (t.density[i] + t.density[i - 1]) * (t.grid[i] - t.grid[i - 1]);
            const double mass = node_cdf_.back();
            require(std::abs(mass - 1.0) <= 1e-6,
                    "tabulated: trapezoid mass " + std::to_string(mass) + " differs from 1");
            for (double& c : node_cdf_) c /= mass;
            for (double& d : t.density) d /= mass;
            node_cdf_.back() = 1.0;
          },
      },
      v_);
}

DistributionSpec DistributionSpec::two_point(std::vector<std::pair<double, double>> atoms) {
  return DistributionSpec(law::TwoPoint{std::move(atoms)});
}
DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  return DistributionSpec(law::Uniform{lo, hi});
}
DistributionSpec DistributionSpec::exponential(double rate) {
  return DistributionSpec(law::Exponential{rate});
}
DistributionSpec DistributionSpec::lognormal(double mu, double sigma) {
  return DistributionSpec(law::LogNormal{mu, sigma});
}
DistributionSpec DistributionSpec::pareto_type(double a) {
  return DistributionSpec(law::ParetoType{a});
}
DistributionSpec DistributionSpec::constant(double c) { return DistributionSpec(law::Constant{c}); }
DistributionSpec DistributionSpec::tabulated(std::vector<double> grid, std::vector<double> density) {
  return DistributionSpec(law::TabulatedDensity{std::move(grid), std::move(density)});
}

DistributionSpec DistributionSpec::log_power_tail(double b, std::size_t points) {
  require(std::isfinite(b) && b > 0.0, "log_power_tail: b must be > 0");
  require(points >= 16, "log_power_tail: need at least 16 grid points");
  const double c = std::exp(std::max(1.0, 2.0 * b / 3.0));
  auto f = [b, c](double x) { return std::pow(std::log(c + x), b) / std::pow(c + x, 1.5); };
  std::vector<double> grid{0.0}, dens{f(0.0)};
  const double lo = std::log(1e-3), hi = std::log(1e18);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    grid.push_back(x);
    dens.push_back(f(x));
  }
  double mass = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) mass += 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
  for (double& d : dens) d /= mass;
  return tabulated(std::move(grid), std::move(dens));
}

std::string DistributionSpec::name() const {
  return std::visit(overloaded{
                        [](const law::TwoPoint&) { return std::string("two_point"); },
                        [](const law::Uniform&) { return std::string("uniform"); },
                        [](const law::Exponential&) { return std::string("exponential"); },
                        [](const law::LogNormal&) { return std::string("lognormal"); },
                        [](const law::ParetoType&) { return std::string("pareto_type"); },
                        [](const law::Constant&) { return std::string("constant"); },
                        [](const law::TabulatedDensity&) { return std::string("tabulated"); },
                    },
                    v_);
}

double DistributionSpec::sample(Substream& stream) const { return quantile(stream.uniform()); }

double DistributionSpec::quantile(double u) const {
  return std::visit(
      overloaded{
          [u](const law::TwoPoint& tp) {
            double cum = 0.0;
            for (auto [v, w] : tp.atoms) {
              cum += w;
              if (u <= cum) return v;
            }
            return tp.atoms.back().first;
          },
          [u](const law::Uniform& x) { return x.lo + u * (x.hi - x.lo); },
          [u](const law::Exponential& e) { return -std::log1p(-u) / e.rate; },
          [u](const law::LogNormal& l) {
            const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
            return std::exp(l.mu + l.sigma * z);
          },
          [u](const law::ParetoType& p) { return std::expm1(-std::log1p(-u) / p.a); },
          [](const law::Constant& c) { return c.c; },
          [u, this](const law::TabulatedDensity& t) {
            const auto it = std::upper_bound(node_cdf_.begin(), node_cdf_.end(), u);
            if (it == node_cdf_.begin()) return t.grid.front();
            if (it == node_cdf_.end()) return t.grid.back();
            const std::size_t j = static_cast<std::size_t>(it - node_cdf_.begin());
            const double c0 = node_cdf_[j - 1], c1 = node_cdf_[j];
            const double frac = (u - c0) / (c1 - c0);
            return t.grid[j - 1] + frac * (t.grid[j] - t.grid[j - 1]);
          },
      },
      v_);
}

double DistributionSpec::cdf(double x) const {
  return std::visit(
      overloaded{
          [x](const law::TwoPoint& tp) {
            double cum = 0.0;
            for (auto [v, w] : tp.atoms)
              if (v <= x) cum += w;
            return std::min(cum, 1.0);
          },
          [x](const law::Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
          [x](const law::Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
          [x](const law::LogNormal& l) {
            if (x <= 0.0) return 0.0;
            return 0.5 * std::erfc(-(std::log(x) - l.mu) / (l.sigma * std::numbers::sqrt2));
          },
          [x](const law::ParetoType& p) {
            return x <= 0.0 ? 0.0 : -std::expm1(-p.a * std::log1p(x));
          },
          [x](const law::Constant& c) { return x >= c.c ? 1.0 : 0.0; },
          [x, this](const law::TabulatedDensity& t) {
            if (x <= t.grid.front()) return 0.0;
            if (x >= t.grid.back()) return 1.0;
            const auto it = std::upper_bound(t.grid.begin(), t.grid.end(), x);
            const std::size_t j = static_cast<std::size_t>(it - t.grid.begin());
            const double frac = (x - t.grid[j - 1]) / (t.grid[j] - t.grid[j - 1]);
            return node_cdf_[j - 1] + frac * (node_cdf_[j] - node_cdf_[j - 1]);
          },
      },
      v_);
}

double DistributionSpec::survival(double x) const {
  return std::visit(
      overloaded{
          [x](const law::Exponential& e) { return x <= 0.0 ? 1.0 : std::exp(-e.rate * x); },
          [x](const law::LogNormal& l) {
            if (x <= 0.0) return 1.0;
            return 0.5 * std::erfc((std::log(x) - l.mu) / (l.sigma * std::numbers::sqrt2));
          },
          [x](const law::ParetoType& p) { return x <= 0.0 ? 1.0 : std::exp(-p.a * std::log1p(x)); },
          [x](const law::TwoPoint& tp) {
            double tail = 0.0;
            for (auto [v, w] : tp.atoms)
              if (v > x) tail += w;
            return tail;
          },
          [x, this](const law::TabulatedDensity& t) {
            if (x <= t.grid.front()) return 1.0;
            if (x >= t.grid.back()) return 0.0;
            const auto it = std::upper_bound(t.grid.begin(), t.grid.end(), x);
            const std::size_t j = static_cast<std::size_t>(it - t.grid.begin());
            const double frac = (x - t.grid[j - 1]) / (t.grid[j] - t.grid[j - 1]);
            // Upper-tail mass from the top of the table keeps small tails exact.
            const double s0 = 1.0 - node_cdf_[j - 1], s1 = 1.0 - node_cdf_[j];
            return s0 + frac * (s1 - s0);
          },
          [x, this](const auto&) { return 1.0 - cdf(x); },
      },
      v_);
}

double DistributionSpec::density(double x) const {
  return std::visit(
      overloaded{
          [](const law::TwoPoint&) { return 0.0; },
          [](const law::Constant&) { return 0.0; },
          [x](const law::Uniform& u) { return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
          [x](const law::Exponential& e) { return x < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * x); },
          [x](const law::LogNormal& l) {
            if (x <= 0.0) return 0.0;
            const double z = (std::log(x) - l.mu) / l.sigma;
            return std::exp(-0.5 * z * z) / (x * l.sigma * std::sqrt(2.0 * std::numbers::pi));
          },
          [x](const law::ParetoType& p) {
            return x < 0.0 ? 0.0 : p.a * std::exp(-(1.0 + p.a) * std::log1p(x));
          },
          [x, this](const law::TabulatedDensity& t) {
            if (x < t.grid.front() || x > t.grid.back()) return 0.0;
            auto it = std::upper_bound(t.grid.begin(), t.grid.end(), x);
            if (it == t.grid.end()) --it;
            const std::size_t j = static_cast<std::size_t>(it - t.grid.begin());
            return (node_cdf_[j] - node_cdf_[j - 1]) / (t.grid[j] - t.grid[j - 1]);
          },
      },
      v_);
}

bool DistributionSpec::is_discrete() const noexcept {
  return std::holds_alternative<law::TwoPoint>(v_) || std::holds_alternative<law::Constant>(v_);
}

std::vector<std::pair<double, double>> DistributionSpec::atoms() const {
  if (const auto* tp = std::get_if<law::TwoPoint>(&v_)) return tp->atoms;
  if (const auto* c = std::get_if<law::Constant>(&v_)) return {{c->c, 1.0}};
  return {};
}

double DistributionSpec::support_lo() const noexcept {
  return std::visit(overloaded{
                        [](const law::TwoPoint& tp) { return tp.atoms.front().first; },
                        [](const law::Uniform& u) { return u.lo; },
                        [](const law::Exponential&) { return 0.0; },
                        [](const law::LogNormal&) { return 0.0; },
                        [](const law::ParetoType&) { return 0.0; },
                        [](const law::Constant& c) { return c.c; },
                        [](const law::TabulatedDensity& t) { return t.grid.front(); },
                    },
                    v_);
}

double DistributionSpec::support_hi() const noexcept {
  return std::visit(overloaded{
                        [](const law::TwoPoint& tp) { return tp.atoms.back().first; },
                        [](const law::Uniform& u) { return u.hi; },
                        [](const law::Exponential&) { return kInf; },
                        [](const law::LogNormal&) { return kInf; },
                        [](const law::ParetoType&) { return kInf; },
                        [](const law::Constant& c) { return c.c; },
                        [](const law::TabulatedDensity& t) { return t.grid.back(); },
                    },
                    v_);
}

std::vector<double> DistributionSpec::kinks() const {
  return std::visit(overloaded{
                        [](const law::TwoPoint& tp) {
                          std::vector<double> k;
                          for (auto [v, w] : tp.atoms) k.push_back(v);
                          return k;
                        },
                        [](const law::Uniform& u) { return std::vector<double>{u.lo, u.hi}; },
                        [](const law::Constant& c) { return std::vector<double>{c.c}; },
                        [](const law::TabulatedDensity& t) { return t.grid; },
                        [](const auto&) { return std::vector<double>{0.0}; },
                    },
                    v_);
}

TailIntegral DistributionSpec::expect_nonnegative(const std::function<double(double)>& g,
                                                  double lo, double hi) const {
  if (is_discrete()) {
    TailIntegral out;
    out.status = Convergence::converged;
    for (auto [v, w] : atoms())
      if (v > lo && v < hi) out.value += w * g(v);
    return out;
  }
  const double a = std::max(lo, support_lo());
  const double b = std::min(hi, support_hi());
  const auto k = kinks();
  auto integrand = [&](double x) {
    const double f = density(x);
    return f > 0.0 ? g(x) * f : 0.0;
  };
  if (!(b > a)) {
    TailIntegral out;
    out.status = Convergence::converged;
    return out;
  }
  if (std::isfinite(b)) {
    TailIntegral out;
    out.status = Convergence::converged;
    out.value = integrate(integrand, a, b, k);
    return out;
  }
  return integrate_to_infinity(integrand, a, TailRules{}, k);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::contractive: return "contractive";
    case Regime::centered: return "centered";
    case Regime::expanding: return "expanding";
    case Regime::undefined: return "undefined";
  }
  return "undefined";
}

LogPlusMoment logplus_moment(const DistributionSpec& spec, double order) {
  LogPlusMoment m;
  m.order = order;
  auto g = [order](double x) { return std::pow(std::log(x), order); };
  const TailIntegral t = spec.expect_nonnegative(g, 1.0, kInf);
  m.value = t.value;
  m.status = t.status;
  return m;
}

MomentReport moment_report(const DistributionSpec& spec, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("moment_report: epsilon must be > 0");
  if (spec.cdf(0.0) > 0.0)
    throw DomainError("moment_report: law of A puts mass " + std::to_string(spec.cdf(0.0)) +
                      " at or below 0");
  MomentReport r;
  r.logplus = logplus_moment(spec, 2.0 + epsilon);
  double tol = 1e-12;

  const auto& v = spec.variant();
  if (spec.is_discrete()) {
    for (auto [x, w] : spec.atoms()) {
      const double l = std::log(x);
      r.mean_log += w * l;
      r.second_moment_log += w * l * l;
    }
    r.closed_form = true;
  } else if (const auto* e = std::get_if<law::Exponential>(&v)) {
    const double shift = std::numbers::egamma + std::log(e->rate);
    r.mean_log = -shift;
    r.second_moment_log = shift * shift + std::numbers::pi * std::numbers::pi / 6.0;
    r.closed_form = true;
  } else if (const auto* l = std::get_if<law::LogNormal>(&v)) {
    r.mean_log = l->mu;
    r.second_moment_log = l->mu * l->mu + l->sigma * l->sigma;
    r.closed_form = true;
  } else if (const auto* u = std::get_if<law::Uniform>(&v)) {
    auto first = [](double x) { return x > 0.0 ? x * std::log(x) - x : 0.0; };
    auto second = [](double x) {
      if (x <= 0.0) return 0.0;
      const double lx = std::log(x);
      return x * (lx * lx - 2.0 * lx + 2.0);
    };
    const double w = u->hi - u->lo;
    r.mean_log = (first(u->hi) - first(u->lo)) / w;
    r.second_moment_log = (second(u->hi) - second(u->lo)) / w;
    r.closed_form = true;
  } else {
    tol = 1e-9;
    auto lpos = [](double x) { return std::log(x); };
    auto lneg = [](double x) { return -std::log(x); };
    auto lsq = [](double x) {
      const double l = std::log(x);
      return l * l;
    };
    const TailIntegral up = spec.expect_nonnegative(lpos, 1.0, kInf);
    const TailIntegral down = spec.expect_nonnegative(lneg, 0.0, 1.0);
    const TailIntegral sq_up = spec.expect_nonnegative(lsq, 1.0, kInf);
    const TailIntegral sq_down = spec.expect_nonnegative(lsq, 0.0, 1.0);
    r.second_moment_log = sq_up.value + sq_down.value;
    if (up.status == Convergence::undecided || down.status == Convergence::undecided) {
      r.mean_log = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.mean_log = up.value - down.value;  // inf - finite stays inf
    }
    if (sq_up.status == Convergence::undecided) r.second_moment_log = std::numeric_limits<double>::quiet_NaN();
  }

  if (std::isnan(r.mean_log)) {
    r.regime = Regime::undefined;
  } else if (std::abs(r.mean_log) <= tol * std::max(1.0, std::sqrt(std::abs(r.second_moment_log)))) {
    r.regime = Regime::centered;
    r.mean_log = 0.0;
  } else {
    r.regime = r.mean_log < 0.0 ? Regime::contractive : Regime::expanding;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lattice detection

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 b, u64 e, u64 m) {
  u64 r = 1;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

u64 pollard_rho(u64 n) {
  if (n % 2 == 0) return 2;
  for (u64 c = 1;; ++c) {
    u64 x = 2, y = 2, d = 1;
    auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      d = std::gcd(x > y ? x - y : y - x, n);
    }
    if (d != n) return d;
  }
}

void factor(u64 n, std::map<u64, long long>& out, long long sign) {
  if (n == 1) return;
  if (is_prime(n)) {
    out[n] += sign;
    return;
  }
  for (u64 p = 2; p < 1000; ++p) {
    if (n % p == 0) {
      while (n % p == 0) {
        out[p] += sign;
        n /= p;
      }
      factor(n, out, sign);
      return;
    }
  }
  const u64 d = pollard_rho(n);
  factor(d, out, sign);
  factor(n / d, out, sign);
}

}  // namespace

LatticeResult lattice_span(const DistributionSpec& spec) {
  LatticeResult res;
  if (!spec.is_discrete()) {
    res.proved_non_lattice = true;
    return res;
  }
  std::vector<std::map<u64, long long>> exps;
  for (auto [v, w] : spec.atoms()) {
    if (!(v > 0.0)) throw DomainError("lattice_span: support must be positive");
    const ExactRational q = ExactRational::nearest_simple(v);
    if (!q.fits_u64_parts()) {
      // Treat as generic: compare against others below would need bignum factoring.
      throw DomainError("lattice_span: value " + q.to_string() + " too large to factor");
    }
    std::map<u64, long long> e;
    factor(q.numerator_u64(), e, +1);
    factor(q.denominator_u64(), e, -1);
    std::erase_if(e, [](const auto& kv) { return kv.second == 0; });
    if (!e.empty()) exps.push_back(std::move(e));
  }
  if (exps.empty()) return res;  // support {1}: every kappa works, no maximal one

  // Primitive direction w from the first vector; every vector must be k_i * w.
  const auto& first = exps.front();
  long long g0 = 0;
  for (auto [p, e] : first) g0 = std::gcd(g0, e);
  std::map<u64, long long> w;
  for (auto [p, e] : first) w[p] = e / g0;
  std::vector<long long> ks;
  for (const auto& e : exps) {
    if (e.size() != w.size()) {
      res.proved_non_lattice = true;
      return res;
    }
    std::optional<long long> k;
    for (auto [p, we] : w) {
      auto it = e.find(p);
      if (it == e.end() || it->second % we != 0) {
        res.proved_non_lattice = true;
        return res;
      }
      const long long ki = it->second / we;
      if (k && *k != ki) {
        res.proved_non_lattice = true;
        return res;
      }
      k = ki;
    }
    ks.push_back(*k);
  }
  long long g = 0;
  for (long long k : ks) g = std::gcd(g, k);
  double log_base = 0.0;
  std::string base;
  for (auto [p, we] : w) {
    log_base += static_cast<double>(we) * std::log(static_cast<double>(p));
    if (!base.empty()) base += "*";
    base += std::to_string(p) + "^" + std::to_string(we);
  }
  res.span = static_cast<double>(g) * std::abs(log_base);
  std::vector<long long> exponents;
  for (auto [v, wt] : spec.atoms()) {
    const double l = std::log(v);
    exponents.push_back(std::llround(l / log_base));
  }
  res.base_and_exponents = std::make_pair(base, exponents);
  return res;
}

}  // namespace sds
