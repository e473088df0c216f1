#include "sds/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>

namespace sds {

std::string_view to_string(Convergence c) {
  switch (c) {
    case Convergence::converged: return "converged";
    case Convergence::diverged: return "diverged";
    case Convergence::undecided: return "undecided";
  }
  return "undecided";
}

namespace {

constexpr int kPanelsPerDecade = 16;

double gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 8, 1e-11);
}

double integrate_positive_segment(const std::function<double(double)>& f, double a, double b) {
  // a > 0: split geometrically so power-law integrands are resolved uniformly.
  const double decades = std::log10(b / a);
  const int n = std::max(1, static_cast<int>(std::ceil(decades * kPanelsPerDecade)));
  const double ratio = std::pow(b / a, 1.0 / n);
  double sum = 0.0;
  double x0 = a;
  for (int i = 0; i < n; ++i) {
    const double x1 = (i + 1 == n) ? b : x0 * ratio;
    sum += gauss_kronrod(f, x0, x1);
    x0 = x1;
  }
  return sum;
}

double integrate_segment(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  if (a > 0.0) return integrate_positive_segment(f, a, b);
  if (b <= 0.0) {
    auto mirrored = [&f](double x) { return f(-x); };
    return integrate_segment(mirrored, -b, -a);
  }
  if (a < 0.0) return integrate_segment(f, a, 0.0) + integrate_segment(f, 0.0, b);
  // a == 0: tanh-sinh near the origin, geometric panels beyond.
  const double head = std::min(b, 1e-3);
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  double sum = ts.integrate([&f](double x) { return f(x); }, 0.0, head);
  if (b > head) sum += integrate_positive_segment(f, head, b);
  return sum;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 std::span<const double> breakpoints) {
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += integrate_segment(f, cuts[i], cuts[i + 1]);
  return sum;
}

TailIntegral integrate_to_infinity(const std::function<double(double)>& f, double lo,
                                   const TailRules& rules, std::span<const double> breakpoints) {
  TailIntegral out;
  double prev_cut = lo;
  double partial = 0.0;
  for (double c : rules.cutoffs) {
    if (c <= lo) continue;
    partial += integrate(f, prev_cut, c, breakpoints);
    out.cutoffs.push_back(c);
    out.partials.push_back(partial);
    prev_cut = c;
  }
  const std::size_t k = out.partials.size();
  if (k < 3) {
    out.value = k ? out.partials.back() : 0.0;
    return out;
  }
  const double last = out.partials[k - 1] - out.partials[k - 2];
  const double before = out.partials[k - 2] - out.partials[k - 3];
  const double total = out.partials[k - 1];
  if (last <= 0.0) {
    out.status = Convergence::converged;
    out.value = total;
    out.increment_ratio = 0.0;
    return out;
  }
  if (before <= 0.0) {
    // Mass reappearing after a zero increment: the ladder cannot judge it.
    out.value = total;
    return out;
  }
  const double rho = last / before;
  out.increment_ratio = rho;
  if (rho >= rules.divergent_ratio) {
    out.status = Convergence::diverged;
    out.value = std::numeric_limits<double>::infinity();
  } else if (last <= rules.stable_rel * std::abs(total)) {
    out.status = Convergence::converged;
    out.value = total;
  } else if (rho <= rules.geometric_ratio) {
    out.status = Convergence::converged;
    out.value = total + last * rho / (1.0 - rho);
  } else {
    out.value = total;
  }
  return out;
}

}  // namespace sds
