#include "sds/hyperbolic.hpp"

#include <cmath>

#include "sds/errors.hpp"

namespace sds {

double poincare(HalfPlanePoint z, HalfPlanePoint w) {
  if (!(z.im > 0.0) || !(w.im > 0.0))
    throw DomainError("poincare: imaginary parts must be positive");
  const double dx = z.re - w.re;
  const double s = std::hypot(dx, z.im - w.im);
  if (s == 0.0) return 0.0;
  const double t = std::hypot(dx, z.im + w.im);
  // (t + s)/(t - s) = 1 + 2s/(t - s) and t - s = 4 im z im w / (t + s).
  return std::log1p(s * (t + s) / (2.0 * z.im * w.im));
}

double extended_distance(const ExtendedPoint& p, const ExtendedPoint& q) {
  return poincare({0.0, p.height}, {std::abs(p.base - q.base), q.height});
}

}  // namespace sds
