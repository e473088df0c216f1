#pragma once

namespace sds {

/// A point of the extended space X x (0, infinity): base in the half-line and
/// a positive height carrying the accumulated Lipschitz product.
struct ExtendedPoint {
  double base;
  double height;
};

/// Point of the upper half-plane.
struct HalfPlanePoint {
  double re;
  double im;
};

/// Poincare half-plane distance
///   log( (|z - conj w| + |z - w|) / (|z - conj w| - |z - w|) ),
/// evaluated as log1p( s (t + s) / (2 im z im w) ) with s = |z - w|,
/// t = |z - conj w|, which uses t^2 - s^2 = 4 im z im w exactly.
/// Throws DomainError if an imaginary part is not positive.
double poincare(HalfPlanePoint z, HalfPlanePoint w);

/// Distance on the extended space:
/// poincare((0, p.height), (|p.base - q.base|, q.height)).
double extended_distance(const ExtendedPoint& p, const ExtendedPoint& q);

}  // namespace sds
