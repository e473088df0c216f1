#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sds/distributions.hpp"
#include "sds/hyperbolic.hpp"

namespace sds {

namespace map {

/// x -> a x + b
struct Affine {
  double a;
  double b;
};
/// x -> |a x - b|
struct ReflAffine {
  double a;
  double b;
};
/// x -> |x - b|
struct ReflTranslate {
  double b;
};

}  // namespace map

/// A Lipschitz map of the half-line with exact parameters.  Composite maps
/// apply their factors left to right (front() first).
class MapDescriptor {
 public:
  struct Composite {
    std::vector<MapDescriptor> factors;
  };
  using Variant = std::variant<map::Affine, map::ReflAffine, map::ReflTranslate, Composite>;

  static MapDescriptor affine(double a, double b);
  static MapDescriptor refl_affine(double a, double b);
  static MapDescriptor refl_translate(double b);
  static MapDescriptor composite(std::vector<MapDescriptor> factors);

  const Variant& variant() const noexcept { return v_; }

  /// Throws DomainError for x < 0 into a reflected variant.
  double apply(double x) const;
  /// Exact constant for the elementary variants; the product bound for composites.
  double lipschitz() const;
  bool lipschitz_is_bound() const noexcept;
  /// |apply(o) - o|
  double displacement(double o = 0.0) const;
  /// (x, h) -> (apply(x), lipschitz() * h)
  ExtendedPoint lift_apply(const ExtendedPoint& p) const;

 private:
  explicit MapDescriptor(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

enum class Family { affine, reflected_affine, reflected_rw };

std::string_view to_string(Family f);
Family family_from_string(const std::string& s);

/// A weighted (a, b) pair for jointly discrete parameter laws.
struct JointPair {
  double a;
  double b;
  double weight;
};

/// The law of the random map F_n: a family plus parameter laws.
class SystemSpec {
 public:
  /// Independent laws for A and B (a_law ignored and must be absent for reflected_rw).
  SystemSpec(Family family, std::optional<DistributionSpec> a_law, DistributionSpec b_law,
             double reference_point = 0.0);
  /// Jointly discrete (a, b) law.
  SystemSpec(Family family, std::vector<JointPair> joint_pairs, double reference_point = 0.0);

  Family family() const noexcept { return family_; }
  const std::optional<DistributionSpec>& a_law() const noexcept { return a_law_; }
  const std::optional<DistributionSpec>& b_law() const noexcept { return b_law_; }
  const std::vector<JointPair>& joint_pairs() const noexcept { return joint_; }
  double reference_point() const noexcept { return reference_; }

  struct Params {
    double a;
    double b;
  };
  /// Draws (a_n, b_n) from one step's substream (A first, then B).
  Params draw(Substream& stream) const;
  MapDescriptor make_map(const Params& p) const;
  /// Fast path equivalent to make_map(p).apply(x) in extended precision.
  long double apply(const Params& p, long double x) const noexcept;
  /// Lipschitz constant of the map with these parameters.
  double lipschitz(const Params& p) const noexcept;

 private:
  void validate() const;

  Family family_;
  std::optional<DistributionSpec> a_law_;
  std::optional<DistributionSpec> b_law_;
  std::vector<JointPair> joint_;
  std::vector<double> joint_cum_;
  double reference_;
};

}  // namespace sds
