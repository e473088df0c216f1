#include "sds/maps.hpp"

#include <cmath>

#include "sds/errors.hpp"

namespace sds {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_base(double x) {
  if (!(x >= 0.0)) throw DomainError("reflected map applied to negative or NaN argument");
}

}  // namespace

MapDescriptor MapDescriptor::affine(double a, double b) {
  if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw ConfigError("affine map: need finite a > 0 and finite b");
  return MapDescriptor(map::Affine{a, b});
}

MapDescriptor MapDescriptor::refl_affine(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw ConfigError("reflected affine map: need finite a > 0 and b > 0");
  return MapDescriptor(map::ReflAffine{a, b});
}

MapDescriptor MapDescriptor::refl_translate(double b) {
  if (!std::isfinite(b)) throw ConfigError("reflected translation: non-finite b");
  return MapDescriptor(map::ReflTranslate{b});
}

MapDescriptor MapDescriptor::composite(std::vector<MapDescriptor> factors) {
  if (factors.empty()) throw ConfigError("composite map: no factors");
  return MapDescriptor(Composite{std::move(factors)});
}

double MapDescriptor::apply(double x) const {
  return std::visit(overloaded{
                        [x](const map::Affine& m) { return m.a * x + m.b; },
                        [x](const map::ReflAffine& m) {
                          check_base(x);
                          return std::abs(m.a * x - m.b);
                        },
                        [x](const map::ReflTranslate& m) {
                          check_base(x);
                          return std::abs(x - m.b);
                        },
                        [x](const Composite& c) {
                          double y = x;
                          for (const auto& f : c.factors) y = f.apply(y);
                          return y;
                        },
                    },
                    v_);
}

double MapDescriptor::lipschitz() const {
  return std::visit(overloaded{
                        [](const map::Affine& m) { return m.a; },
                        [](const map::ReflAffine& m) { return m.a; },
                        [](const map::ReflTranslate&) { return 1.0; },
                        [](const Composite& c) {
                          double l = 1.0;
                          for (const auto& f : c.factors) l *= f.lipschitz();
                          return l;
                        },
                    },
                    v_);
}

bool MapDescriptor::lipschitz_is_bound() const noexcept {
  return std::holds_alternative<Composite>(v_);
}

double MapDescriptor::displacement(double o) const { return std::abs(apply(o) - o); }

ExtendedPoint MapDescriptor::lift_apply(const ExtendedPoint& p) const {
  if (!(p.height > 0.0)) throw DomainError("lift_apply: height must be positive");
  return {apply(p.base), lipschitz() * p.height};
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::affine: return "affine";
    case Family::reflected_affine: return "reflected_affine";
    case Family::reflected_rw: return "reflected_rw";
  }
  return "affine";
}

Family family_from_string(const std::string& s) {
  if (s == "affine") return Family::affine;
  if (s == "reflected_affine") return Family::reflected_affine;
  if (s == "reflected_rw") return Family::reflected_rw;
  throw ConfigError("unknown family '" + s + "'");
}

SystemSpec::SystemSpec(Family family, std::optional<DistributionSpec> a_law,
                       DistributionSpec b_law, double reference_point)
    : family_(family), a_law_(std::move(a_law)), b_law_(std::move(b_law)), reference_(reference_point) {
  validate();
}

SystemSpec::SystemSpec(Family family, std::vector<JointPair> joint_pairs, double reference_point)
    : family_(family), joint_(std::move(joint_pairs)), reference_(reference_point) {
  if (joint_.empty()) throw ConfigError("joint_pairs: empty");
  double total = 0.0;
  for (const auto& p : joint_) {
    if (!(p.weight >= 0.0) || !std::isfinite(p.weight))
      throw ConfigError("joint_pairs: negative or non-finite weight");
    total += p.weight;
    joint_cum_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("joint_pairs: weights sum to " + std::to_string(total));
  for (double& c : joint_cum_) c /= total;
  joint_cum_.back() = 1.0;
  validate();
}

void SystemSpec::validate() const {
  if (!(reference_ >= 0.0) || !std::isfinite(reference_))
    throw ConfigError("reference_point must be finite and >= 0");
  if (!joint_.empty()) {
    for (const auto& p : joint_) {
      if (!std::isfinite(p.a) || !std::isfinite(p.b)) throw ConfigError("joint_pairs: non-finite entry");
      if (family_ == Family::reflected_rw && p.a != 1.0)
        throw ConfigError("joint_pairs: reflected_rw requires a = 1");
      if (!(p.a > 0.0)) throw ConfigError("joint_pairs: a must be > 0");
      if (family_ == Family::reflected_affine && !(p.b > 0.0))
        throw ConfigError("joint_pairs: reflected_affine requires b > 0");
    }
    return;
  }
  if (family_ == Family::reflected_rw) {
    if (a_law_) throw ConfigError("a_law must be absent for reflected_rw");
    return;
  }
  if (!a_law_) throw ConfigError("a_law is required for family " + std::string(to_string(family_)));
  if (a_law_->cdf(0.0) > 0.0) throw ConfigError("a_law puts mass at or below 0");
  if (family_ == Family::reflected_affine && b_law_->cdf(0.0) > 0.0)
    throw ConfigError("b_law for reflected_affine must be supported on (0, infinity)");
}

SystemSpec::Params SystemSpec::draw(Substream& stream) const {
  if (!joint_.empty()) {
    const double u = stream.uniform();
    std::size_t i = 0;
    while (i + 1 < joint_cum_.size() && u > joint_cum_[i]) ++i;
    return {joint_[i].a, joint_[i].b};
  }
  const double a = a_law_ ? a_law_->sample(stream) : 1.0;
  const double b = b_law_->sample(stream);
  return {a, b};
}

MapDescriptor SystemSpec::make_map(const Params& p) const {
  switch (family_) {
    case Family::affine: return MapDescriptor::affine(p.a, p.b);
    case Family::reflected_affine: return MapDescriptor::refl_affine(p.a, p.b);
    case Family::reflected_rw: return MapDescriptor::refl_translate(p.b);
  }
  return MapDescriptor::refl_translate(p.b);
}

long double SystemSpec::apply(const Params& p, long double x) const noexcept {
  switch (family_) {
    case Family::affine: return static_cast<long double>(p.a) * x + p.b;
    case Family::reflected_affine: return std::fabs(static_cast<long double>(p.a) * x - p.b);
    case Family::reflected_rw: return std::fabs(x - p.b);
  }
  return x;
}

double SystemSpec::lipschitz(const Params& p) const noexcept {
  return family_ == Family::reflected_rw ? 1.0 : p.a;
}

}  // namespace sds
