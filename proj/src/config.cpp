#include "sds/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <tomlplusplus/toml.hpp>

#include "sds/errors.hpp"
#include "sds/rational.hpp"

namespace sds {
namespace {

// Reads typed values from one TOML table and rejects keys it was not asked about.
class Section {
 public:
  Section(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  std::string key(std::string_view k) const { return path_.empty() ? std::string(k) : path_ + "." + std::string(k); }
  bool has(std::string_view k) {
    known_.insert(std::string(k));
    return t_.contains(k);
  }

  std::optional<double> number(std::string_view k) {
    if (!has(k)) return std::nullopt;
    const toml::node& n = *t_.get(k);
    if (auto v = n.value_exact<double>()) return *v;
    if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
    throw ConfigError(key(k) + ": expected a number");
  }
  double number(std::string_view k, double fallback) { return number(k).value_or(fallback); }
  double required_number(std::string_view k) {
    auto v = number(k);
    if (!v) throw ConfigError(key(k) + ": required");
    return *v;
  }

  std::optional<std::uint64_t> count(std::string_view k) {
    if (!has(k)) return std::nullopt;
    const toml::node& n = *t_.get(k);
    double v;
    if (auto i = n.value_exact<std::int64_t>()) {
      if (*i < 0) throw ConfigError(key(k) + ": must be >= 0, got " + std::to_string(*i));
      return static_cast<std::uint64_t>(*i);
    } else if (auto d = n.value_exact<double>()) {
      v = *d;
    } else {
      throw ConfigError(key(k) + ": expected a non-negative integer");
    }
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19)
      throw ConfigError(key(k) + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t count(std::string_view k, std::uint64_t fallback) { return count(k).value_or(fallback); }

  std::optional<std::string> text(std::string_view k) {
    if (!has(k)) return std::nullopt;
    if (auto v = t_.get(k)->value_exact<std::string>()) return *v;
    throw ConfigError(key(k) + ": expected a string");
  }
  std::string text(std::string_view k, const std::string& fallback) { return text(k).value_or(fallback); }

  std::optional<bool> flag(std::string_view k) {
    if (!has(k)) return std::nullopt;
    if (auto v = t_.get(k)->value_exact<bool>()) return *v;
    throw ConfigError(key(k) + ": expected true or false");
  }

  const toml::array* array(std::string_view k) {
    if (!has(k)) return nullptr;
    const toml::array* a = t_.get(k)->as_array();
    if (!a) throw ConfigError(key(k) + ": expected an array");
    return a;
  }

  std::optional<std::vector<double>> numbers(std::string_view k) {
    const toml::array* a = array(k);
    if (!a) return std::nullopt;
    std::vector<double> out;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const toml::node& n = *a->get(i);
      if (auto v = n.value_exact<double>())
        out.push_back(*v);
      else if (auto w = n.value_exact<std::int64_t>())
        out.push_back(static_cast<double>(*w));
      else
        throw ConfigError(key(k) + "[" + std::to_string(i) + "]: expected a number");
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(std::string_view k) {
    const toml::array* a = array(k);
    if (!a) return std::nullopt;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < a->size(); ++i) {
      if (auto v = a->get(i)->value_exact<std::string>())
        out.push_back(*v);
      else
        throw ConfigError(key(k) + "[" + std::to_string(i) + "]: expected a string");
    }
    return out;
  }

  const toml::table* table(std::string_view k) {
    if (!has(k)) return nullptr;
    const toml::table* t = t_.get(k)->as_table();
    if (!t) throw ConfigError(key(k) + ": expected a table");
    return t;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : t_) {
      if (!known_.count(std::string(k.str())))
        throw ConfigError(key(k.str()) + ": unknown key");
    }
  }

 private:
  const toml::table& t_;
  std::string path_;
  std::set<std::string> known_;
};

template <class F>
auto with_key(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(key, 0) == 0) throw;
    throw ConfigError(key + ": " + what);
  }
}

DistributionSpec parse_law(const toml::table& t, const std::string& path) {
  Section s(t, path);
  const auto type = s.text("type");
  if (!type) throw ConfigError(s.key("type") + ": required");
  auto build = [&]() -> DistributionSpec {
    if (*type == "two_point") {
      const toml::array* a = s.array("values");
      if (!a) throw ConfigError(s.key("values") + ": required");
      std::vector<std::pair<double, double>> atoms;
      for (std::size_t i = 0; i < a->size(); ++i) {
        const toml::array* pair = a->get(i)->as_array();
        const std::string k = s.key("values") + "[" + std::to_string(i) + "]";
        if (!pair || pair->size() != 2) throw ConfigError(k + ": expected [value, weight]");
        double vw[2];
        for (int j = 0; j < 2; ++j) {
          const toml::node& n = *pair->get(j);
          if (auto d = n.value_exact<double>())
            vw[j] = *d;
          else if (auto w = n.value_exact<std::int64_t>())
            vw[j] = static_cast<double>(*w);
          else
            throw ConfigError(k + ": expected numbers");
        }
        atoms.emplace_back(vw[0], vw[1]);
      }
      return DistributionSpec::two_point(std::move(atoms));
    }
    if (*type == "uniform") return DistributionSpec::uniform(s.required_number("lo"), s.required_number("hi"));
    if (*type == "exponential") return DistributionSpec::exponential(s.number("rate", 1.0));
    if (*type == "lognormal") return DistributionSpec::lognormal(s.required_number("mu"), s.required_number("sigma"));
    if (*type == "pareto_type") return DistributionSpec::pareto_type(s.required_number("a"));
    if (*type == "constant") return DistributionSpec::constant(s.required_number("c"));
    if (*type == "tabulated") {
      auto grid = s.numbers("grid");
      auto dens = s.numbers("density");
      if (!grid || !dens) throw ConfigError(s.key("grid") + " and " + s.key("density") + ": required");
      return DistributionSpec::tabulated(std::move(*grid), std::move(*dens));
    }
    if (*type == "log_power_tail")
      return DistributionSpec::log_power_tail(s.number("b", 1.0), s.count("points", 40000));
    throw ConfigError(s.key("type") + ": unknown law '" + *type + "'");
  };
  DistributionSpec law = with_key(path, build);
  s.reject_unknown();
  return law;
}

std::shared_ptr<const SystemSpec> parse_system(const toml::table& t) {
  Section s(t, "system");
  const auto family_name = s.text("family");
  if (!family_name) throw ConfigError("system.family: required");
  const Family family = with_key("system.family", [&] { return family_from_string(*family_name); });
  const double ref = s.number("reference_point", 0.0);
  std::shared_ptr<const SystemSpec> out;
  if (const toml::array* joint = s.array("joint")) {
    std::vector<JointPair> pairs;
    for (std::size_t i = 0; i < joint->size(); ++i) {
      const toml::table* jt = joint->get(i)->as_table();
      const std::string k = "system.joint[" + std::to_string(i) + "]";
      if (!jt) throw ConfigError(k + ": expected a table");
      Section js(*jt, k);
      pairs.push_back({js.number("a", 1.0), js.required_number("b"), js.required_number("weight")});
      js.reject_unknown();
    }
    if (s.has("a_law") || s.has("b_law"))
      throw ConfigError("system: give either joint or a_law/b_law, not both");
    out = with_key("system", [&] { return std::make_shared<const SystemSpec>(family, std::move(pairs), ref); });
  } else {
    std::optional<DistributionSpec> a;
    if (const toml::table* at = s.table("a_law")) a = parse_law(*at, "system.a_law");
    const toml::table* bt = s.table("b_law");
    if (!bt) throw ConfigError("system.b_law: required");
    DistributionSpec b = parse_law(*bt, "system.b_law");
    out = with_key("system", [&] { return std::make_shared<const SystemSpec>(family, a, b, ref); });
  }
  s.reject_unknown();
  return out;
}

SimulationPlan parse_plan(const toml::table& t, std::shared_ptr<const SystemSpec> system) {
  Section s(t, "plan");
  SimulationPlan p;
  p.system = std::move(system);
  p.horizon = s.count("horizon", 1000);
  p.replicas = s.count("replicas", 1);
  p.seed = s.count("seed", 0);
  p.starting_points = s.numbers("starting_points").value_or(std::vector<double>{0.0});
  p.track_extended = s.flag("track_extended").value_or(false);
  p.extended_height = s.number("extended_height", 1.0);
  const std::string record = s.text("record", "full");
  if (record == "full")
    p.record = RecordPolicy::full();
  else if (record == "summary")
    p.record = RecordPolicy::summary();
  else if (record == "strided")
    p.record = RecordPolicy::strided(s.count("stride", 1));
  else
    throw ConfigError("plan.record: expected full, strided or summary");
  if (record != "strided" && s.has("stride")) throw ConfigError("plan.stride: only valid with record = \"strided\"");
  s.reject_unknown();
  with_key("plan", [&] {
    p.validate();
    return 0;
  });
  return p;
}

Interval parse_interval(Section& s, std::string_view k, Interval fallback) {
  auto v = s.numbers(k);
  if (!v) return fallback;
  if (v->size() != 2 || !((*v)[0] < (*v)[1])) throw ConfigError(s.key(k) + ": expected [lo, hi] with lo < hi");
  return {(*v)[0], (*v)[1]};
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::classify: return "classify";
    case ExperimentKind::invariant: return "invariant";
    case ExperimentKind::ratio: return "ratio";
    case ExperimentKind::kac: return "kac";
    case ExperimentKind::criteria: return "criteria";
    case ExperimentKind::wiener_hopf: return "wiener_hopf";
    case ExperimentKind::dyadic: return "dyadic";
    case ExperimentKind::probe: return "probe";
  }
  return "simulate";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::simulate, ExperimentKind::classify, ExperimentKind::invariant,
                 ExperimentKind::ratio, ExperimentKind::kac, ExperimentKind::criteria,
                 ExperimentKind::wiener_hopf, ExperimentKind::dyadic, ExperimentKind::probe})
    if (to_string(k) == s) return k;
  throw ConfigError("kind: unknown experiment kind '" + s + "'");
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config syntax error: " << e.description() << " at " << e.source().begin;
    throw ConfigError(os.str());
  }
  ExperimentConfig c;
  c.source = source;
  {
    std::ostringstream os;
    os << toml::json_formatter{root};
    c.echo_json = os.str();
  }

  Section top(root, "");
  const auto kind = top.text("kind");
  if (!kind) throw ConfigError("kind: required");
  c.kind = experiment_kind_from_string(*kind);
  c.output_dir = top.text("output_dir", "");

  const bool needs_plan = c.kind == ExperimentKind::simulate || c.kind == ExperimentKind::classify ||
                          c.kind == ExperimentKind::invariant || c.kind == ExperimentKind::ratio ||
                          c.kind == ExperimentKind::kac;
  if (const toml::table* st = top.table("system")) c.system = parse_system(*st);
  if (needs_plan) {
    if (!c.system) throw ConfigError("system: required for kind " + *kind);
    const toml::table* pt = top.table("plan");
    if (!pt) throw ConfigError("plan: required for kind " + *kind);
    c.plan = parse_plan(*pt, c.system);
  } else if (top.has("plan")) {
    throw ConfigError("plan: not used by kind " + *kind);
  }

  auto section = [&](std::string_view name, ExperimentKind owner) -> const toml::table* {
    const toml::table* t = top.table(name);
    if (t && c.kind != owner) throw ConfigError(std::string(name) + ": not used by kind " + *kind);
    return t;
  };

  if (const toml::table* t = section("simulate", ExperimentKind::simulate)) {
    Section s(*t, "simulate");
    c.simulate.format = s.text("format", "csv");
    if (c.simulate.format != "csv" && c.simulate.format != "binary")
      throw ConfigError("simulate.format: expected csv or binary");
    s.reject_unknown();
  }
  if (const toml::table* t = section("classify", ExperimentKind::classify)) {
    Section s(*t, "classify");
    c.classify.index = s.count("index", 0);
    auto& th = c.classify.thresholds;
    th.window_quantile = s.number("window_quantile", th.window_quantile);
    th.escape_factor = s.number("escape_factor", th.escape_factor);
    th.agreement = s.number("agreement", th.agreement);
    th.min_replicas = s.count("min_replicas", th.min_replicas);
    if (!(th.window_quantile > 0.0 && th.window_quantile < 1.0))
      throw ConfigError("classify.window_quantile: must be in (0, 1)");
    if (!(th.escape_factor > 0.0)) throw ConfigError("classify.escape_factor: must be > 0");
    if (!(th.agreement > 0.0 && th.agreement <= 1.0)) throw ConfigError("classify.agreement: must be in (0, 1]");
    s.reject_unknown();
  }
  if (const toml::table* t = section("invariant", ExperimentKind::invariant)) {
    Section s(*t, "invariant");
    c.invariant.source = s.text("source", "terminal");
    if (c.invariant.source != "terminal" && c.invariant.source != "occupation")
      throw ConfigError("invariant.source: expected terminal or occupation");
    c.invariant.index = s.count("index", 0);
    c.invariant.burn_in = s.count("burn_in", 0);
    c.invariant.bins = s.count("bins", 200);
    if (c.invariant.bins == 0) throw ConfigError("invariant.bins: must be >= 1");
    const Interval range = parse_interval(s, "range", {0.0, 10.0});
    c.invariant.lo = range.lo;
    c.invariant.hi = range.hi;
    s.reject_unknown();
  }
  if (const toml::table* t = section("ratio", ExperimentKind::ratio)) {
    Section s(*t, "ratio");
    c.ratio.index = s.count("index", 0);
    c.ratio.phi = parse_interval(s, "phi", c.ratio.phi);
    c.ratio.psi = parse_interval(s, "psi", c.ratio.psi);
    c.ratio.series_stride = s.count("series_stride", 1000);
    if (c.ratio.series_stride == 0) throw ConfigError("ratio.series_stride: must be >= 1");
    s.reject_unknown();
  }
  if (const toml::table* t = section("kac", ExperimentKind::kac)) {
    Section s(*t, "kac");
    c.kac.t = s.number("t", 0.5);
    if (!(c.kac.t > 0.0)) throw ConfigError("kac.t: must be > 0");
    s.reject_unknown();
  }
  if (const toml::table* t = section("criteria", ExperimentKind::criteria)) {
    Section s(*t, "criteria");
    if (const toml::table* lt = s.table("law")) c.criteria.law = parse_law(*lt, "criteria.law");
    s.reject_unknown();
  }
  if (c.kind == ExperimentKind::criteria && !c.criteria.law) {
    if (c.system && c.system->b_law())
      c.criteria.law = *c.system->b_law();
    else
      throw ConfigError("criteria.law: required (or system.b_law)");
  }
  if (const toml::table* t = section("wiener_hopf", ExperimentKind::wiener_hopf)) {
    Section s(*t, "wiener_hopf");
    if (const toml::table* lt = s.table("mu0")) c.wiener_hopf.mu0 = parse_law(*lt, "wiener_hopf.mu0");
    c.wiener_hopf.paths = s.count("paths", c.wiener_hopf.paths);
    c.wiener_hopf.max_steps = s.count("max_steps", c.wiener_hopf.max_steps);
    c.wiener_hopf.seed = s.count("seed", 0);
    c.wiener_hopf.grid_points = s.count("grid_points", c.wiener_hopf.grid_points);
    if (c.wiener_hopf.paths == 0) throw ConfigError("wiener_hopf.paths: must be >= 1");
    if (c.wiener_hopf.max_steps == 0) throw ConfigError("wiener_hopf.max_steps: must be >= 1");
    s.reject_unknown();
  }
  if (c.kind == ExperimentKind::wiener_hopf && !c.wiener_hopf.mu0)
    throw ConfigError("wiener_hopf.mu0: required");
  if (const toml::table* t = section("dyadic", ExperimentKind::dyadic)) {
    Section s(*t, "dyadic");
    c.dyadic.x = s.text("x", c.dyadic.x);
    c.dyadic.y = s.text("y", c.dyadic.y);
    c.dyadic.epochs = s.count("epochs", c.dyadic.epochs);
    c.dyadic.max_steps = s.count("max_steps", c.dyadic.max_steps);
    c.dyadic.p = s.number("p", c.dyadic.p);
    c.dyadic.seed = s.count("seed", 0);
    c.dyadic.replica = s.count("replica", 0);
    if (!(c.dyadic.p > 0.0 && c.dyadic.p < 1.0)) throw ConfigError("dyadic.p: must be in (0, 1)");
    for (const auto* k : {&c.dyadic.x, &c.dyadic.y})
      with_key(k == &c.dyadic.x ? "dyadic.x" : "dyadic.y", [&] { return ExactRational::parse(*k); });
    s.reject_unknown();
  }
  if (const toml::table* t = section("probe", ExperimentKind::probe)) {
    Section s(*t, "probe");
    c.probe.base = static_cast<int>(s.count("base", 2));
    if (c.probe.base != 2 && c.probe.base != 3) throw ConfigError("probe.base: must be 2 or 3");
    c.probe.seeds = s.strings("seeds").value_or(c.probe.seeds);
    for (const auto& v : c.probe.seeds) with_key("probe.seeds", [&] { return ExactRational::parse(v); });
    c.probe.depth = static_cast<int>(s.count("depth", 12));
    c.probe.cap = s.count("cap", c.probe.cap);
    s.reject_unknown();
  }
  top.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path);
}

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
  if (config.plan) config.plan->seed = seed;
  config.wiener_hopf.seed = seed;
  config.dyadic.seed = seed;
}

}  // namespace sds
