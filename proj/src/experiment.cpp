#include "sds/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sds/diagnostics.hpp"
#include "sds/dyadic.hpp"
#include "sds/errors.hpp"
#include "sds/io.hpp"
#include "sds/measures.hpp"
#include "sds/quadrature.hpp"
#include "sds/rng.hpp"

namespace sds {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

class Output {
 public:
  explicit Output(std::string dir) : dir_(std::move(dir)) {}

  void text(const std::string& name, const std::string& content) {
    write_text_file((fs::path(dir_) / name).string(), content);
    files_.push_back(name);
  }
  std::ofstream stream(const std::string& name) {
    std::ofstream out(fs::path(dir_) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + (fs::path(dir_) / name).string() + "' for writing");
    files_.push_back(name);
    return out;
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

const SimulationPlan& plan_of(const ExperimentConfig& c) {
  if (!c.plan) throw ConfigError("plan: required for kind " + std::string(to_string(c.kind)));
  return *c.plan;
}

void check_index(const SimulationPlan& plan, std::size_t index, const std::string& key) {
  if (index >= plan.starting_points.size())
    throw ConfigError(key + ": " + std::to_string(index) + " is out of range for " +
                      std::to_string(plan.starting_points.size()) + " starting points");
}

/// Runs replicas in fixed-size batches so results can be consumed in replica
/// order while memory stays bounded.
template <class Produce, class Consume>
void in_batches(std::uint64_t replicas, unsigned workers, Produce&& produce, Consume&& consume) {
  using R = std::invoke_result_t<Produce&, std::uint64_t>;
  const std::uint64_t batch = std::max<std::uint64_t>(64, 4ull * std::max(1u, workers));
  for (std::uint64_t first = 0; first < replicas; first += batch) {
    const std::uint64_t n = std::min(batch, replicas - first);
    std::vector<R> results(n);
    parallel_for(n, workers, [&](std::uint64_t k) { results[k] = produce(first + k); });
    for (auto& r : results) consume(r);
  }
}

json run_simulate(const ExperimentConfig& c, unsigned workers, Output& out) {
  const SimulationPlan& plan = plan_of(c);
  const std::size_t m = plan.starting_points.size();
  std::vector<double> final_sum(m, 0.0);
  double final_s_sum = 0.0;
  std::uint64_t rows = 0;

  std::ofstream file = out.stream(c.simulate.format == "binary" ? "trajectories.bin" : "trajectories.csv");
  std::optional<CsvTrajectoryWriter> csv;
  std::optional<BinaryTrajectoryWriter> bin;
  if (c.simulate.format == "binary")
    bin.emplace(file, plan.starting_points);
  else
    csv.emplace(file);

  in_batches(
      plan.replicas, workers, [&](std::uint64_t r) { return simulate_replica(plan, r); },
      [&](const TrajectoryBundle& b) {
        if (bin)
          bin->write(b);
        else
          csv->write(b);
        rows += b.size();
        for (std::size_t i = 0; i < m; ++i) final_sum[i] += b.paths[i].back();
        final_s_sum += b.log_product.back();
      });
  file.close();
  if (!file) throw std::runtime_error("write failed for trajectories");

  json means = json::array();
  for (double v : final_sum) means.push_back(number(v / static_cast<double>(plan.replicas)));
  return {{"replicas", plan.replicas},
          {"horizon", plan.horizon},
          {"recorded_rows", rows},
          {"format", c.simulate.format},
          {"mean_final_value", means},
          {"mean_final_log_product", number(final_s_sum / static_cast<double>(plan.replicas))}};
}

json run_classify(const ExperimentConfig& c, unsigned workers, Output& out) {
  const SimulationPlan& plan = plan_of(c);
  check_index(plan, c.classify.index, "classify.index");
  const auto th = c.classify.thresholds;
  if (plan.horizon < 4) throw ConfigError("plan.horizon: classify needs at least 4 steps");
  std::vector<ReplicaClassification> reps(plan.replicas);
  parallel_for(plan.replicas, workers, [&](std::uint64_t r) {
    ClassifyTracker t(plan.horizon, th);
    run_replica(plan, r, [&](const StepView& v) {
      t.observe(v.step, static_cast<double>(v.state[c.classify.index]));
    });
    reps[r] = t.finish(r);
  });
  std::ostringstream csv;
  csv << "replica,r0,final_min,returned,escaped\n";
  for (const auto& r : reps)
    csv << r.replica << ',' << format_double(r.r0) << ',' << format_double(r.final_min) << ','
        << int(r.returned) << ',' << int(r.escaped) << '\n';
  out.text("classify.csv", csv.str());
  const ClassificationReport rep = classify(reps, th);
  return {{"verdict", std::string(to_string(rep.verdict))},
          {"horizon", rep.horizon},
          {"replicas", rep.replicas},
          {"returned_fraction", rep.returned_fraction},
          {"escaped_fraction", rep.escaped_fraction},
          {"regime", std::string(to_string(system_regime(*plan.system)))},
          {"thresholds",
           {{"window_quantile", th.window_quantile},
            {"escape_factor", th.escape_factor},
            {"agreement", th.agreement},
            {"min_replicas", th.min_replicas}}}};
}

std::optional<CdfReference> stationary_reference(const SystemSpec& s, std::string& why) {
  if (s.family() != Family::reflected_rw || !s.b_law()) {
    why = "closed form available only for the reflected random walk";
    return std::nullopt;
  }
  try {
    return reflected_rw_stationary_cdf(*s.b_law());
  } catch (const DomainError& e) {
    why = e.what();
    return std::nullopt;
  }
}

json run_invariant(const ExperimentConfig& c, unsigned workers, Output& out) {
  const SimulationPlan& plan = plan_of(c);
  const auto& cfg = c.invariant;
  check_index(plan, cfg.index, "invariant.index");
  if (cfg.burn_in >= plan.horizon && cfg.source == "occupation")
    throw ConfigError("invariant.burn_in: must be below plan.horizon");
  std::vector<double> edges(cfg.bins + 1);
  for (std::size_t k = 0; k <= cfg.bins; ++k)
    edges[k] = cfg.lo + (cfg.hi - cfg.lo) * static_cast<double>(k) / static_cast<double>(cfg.bins);
  EmpiricalMeasure hist = EmpiricalMeasure::histogram(edges);

  std::string why;
  const auto ref = stationary_reference(*plan.system, why);
  json rep = {{"source", cfg.source}, {"replicas", plan.replicas}, {"horizon", plan.horizon}};
  std::optional<double> ks;

  if (cfg.source == "terminal") {
    std::vector<double> terminal(plan.replicas);
    parallel_for(plan.replicas, workers, [&](std::uint64_t r) {
      run_replica(plan, r, [&](const StepView& v) {
        if (v.step == plan.horizon) terminal[r] = static_cast<double>(v.state[cfg.index]);
      });
    });
    for (double x : terminal) hist.add(x);
    if (ref) ks = ks_distance(EmpiricalMeasure::from_samples(terminal).normalized(), *ref);
  } else {
    in_batches(
        plan.replicas, workers,
        [&](std::uint64_t r) {
          EmpiricalMeasure h = EmpiricalMeasure::histogram(edges);
          run_replica(plan, r, [&](const StepView& v) {
            if (v.step > cfg.burn_in) h.add(static_cast<double>(v.state[cfg.index]));
          });
          return h;
        },
        [&](const EmpiricalMeasure& h) { hist.merge(h); });
    if (ref && hist.total_mass() > 0.0) ks = ks_distance(hist.normalized(), *ref);
  }
  out.text("histogram.csv", hist.to_csv());
  rep["samples"] = hist.sample_count();
  rep["out_of_range"] = hist.out_of_range();
  rep["histogram_mass"] = hist.total_mass();
  if (ks)
    rep["ks"] = *ks;
  else
    rep["ks"] = nullptr, rep["ks_unavailable"] = why;
  return rep;
}

json run_ratio(const ExperimentConfig& c, unsigned workers, Output& out) {
  const SimulationPlan& plan = plan_of(c);
  const auto& cfg = c.ratio;
  check_index(plan, cfg.index, "ratio.index");
  struct Row {
    std::vector<std::array<double, 3>> series;  // n, phi visits, psi visits
    RatioAccumulator acc{{0, 0}, {0, 0}};
  };
  std::vector<Row> rows(plan.replicas);
  parallel_for(plan.replicas, workers, [&](std::uint64_t r) {
    Row& row = rows[r];
    row.acc = RatioAccumulator(cfg.phi, cfg.psi);
    run_replica(plan, r, [&](const StepView& v) {
      row.acc.observe(static_cast<double>(v.state[cfg.index]));
      if (v.step % cfg.series_stride == 0 || v.step == plan.horizon)
        row.series.push_back({static_cast<double>(v.step), static_cast<double>(row.acc.phi_visits()),
                              static_cast<double>(row.acc.psi_visits())});
    });
  });
  std::ostringstream csv;
  csv << "replica,n,phi_visits,psi_visits,ratio\n";
  json finals = json::array();
  double sum = 0.0;
  std::uint64_t defined = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& s : rows[r].series) {
      const double ratio = s[2] > 0 ? s[1] / s[2] : std::nan("");
      csv << r << ',' << static_cast<std::uint64_t>(s[0]) << ',' << static_cast<std::uint64_t>(s[1]) << ','
          << static_cast<std::uint64_t>(s[2]) << ',' << format_double(ratio) << '\n';
    }
    const double f = rows[r].acc.ratio();
    finals.push_back(number(f));
    if (!std::isnan(f)) sum += f, ++defined;
  }
  out.text("ratio_series.csv", csv.str());
  json rep = {{"phi", {cfg.phi.lo, cfg.phi.hi}},
              {"psi", {cfg.psi.lo, cfg.psi.hi}},
              {"final_ratio", finals},
              {"mean_final_ratio", defined ? json(sum / static_cast<double>(defined)) : json(nullptr)}};
  const SystemSpec& s = *plan.system;
  if (s.family() == Family::reflected_rw && s.b_law() && s.b_law()->support_lo() >= 0.0 &&
      !additive_lattice_span(*s.b_law())) {
    const DistributionSpec& b = *s.b_law();
    auto surv = [&b](double x) { return b.survival(x); };
    const auto kinks = b.kinks();
    auto mass = [&](Interval iv) { return integrate(surv, std::max(iv.lo, 0.0), std::max(iv.hi, 0.0), kinks); };
    rep["predicted_ratio"] = number(mass(cfg.phi) / mass(cfg.psi));
  }
  return rep;
}

json run_kac(const ExperimentConfig& c, unsigned workers, Output&) {
  const SimulationPlan& plan = plan_of(c);
  const KacReport k = kac_return_time(*plan.system, c.kac.t, plan.replicas, plan.horizon, plan.seed, workers);
  return {{"t", c.kac.t},
          {"replicas", plan.replicas},
          {"max_steps", plan.horizon},
          {"mean_return_time", number(k.mean_return_time)},
          {"standard_error", number(k.standard_error)},
          {"returns", k.returns},
          {"censored", k.censored},
          {"censored_fraction", k.censored_fraction},
          {"valid", k.valid},
          {"nu_total", number(k.nu_total)},
          {"nu_u", number(k.nu_u)},
          {"prediction", number(k.prediction)}};
}

json run_criteria(const ExperimentConfig& c, unsigned, Output& out) {
  const DistributionSpec& law = *c.criteria.law;
  const CriteriaReport r = recurrence_criteria(law);
  const std::pair<const char*, const Criterion*> items[] = {
      {"mean", &r.mean},           {"sqrt_mean", &r.sqrt_mean},         {"tail_square", &r.tail_square},
      {"tail_product", &r.tail_product}, {"sqrt_positive", &r.sqrt_positive}, {"sqrt_cubed", &r.sqrt_cubed}};
  json rep = {{"law", law.name()}, {"mean_positive", number(r.mean_positive)}, {"mean_negative", number(r.mean_negative)}};
  std::ostringstream csv;
  csv << "criterion,status,value\n";
  for (const auto& [name, cr] : items) {
    rep[name] = {{"status", std::string(to_string(cr->status))}, {"value", number(cr->value)}};
    csv << name << ',' << to_string(cr->status) << ',' << format_double(cr->value) << '\n';
  }
  out.text("criteria.csv", csv.str());
  return rep;
}

json run_wiener_hopf(const ExperimentConfig& c, unsigned workers, Output&) {
  const auto& w = c.wiener_hopf;
  const WienerHopfReport r = wiener_hopf_check(*w.mu0, w.paths, w.max_steps, w.seed, workers, w.grid_points);
  return {{"mu0", w.mu0->name()},
          {"grid_half_width", r.grid_half_width},
          {"grid_points", r.grid_points},
          {"phi_mass", r.phi_mass},
          {"proposals", r.proposals},
          {"accepted", r.accepted},
          {"acceptance_rate", r.acceptance_rate},
          {"acceptance_se", r.acceptance_se},
          {"paths", r.paths},
          {"censored", r.censored},
          {"ks", r.ks}};
}

json run_dyadic(const ExperimentConfig& c, unsigned, Output& out) {
  const auto& d = c.dyadic;
  const ExactRational x = ExactRational::parse(d.x);
  const ExactRational y = ExactRational::parse(d.y);
  const bool witness = (x == ExactRational(1) && y == ExactRational(1, 3)) ||
                       (y == ExactRational(1) && x == ExactRational(1, 3));
  // Draw signs until the requested number of strict ascending ladder epochs.
  std::vector<int> eps;
  long s = 0, m = 0;
  std::uint64_t found = 0;
  while (found < d.epochs && eps.size() < d.max_steps) {
    // Same draw as random_signs.
    Substream stream(d.seed, d.replica, eps.size() + 1, stream_domain::maps);
    eps.push_back(stream.uniform() <= d.p ? 1 : -1);
    s += eps.back();
    if (s > m) m = s, ++found;
  }
  ladder_identity_check(eps, x);
  ladder_identity_check(eps, y);
  const auto dist = ladder_distances(eps, x, y);
  const auto tx = exact_trajectory(eps, x, 2);
  const auto ty = exact_trajectory(eps, y, 2);
  std::ostringstream csv;
  csv << "k,epoch,x_value,y_value,distance\n";
  json epochs = json::array();
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const auto& [t, dk] = dist[k];
    if (witness && dk != ExactRational(2, 3))
      throw IdentityViolation("dyadic: distance at ladder epoch " + std::to_string(t) + " is " + dk.to_string() +
                              ", expected 2/3");
    csv << k + 1 << ',' << t << ',' << tx[t].to_string() << ',' << ty[t].to_string() << ',' << dk.to_string() << '\n';
    epochs.push_back({{"k", k + 1}, {"epoch", t}, {"distance", dk.to_string()}});
  }
  out.text("dyadic_epochs.csv", csv.str());
  return {{"x", x.to_string()},
          {"y", y.to_string()},
          {"p", d.p},
          {"steps", eps.size()},
          {"epochs_requested", d.epochs},
          {"epochs_found", dist.size()},
          {"truncated", dist.size() < d.epochs},
          {"ladder_identity", "verified"},
          {"epochs", epochs}};
}

json run_probe(const ExperimentConfig& c, unsigned, Output& out) {
  const auto& p = c.probe;
  std::vector<ExactRational> seeds;
  for (const auto& v : p.seeds) seeds.push_back(ExactRational::parse(v));
  const ProbeReport r = attractor_probe(p.base, seeds, p.depth, p.cap);
  std::ostringstream csv;
  csv << "value\n";
  for (double v : r.sorted_points) csv << format_double(v) << '\n';
  out.text("probe_points.csv", csv.str());
  return {{"base", r.base},
          {"depth_requested", p.depth},
          {"depth_reached", r.depth_reached},
          {"truncated", r.truncated},
          {"points", r.points},
          {"min", r.min.to_string()},
          {"max", r.max.to_string()},
          {"largest_gap", r.largest_gap}};
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t primary_seed(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::wiener_hopf: return c.wiener_hopf.seed;
    case ExperimentKind::dyadic: return c.dyadic.seed;
    default: return c.plan ? c.plan->seed : 0;
  }
}

}  // namespace

std::string resolve_output_dir(const ExperimentConfig& config, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (!config.output_dir.empty()) return config.output_dir;
  std::string stem = fs::path(config.source).stem().string();
  if (stem.empty() || stem.front() == '<') stem = "experiment";
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return (fs::path(root) / stem).string();
  return (fs::path("sds_output") / stem).string();
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  const unsigned workers = std::max(1u, options.workers);
  RunResult res;
  res.output_dir = resolve_output_dir(config, options.out_dir);
  std::error_code ec;
  fs::create_directories(res.output_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + res.output_dir + "': " + ec.message());
  Output out(res.output_dir);

  json report;
  switch (config.kind) {
    case ExperimentKind::simulate: report = run_simulate(config, workers, out); break;
    case ExperimentKind::classify: report = run_classify(config, workers, out); break;
    case ExperimentKind::invariant: report = run_invariant(config, workers, out); break;
    case ExperimentKind::ratio: report = run_ratio(config, workers, out); break;
    case ExperimentKind::kac: report = run_kac(config, workers, out); break;
    case ExperimentKind::criteria: report = run_criteria(config, workers, out); break;
    case ExperimentKind::wiener_hopf: report = run_wiener_hopf(config, workers, out); break;
    case ExperimentKind::dyadic: report = run_dyadic(config, workers, out); break;
    case ExperimentKind::probe: report = run_probe(config, workers, out); break;
  }
  report = json{{"kind", std::string(to_string(config.kind))}, {"seed", primary_seed(config)}, {"result", report}};
  res.report_json = report.dump(2) + "\n";
  out.text("report.json", res.report_json);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<std::string> files = out.files();
  files.push_back("manifest.json");
  const json manifest = {{"config", json::parse(config.echo_json)},
                         {"config_source", config.source},
                         {"kind", std::string(to_string(config.kind))},
                         {"seed", primary_seed(config)},
                         {"version", kVersion},
                         {"compiler", __VERSION__},
                         {"workers", workers},
                         {"started_at", started},
                         {"wall_time_seconds", wall},
                         {"files", files}};
  write_text_file((fs::path(res.output_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  res.files = std::move(files);
  return res;
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IdentityViolation*>(&e)) return 3;
  return 1;
}

}  // namespace sds
