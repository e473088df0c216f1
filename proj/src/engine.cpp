#include "sds/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "sds/errors.hpp"

namespace sds {

void SimulationPlan::validate() const {
  if (!system) throw ConfigError("plan.system: missing");
  if (starting_points.empty()) throw ConfigError("plan.starting_points: empty");
  for (double x : starting_points) {
    if (!std::isfinite(x)) throw ConfigError("plan.starting_points: non-finite entry");
    if (system->family() != Family::affine && x < 0.0)
      throw ConfigError("plan.starting_points: negative start for a reflected family");
  }
  if (horizon < 1) throw ConfigError("plan.horizon: must be >= 1");
  if (replicas < 1) throw ConfigError("plan.replicas: must be >= 1");
  if (!(extended_height > 0.0) || !std::isfinite(extended_height))
    throw ConfigError("plan.extended_height: must be > 0");
  if (record.mode == RecordMode::strided && record.stride < 1)
    throw ConfigError("plan.record: stride must be >= 1");
}

double TrajectoryBundle::product(std::size_t k) const { return std::exp(log_product.at(k)); }

ExtendedPoint TrajectoryBundle::extended(std::size_t i, std::size_t k) const {
  return {paths.at(i).at(k), extended_height * std::exp(log_product.at(k))};
}

void run_replica(const SimulationPlan& plan, std::uint64_t replica,
                 const std::function<void(const StepView&)>& observer) {
  const SystemSpec& sys = *plan.system;
  const std::size_t m = plan.starting_points.size();
  std::vector<long double> state(plan.starting_points.begin(), plan.starting_points.end());
  long double log_prod = 0.0L;
  observer({0, 0.0, state, nullptr});
  for (std::uint64_t n = 1; n <= plan.horizon; ++n) {
    Substream stream(plan.seed, replica, n, stream_domain::maps);
    const SystemSpec::Params p = sys.draw(stream);
    const double lip = sys.lipschitz(p);
    if (!(lip > 0.0)) throw SimulationError("non-positive Lipschitz constant drawn", replica, n);
    if (lip != 1.0) log_prod += std::log(lip);
    for (std::size_t i = 0; i < m; ++i) {
      state[i] = sys.apply(p, state[i]);
      if (std::isnan(state[i]))
        throw SimulationError("NaN in path of starting point " + std::to_string(i), replica, n);
    }
    observer({n, static_cast<double>(log_prod), state, &p});
  }
}

TrajectoryBundle simulate_replica(const SimulationPlan& plan, std::uint64_t replica) {
  const std::size_t m = plan.starting_points.size();
  const bool full = plan.record.mode == RecordMode::full;

  TrajectoryBundle b;
  b.system = plan.system;
  b.replica = replica;
  b.horizon = plan.horizon;
  b.starting_points = plan.starting_points;
  b.paths.resize(m);
  b.track_extended = plan.track_extended;
  b.extended_height = plan.extended_height;
  const std::size_t expected = full ? plan.horizon + 1
                               : plan.record.mode == RecordMode::strided
                                   ? plan.horizon / plan.record.stride + 2
                                   : 2;
  b.steps.reserve(expected);
  b.log_product.reserve(expected);
  b.running_max.reserve(expected);
  for (auto& p : b.paths) p.reserve(expected);
  if (full) b.params.reserve(plan.horizon);

  double run_max = 0.0, run_min = 0.0;
  auto record = [&](const StepView& v) {
    b.steps.push_back(v.step);
    b.log_product.push_back(v.log_product);
    b.running_max.push_back(run_max);
    for (std::size_t i = 0; i < m; ++i) b.paths[i].push_back(static_cast<double>(v.state[i]));
  };

  run_replica(plan, replica, [&](const StepView& v) {
    if (v.step == 0) {
      record(v);
      return;
    }
    if (full) b.params.push_back(*v.params);
    const double s = v.log_product;
    bool epoch = false;
    if (s >= run_max - kLadderSlack * std::max(1.0, std::abs(run_max))) {
      run_max = std::max(run_max, s);
      epoch = true;
    }
    if (s <= run_min + kLadderSlack * std::max(1.0, std::abs(run_min))) {
      run_min = std::min(run_min, s);
      epoch = true;
    }
    switch (plan.record.mode) {
      case RecordMode::full: record(v); break;
      case RecordMode::strided:
        if (v.step % plan.record.stride == 0 || epoch || v.step == plan.horizon) record(v);
        break;
      case RecordMode::summary:
        if (v.step == plan.horizon) record(v);
        break;
    }
  });
  return b;
}

void parallel_for(std::uint64_t count, unsigned workers,
                  const std::function<void(std::uint64_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const unsigned n_threads = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<TrajectoryBundle> simulate(const SimulationPlan& plan, unsigned workers) {
  return map_replicas(plan, workers, [](const TrajectoryBundle& b) { return b; });
}

RightProcessPath right_process_replica(const SimulationPlan& plan, std::uint64_t replica) {
  plan.validate();
  const SystemSpec& sys = *plan.system;
  if (sys.family() != Family::affine)
    throw ConfigError("right_process: only the affine family has an incremental right process");
  RightProcessPath out;
  out.replica = replica;
  out.starting_points = plan.starting_points;
  out.values.assign(plan.starting_points.size(), {});
  for (std::size_t i = 0; i < plan.starting_points.size(); ++i) {
    out.values[i].reserve(plan.horizon + 1);
    out.values[i].push_back(plan.starting_points[i]);
  }
  out.log_slope.reserve(plan.horizon + 1);
  out.log_slope.push_back(0.0);

  long double slope = 1.0L;   // A_{0,n}
  long double offset = 0.0L;  // c_n
  long double log_slope = 0.0L;
  for (std::uint64_t n = 1; n <= plan.horizon; ++n) {
    Substream stream(plan.seed, replica, n, stream_domain::maps);
    const SystemSpec::Params p = sys.draw(stream);
    offset += slope * p.b;
    slope *= p.a;
    log_slope += std::log(static_cast<long double>(p.a));
    out.log_slope.push_back(static_cast<double>(log_slope));
    for (std::size_t i = 0; i < plan.starting_points.size(); ++i) {
      const long double r = slope * plan.starting_points[i] + offset;
      if (std::isnan(r)) throw SimulationError("NaN in right process", replica, n);
      out.values[i].push_back(static_cast<double>(r));
    }
  }
  return out;
}

std::vector<RightProcessPath> right_process(const SimulationPlan& plan, unsigned workers) {
  plan.validate();
  std::vector<RightProcessPath> out(plan.replicas);
  parallel_for(plan.replicas, workers,
               [&](std::uint64_t r) { out[r] = right_process_replica(plan, r); });
  return out;
}

std::string_view to_string(LadderKind k) {
  switch (k) {
    case LadderKind::ascending_nonstrict: return "ascending_nonstrict";
    case LadderKind::ascending_strict: return "ascending_strict";
    case LadderKind::descending_nonstrict: return "descending_nonstrict";
    case LadderKind::descending_strict: return "descending_strict";
  }
  return "ascending_nonstrict";
}

LadderDecomposition ladder_epochs(std::span<const double> series, LadderKind kind) {
  LadderDecomposition out;
  out.kind = kind;
  if (series.empty()) return out;
  double level = series[0];
  for (std::size_t n = 1; n < series.size(); ++n) {
    const double s = series[n];
    bool hit = false;
    switch (kind) {
      case LadderKind::ascending_nonstrict: hit = s >= level; break;
      case LadderKind::ascending_strict: hit = s > level; break;
      case LadderKind::descending_nonstrict: hit = s <= level; break;
      case LadderKind::descending_strict: hit = s < level; break;
    }
    if (hit) {
      out.epochs.push_back(n);
      out.ladder_values.push_back(s);
      level = s;
    }
  }
  return out;
}

std::vector<double> b_walk(const TrajectoryBundle& bundle) {
  if (bundle.params.size() != bundle.horizon)
    throw ConfigError("b_walk: bundle was not fully recorded");
  std::vector<double> walk(bundle.horizon + 1, 0.0);
  long double s = 0.0L;
  for (std::uint64_t n = 1; n <= bundle.horizon; ++n) {
    s += bundle.params[n - 1].b;
    walk[n] = static_cast<double>(s);
  }
  return walk;
}

TrajectoryBundle embedded_bundle(const TrajectoryBundle& bundle, const LadderDecomposition& epochs) {
  TrajectoryBundle out;
  out.system = bundle.system;
  out.replica = bundle.replica;
  out.starting_points = bundle.starting_points;
  out.track_extended = bundle.track_extended;
  out.extended_height = bundle.extended_height;
  out.paths.resize(bundle.paths.size());

  auto take = [&](std::uint64_t step) {
    const auto it = std::lower_bound(bundle.steps.begin(), bundle.steps.end(), step);
    if (it == bundle.steps.end() || *it != step)
      throw DomainError("embedded_bundle: step " + std::to_string(step) + " was not recorded");
    const std::size_t k = static_cast<std::size_t>(it - bundle.steps.begin());
    out.steps.push_back(step);
    out.log_product.push_back(bundle.log_product[k]);
    for (std::size_t i = 0; i < bundle.paths.size(); ++i) out.paths[i].push_back(bundle.paths[i][k]);
  };
  take(0);
  for (std::uint64_t e : epochs.epochs) {
    if (e > bundle.horizon) {
      out.truncated = true;
      break;
    }
    take(e);
  }
  double run_max = 0.0;
  for (std::size_t k = 0; k < out.log_product.size(); ++k) {
    if (k > 0) run_max = std::max(run_max, out.log_product[k]);
    out.running_max.push_back(run_max);
  }
  // Embedded time runs over epoch counts; the horizon is the last epoch index.
  out.horizon = out.steps.size() - 1;
  if (bundle.is_full()) {
    // Parameters of the embedded maps are compositions; keep the product data
    // only (log_product) and leave params empty unless embedding is trivial.
    bool identity = out.steps.size() == bundle.steps.size();
    if (identity) out.params = bundle.params;
  }
  return out;
}

std::vector<double> affine_majorant(const TrajectoryBundle& bundle, std::size_t i) {
  if (bundle.params.size() != bundle.horizon)
    throw ConfigError("affine_majorant: bundle was not fully recorded");
  const SystemSpec& sys = *bundle.system;
  const double o = sys.reference_point();
  std::vector<double> y(bundle.horizon + 1);
  long double cur = std::abs(bundle.starting_points.at(i) - o);
  y[0] = static_cast<double>(cur);
  for (std::uint64_t n = 1; n <= bundle.horizon; ++n) {
    const auto& p = bundle.params[n - 1];
    const MapDescriptor f = sys.make_map(p);
    cur = static_cast<long double>(f.lipschitz()) * cur + f.displacement(o);
    y[n] = static_cast<double>(cur);
  }
  return y;
}

}  // namespace sds
