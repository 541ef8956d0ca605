#include "matrust/bench.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "matrust/predict.hpp"
#include "matrust/solver.hpp"

namespace matrust {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::size_t train_memory_estimate(std::size_t n, std::size_t num_observations, int r) {
  const auto rr = static_cast<std::size_t>(r);
  const std::size_t residuals = num_observations * sizeof(double);
  // F0, G0, the previous outer copies, and the half-step outputs.
  const std::size_t factors = 6 * n * rr * sizeof(double);
  const std::size_t bias = 2 * n * sizeof(double);
  const std::size_t scratch = (rr * rr + rr) * sizeof(double);
  return residuals + factors + bias + scratch;
}

std::vector<ScaleRow> scale_run(const SyntheticSpec& base, const std::vector<ScalePoint>& sizes,
                                const HyperParams& hp, int repeats) {
  std::vector<ScaleRow> rows;
  rows.reserve(sizes.size());
  for (const auto& size : sizes) {
    SyntheticSpec spec = base;
    spec.n = size.n;
    spec.num_observations = size.num_observations;
    const auto data = generate_synthetic(spec);

    ScaleRow row;
    row.n = data.observed.num_users();
    row.num_observations = data.observed.num_observations();
    row.seconds = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < std::max(1, repeats); ++rep) {
      const auto start = Clock::now();
      const auto result = train(data.observed, hp);
      row.seconds = std::min(row.seconds, seconds_since(start));
      row.outer_iterations = static_cast<int>(result.trace.outer.size());
    }
    row.memory_estimate_bytes = train_memory_estimate(row.n, row.num_observations, hp.r);
    rows.push_back(row);
  }
  return rows;
}

LatencyStats query_latency(const FactorModel& model, std::size_t trials, std::uint64_t seed,
                           std::size_t pool) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (model.n() < 2) throw ValidationError("latency needs a model with at least two users");
  pool = std::max<std::size_t>(1, pool);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<UserIndex> pick(0, static_cast<UserIndex>(model.n() - 1));
  std::vector<UserPair> pairs;
  pairs.reserve(pool);
  while (pairs.size() < pool) {
    const UserIndex u = pick(rng);
    const UserIndex v = pick(rng);
    if (u != v) pairs.emplace_back(u, v);
  }

  volatile double sink = 0.0;
  auto timed_pass = [&] {
    double acc = 0.0;
    const auto start = Clock::now();
    for (const auto& [u, v] : pairs) acc += predict_pair(model, u, v);
    const auto ns = std::chrono::duration<double, std::nano>(Clock::now() - start).count();
    sink = sink + acc;
    return ns / static_cast<double>(pairs.size());
  };

  LatencyStats stats;
  stats.trials = trials;
  stats.pairs_per_trial = pairs.size();
  stats.cold_ns = timed_pass();
  stats.samples_ns.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) stats.samples_ns.push_back(timed_pass());

  std::vector<double> sorted = stats.samples_ns;
  std::sort(sorted.begin(), sorted.end());
  const auto m = sorted.size();
  stats.median_ns = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  stats.mean_ns = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(m);
  stats.min_ns = sorted.front();
  stats.p90_ns = sorted[std::min(m - 1, static_cast<std::size_t>(0.9 * static_cast<double>(m)))];
  return stats;
}

void write_scale_table(const std::vector<ScaleRow>& rows, std::ostream& out) {
  for (const auto& r : rows) {
    nlohmann::json j{{"n", r.n},
                     {"observations", r.num_observations},
                     {"seconds", r.seconds},
                     {"memory_estimate_bytes", r.memory_estimate_bytes},
                     {"outer_iterations", r.outer_iterations}};
    out << j.dump() << '\n';
  }
}

}  // namespace matrust
