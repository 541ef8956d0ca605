#pragma once

#include <iosfwd>
#include <vector>

#include "matrust/synthetic.hpp"
#include "matrust/trust_core.hpp"

namespace matrust {

struct ScalePoint {
  std::size_t n = 0;
  std::size_t num_observations = 0;
};

struct ScaleRow {
  std::size_t n = 0;
  std::size_t num_observations = 0;
  double seconds = 0.0;  // best of `repeats` wall-clock train() runs
  std::size_t memory_estimate_bytes = 0;
  int outer_iterations = 0;
};

/// Times train() on planted synthetic graphs of the given sizes. `base`
/// supplies everything but n and |K|; `hp` is used unchanged for every size.
std::vector<ScaleRow> scale_run(const SyntheticSpec& base, const std::vector<ScalePoint>& sizes,
                                const HyperParams& hp, int repeats = 3);

/// Working-set bytes train() needs beyond its input: residuals (|K|), factor
/// matrices and their previous copies (n*r), bias (n) and per-row r x r scratch.
std::size_t train_memory_estimate(std::size_t n, std::size_t num_observations, int r);

struct LatencyStats {
  std::size_t trials = 0;
  std::size_t pairs_per_trial = 0;
  double cold_ns = 0.0;  // per-call cost of the first pass over the pair pool
  double median_ns = 0.0;
  double mean_ns = 0.0;
  double min_ns = 0.0;
  double p90_ns = 0.0;
  std::vector<double> samples_ns;  // per-call cost of each warm trial
};

/// Per-call predict_pair latency over a fixed pool of random distinct-user
/// pairs. Each trial times one pass over the pool; the first pass is reported
/// as the cold sample and excluded from the warm statistics.
LatencyStats query_latency(const FactorModel& model, std::size_t trials, std::uint64_t seed = 7,
                           std::size_t pool = 1024);

/// One JSON object per line.
void write_scale_table(const std::vector<ScaleRow>& rows, std::ostream& out);

}  // namespace matrust
