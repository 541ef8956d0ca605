#pragma once

// Holdout evaluation: hide a random sample of observed pairs, train on the
// rest, and score the hidden pairs with RMSE and MAE.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "matrust/predict.hpp"
#include "matrust/trust_core.hpp"

namespace matrust {

struct HoldoutSplit {
  SparseTrustMatrix train;
  std::vector<TrustObservation> test;  // ascending (trustor, trustee)
  std::uint64_t seed = 0;
  std::size_t size = 0;
};

/// Uniform sample of `size` observations without replacement. The training
/// part keeps the original user count and labels and may be empty.
/// Throws ValidationError when size > |K|.
HoldoutSplit make_split(const SparseTrustMatrix& t, std::size_t size, std::uint64_t seed);

struct ErrorScores {
  double rmse = 0.0;
  double mae = 0.0;
};

ErrorScores score(std::span<const double> predictions, std::span<const double> truths);

struct EvalConfig {
  std::size_t holdout = 500;
  std::uint64_t seed = 0;
  PredictOptions predict;
};

struct PairPrediction {
  UserIndex u = 0;
  UserIndex v = 0;
  double truth = 0.0;
  double prediction = 0.0;
};

struct EvalReport {
  std::string label;
  double rmse = 0.0;
  double mae = 0.0;
  std::vector<PairPrediction> per_pair;
  // Everything needed to reproduce the run.
  HyperParams hp;
  EvalConfig config;
  std::uint32_t dataset_hash = 0;
  std::size_t train_observations = 0;
  int outer_iterations = 0;
  Coefficients alpha = Coefficients::Zero();

  std::uint32_t config_hash() const;
};

/// CRC-32 over the sorted observation triples and n.
std::uint32_t dataset_hash(const SparseTrustMatrix& t);

/// Trains on split.train and scores split.test.
EvalReport evaluate(const HoldoutSplit& split, const HyperParams& hp, const EvalConfig& config,
                    std::uint32_t data_hash = 0);

/// make_split + evaluate.
EvalReport evaluate(const SparseTrustMatrix& t, const HyperParams& hp, const EvalConfig& config);

enum class AblationMode { kFull, kNoBias, kFrozenCoefficients };

const char* to_string(AblationMode mode);
AblationMode parse_ablation_mode(std::string_view name);

/// One report per mode, all on the same split, in the order given.
std::vector<EvalReport> run_ablation(const SparseTrustMatrix& t, const HyperParams& hp,
                                     const std::vector<AblationMode>& modes,
                                     const EvalConfig& config);

enum class SweepParam { kRank, kLambda };

/// One report per value on a fixed split and seed.
std::vector<EvalReport> sweep(const SparseTrustMatrix& t, const HyperParams& hp, SweepParam param,
                              const std::vector<double>& values, const EvalConfig& config);

struct SeedSummary {
  std::vector<EvalReport> runs;
  double rmse_mean = 0.0;
  double rmse_min = 0.0;
  double rmse_max = 0.0;
  double mae_mean = 0.0;
  double mae_min = 0.0;
  double mae_max = 0.0;
};

/// evaluate() once per seed in [config.seed, config.seed + seeds).
SeedSummary evaluate_seeds(const SparseTrustMatrix& t, const HyperParams& hp,
                           const EvalConfig& config, int seeds);

/// key=value lines (no per-pair detail).
void write_report_text(const EvalReport& report, std::ostream& out);
nlohmann::json report_to_json(const EvalReport& report, bool with_pairs = false);

/// Transcribed reference values, for comparison only. advogato-6 and PGP,
/// 500 hidden pairs, lambda = 1, r = 10.
namespace published {
inline constexpr double kAdvogatoGlobalBias = 0.6679;
inline constexpr double kPgpGlobalBias = 0.3842;
inline constexpr double kAdvogatoRmse = 0.169;
inline constexpr double kAdvogatoMae = 0.119;
inline constexpr double kAdvogatoNoBiasRmse = 0.228;
inline constexpr double kAdvogatoNoBiasMae = 0.164;
inline constexpr double kAdvogatoFrozenRmse = 0.179;
inline constexpr double kAdvogatoFrozenMae = 0.125;
inline constexpr double kPgpRmse = 0.192;
inline constexpr double kPgpMae = 0.111;
inline constexpr double kPgpNoBiasRmse = 0.244;
inline constexpr double kPgpNoBiasMae = 0.135;
inline constexpr double kPgpFrozenRmse = 0.217;
inline constexpr double kPgpFrozenMae = 0.133;
// Per-trustee objective scores (r = 1).
inline constexpr double kAdvogatoObjectiveRmse = 0.290;
inline constexpr double kAdvogatoObjectiveMae = 0.203;
inline constexpr double kPgpObjectiveRmse = 0.349;
inline constexpr double kPgpObjectiveMae = 0.280;
}  // namespace published

}  // namespace matrust
