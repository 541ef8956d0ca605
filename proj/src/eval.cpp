#include "matrust/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <zlib.h>

#include "matrust/solver.hpp"

namespace matrust {

namespace {

std::uint32_t crc_of(std::uint32_t crc, const void* data, std::size_t size) {
  return static_cast<std::uint32_t>(
      crc32(crc, static_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(8);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace

HoldoutSplit make_split(const SparseTrustMatrix& t, std::size_t size, std::uint64_t seed) {
  const auto obs = t.observations();
  if (size > obs.size()) {
    throw ValidationError("holdout size " + std::to_string(size) + " exceeds the " +
                          std::to_string(obs.size()) + " observed pairs");
  }
  // Partial Fisher-Yates over positions; the first `size` are held out.
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < size; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
    std::swap(order[k], order[pick(rng)]);
  }
  std::vector<bool> held(obs.size(), false);
  for (std::size_t k = 0; k < size; ++k) held[order[k]] = true;

  HoldoutSplit split;
  split.seed = seed;
  split.size = size;
  std::vector<TrustObservation> train_obs;
  train_obs.reserve(obs.size() - size);
  split.test.reserve(size);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    (held[k] ? split.test : train_obs).push_back(obs[k]);
  }
  split.train = SparseTrustMatrix(t.num_users(), std::move(train_obs), t.labels());
  return split;
}

ErrorScores score(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw ValidationError("prediction and truth lengths differ");
  }
  if (predictions.empty()) throw ValidationError("cannot score an empty prediction set");
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const double e = predictions[k] - truths[k];
    sq += e * e;
    abs += std::abs(e);
  }
  const auto m = static_cast<double>(predictions.size());
  return {std::sqrt(sq / m), abs / m};
}

std::uint32_t dataset_hash(const SparseTrustMatrix& t) {
  std::uint32_t crc = crc_of(0, nullptr, 0);
  const std::uint64_t n = t.num_users();
  crc = crc_of(crc, &n, sizeof(n));
  for (const auto& o : t.observations()) {
    crc = crc_of(crc, &o.trustor, sizeof(o.trustor));
    crc = crc_of(crc, &o.trustee, sizeof(o.trustee));
    crc = crc_of(crc, &o.rating, sizeof(o.rating));
  }
  return crc;
}

std::uint32_t EvalReport::config_hash() const {
  std::ostringstream os;
  os.precision(17);
  os << dataset_hash << '|' << hp.lambda << '|' << hp.r << '|' << hp.m1 << '|' << hp.m2 << '|'
     << hp.xi1 << '|' << hp.xi2 << '|' << hp.use_bias << '|' << hp.freeze_coefficients << '|'
     << hp.rng_seed << '|' << static_cast<int>(hp.init) << '|' << config.holdout << '|'
     << config.seed << '|' << config.predict.clamp;
  const auto s = os.str();
  return crc_of(crc_of(0, nullptr, 0), s.data(), s.size());
}

EvalReport evaluate(const HoldoutSplit& split, const HyperParams& hp, const EvalConfig& config,
                    std::uint32_t data_hash) {
  const auto result = train(split.train, hp);

  EvalReport report;
  report.hp = hp;
  report.config = config;
  report.config.holdout = split.size;
  report.config.seed = split.seed;
  report.dataset_hash = data_hash;
  report.train_observations = split.train.num_observations();
  report.outer_iterations = static_cast<int>(result.trace.outer.size());
  report.alpha = result.model.alpha;

  std::vector<double> preds;
  std::vector<double> truths;
  preds.reserve(split.test.size());
  truths.reserve(split.test.size());
  for (const auto& o : split.test) {
    const double p = predict_pair(result.model, o.trustor, o.trustee, config.predict);
    preds.push_back(p);
    truths.push_back(o.rating);
    report.per_pair.push_back({o.trustor, o.trustee, o.rating, p});
  }
  if (!preds.empty()) {
    const auto s = score(preds, truths);
    report.rmse = s.rmse;
    report.mae = s.mae;
  }
  return report;
}

EvalReport evaluate(const SparseTrustMatrix& t, const HyperParams& hp, const EvalConfig& config) {
  return evaluate(make_split(t, config.holdout, config.seed), hp, config, dataset_hash(t));
}

const char* to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFull:
      return "full";
    case AblationMode::kNoBias:
      return "no_bias";
    case AblationMode::kFrozenCoefficients:
      return "frozen_coefficients";
  }
  return "?";
}

AblationMode parse_ablation_mode(std::string_view name) {
  if (name == "full") return AblationMode::kFull;
  if (name == "no_bias" || name == "no-bias") return AblationMode::kNoBias;
  if (name == "frozen_coefficients" || name == "frozen-coefficients" || name == "kbv") {
    return AblationMode::kFrozenCoefficients;
  }
  throw ValidationError("unknown ablation mode '" + std::string(name) + "'");
}

std::vector<EvalReport> run_ablation(const SparseTrustMatrix& t, const HyperParams& hp,
                                     const std::vector<AblationMode>& modes,
                                     const EvalConfig& config) {
  const auto split = make_split(t, config.holdout, config.seed);
  const auto hash = dataset_hash(t);
  std::vector<EvalReport> reports;
  for (auto mode : modes) {
    HyperParams mhp = hp;
    mhp.use_bias = mode != AblationMode::kNoBias;
    mhp.freeze_coefficients = mode == AblationMode::kFrozenCoefficients;
    auto report = evaluate(split, mhp, config, hash);
    report.label = to_string(mode);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<EvalReport> sweep(const SparseTrustMatrix& t, const HyperParams& hp, SweepParam param,
                              const std::vector<double>& values, const EvalConfig& config) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  const auto split = make_split(t, config.holdout, config.seed);
  const auto hash = dataset_hash(t);
  std::vector<EvalReport> reports;
  for (double value : values) {
    HyperParams vhp = hp;
    std::ostringstream label;
    if (param == SweepParam::kRank) {
      if (value < 1 || value != std::floor(value)) {
        throw ValidationError("rank sweep values must be positive integers");
      }
      vhp.r = static_cast<int>(value);
      label << "r=" << vhp.r;
    } else {
      vhp.lambda = value;
      label << "lambda=" << value;
    }
    vhp.validate();
    auto report = evaluate(split, vhp, config, hash);
    report.label = label.str();
    reports.push_back(std::move(report));
  }
  return reports;
}

SeedSummary evaluate_seeds(const SparseTrustMatrix& t, const HyperParams& hp,
                           const EvalConfig& config, int seeds) {
  if (seeds < 1) throw ValidationError("need at least one seed");
  SeedSummary s;
  const auto hash = dataset_hash(t);
  for (int k = 0; k < seeds; ++k) {
    EvalConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(k);
    auto report = evaluate(make_split(t, c.holdout, c.seed), hp, c, hash);
    report.label = "seed=" + std::to_string(c.seed);
    s.runs.push_back(std::move(report));
  }
  auto stat = [&](auto field, double& mean, double& lo, double& hi) {
    mean = 0.0;
    lo = hi = field(s.runs.front());
    for (const auto& r : s.runs) {
      const double v = field(r);
      mean += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    mean /= static_cast<double>(s.runs.size());
  };
  stat([](const EvalReport& r) { return r.rmse; }, s.rmse_mean, s.rmse_min, s.rmse_max);
  stat([](const EvalReport& r) { return r.mae; }, s.mae_mean, s.mae_min, s.mae_max);
  return s;
}

void write_report_text(const EvalReport& report, std::ostream& out) {
  const auto prec = out.precision(6);
  if (!report.label.empty()) out << "label=" << report.label << '\n';
  out << "rmse=" << report.rmse << '\n'
      << "mae=" << report.mae << '\n'
      << "holdout=" << report.config.holdout << '\n'
      << "train_observations=" << report.train_observations << '\n'
      << "seed=" << report.config.seed << '\n'
      << "lambda=" << report.hp.lambda << '\n'
      << "r=" << report.hp.r << '\n'
      << "m1=" << report.hp.m1 << '\n'
      << "m2=" << report.hp.m2 << '\n'
      << "use_bias=" << report.hp.use_bias << '\n'
      << "freeze_coefficients=" << report.hp.freeze_coefficients << '\n'
      << "clamp=" << report.config.predict.clamp << '\n'
      << "alpha=" << report.alpha[0] << ',' << report.alpha[1] << ',' << report.alpha[2] << '\n'
      << "outer_iterations=" << report.outer_iterations << '\n'
      << "dataset_hash=" << hex(report.dataset_hash) << '\n'
      << "config_hash=" << hex(report.config_hash()) << '\n';
  out.precision(prec);
}

nlohmann::json report_to_json(const EvalReport& report, bool with_pairs) {
  nlohmann::json j{
      {"label", report.label},
      {"rmse", report.rmse},
      {"mae", report.mae},
      {"holdout", report.config.holdout},
      {"seed", report.config.seed},
      {"train_observations", report.train_observations},
      {"hp",
       {{"lambda", report.hp.lambda},
        {"r", report.hp.r},
        {"m1", report.hp.m1},
        {"m2", report.hp.m2},
        {"xi1", report.hp.xi1},
        {"xi2", report.hp.xi2},
        {"use_bias", report.hp.use_bias},
        {"freeze_coefficients", report.hp.freeze_coefficients},
        {"rng_seed", report.hp.rng_seed}}},
      {"clamp", report.config.predict.clamp},
      {"alpha", {report.alpha[0], report.alpha[1], report.alpha[2]}},
      {"outer_iterations", report.outer_iterations},
      {"dataset_hash", hex(report.dataset_hash)},
      {"config_hash", hex(report.config_hash())}};
  if (with_pairs) {
    auto& pairs = j["pairs"] = nlohmann::json::array();
    for (const auto& p : report.per_pair) pairs.push_back({p.u, p.v, p.truth, p.prediction});
  }
  return j;
}

}  // namespace matrust
