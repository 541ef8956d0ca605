#include "matrust/predict.hpp"

#include <algorithm>

namespace matrust {

namespace {

void check_pair(const FactorModel& model, UserIndex u, UserIndex v) {
  const auto n = model.n();
  if (u >= n || v >= n) {
    throw ValidationError("user index out of range: (" + std::to_string(u) + ", " +
                          std::to_string(v) + ") with n = " + std::to_string(n));
  }
  if (u == v) throw ValidationError("self-pair (" + std::to_string(u) + ", " + std::to_string(v) + ")");
}

inline double score(const FactorModel& m, UserIndex u, UserIndex v, PredictOptions opts) {
  double s = m.F0.row(u).dot(m.G0.row(v)) + m.alpha[0] * m.bias.mu + m.alpha[1] * m.bias.x[u] +
             m.alpha[2] * m.bias.y[v];
  if (opts.clamp) s = std::clamp(s, 0.0, 1.0);
  return s;
}

}  // namespace

double predict_pair(const FactorModel& model, UserIndex u, UserIndex v, PredictOptions opts) {
  check_pair(model, u, v);
  return score(model, u, v, opts);
}

std::vector<double> predict_batch(const FactorModel& model, const std::vector<UserPair>& pairs,
                                  PredictOptions opts) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    try {
      check_pair(model, pairs[k].first, pairs[k].second);
    } catch (const ValidationError& e) {
      throw BatchError(k, e.what());
    }
    out.push_back(score(model, pairs[k].first, pairs[k].second, opts));
  }
  return out;
}

Vector objective_scores(const FactorModel& model) {
  const auto n = static_cast<Eigen::Index>(model.n());
  Vector scores(n);
  if (n == 0) return scores;
  const Eigen::RowVectorXd mean_trustor = model.F0.colwise().mean();
  const double global = model.alpha[0] * model.bias.mu;
  for (Eigen::Index v = 0; v < n; ++v) {
    scores[v] = mean_trustor.dot(model.G0.row(v)) + global + model.alpha[2] * model.bias.y[v];
  }
  return scores;
}

}  // namespace matrust
