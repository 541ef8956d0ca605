#pragma once

#include <utility>
#include <vector>

#include "matrust/trust_core.hpp"

namespace matrust {

struct PredictOptions {
  bool clamp = false;  // clip predictions to [0,1]
};

/// F0(u,:) . G0(v,:) + a1*mu + a2*x(u) + a3*y(v). O(r).
/// Throws ValidationError for u == v or indices out of range.
double predict_pair(const FactorModel& model, UserIndex u, UserIndex v,
                    PredictOptions opts = {});

using UserPair = std::pair<UserIndex, UserIndex>;

/// Thrown by predict_batch; identifies the offending element.
class BatchError : public ValidationError {
 public:
  BatchError(std::size_t position, const std::string& what)
      : ValidationError("pair #" + std::to_string(position) + ": " + what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

std::vector<double> predict_batch(const FactorModel& model, const std::vector<UserPair>& pairs,
                                  PredictOptions opts = {});

/// One trustworthiness score per trustee, as predicted by an average trustor:
///   score(v) = mean_rows(F0) . G0(v,:) + a1*mu + a3*y(v).
/// The trustor bias term is dropped because x averages out over trustors.
Vector objective_scores(const FactorModel& model);

}  // namespace matrust
