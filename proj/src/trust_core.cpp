#include "matrust/trust_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace matrust {

namespace {

std::string describe(const TrustObservation& o) {
  std::ostringstream os;
  os << "(" << o.trustor << ", " << o.trustee << ", " << o.rating << ")";
  return os.str();
}

}  // namespace

SparseTrustMatrix::SparseTrustMatrix(std::size_t n, std::vector<TrustObservation> observations,
                                     std::vector<std::string> labels)
    : n_(n), observations_(std::move(observations)), labels_(std::move(labels)) {
  if (!labels_.empty() && labels_.size() != n_) {
    throw ValidationError("label count " + std::to_string(labels_.size()) +
                          " does not match user count " + std::to_string(n_));
  }
  for (const auto& o : observations_) {
    if (o.trustor >= n_ || o.trustee >= n_) {
      throw ValidationError("user index out of range in observation " + describe(o));
    }
    if (o.trustor == o.trustee) {
      throw ValidationError("self-rating not allowed: " + describe(o));
    }
    if (!(o.rating >= 0.0 && o.rating <= 1.0)) {
      throw ValidationError("rating outside [0,1]: " + describe(o));
    }
  }
  std::sort(observations_.begin(), observations_.end(), [](const auto& a, const auto& b) {
    return a.trustor != b.trustor ? a.trustor < b.trustor : a.trustee < b.trustee;
  });
  for (std::size_t k = 1; k < observations_.size(); ++k) {
    const auto& prev = observations_[k - 1];
    const auto& cur = observations_[k];
    if (prev.trustor == cur.trustor && prev.trustee == cur.trustee) {
      throw ValidationError("duplicate observation for pair (" + std::to_string(cur.trustor) +
                            ", " + std::to_string(cur.trustee) + ")");
    }
  }

  row_offsets_.assign(n_ + 1, 0);
  col_offsets_.assign(n_ + 1, 0);
  for (const auto& o : observations_) {
    ++row_offsets_[o.trustor + 1];
    ++col_offsets_[o.trustee + 1];
  }
  for (std::size_t i = 0; i < n_; ++i) {
    row_offsets_[i + 1] += row_offsets_[i];
    col_offsets_[i + 1] += col_offsets_[i];
  }
  // Scanning K in row order fills each column bucket in ascending trustor.
  col_entries_.resize(observations_.size());
  std::vector<std::size_t> cursor(col_offsets_.begin(), col_offsets_.end() - 1);
  for (std::size_t k = 0; k < observations_.size(); ++k) {
    col_entries_[cursor[observations_[k].trustee]++] = k;
  }
}

std::span<const TrustObservation> SparseTrustMatrix::row(UserIndex i) const {
  return std::span<const TrustObservation>(observations_)
      .subspan(row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]);
}

std::span<const std::size_t> SparseTrustMatrix::column(UserIndex j) const {
  return std::span<const std::size_t>(col_entries_)
      .subspan(col_offsets_[j], col_offsets_[j + 1] - col_offsets_[j]);
}

std::size_t SparseTrustMatrix::find(UserIndex i, UserIndex j) const {
  if (i >= n_ || j >= n_) return npos;
  auto r = row(i);
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const TrustObservation& o, UserIndex v) { return o.trustee < v; });
  if (it == r.end() || it->trustee != j) return npos;
  return row_offsets_[i] + static_cast<std::size_t>(it - r.begin());
}

std::vector<TrustObservation> observed_pairs(const SparseTrustMatrix& t) {
  auto obs = t.observations();
  return {obs.begin(), obs.end()};
}

void FactorModel::validate() const {
  const auto rows = F0.rows();
  if (G0.rows() != rows || G0.cols() != F0.cols()) {
    throw ValidationError("F0 and G0 shapes differ");
  }
  if (bias.x.size() != rows || bias.y.size() != rows) {
    throw ValidationError("bias vectors do not match user count");
  }
  if (F0.cols() < 1) throw ValidationError("model must have r >= 1");
  const bool finite = F0.allFinite() && G0.allFinite() && alpha.allFinite() &&
                      std::isfinite(bias.mu) && bias.x.allFinite() && bias.y.allFinite();
  if (!finite) throw ValidationError("model contains non-finite values");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(rows)) {
    throw ValidationError("model label count does not match user count");
  }
}

void HyperParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda must be a finite value >= 0");
  }
  if (r < 1) throw ValidationError("r must be >= 1");
  if (m1 < 1) throw ValidationError("m1 must be >= 1");
  if (m2 < 1) throw ValidationError("m2 must be >= 1");
  if (!(xi1 >= 0.0) || !(xi2 >= 0.0)) throw ValidationError("xi1 and xi2 must be >= 0");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

ResidualMatrix::ResidualMatrix(const SparseTrustMatrix& pattern, std::vector<double> values)
    : pattern_(&pattern), values_(std::move(values)) {
  if (values_.size() != pattern.num_observations()) {
    throw ValidationError("residual values do not match the sparsity pattern");
  }
}

}  // namespace matrust
