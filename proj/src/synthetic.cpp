#include "matrust/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace matrust {

namespace {

double planted(const SyntheticData& d, UserIndex i, UserIndex j) {
  const auto& s = d.spec;
  return s.alpha[0] * d.planted_bias.mu + s.alpha[1] * d.planted_bias.x[i] +
         s.alpha[2] * d.planted_bias.y[j] + d.F.row(i).dot(d.G.row(j));
}

double maybe_clip(const SyntheticSpec& s, double v) { return s.clip ? std::clamp(v, 0.0, 1.0) : v; }

}  // namespace

double SyntheticData::truth(UserIndex i, UserIndex j) const { return maybe_clip(spec, planted(*this, i, j)); }

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 2) throw ValidationError("synthetic graph needs n >= 2");
  if (spec.rank < 1) throw ValidationError("synthetic rank must be >= 1");
  const std::uint64_t n = spec.n;
  const std::uint64_t total = n * (n - 1);
  std::uint64_t target = spec.num_observations;
  if (target == 0) target = static_cast<std::uint64_t>(std::llround(spec.density * static_cast<double>(total)));
  if (target > total) throw ValidationError("more observations requested than off-diagonal pairs");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticData d;
  d.spec = spec;
  d.planted_bias = BiasTerms::zeros(n);
  d.planted_bias.mu = spec.mu;
  for (std::uint64_t i = 0; i < n; ++i) d.planted_bias.x[i] = spec.trustor_bias_sd * normal(rng);
  for (std::uint64_t i = 0; i < n; ++i) d.planted_bias.y[i] = spec.trustee_bias_sd * normal(rng);
  d.F.resize(n, spec.rank);
  d.G.resize(n, spec.rank);
  for (Eigen::Index k = 0; k < d.F.size(); ++k) d.F.data()[k] = spec.factor_sd * normal(rng);
  for (Eigen::Index k = 0; k < d.G.size(); ++k) d.G.data()[k] = spec.factor_sd * normal(rng);

  // Pair code c in [0, n(n-1)): trustor c / (n-1), trustee skips the diagonal.
  auto decode = [n](std::uint64_t c) {
    const auto i = static_cast<UserIndex>(c / (n - 1));
    auto j = static_cast<UserIndex>(c % (n - 1));
    if (j >= i) ++j;
    return std::pair{i, j};
  };
  std::vector<std::uint64_t> codes;
  codes.reserve(target);
  if (target * 4 >= total) {
    std::vector<std::uint64_t> all(total);
    for (std::uint64_t c = 0; c < total; ++c) all[c] = c;
    for (std::uint64_t k = 0; k < target; ++k) {
      std::uniform_int_distribution<std::uint64_t> pick(k, total - 1);
      std::swap(all[k], all[pick(rng)]);
    }
    codes.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(target));
  } else {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(target * 2);
    std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
    while (codes.size() < target) {
      const auto c = pick(rng);
      if (seen.insert(c).second) codes.push_back(c);
    }
  }

  std::vector<TrustObservation> obs;
  obs.reserve(target);
  for (auto c : codes) {
    const auto [i, j] = decode(c);
    double v = planted(d, i, j);
    if (spec.noise_sd > 0.0) v += spec.noise_sd * normal(rng);
    obs.push_back({i, j, maybe_clip(spec, v)});
  }
  if (!spec.clip) {
    for (const auto& o : obs) {
      if (o.rating < 0.0 || o.rating > 1.0) {
        throw ValidationError("unclipped synthetic rating left [0,1]; lower factor_sd or bias spread");
      }
    }
  }
  d.observed = SparseTrustMatrix(n, std::move(obs));
  return d;
}

}  // namespace matrust
