#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "matrust/predict.hpp"
#include "matrust/solver.hpp"
#include "matrust/synthetic.hpp"

using namespace matrust;
using namespace matrust::fixtures;

namespace {

// Average ranks (ties share the mean rank).
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(ra.size());
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(rb.size());
  double num = 0, da = 0, db = 0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    num += (ra[k] - ma) * (rb[k] - mb);
    da += (ra[k] - ma) * (ra[k] - ma);
    db += (rb[k] - mb) * (rb[k] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("example stereotypes predict the unseen ratings") {
  const auto m = example_model();
  CHECK(predict_pair(m, kCarol, kAlice) == 0.5);
  CHECK(predict_pair(m, kDavid, kElva) == 1.0);
  CHECK(predict_pair(m, kElva, kDavid) == 1.0);
}

TEST_CASE("pure global bias") {
  FactorModel m;
  m.F0 = Matrix::Zero(4, 2);
  m.G0 = Matrix::Zero(4, 2);
  m.alpha = Coefficients(1, 0, 0);
  m.bias = BiasTerms::zeros(4);
  m.bias.mu = 0.6;
  m.bias.x.setConstant(0.3);
  for (UserIndex u = 0; u < 4; ++u)
    for (UserIndex v = 0; v < 4; ++v)
      if (u != v) CHECK(predict_pair(m, u, v) == 0.6);
}

TEST_CASE("invalid pairs") {
  const auto m = example_model();
  CHECK_THROWS_AS(predict_pair(m, kBob, kBob), ValidationError);
  CHECK_THROWS_AS(predict_pair(m, 5, kBob), ValidationError);
  try {
    predict_batch(m, {{0, 1}, {2, 3}, {4, 4}, {9, 1}});
    FAIL("expected BatchError");
  } catch (const BatchError& e) {
    CHECK(e.position() == 2);
  }
}

TEST_CASE("batch prediction") {
  const auto m = example_model();
  CHECK(predict_batch(m, {}).empty());
  const auto out = predict_batch(m, {{kCarol, kAlice}, {kDavid, kElva}, {kCarol, kAlice}});
  REQUIRE(out.size() == 3);
  CHECK(out[0] == 0.5);
  CHECK(out[1] == 1.0);
  CHECK(out[2] == out[0]);
}

TEST_CASE("clamping and linearity in the coefficients") {
  auto m = example_model();
  m.bias.mu = 0.4;
  m.bias.x.setConstant(0.2);
  m.bias.y.setConstant(-0.1);
  m.alpha = Coefficients(1, 1, 1);
  CHECK(predict_pair(m, kAlice, kBob) == doctest::Approx(1.5));
  CHECK(predict_pair(m, kAlice, kBob, {true}) == 1.0);

  // With clamping off the prediction is affine in each coefficient.
  for (int c = 0; c < 3; ++c) {
    auto lo = m, mid = m, hi = m;
    lo.alpha[c] = -1.0;
    mid.alpha[c] = 0.5;
    hi.alpha[c] = 2.0;
    const double a = predict_pair(lo, kBob, kDavid);
    const double b = predict_pair(mid, kBob, kDavid);
    const double d = predict_pair(hi, kBob, kDavid);
    CHECK((b - a) / 1.5 == doctest::Approx((d - b) / 1.5).epsilon(1e-12));
  }
}

TEST_CASE("objective scores") {
  FactorModel m;
  m.F0 = Matrix::Zero(5, 1);
  m.G0 = Matrix::Zero(5, 1);
  m.alpha = Coefficients(1, 0, 1);
  m.bias = BiasTerms::zeros(5);
  m.bias.mu = 0.5;
  m.bias.y << 0.1, -0.2, 0.0, 0.3, 0.05;
  auto s = objective_scores(m);
  for (Eigen::Index v = 0; v < 5; ++v) CHECK(s[v] == doctest::Approx(0.5 + m.bias.y[v]));

  m.F0.setRandom();
  m.G0.setConstant(0.4);
  m.bias.y.setZero();
  s = objective_scores(m);
  for (Eigen::Index v = 1; v < 5; ++v) CHECK(s[v] == s[0]);
}

TEST_CASE("objective scores rank trustees like their true mean rating") {
  SyntheticSpec spec;
  spec.n = 60;
  spec.rank = 1;
  spec.density = 1.0;
  spec.trustor_bias_sd = 0.08;
  spec.trustee_bias_sd = 0.12;
  spec.factor_sd = 0.2;
  spec.noise_sd = 0.05;
  spec.seed = 12;
  const auto data = generate_synthetic(spec);
  HyperParams hp;
  hp.r = 1;
  const auto model = train(data.observed, hp).model;
  const auto scores = objective_scores(model);

  std::vector<double> got, truth;
  for (UserIndex j = 0; j < spec.n; ++j) {
    double s = 0;
    for (auto k : data.observed.column(j)) s += data.observed.observations()[k].rating;
    truth.push_back(s / static_cast<double>(data.observed.column_size(j)));
    got.push_back(scores[j]);
  }
  CHECK(spearman(got, truth) >= 0.9);
}
