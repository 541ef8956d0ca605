#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "matrust/eval.hpp"
#include "matrust/solver.hpp"
#include "matrust/synthetic.hpp"

using namespace matrust;
using doctest::Approx;

namespace {

SyntheticData planted(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = 120;
  spec.density = 0.12;
  spec.rank = 3;
  spec.trustor_bias_sd = 0.12;
  spec.trustee_bias_sd = 0.12;
  spec.factor_sd = 0.15;
  spec.noise_sd = 0.05;
  spec.seed = seed;
  return generate_synthetic(spec);
}

}  // namespace

TEST_CASE("score") {
  const std::vector<double> t{0.3, 0.6};
  auto s = score(t, t);
  CHECK(s.rmse == 0.0);
  CHECK(s.mae == 0.0);
  s = score(std::vector<double>{0.4, 0.5}, t);
  CHECK(s.rmse == Approx(0.1).epsilon(1e-12));
  CHECK(s.mae == Approx(0.1).epsilon(1e-12));
  s = score(std::vector<double>{0.3, 0.8}, t);
  CHECK(s.rmse == Approx(0.14142135623730950).epsilon(1e-12));
  CHECK(s.mae == Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(score(std::vector<double>{}, std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(score(std::vector<double>{1.0}, t), ValidationError);
}

TEST_CASE("holdout split") {
  const auto data = planted(1);
  const auto& t = data.observed;
  const auto split = make_split(t, 100, 42);
  CHECK(split.test.size() == 100);
  CHECK(split.train.num_observations() + 100 == t.num_observations());
  CHECK(split.train.num_users() == t.num_users());
  std::set<std::pair<UserIndex, UserIndex>> seen;
  for (const auto& o : split.test) {
    CHECK(split.train.find(o.trustor, o.trustee) == SparseTrustMatrix::npos);
    CHECK(t.find(o.trustor, o.trustee) != SparseTrustMatrix::npos);
    seen.emplace(o.trustor, o.trustee);
  }
  CHECK(seen.size() == 100);

  const auto again = make_split(t, 100, 42);
  CHECK(again.test == split.test);
  CHECK(make_split(t, 100, 43).test != split.test);

  const auto none = make_split(t, 0, 1);
  CHECK(none.test.empty());
  CHECK(none.train.num_observations() == t.num_observations());

  const auto all = make_split(t, t.num_observations(), 1);
  CHECK(all.train.num_observations() == 0);
  CHECK_THROWS_AS(train(all.train, HyperParams{}), ValidationError);
  CHECK_THROWS_AS(make_split(t, t.num_observations() + 1, 1), ValidationError);
}

TEST_CASE("evaluate report") {
  const auto data = planted(2);
  EvalConfig config;
  config.holdout = 80;
  config.seed = 4;
  HyperParams hp;
  hp.r = 3;
  hp.m1 = 4;
  hp.m2 = 30;
  auto report = evaluate(data.observed, hp, config);
  CHECK(report.per_pair.size() == 80);
  CHECK(report.rmse >= report.mae);
  CHECK(report.mae > 0.0);
  CHECK(report.rmse < 0.2);

  config.predict.clamp = true;
  const auto clamped = evaluate(data.observed, hp, config);
  for (const auto& p : clamped.per_pair) CHECK((p.prediction >= 0.0 && p.prediction <= 1.0));
  CHECK(clamped.rmse <= 1.0);
  CHECK(clamped.config_hash() != report.config_hash());

  const auto repeat = evaluate(data.observed, hp, EvalConfig{80, 4, {}});
  CHECK(repeat.rmse == report.rmse);
  CHECK(repeat.config_hash() == report.config_hash());

  std::ostringstream text;
  write_report_text(report, text);
  CHECK(text.str().find("rmse=") != std::string::npos);
  CHECK(text.str().find("config_hash=") != std::string::npos);
  const auto j = report_to_json(report, true);
  CHECK(j["pairs"].size() == 80);
  CHECK(j["hp"]["r"] == 3);
}

TEST_CASE("ablation and sweep tables") {
  const auto data = planted(3);
  EvalConfig config{100, 5, {}};
  HyperParams hp;
  hp.r = 3;
  hp.m1 = 4;
  hp.m2 = 30;
  const auto table = run_ablation(data.observed, hp,
                                  {AblationMode::kFull, AblationMode::kNoBias,
                                   AblationMode::kFrozenCoefficients},
                                  config);
  REQUIRE(table.size() == 3);
  CHECK(table[0].label == "full");
  CHECK(table[1].label == "no_bias");
  CHECK(table[2].label == "frozen_coefficients");
  CHECK(table[1].alpha == Coefficients::Zero());
  CHECK(table[2].alpha == Coefficients::Ones());
  for (const auto& r : table) CHECK(r.per_pair.size() == 100);
  CHECK(table[0].per_pair.front().u == table[1].per_pair.front().u);

  const auto one = sweep(data.observed, hp, SweepParam::kRank, {3}, config);
  REQUIRE(one.size() == 1);
  CHECK(one[0].rmse == table[0].rmse);
  CHECK(one[0].label == "r=3");

  const auto lambdas = sweep(data.observed, hp, SweepParam::kLambda, {0.5, 1.0}, config);
  CHECK(lambdas.size() == 2);
  CHECK(lambdas[1].rmse == table[0].rmse);
  CHECK_THROWS_AS(sweep(data.observed, hp, SweepParam::kRank, {}, config), ValidationError);
  CHECK_THROWS_AS(sweep(data.observed, hp, SweepParam::kRank, {2.5}, config), ValidationError);
  CHECK_THROWS_AS(parse_ablation_mode("svd"), ValidationError);
  CHECK(parse_ablation_mode("kbv") == AblationMode::kFrozenCoefficients);
}

TEST_CASE("multi-seed summary") {
  const auto data = planted(4);
  HyperParams hp;
  hp.r = 2;
  hp.m1 = 3;
  hp.m2 = 20;
  const auto s = evaluate_seeds(data.observed, hp, EvalConfig{60, 10, {}}, 3);
  REQUIRE(s.runs.size() == 3);
  CHECK(s.runs[2].config.seed == 12);
  CHECK(s.rmse_min <= s.rmse_mean);
  CHECK(s.rmse_mean <= s.rmse_max);
  CHECK(s.mae_max <= s.rmse_max);
}

TEST_CASE("dataset hash tracks content") {
  const auto a = fixtures::example_matrix();
  SparseTrustMatrix b(5, {{0, 1, 1.0}});
  CHECK(dataset_hash(a) == dataset_hash(fixtures::example_matrix()));
  CHECK(dataset_hash(a) != dataset_hash(b));
}
