#include <doctest.h>

#include "cfsec/detection.hpp"
#include "cfsec/errors.hpp"

using namespace cfsec;

namespace {

Scenario unit_scenario(int l = 5, int k = 3) {
  Scenario s = Scenario::defaults();
  s.num_aps = l;
  s.antennas_per_ap = 2;
  s.num_users = k;
  s.tau_p = k;
  s.rho_u = 1.0;
  s.rho_e = 1.0;
  s.rho_max = 1.0;
  return s;
}

LargeScaleState unit_state(const Scenario& s, double beta_e) {
  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(s.num_aps, s.num_users, 1.0);
  for (int l = 0; l < s.num_aps; ++l) beta(l, 1) = 0.5 + 0.1 * l;
  return make_large_scale(beta, Eigen::VectorXd::Constant(s.num_aps, beta_e), s);
}

}  // namespace

TEST_CASE("config validation") {
  DetectionConfig c;
  CHECK_NOTHROW(c.validate());
  c.epsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.majority_fraction = 0.4;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.n_cb = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("sample pilot power of silent projections is zero") {
  SubbandProjections y(3, std::vector<Eigen::MatrixXcd>(2, Eigen::MatrixXcd::Zero(2, 4)));
  CHECK(sample_pilot_power(y).norm() == 0.0);
  CHECK_THROWS_AS(sample_pilot_power({}), InvalidArgument);
}

TEST_CASE("pilot power is unbiased under both hypotheses") {
  const Scenario s = unit_scenario();
  const LargeScaleState ls = unit_state(s, 0.4);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(5, 3);
  const int n = 400;
  for (int t = 0; t < n; ++t) {
    Engine rng = derive_stream(2, StreamPurpose::kDetection, t);
    mean += sample_pilot_power(observe_pilots(ls, s, 50, rng)) / n;
  }
  const Eigen::MatrixXd clean = clean_pilot_power(ls, s);
  for (int l = 0; l < 5; ++l) {
    CHECK(clean(l, 1) == doctest::Approx(s.tau_p * s.rho_u * ls.beta(l, 1) + 1));
    for (int k = 1; k < 3; ++k) CHECK(mean(l, k) == doctest::Approx(clean(l, k)).epsilon(0.02));
    const double attacked = s.tau_p * (s.rho_u * ls.beta(l, 0) + s.rho_e * ls.beta_e(l)) + 1;
    CHECK(mean(l, 0) == doctest::Approx(attacked).epsilon(0.02));
  }
}

TEST_CASE("estimator variance scales inversely with the number of subbands") {
  const Scenario s = unit_scenario(1, 2);
  const LargeScaleState ls = unit_state(s, 0.4);
  auto variance = [&](int n_cb) {
    double sum = 0, sq = 0;
    const int n = 3000;
    for (int t = 0; t < n; ++t) {
      Engine rng = derive_stream(n_cb, StreamPurpose::kDetection, t);
      const double x = sample_pilot_power(observe_pilots(ls, s, n_cb, rng))(0, 1);
      sum += x;
      sq += x * x;
    }
    return sq / n - (sum / n) * (sum / n);
  };
  const double v20 = variance(20), v40 = variance(40), v10 = variance(10);
  CHECK(v20 / v40 == doctest::Approx(2.0).epsilon(0.2));
  CHECK(v10 / v20 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("decisions on exact expectations") {
  Scenario s = unit_scenario();
  // tau_p rho_E beta_E / (tau_p rho_u beta + 1) = 0.3 for user 0
  const double beta_e = 0.3 * (s.tau_p * 1.0 + 1) / s.tau_p;
  const LargeScaleState ls = unit_state(s, beta_e);
  Eigen::MatrixXd xi = clean_pilot_power(ls, s);
  DetectionConfig cfg;
  auto clean = decide(xi, ls, s, cfg);
  CHECK((clean.upsilon.array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(clean.per_ap_flags.sum() == 0);
  CHECK_FALSE(clean.flagged_user.has_value());

  xi.col(0).array() += s.tau_p * s.rho_e * beta_e;
  const auto attacked = decide(xi, ls, s, cfg);
  CHECK(attacked.upsilon(0, 0) == doctest::Approx(1.3));
  CHECK(attacked.flagged_user == 0);
  CHECK(correct_detection(attacked, 0));
  CHECK_FALSE(correct_detection(clean, 0));

  xi.col(2) *= 1.5;
  CHECK_THROWS_AS(decide(xi, ls, s, cfg), Ambiguous);
  const auto both = decide_all(xi, ls, s, cfg);
  CHECK(both.verdict[0]);
  CHECK(both.verdict[2]);
  CHECK_FALSE(both.flagged_user.has_value());
  CHECK_FALSE(correct_detection(both, 0));
}

TEST_CASE("majority needs more than half of the APs") {
  Scenario s = unit_scenario(4, 2);
  const LargeScaleState ls = unit_state(s, 0.4);
  Eigen::MatrixXd xi = clean_pilot_power(ls, s);
  xi(0, 0) *= 2;
  xi(1, 0) *= 2;
  DetectionConfig cfg;
  CHECK_FALSE(decide(xi, ls, s, cfg).verdict[0]);
  xi(2, 0) *= 2;
  CHECK(decide(xi, ls, s, cfg).verdict[0]);
  cfg.majority_fraction = 1.0;
  CHECK_FALSE(decide(xi, ls, s, cfg).verdict[0]);
}

TEST_CASE("threshold limits of the sweep") {
  Scenario s = Scenario::defaults();
  s.num_aps = 6;
  s.antennas_per_ap = 2;
  s.num_users = 3;
  s.tau_p = 3;
  s.area_side = 300;
  const auto curve = sweep_threshold(s, {1e-4, 0.06, 50.0}, DetectionConfig{}, {60, 1});
  CHECK(curve.size() == 3u);
  CHECK(curve[0].probability < 0.2);
  CHECK(curve[2].probability == 0.0);
  CHECK(curve[1].probability > curve[0].probability);
  CHECK(argmax_point(curve) == 1u);
  const auto again = sweep_threshold(s, {1e-4, 0.06, 50.0}, DetectionConfig{}, {60, 3});
  for (int i = 0; i < 3; ++i) CHECK(again[i].probability == curve[i].probability);
  const std::string rows = detection_csv_rows(curve, "t");
  CHECK(rows.find(",60,t\n") != std::string::npos);
}
