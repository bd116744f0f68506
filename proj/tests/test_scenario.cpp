#include <doctest.h>

#include <cmath>

#include "cfsec/errors.hpp"
#include "cfsec/scenario.hpp"

using namespace cfsec;

TEST_CASE("path loss follows the log-distance law") {
  CHECK(path_loss_db(1.0) == doctest::Approx(-30.5));
  CHECK(path_loss_db(100.0) == doctest::Approx(-30.5 - 73.4));
  CHECK(path_loss_db(1000.0) == doctest::Approx(-30.5 - 3 * 36.7));
  CHECK_THROWS_AS(path_loss_db(0.0), InvalidArgument);
  CHECK(path_gain(0.2) == doctest::Approx(path_gain(1.0)));
}

TEST_CASE("noise-normalized powers") {
  // 100 mW = 20 dBm, so the SNR is 112 dB above a -92 dBm floor.
  CHECK(snr_from_mw(100.0, -92.0) == doctest::Approx(std::pow(10.0, 11.2)));
  const Scenario s = Scenario::defaults();
  CHECK(s.rho_max / s.rho_u == doctest::Approx(2.0));
  CHECK(s.rho_e == doctest::Approx(s.rho_u));
  CHECK(s.tau_p == s.num_users);
}

TEST_CASE("wrap-around distance uses the minimum image") {
  CHECK(wrap_distance({10, 10}, {990, 990}, 1000) == doctest::Approx(std::hypot(20.0, 20.0)));
  CHECK(wrap_distance({0, 0}, {500, 0}, 1000) == doctest::Approx(500));
  CHECK(wrap_distance({100, 200}, {130, 240}, 1000) == doctest::Approx(50));
}

TEST_CASE("estimate variances") {
  const double beta = 2e-10, beta_e = 5e-11, tp = 4, ru = 1e11, re = 2e11;
  const double snr = tp * ru * beta;
  CHECK(estimate_variance_clean(beta, tp, ru) == doctest::Approx(snr * beta / (snr + 1)));
  const double den = snr + tp * re * beta_e + 1;
  CHECK(estimate_variance_attacked(beta, beta_e, tp, ru, re) == doctest::Approx(snr * beta / den));
  CHECK(estimate_variance_attacked(beta, beta_e, tp, ru, 0.0) ==
        doctest::Approx(estimate_variance_clean(beta, tp, ru)));
  // gamma <= beta for every link.
  CHECK(estimate_variance_clean(beta, tp, ru) < beta);
  CHECK(estimate_variance_eav(beta, beta_e, tp, ru, re) < beta_e);
}

TEST_CASE("shadowing covariance") {
  std::vector<Point> users{{0, 0}, {9, 0}, {500, 500}, {0, 0.5}};
  const Eigen::MatrixXd c = shadow_covariance(users, 1000.0);
  for (int i = 0; i < 4; ++i) CHECK(c(i, i) == doctest::Approx(16.0).epsilon(1e-6));
  CHECK(c(0, 1) == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(std::abs(c(0, 2)) < 1e-6);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("drops are reproducible and respect the geometry") {
  Scenario s = Scenario::defaults();
  s.num_aps = 12;
  s.num_users = 5;
  s.tau_p = 5;
  s.seed = 42;
  const Drop a = draw_drop(s, 3);
  const Drop b = draw_drop(s, 3);
  const Drop c = draw_drop(s, 4);
  CHECK(a.large_scale.beta == b.large_scale.beta);
  CHECK(a.large_scale.beta_e == b.large_scale.beta_e);
  CHECK(a.large_scale.beta != c.large_scale.beta);
  CHECK_NOTHROW(validate_geometry(s, a.geometry));
  CHECK(wrap_distance(a.geometry.eav_position, a.geometry.user_positions[0], s.area_side) <=
        s.r_eav + 1e-9);
  CHECK((a.large_scale.gamma.array() < a.large_scale.beta.array()).all());
  CHECK((a.large_scale.gamma.array() > 0).all());
}

TEST_CASE("shadowing statistics over many drops") {
  Scenario s = Scenario::defaults();
  s.num_aps = 20;
  s.num_users = 4;
  s.tau_p = 4;
  double sum = 0, sq = 0;
  int n = 0;
  for (int d = 0; d < 200; ++d) {
    const Drop drop = draw_drop(s, d);
    for (Eigen::Index i = 0; i < drop.large_scale.shadow.size(); ++i) {
      const double z = drop.large_scale.shadow.data()[i];
      sum += z;
      sq += z * z;
      ++n;
    }
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.3);
  CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("scenario JSON") {
  Scenario s = Scenario::defaults();
  s.num_aps = 7;
  s.eav_antennas = 3;
  s.seed = 99;
  const Scenario back = scenario_from_json(scenario_to_json(s));
  CHECK(back.num_aps == 7);
  CHECK(back.eav_antennas == 3);
  CHECK(back.seed == 99u);
  CHECK(back.rho_max == doctest::Approx(s.rho_max));
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"LL", 3}}), InvalidArgument);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"K", 5}, {"tau_p", 2}}), InvalidArgument);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"L", 0}}), InvalidArgument);
}
