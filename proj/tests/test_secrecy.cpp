#include <doctest.h>

#include <cmath>
#include <complex>

#include "cfsec/errors.hpp"
#include "cfsec/secrecy.hpp"

using namespace cfsec;

namespace {

struct Instance {
  Scenario s;
  LargeScaleState ls;
  GroupingPlan g;
  PowerMatrix p;
};

Instance instance(int eav_antennas = 1) {
  Instance in;
  in.s = Scenario::defaults();
  in.s.num_aps = 2;
  in.s.antennas_per_ap = 3;
  in.s.num_users = 2;
  in.s.tau_p = 2;
  in.s.eav_antennas = eav_antennas;
  in.s.rho_u = 2.0;
  in.s.rho_e = 3.0;
  in.s.rho_max = 2.0;
  Eigen::MatrixXd beta(2, 2);
  beta << 1.0, 0.3, 0.4, 1.2;
  Eigen::VectorXd beta_e(2);
  beta_e << 0.6, 0.2;
  in.ls = make_large_scale(beta, beta_e, in.s);
  in.g = GroupingPlan::from_strong_sets({{0}, {}}, 2);
  in.p.rho.resize(2, 2);
  in.p.rho << 1.2, 0.5, 0.3, 1.4;
  return in;
}

// Ratio-of-expectations SINRs estimated by brute force from explicit
// channels and precoders.
struct Oracle {
  Eigen::VectorXd users;
  double eav = 0.0;
};

Oracle brute_force(const Instance& in, int n, std::uint64_t seed) {
  const int L = 2, K = 2;
  Eigen::MatrixXcd mean(K, K);
  Eigen::MatrixXd power(K, K);
  mean.setZero();
  power.setZero();
  std::complex<double> mean_e = 0.0;
  Eigen::VectorXd power_e = Eigen::VectorXd::Zero(K);
  Engine rng = derive_stream(seed, StreamPurpose::kOracle);
  for (int t = 0; t < n; ++t) {
    const ChannelRealization r = draw_estimated_channels(in.ls, in.s, rng);
    const PrecoderSet w = build_ppzf(r, in.g, in.ls);
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) {
        std::complex<double> y = 0.0;
        for (int l = 0; l < L; ++l) y += std::sqrt(in.p.rho(l, j)) * r.h[l].col(k).dot(w.w[l].col(j));
        mean(k, j) += y / double(n);
        power(k, j) += std::norm(y) / n;
      }
    }
    for (int j = 0; j < K; ++j) {
      std::complex<double> y = 0.0;
      for (int l = 0; l < L; ++l) y += std::sqrt(in.p.rho(l, j)) * r.h_e[l].col(0).dot(w.w[l].col(j));
      power_e(j) += std::norm(y) / n;
      if (j == 0) mean_e += y / double(n);
    }
  }
  Oracle o;
  o.users.resize(K);
  for (int k = 0; k < K; ++k) {
    const double ds = std::norm(mean(k, k));
    o.users(k) = ds / (power.row(k).sum() - ds + 1.0);
  }
  o.eav = power_e(0) / (power_e.sum() - power_e(0) + 1.0);
  return o;
}

}  // namespace

TEST_CASE("closed forms agree with a brute-force oracle") {
  const Instance in = instance();
  const Oracle o = brute_force(in, 60000, 17);
  const Eigen::VectorXd cf = sinr_users_closed(in.ls, in.g, in.p, 3);
  for (int k = 0; k < 2; ++k) CHECK(o.users(k) == doctest::Approx(cf(k)).epsilon(0.03));
  CHECK(o.eav == doctest::Approx(sinr_eav_closed(in.ls, in.g, in.p, 3)).epsilon(0.05));
}

TEST_CASE("library Monte Carlo agrees with the closed forms") {
  const Instance in = instance(3);
  McOptions opt;
  opt.n_trials = 60000;
  opt.seed = 4;
  const McEstimate mc = secrecy_monte_carlo(in.ls, in.g, in.p, in.s, opt);
  const Eigen::VectorXd cf = sinr_users_closed(in.ls, in.g, in.p, 3);
  const double eav = sinr_eav_closed(in.ls, in.g, in.p, 3);
  for (int k = 0; k < 2; ++k) CHECK(mc.sinr_users(k) == doctest::Approx(cf(k)).epsilon(0.03));
  CHECK(mc.sinr_eav == doctest::Approx(eav).epsilon(0.05));
  CHECK(mc.sinr_eav_mrc == doctest::Approx(3 * eav).epsilon(0.05));
  for (int a = 0; a < 3; ++a) CHECK(mc.sinr_eav_per_antenna(a) == doctest::Approx(eav).epsilon(0.05));
}

TEST_CASE("Monte Carlo is thread-count invariant") {
  const Instance in = instance(2);
  McOptions opt;
  opt.n_trials = 5000;
  opt.block_size = 512;
  const McEstimate a = secrecy_monte_carlo(in.ls, in.g, in.p, in.s, opt);
  opt.threads = 3;
  const McEstimate b = secrecy_monte_carlo(in.ls, in.g, in.p, in.s, opt);
  CHECK(a.sinr_users == b.sinr_users);
  CHECK(a.sinr_eav_mrc == b.sinr_eav_mrc);
}

TEST_CASE("zero power gives zero SINR on both paths") {
  Instance in = instance();
  in.p.rho.setZero();
  McOptions opt;
  opt.n_trials = 200;
  const McEstimate mc = secrecy_monte_carlo(in.ls, in.g, in.p, in.s, opt);
  CHECK(sinr_users_closed(in.ls, in.g, in.p, 3).norm() == 0.0);
  CHECK(sinr_eav_closed(in.ls, in.g, in.p, 3) == 0.0);
  CHECK(mc.sinr_users.norm() == 0.0);
  CHECK(mc.sinr_eav == 0.0);
}

TEST_CASE("hand-evaluated closed form") {
  const Instance in = instance();
  const auto& ls = in.ls;
  const auto& r = in.p.rho;
  // User 0 is strong at AP 0 (2 spare antennas) and weak at AP 1 (3).
  const double amp0 = std::sqrt(2 * r(0, 0) * ls.gamma(0, 0)) + std::sqrt(3 * r(1, 0) * ls.gamma(1, 0));
  const double den0 = 1 + r.row(0).sum() * (ls.beta(0, 0) - ls.gamma(0, 0)) + r.row(1).sum() * ls.beta(1, 0);
  CHECK(sinr_users_closed(ls, in.g, in.p, 3)(0) == doctest::Approx(amp0 * amp0 / den0));
  const double ampe = std::sqrt(2 * r(0, 0) * ls.gamma_e(0)) + std::sqrt(3 * r(1, 0) * ls.gamma_e(1));
  const double nume = ampe * ampe + r(0, 0) * (ls.beta_e(0) - ls.gamma_e(0)) + r(1, 0) * ls.beta_e(1);
  const double dene = 1 + r(0, 1) * (ls.beta_e(0) - ls.gamma_e(0)) + r(1, 1) * ls.beta_e(1);
  CHECK(sinr_eav_closed(ls, in.g, in.p, 3) == doctest::Approx(nume / dene));
}

TEST_CASE("secrecy rate and MRC scaling") {
  CHECK(secrecy_rate(3.0, 1.0) == doctest::Approx(1.0));
  CHECK(secrecy_rate(1.0, 3.0) == 0.0);
  const Instance in = instance();
  const double one = sinr_eav_closed(in.ls, in.g, in.p, 3);
  double prev = 1e300;
  for (int n = 1; n <= 6; ++n) {
    CHECK(sinr_eav_mrc(in.ls, in.g, in.p, 3, n) == n * one);
    const double sse = secrecy_report(in.ls, in.g, in.p, 3, n).sse;
    CHECK(sse <= prev);
    prev = sse;
  }
  CHECK_THROWS_AS(sinr_eav_mrc(in.ls, in.g, in.p, 3, 0), InvalidArgument);
}

TEST_CASE("power matrix validation") {
  CHECK_NOTHROW(PowerMatrix::equal(3, 4, 2.0).validate(2.0));
  PowerMatrix p = PowerMatrix::equal(2, 2, 1.0);
  p.rho(0, 0) = 0.6;
  CHECK_THROWS_AS(p.validate(1.0), InvalidArgument);
  p.rho(0, 0) = -0.1;
  CHECK_THROWS_AS(p.validate(1.0), InvalidArgument);
}

TEST_CASE("CSV formatting round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125}) CHECK(std::stod(format_double(v)) == v);
  const auto report = make_report(Eigen::Vector2d(3.0, 1.0), 1.0);
  const std::string row = secrecy_csv_row("s", 1, "m", report);
  CHECK(row.find("s,1,m,") == 0);
}
