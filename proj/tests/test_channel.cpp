#include <doctest.h>

#include <complex>

#include "cfsec/channel.hpp"

using namespace cfsec;

namespace {

Scenario unit_scenario() {
  Scenario s = Scenario::defaults();
  s.num_aps = 2;
  s.antennas_per_ap = 3;
  s.num_users = 2;
  s.tau_p = 2;
  s.rho_u = 1.0;
  s.rho_e = 2.0;
  s.rho_max = 1.0;
  return s;
}

LargeScaleState unit_state(const Scenario& s) {
  Eigen::MatrixXd beta(2, 2);
  beta << 1.0, 0.5, 0.3, 2.0;
  Eigen::VectorXd beta_e(2);
  beta_e << 0.8, 0.4;
  return make_large_scale(beta, beta_e, s);
}

struct Moments {
  Eigen::MatrixXd hat_power;   // E|h_hat|^2 per (l, k), per antenna
  Eigen::MatrixXd err_power;
  Eigen::MatrixXd cross;       // |E[h_hat^* err]|
  Eigen::VectorXd eav_aligned; // |E[h_hat_{l,0}^* h_E]|^2 / E|h_hat_{l,0}|^2
};

template <class Draw>
Moments moments(const LargeScaleState& ls, int m, int n, Draw draw) {
  const int L = ls.num_aps(), K = ls.num_users();
  Moments out{Eigen::MatrixXd::Zero(L, K), Eigen::MatrixXd::Zero(L, K), Eigen::MatrixXd::Zero(L, K),
              Eigen::VectorXd::Zero(L)};
  Eigen::MatrixXcd cross = Eigen::MatrixXcd::Zero(L, K);
  Eigen::VectorXcd eav = Eigen::VectorXcd::Zero(L);
  for (int t = 0; t < n; ++t) {
    const ChannelRealization r = draw(t);
    for (int l = 0; l < L; ++l) {
      for (int k = 0; k < K; ++k) {
        out.hat_power(l, k) += r.h_hat[l].col(k).squaredNorm();
        out.err_power(l, k) += r.h_err[l].col(k).squaredNorm();
        cross(l, k) += r.h_hat[l].col(k).dot(r.h_err[l].col(k));
      }
      eav(l) += r.h_hat[l].col(0).dot(r.h_e[l].col(0));
    }
  }
  const double scale = 1.0 / (static_cast<double>(n) * m);
  out.hat_power *= scale;
  out.err_power *= scale;
  out.cross = (cross * scale).cwiseAbs();
  for (int l = 0; l < L; ++l)
    out.eav_aligned(l) = std::norm(eav(l) * scale) / out.hat_power(l, 0);
  return out;
}

void check_against_closed_forms(const Moments& mo, const LargeScaleState& ls) {
  for (int l = 0; l < ls.num_aps(); ++l) {
    for (int k = 0; k < ls.num_users(); ++k) {
      CHECK(mo.hat_power(l, k) == doctest::Approx(ls.gamma(l, k)).epsilon(0.03));
      CHECK(mo.err_power(l, k) ==
            doctest::Approx(ls.beta(l, k) - ls.gamma(l, k)).epsilon(0.03));
      CHECK(mo.cross(l, k) < 0.02 * ls.beta(l, k));
    }
    CHECK(mo.eav_aligned(l) == doctest::Approx(ls.gamma_e(l)).epsilon(0.06));
  }
}

}  // namespace

TEST_CASE("pilot book is orthonormal and replayed by the eavesdropper") {
  const PilotBook p = PilotBook::orthonormal(4, 3, 0);
  CHECK((p.phi.adjoint() * p.phi - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-15);
  CHECK((p.phi_e - p.phi.col(0)).norm() == 0.0);
}

TEST_CASE("MMSE gain matches the estimate variance") {
  const Scenario s = unit_scenario();
  const double beta = 0.7, beta_e = 0.9;
  const double c = mmse_gain(beta, beta_e, true, s);
  const double var_y = s.tau_p * s.rho_u * beta + s.tau_p * s.rho_e * beta_e + 1.0;
  CHECK(c * c * var_y ==
        doctest::Approx(estimate_variance_attacked(beta, beta_e, s.tau_p, s.rho_u, s.rho_e)));
}

TEST_CASE("explicit training reproduces the MMSE statistics") {
  const Scenario s = unit_scenario();
  const LargeScaleState ls = unit_state(s);
  const PilotBook pilots = PilotBook::orthonormal(s.tau_p, s.num_users);
  const auto mo = moments(ls, s.antennas_per_ap, 20000, [&](int t) {
    Engine rng = derive_stream(5, StreamPurpose::kSmallScale, t);
    return draw_estimated_channels_explicit(ls, s, pilots, rng);
  });
  check_against_closed_forms(mo, ls);
}

TEST_CASE("projection-domain sampler reproduces the MMSE statistics") {
  const Scenario s = unit_scenario();
  const LargeScaleState ls = unit_state(s);
  const auto mo = moments(ls, s.antennas_per_ap, 20000, [&](int t) {
    Engine rng = derive_stream(6, StreamPurpose::kSmallScale, t);
    return draw_estimated_channels(ls, s, rng);
  });
  check_against_closed_forms(mo, ls);
}

TEST_CASE("noiseless training without an attacker recovers the channel") {
  Scenario s = unit_scenario();
  s.rho_e = 0.0;
  s.rho_u = 1e12;
  const LargeScaleState ls = unit_state(s);
  const PilotBook pilots = PilotBook::orthonormal(s.tau_p, s.num_users);
  Engine rng = derive_stream(1, StreamPurpose::kSmallScale);
  ChannelRealization r = draw_small_scale(ls, s, rng);
  const auto y = uplink_training(r, pilots, s, rng, {0.0});
  mmse_estimate(y, pilots, ls, s, r);
  for (int l = 0; l < 2; ++l) CHECK((r.h_hat[l] - r.h[l]).norm() < 1e-9 * r.h[l].norm());
}
