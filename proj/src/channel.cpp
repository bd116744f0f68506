#include "cfsec/channel.hpp"

#include <cmath>

#include "cfsec/errors.hpp"

namespace cfsec {

PilotBook PilotBook::orthonormal(int tau_p, int num_users, int attacked_user) {
  if (tau_p < num_users) throw InvalidArgument("PilotBook: requires tau_p >= K");
  if (attacked_user < 0 || attacked_user >= num_users)
    throw InvalidArgument("PilotBook: attacked user out of range");
  PilotBook book;
  book.phi = Eigen::MatrixXcd::Identity(tau_p, num_users);
  book.attacked_user = attacked_user;
  book.phi_e = book.phi.col(attacked_user);
  return book;
}

namespace {

Eigen::MatrixXcd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double variance,
                                 Engine& rng) {
  ComplexNormal cn;
  Eigen::MatrixXcd out(rows, cols);
  const double s = std::sqrt(variance);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = s * cn(rng);
  return out;
}

}  // namespace

ChannelRealization draw_small_scale(const LargeScaleState& large_scale, const Scenario& scenario,
                                    Engine& rng) {
  const int n_ap = large_scale.num_aps();
  const int n_user = large_scale.num_users();
  const int m = scenario.antennas_per_ap;
  ComplexNormal cn;
  ChannelRealization r;
  r.h.resize(n_ap);
  r.h_e.resize(n_ap);
  for (int l = 0; l < n_ap; ++l) {
    r.h[l].resize(m, n_user);
    for (int k = 0; k < n_user; ++k) {
      const double s = std::sqrt(large_scale.beta(l, k));
      for (int a = 0; a < m; ++a) r.h[l](a, k) = s * cn(rng);
    }
    r.h_e[l] = gaussian_matrix(m, scenario.eav_antennas, large_scale.beta_e(l), rng);
  }
  return r;
}

PilotObservation uplink_training(const ChannelRealization& realization, const PilotBook& pilots,
                                 const Scenario& scenario, Engine& rng, TrainingOptions options) {
  const double user_amp = std::sqrt(scenario.tau_p * scenario.rho_u);
  const double eav_amp = std::sqrt(scenario.tau_p * scenario.rho_e);
  const Eigen::Index tau_p = pilots.phi.rows();
  PilotObservation y(realization.h.size());
  for (std::size_t l = 0; l < realization.h.size(); ++l) {
    const auto& h = realization.h[l];
    Eigen::MatrixXcd yl = user_amp * h * pilots.phi.adjoint();
    if (eav_amp > 0.0) yl += eav_amp * realization.h_e[l].col(0) * pilots.phi_e.adjoint();
    if (options.noise_scale != 0.0)
      yl += options.noise_scale * gaussian_matrix(h.rows(), tau_p, 1.0, rng);
    y[l] = std::move(yl);
  }
  return y;
}

std::vector<Eigen::MatrixXcd> project_pilots(const PilotObservation& y, const PilotBook& pilots) {
  std::vector<Eigen::MatrixXcd> out(y.size());
  for (std::size_t l = 0; l < y.size(); ++l) out[l] = y[l] * pilots.phi;
  return out;
}

double mmse_gain(double beta, double beta_e, bool attacked, const Scenario& scenario) {
  const double tp = scenario.tau_p;
  double den = tp * scenario.rho_u * beta + 1.0;
  if (attacked) den += tp * scenario.rho_e * beta_e;
  if (!(den > 0.0)) throw NumericalError("mmse_estimate: nonpositive MMSE denominator");
  return std::sqrt(tp * scenario.rho_u) * beta / den;
}

void mmse_estimate(const PilotObservation& y, const PilotBook& pilots,
                   const LargeScaleState& large_scale, const Scenario& scenario,
                   ChannelRealization& realization) {
  const auto proj = project_pilots(y, pilots);
  const int n_ap = large_scale.num_aps();
  const int n_user = large_scale.num_users();
  realization.h_hat.resize(n_ap);
  realization.h_err.resize(n_ap);
  for (int l = 0; l < n_ap; ++l) {
    Eigen::MatrixXcd est(proj[l].rows(), n_user);
    for (int k = 0; k < n_user; ++k) {
      const double g = mmse_gain(large_scale.beta(l, k), large_scale.beta_e(l),
                                 k == pilots.attacked_user, scenario);
      est.col(k) = g * proj[l].col(k);
    }
    realization.h_err[l] = realization.h[l] - est;
    realization.h_hat[l] = std::move(est);
  }
}

ChannelRealization draw_estimated_channels(const LargeScaleState& large_scale,
                                           const Scenario& scenario, Engine& rng) {
  ChannelRealization r = draw_small_scale(large_scale, scenario, rng);
  const int n_ap = large_scale.num_aps();
  const int n_user = large_scale.num_users();
  const double user_amp = std::sqrt(scenario.tau_p * scenario.rho_u);
  const double eav_amp = std::sqrt(scenario.tau_p * scenario.rho_e);
  r.h_hat.resize(n_ap);
  r.h_err.resize(n_ap);
  for (int l = 0; l < n_ap; ++l) {
    // N_l phi_k are i.i.d. CN(0, I) across k for orthonormal pilots.
    Eigen::MatrixXcd y = user_amp * r.h[l] + gaussian_matrix(r.h[l].rows(), n_user, 1.0, rng);
    if (eav_amp > 0.0) y.col(0) += eav_amp * r.h_e[l].col(0);
    for (int k = 0; k < n_user; ++k)
      y.col(k) *= mmse_gain(large_scale.beta(l, k), large_scale.beta_e(l), k == 0, scenario);
    r.h_err[l] = r.h[l] - y;
    r.h_hat[l] = std::move(y);
  }
  return r;
}

ChannelRealization draw_estimated_channels_explicit(const LargeScaleState& large_scale,
                                                    const Scenario& scenario,
                                                    const PilotBook& pilots, Engine& rng) {
  ChannelRealization r = draw_small_scale(large_scale, scenario, rng);
  const auto y = uplink_training(r, pilots, scenario, rng);
  mmse_estimate(y, pilots, large_scale, scenario, r);
  return r;
}

}  // namespace cfsec
