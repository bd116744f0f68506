#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cfsec/rng.hpp"
#include "cfsec/scenario.hpp"

namespace cfsec {

/// One small-scale draw. Every per-AP matrix has M rows; user channels have
/// one column per user, eavesdropper channels one column per antenna.
struct ChannelRealization {
  std::vector<Eigen::MatrixXcd> h;      // true channels h_{l,k}
  std::vector<Eigen::MatrixXcd> h_e;    // H_{l,E}, M x N_E
  std::vector<Eigen::MatrixXcd> h_hat;  // MMSE estimates
  std::vector<Eigen::MatrixXcd> h_err;  // h - h_hat

  int num_aps() const { return static_cast<int>(h.size()); }
};

/// Orthonormal pilots: the first K columns of the tau_p x tau_p identity.
/// The eavesdropper replays the attacked user's pilot.
struct PilotBook {
  Eigen::MatrixXcd phi;    // tau_p x K
  int attacked_user = 0;
  Eigen::VectorXcd phi_e;  // equals phi.col(attacked_user)

  static PilotBook orthonormal(int tau_p, int num_users, int attacked_user = 0);
};

/// Received pilot matrices Y_{p,l} (M x tau_p), one per AP.
using PilotObservation = std::vector<Eigen::MatrixXcd>;

/// h_{l,k} = sqrt(beta) g and H_{l,E} = sqrt(beta_E) G with i.i.d. CN(0,1)
/// entries. Estimates are left empty.
ChannelRealization draw_small_scale(const LargeScaleState& large_scale,
                                    const Scenario& scenario, Engine& rng);

struct TrainingOptions {
  /// Multiplies the receiver noise; 0 gives noiseless training.
  double noise_scale = 1.0;
};

/// Simulates the spoofed uplink training phase. The eavesdropper transmits
/// the attacked user's pilot from its first antenna with SNR rho_E.
PilotObservation uplink_training(const ChannelRealization& realization,
                                 const PilotBook& pilots,
                                 const Scenario& scenario, Engine& rng,
                                 TrainingOptions options = {});

/// y_{l,k} = Y_{p,l} phi_k stacked as M x K per AP.
std::vector<Eigen::MatrixXcd> project_pilots(const PilotObservation& y,
                                             const PilotBook& pilots);

/// Linear MMSE gain applied to y_{l,k}.
double mmse_gain(double beta, double beta_e, bool attacked,
                 const Scenario& scenario);

/// Fills h_hat and h_err from received pilots. Throws NumericalError when
/// an MMSE denominator is nonpositive.
void mmse_estimate(const PilotObservation& y, const PilotBook& pilots,
                   const LargeScaleState& large_scale,
                   const Scenario& scenario, ChannelRealization& realization);

/// Same joint distribution as draw_small_scale + uplink_training +
/// mmse_estimate, drawn directly in the pilot-projection domain
/// (y_{l,k} = sqrt(tau_p rho_u) h + [k attacked] sqrt(tau_p rho_E) h_E + n)
/// without forming the tau_p-column pilot matrices.
ChannelRealization draw_estimated_channels(const LargeScaleState& large_scale,
                                           const Scenario& scenario,
                                           Engine& rng);

/// Explicit path: small-scale draw, training, estimation.
ChannelRealization draw_estimated_channels_explicit(
    const LargeScaleState& large_scale, const Scenario& scenario,
    const PilotBook& pilots, Engine& rng);

}  // namespace cfsec
