#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cfsec/detection.hpp"
#include "cfsec/precoding.hpp"
#include "cfsec/secrecy.hpp"

namespace cfsec {

struct RetransmissionOutcome {
  int n_pr = 1;
  bool detected = false;
  Eigen::VectorXd gamma_pr;  // length L, user 0
  double sinr_user = 0.0;
  double sinr_eav = 0.0;
  double rate_user = 0.0;    // bits/s/Hz
  double rate_eav = 0.0;
  double throughput_user1 = 0.0;  // bits/s
  double throughput_eav = 0.0;
};

/// B (1 - n_pr tau_p / tau) R, clamped at 0. Throws InvalidArgument for
/// tau <= 0.
double throughput(double rate, int n_pr, double tau_p, double tau, double bandwidth);

/// Estimate variance of user 0 after the protocol: the clean value after a
/// retransmission or without an attack, the attacked value after a miss.
Eigen::VectorXd gamma_after_protocol(const LargeScaleState& large_scale,
                                     const Scenario& scenario, int n_pr, bool attacked);

/// User 0's SINR with its estimate variance replaced by gamma_pr.
double sinr_user_retransmitted(const LargeScaleState& large_scale,
                               const GroupingPlan& grouping, const PowerMatrix& power,
                               int antennas_per_ap, const Eigen::VectorXd& gamma_pr);

/// Non-coherent leakage once the eavesdropper's pilot no longer matches:
/// sum_l rho_{l,0} beta_E / (sum_{t>0} sum_l rho_{l,t} beta_E + 1).
double sinr_eav_retransmitted(const LargeScaleState& large_scale, const PowerMatrix& power);

/// Transmit pilots, run detection on user 0 and, when the attack is caught,
/// retransmit with a pilot the eavesdropper does not replay. `detection`
/// forces the detector outcome instead of simulating it. No attack
/// (rho_E = 0) short-circuits to the baseline.
RetransmissionOutcome run_retransmission_protocol(
    const Scenario& scenario, const LargeScaleState& large_scale,
    const GroupingPlan& grouping, const PowerMatrix& power,
    const DetectionConfig& detection_config, Engine& rng,
    std::optional<bool> detection = std::nullopt);

enum class PrecoderKind { kPpzf, kZf, kMrt };

std::string precoder_name(PrecoderKind kind);
PrecoderKind parse_precoder(const std::string& name);

/// Grouping used by each precoder: PPZF from the gain rule, ZF all-strong,
/// MRT all-weak.
GroupingPlan grouping_for(PrecoderKind kind, const LargeScaleState& large_scale,
                          int antennas_per_ap, double threshold_quantile = 0.5);

struct CrossoverPoint {
  double tau_p_over_tau = 0.0;
  double throughput_baseline = 0.0;  // bits/s
  double throughput_retx = 0.0;
};

struct CrossoverCurve {
  PrecoderKind precoder = PrecoderKind::kPpzf;
  std::vector<CrossoverPoint> points;
  std::optional<double> crossover;   // first sign change, linear interpolation
  double detection_rate = 0.0;       // fraction of drops where the attack was caught
  int n_drops = 0;
};

struct CrossoverOptions {
  int n_drops = 100;
  int threads = 1;
  double threshold_quantile = 0.5;
};

/// Mean secrecy throughput B (1 - n_pr tau_p / tau) [R_1 - R_E]^+ per grid
/// point, with and without retransmission. tau_p stays at the scenario
/// value; tau follows from the grid. Powers come from greedy AP selection
/// with equal allocation.
CrossoverCurve crossover_sweep(const Scenario& scenario, PrecoderKind precoder,
                               const std::vector<double>& tau_p_over_tau,
                               const DetectionConfig& detection_config,
                               const CrossoverOptions& options);

std::string crossover_csv_header();
std::string crossover_csv_rows(const CrossoverCurve& curve);

}  // namespace cfsec
