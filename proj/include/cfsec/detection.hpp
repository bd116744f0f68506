#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfsec/channel.hpp"
#include "cfsec/scenario.hpp"

namespace cfsec {

struct DetectionConfig {
  int n_cb = 277;                 // coherence-bandwidth intervals
  double epsilon = 0.06;
  double majority_fraction = 0.5; // 0.5 means a strict majority of APs

  void validate() const;
};

struct DetectionResult {
  Eigen::MatrixXd xi;        // L x K sample pilot power
  Eigen::MatrixXd upsilon;   // xi / (tau_p rho_u beta + 1)
  Eigen::MatrixXi per_ap_flags;
  std::vector<bool> verdict;
  std::optional<int> flagged_user;
};

/// Pilot projections of every subband: [n][l] is the M x K matrix y_{l,k}(n).
using SubbandProjections = std::vector<std::vector<Eigen::MatrixXcd>>;

/// Independent small-scale fading and noise per subband, the eavesdropper
/// (when rho_E > 0) replaying user 0's pilot.
SubbandProjections observe_pilots(const LargeScaleState& large_scale,
                                  const Scenario& scenario, int n_cb, Engine& rng);

/// xi_{l,k} = sum_n ||y_{l,k}(n)||^2 / (M N_cb). Throws on empty input.
Eigen::MatrixXd sample_pilot_power(const SubbandProjections& projections);

/// Expected pilot power per (l, k) under the clean hypothesis.
Eigen::MatrixXd clean_pilot_power(const LargeScaleState& large_scale, const Scenario& scenario);

/// Ratios, per-AP flags |upsilon - 1| > epsilon and majority verdicts.
/// A user is declared attacked when the flagging fraction exceeds 1/2 and
/// reaches majority_fraction. Throws Ambiguous if several users are declared.
DetectionResult decide(const Eigen::MatrixXd& xi, const LargeScaleState& large_scale,
                       const Scenario& scenario, const DetectionConfig& config);

/// As decide, but never throws Ambiguous; flagged_user is empty unless
/// exactly one user is declared.
DetectionResult decide_all(const Eigen::MatrixXd& xi, const LargeScaleState& large_scale,
                           const Scenario& scenario, const DetectionConfig& config);

/// Attacked user declared and no clean user declared.
bool correct_detection(const DetectionResult& result, int attacked_user);

struct DetectionPoint {
  double epsilon = 0.0;
  double probability = 0.0;
  int n_trials = 0;
};

struct SweepOptions {
  int n_trials = 1000;
  int threads = 1;
};

/// Each trial draws a fresh drop (draw_drop with the trial index) and fresh
/// subband observations; every epsilon is evaluated on the same trials.
std::vector<DetectionPoint> sweep_threshold(const Scenario& scenario,
                                            const std::vector<double>& epsilons,
                                            const DetectionConfig& config,
                                            const SweepOptions& options);

/// Grid point with the highest probability (first on ties).
std::size_t argmax_point(const std::vector<DetectionPoint>& curve);

std::string detection_csv_header();
std::string detection_csv_rows(const std::vector<DetectionPoint>& curve,
                               const std::string& scenario_id);

}  // namespace cfsec
