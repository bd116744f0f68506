#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "cfsec/precoding.hpp"
#include "cfsec/scenario.hpp"

namespace cfsec {

/// L x K power-control coefficients rho_{l,k}, normalized by noise power.
struct PowerMatrix {
  Eigen::MatrixXd rho;

  /// rho_max / K everywhere.
  static PowerMatrix equal(int num_aps, int num_users, double rho_max);

  /// Throws InvalidArgument on negative entries or a per-AP sum above
  /// rho_max (1 + rel_tol).
  void validate(double rho_max, double rel_tol = 1e-9) const;
};

struct SecrecyReport {
  Eigen::VectorXd sinr_users;
  double sinr_eav = 0.0;
  Eigen::VectorXd se_users;  // bits/s/Hz
  double se_eav = 0.0;
  double sse = 0.0;          // [R_0 - R_E]^+
};

/// Closed-form SINR of every user (user 0 is the attacked one):
///   (sum_l sqrt((M - |S_l|) rho_{l,k} gamma_{l,k}))^2
///   / (sum_t sum_l rho_{l,t} (beta_{l,k} - delta_{l,k} gamma_{l,k}) + 1).
Eigen::VectorXd sinr_users_closed(const LargeScaleState& large_scale,
                                  const GroupingPlan& grouping,
                                  const PowerMatrix& power,
                                  int antennas_per_ap);

/// Closed-form eavesdropper SINR (single antenna) toward user 0's stream.
double sinr_eav_closed(const LargeScaleState& large_scale,
                       const GroupingPlan& grouping, const PowerMatrix& power,
                       int antennas_per_ap);

/// Maximum-ratio combining over N_E antennas with identical per-antenna
/// statistics: N_E times the single-antenna SINR.
double sinr_eav_mrc(const LargeScaleState& large_scale,
                    const GroupingPlan& grouping, const PowerMatrix& power,
                    int antennas_per_ap, int eav_antennas);

double secrecy_rate(double sinr_user, double sinr_eav);

/// Closed-form report; the eavesdropper uses MRC when N_E > 1.
SecrecyReport secrecy_report(const LargeScaleState& large_scale,
                             const GroupingPlan& grouping,
                             const PowerMatrix& power, int antennas_per_ap,
                             int eav_antennas);

/// Assembles a report from precomputed SINRs.
SecrecyReport make_report(Eigen::VectorXd sinr_users, double sinr_eav);

struct McOptions {
  std::size_t n_trials = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t block_size = 2048;  // trials per RNG sub-stream
};

/// Sample-average estimate of the ratio-of-expectations SINRs: channels,
/// estimates and precoders are redrawn every trial. Eavesdropper antennas
/// beyond the first are drawn with the same coupling to user 0's estimate
/// as the spoofing antenna. Results do not depend on the thread count.
struct McEstimate {
  Eigen::VectorXd sinr_users;
  Eigen::VectorXd sinr_eav_per_antenna;
  double sinr_eav = 0.0;      // first antenna
  double sinr_eav_mrc = 0.0;  // sum over antennas
  std::size_t n_trials = 0;
};

McEstimate secrecy_monte_carlo(const LargeScaleState& large_scale,
                               const GroupingPlan& grouping,
                               const PowerMatrix& power,
                               const Scenario& scenario,
                               const McOptions& options);

Eigen::VectorXd sinr_users_mc(const LargeScaleState& large_scale,
                              const GroupingPlan& grouping,
                              const PowerMatrix& power,
                              const Scenario& scenario,
                              const McOptions& options);

double sinr_eav_mc(const LargeScaleState& large_scale,
                   const GroupingPlan& grouping, const PowerMatrix& power,
                   const Scenario& scenario, const McOptions& options);

/// One CSV row: scenario id, seed, method, per-user SINR and SE,
/// eavesdropper SINR and SE, SSE.
std::string secrecy_csv_header(int num_users);
std::string secrecy_csv_row(const std::string& scenario_id, std::uint64_t seed,
                            const std::string& method,
                            const SecrecyReport& report);

/// Shortest round-trip decimal form used by every CSV writer.
std::string format_double(double v);

}  // namespace cfsec
