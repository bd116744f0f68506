#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "cfsec/rng.hpp"

namespace cfsec {

/// Static network description. Powers are dimensionless transmit SNRs
/// (transmit power divided by noise power).
struct Scenario {
  int num_aps = 30;            // L
  int antennas_per_ap = 4;     // M
  int num_users = 10;          // K
  int eav_antennas = 1;        // N_E
  double area_side = 1000.0;   // meters
  double r_eav = 100.0;        // eavesdropper radius around user 0, meters
  double rho_u = 0.0;
  double rho_e = 0.0;          // 0 models an absent attacker
  double rho_max = 0.0;
  int tau_p = 10;              // pilot length, samples
  int tau = 200;               // coherence interval, samples
  double bandwidth_hz = 20e6;
  double noise_dbm = -92.0;
  std::uint64_t seed = 1;
  double shadow_std_db = 4.0;

  /// Simulation defaults: 1 km square, 200 mW per AP, 100 mW per user,
  /// eavesdropper at user power, -92 dBm noise, tau_p = K.
  static Scenario defaults();

  /// Throws InvalidArgument when any invariant is violated.
  void validate() const;

  double noise_power_w() const;
};

/// Linear SNR for a transmit power in mW against a noise floor in dBm.
double snr_from_mw(double power_mw, double noise_dbm);

/// Fills rho_u, rho_e and rho_max from physical powers (mW) and noise_dbm.
void set_powers_mw(Scenario& s, double user_mw, double eav_mw, double ap_mw);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Geometry {
  std::vector<Point> ap_positions;
  std::vector<Point> user_positions;
  Point eav_position;
};

/// beta, gamma: L x K (row = AP, column = user). beta_e, gamma_e: length L.
/// Column 0 is the attacked user.
struct LargeScaleState {
  Eigen::MatrixXd beta;
  Eigen::VectorXd beta_e;
  Eigen::MatrixXd gamma;
  Eigen::VectorXd gamma_e;
  Eigen::MatrixXd shadow;  // dB

  int num_aps() const { return static_cast<int>(beta.rows()); }
  int num_users() const { return static_cast<int>(beta.cols()); }
};

/// Minimum-image distance on the torus [0, side)^2.
double wrap_distance(Point a, Point b, double area_side);

/// Log-distance path loss in dB for d in meters. Throws on d <= 0.
double path_loss_db(double distance_m);

/// Path gain (linear) with the distance clamped to at least 1 m.
double path_gain(double distance_m);

/// Shadowing covariance among users of the same AP (dB^2):
/// std^2 * 2^(-zeta / decorrelation_m), with negative eigenvalues clipped.
Eigen::MatrixXd shadow_covariance(std::span<const Point> user_positions,
                                  double area_side, double std_db = 4.0,
                                  double decorrelation_m = 9.0);

/// MMSE estimate variance of an unattacked link.
double estimate_variance_clean(double beta, double tau_p, double rho_u);

/// MMSE estimate variance of the attacked user's link.
double estimate_variance_attacked(double beta, double beta_e, double tau_p,
                                  double rho_u, double rho_e);

/// Variance of the component of the eavesdropper channel aligned with the
/// attacked user's estimate.
double estimate_variance_eav(double beta, double beta_e, double tau_p,
                             double rho_u, double rho_e);

/// Completes a state from explicit gains: gamma and gamma_e follow from
/// (beta, beta_e, tau_p, rho_u, rho_e) with user 0 attacked.
LargeScaleState make_large_scale(Eigen::MatrixXd beta, Eigen::VectorXd beta_e,
                                 const Scenario& scenario,
                                 Eigen::MatrixXd shadow = {});

Geometry draw_geometry(const Scenario& scenario, Engine& rng);

/// Throws InvalidArgument unless every point lies in [0, side)^2, counts match
/// the scenario, and the eavesdropper is within r_eav of user 0.
void validate_geometry(const Scenario& scenario, const Geometry& geometry);

/// Path loss + correlated shadowing (independent across APs; the
/// eavesdropper's shadowing is independent of the users').
LargeScaleState draw_large_scale(const Scenario& scenario,
                                 const Geometry& geometry, Engine& rng);

/// Convenience: geometry and large-scale state from the scenario seed with
/// per-purpose sub-streams for the given drop index.
struct Drop {
  Geometry geometry;
  LargeScaleState large_scale;
};
Drop draw_drop(const Scenario& scenario, std::uint64_t drop_index);

// JSON ingestion. Keys are exactly the field names
// L, M, K, N_E, area_side, r_eav, rho_u, rho_E, rho_max, tau_p, tau,
// bandwidth_hz, noise_dbm, seed, shadow_std_db; unknown keys are rejected.
// Missing keys keep their defaults.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

Geometry geometry_from_json(const nlohmann::json& j);
nlohmann::json geometry_to_json(const Geometry& g);

}  // namespace cfsec
