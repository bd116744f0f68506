#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "cfsec/detection.hpp"
#include "cfsec/mitigation.hpp"
#include "cfsec/poweropt.hpp"
#include "cfsec/scenario.hpp"

namespace cfsec {

inline constexpr int kCsvSchemaVersion = 1;

/// Exit statuses shared by the CLI verbs.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 2;
inline constexpr int kExitInfeasible = 3;

struct MethodSpec {
  PrecoderKind precoder = PrecoderKind::kPpzf;
  bool selection = false;
  bool optimized = false;

  /// "PPZF/selection/OPA", "MRT/all/EPA", ...
  std::string name() const;
  static MethodSpec parse(const std::string& text);
};

struct ExperimentSpec {
  std::string name = "experiment";
  Scenario scenario = Scenario::defaults();
  std::string sweep_param = "none";  // none, L, M, K, N_E, r
  std::vector<double> sweep_values{0.0};
  int n_drops = 10;
  std::vector<MethodSpec> methods;
  std::string output_path;
  double threshold_quantile = 0.5;
  OptConfig optimizer;

  void validate() const;
};

/// Scenario from its JSON object plus optional physical powers
/// {"ap": mW, "user": mW, "eav": mW}. Powers are converted to SNRs against
/// noise_dbm here and nowhere else; giving both rho_* keys and powers is an
/// error. Without either, the default 200/100/100 mW are used.
Scenario scenario_with_powers(const nlohmann::json& scenario, const nlohmann::json* power_mw);

ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentSpec& spec);

/// Scenario for one grid point. Sweeping K also sets tau_p = K.
Scenario apply_sweep(const Scenario& base, const std::string& param, double value);

struct DropEvaluation {
  double sse = 0.0;
  double sinr_user = 0.0;
  double sinr_eav = 0.0;
  bool infeasible = false;
  std::string trace;  // SCA trace rows when requested
};

/// Closed-form SSE of one method on one drop. Optimizer infeasibility and
/// solver breakdown are reported through `infeasible`.
DropEvaluation evaluate_method(const Scenario& scenario, const LargeScaleState& large_scale,
                               const MethodSpec& method, double threshold_quantile,
                               const OptConfig& optimizer, bool trace = false,
                               const std::string& run_id = {});

struct ResultRow {
  std::string grid_param;
  double value = 0.0;
  std::string method;
  double mean_sse = 0.0;
  double stderr_sse = 0.0;
  double mean_sinr1 = 0.0;
  double mean_sinr_e = 0.0;
  int n_drops = 0;      // feasible drops behind the means
  std::uint64_t seed = 0;
  int n_infeasible = 0;
};

struct RunOptions {
  int threads = 1;
  bool trace = false;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::string trace_csv;  // header plus rows; empty unless traced

  /// Some row lost more than half of its drops to infeasibility.
  bool infeasible_dominated() const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options);

std::string experiment_csv_header();
std::string experiment_csv(const ExperimentResult& result);

/// Sample mean and standard error (n - 1 normalization; 0 for n < 2).
std::pair<double, double> mean_and_stderr(const std::vector<double>& v);

struct ValidationSpec {
  int n_instances = 20;
  std::size_t n_trials = 100000;
  std::uint64_t seed = 1;
  double tol_user = 0.03;
  double tol_eav = 0.05;
  /// Relative error injected into the closed forms' gamma (negative control).
  double gamma_perturbation = 0.0;
  int eav_antennas = 1;
};

ValidationSpec validation_from_json(const nlohmann::json& j);

struct ValidationRow {
  int instance = 0;
  std::string quantity;  // sinr_user_<k>, sinr_eav, sinr_eav_mrc
  double closed = 0.0;
  double monte_carlo = 0.0;
  double rel_dev = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  double max_dev_user = 0.0;
  double max_dev_eav = 0.0;
  bool passed = true;
};

/// Random small instances (L <= 4, M <= 6, K <= 3) with random grouping
/// thresholds and equal powers; Monte Carlo against the closed forms.
ValidationReport validate_closed_forms(const ValidationSpec& spec, int threads = 1);

std::string validation_csv(const ValidationReport& report);

struct DetectSpec {
  Scenario scenario = Scenario::defaults();
  std::vector<double> epsilons;
  DetectionConfig detection;
  int n_trials = 1000;
  std::string output_path;
};

DetectSpec detect_from_json(const nlohmann::json& j);

struct MitigateSpec {
  Scenario scenario = Scenario::defaults();
  std::vector<double> tau_p_over_tau;
  std::vector<PrecoderKind> precoders{PrecoderKind::kPpzf};
  DetectionConfig detection;
  int n_drops = 100;
  double threshold_quantile = 0.5;
  std::string output_path;
};

MitigateSpec mitigate_from_json(const nlohmann::json& j);

}  // namespace cfsec
