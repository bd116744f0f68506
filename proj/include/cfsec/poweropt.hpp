#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cfsec/precoding.hpp"
#include "cfsec/scenario.hpp"
#include "cfsec/secrecy.hpp"

namespace cfsec {

/// Data of the secure power-allocation problem in the variable
/// Psi = sqrt(rho) (L x K, column k = u_k).
struct OptProblem {
  Eigen::MatrixXd a;       // column k = a_k, entries sqrt((M - |S_l|) gamma_{l,k})
  Eigen::MatrixXd a_diag;  // column k = diag(A_kk), entries sqrt(beta - delta gamma)
  Eigen::VectorXd b_e;     // sqrt((M - |S_l|) gamma_{l,E})
  Eigen::VectorXd b_e_diag;  // diag(B_E), sqrt(beta_{l,E} - delta_{l,0} gamma_{l,E})
  Eigen::VectorXd theta;   // QoS floors; theta(0) unused, 0 disables a floor
  double theta_e = 0.1;    // cap on the eavesdropper's combined SINR; inf disables
  double rho_max = 1.0;
  int eav_antennas = 1;
  Eigen::MatrixXi free;    // 1 where Psi may be nonzero, 0 where it is pinned to 0

  int num_aps() const { return static_cast<int>(a.rows()); }
  int num_users() const { return static_cast<int>(a.cols()); }
};

/// theta_k = 0 drops the floor of user k; negative floors or theta_E <= 0
/// throw InvalidArgument. free defaults to all ones.
OptProblem assemble_problem(const LargeScaleState& large_scale, const GroupingPlan& grouping,
                            const Eigen::VectorXd& theta, double theta_e, double rho_max,
                            int antennas_per_ap, int eav_antennas = 1,
                            Eigen::MatrixXi free = {});

/// phi_k(Psi) = sum_t ||A_kk u_t||^2 + 1.
double phi_user(const OptProblem& p, const Eigen::MatrixXd& psi, int k);
/// phi_E(Psi) = sum_{t != 0} ||B_E u_t||^2 + 1.
double phi_eav(const OptProblem& p, const Eigen::MatrixXd& psi);
/// First-order expansion of phi_E around psi_ref; a global lower bound.
double phi_eav_linearized(const OptProblem& p, const Eigen::MatrixXd& psi,
                          const Eigen::MatrixXd& psi_ref);
/// (a_k^T u_k)^2 / phi_k for every user.
Eigen::VectorXd sinr_users_psi(const OptProblem& p, const Eigen::MatrixXd& psi);
/// Single-antenna ((b_E^T u_0)^2 + ||B_E u_0||^2) / phi_E.
double sinr_eav_psi(const OptProblem& p, const Eigen::MatrixXd& psi);

/// 2 (xbar / ybar) x - (xbar / ybar)^2 y, a lower bound on x^2 / y for
/// positive arguments, tight at (xbar, ybar).
double quad_over_lin_bound(double x, double y, double xbar, double ybar);

/// Concave surrogate of SINR_0 built at psi_ref, evaluated at psi.
double surrogate_objective(const OptProblem& p, const Eigen::MatrixXd& psi,
                           const Eigen::MatrixXd& psi_ref);

/// Largest relative violation of the original constraints: per-AP budget
/// (relative to rho_max), QoS floors (relative to theta_k), and
/// N_E SINR_E - theta_E (absolute). 0 when all hold; pinned entries that
/// are nonzero count as budget violations.
double max_violation(const OptProblem& p, const Eigen::MatrixXd& psi);

struct SubproblemResult {
  Eigen::MatrixXd psi;
  double objective = 0.0;      // surrogate value at psi
  double duality_gap = 0.0;    // surrogate gap, bounds the suboptimality
  double dual_residual = 0.0;  // norm of the Lagrangian gradient
  int iterations = 0;
};

/// Maximizes the surrogate at psi_prev subject to the budgets, the SOC QoS
/// constraints and the convexified cap. psi_prev must be strictly feasible
/// for that subproblem (Infeasible otherwise). If the solver cannot improve
/// on psi_prev, psi_prev is returned.
SubproblemResult solve_subproblem(const OptProblem& p, const Eigen::MatrixXd& psi_prev);

/// Budget + QoS feasibility followed by cap-restoration steps. Throws
/// Infeasible if no strictly feasible point is found within max_init_iter.
Eigen::MatrixXd find_feasible_start(const OptProblem& p, int max_init_iter = 30);

enum class ScaStatus { kConverged, kMaxIter, kInfeasible };

struct ScaIteration {
  int iteration = 0;
  double objective = 0.0;      // SINR_0 at the iterate
  double max_violation = 0.0;
  double duality_gap = 0.0;
};

struct SCAState {
  Eigen::MatrixXd psi;
  int kappa = 0;
  std::vector<double> objective_trace;
  std::vector<ScaIteration> records;
  ScaStatus status = ScaStatus::kMaxIter;
};

SCAState path_following(const OptProblem& p, const Eigen::MatrixXd& psi0,
                        double eps_obj = 1e-4, int max_iter = 50);

std::string sca_trace_csv_header();
std::string sca_trace_csv_rows(const std::string& run_id, const SCAState& state);

struct OptConfig {
  double theta_fraction = 0.5;  // theta_k = fraction * SINR_k under equal allocation
  double theta_e = 0.1;
  double eps_obj = 1e-4;
  int max_iter = 50;
  int max_init_iter = 30;
};

struct OptOutcome {
  PowerMatrix power;
  SCAState state;
  OptProblem problem;
};

/// QoS floors are theta_fraction of each user's equal-allocation SINR;
/// entries with zero reference power stay pinned at zero. Throws Infeasible.
OptOutcome optimize_power(const LargeScaleState& large_scale, const GroupingPlan& grouping,
                          const Scenario& scenario, const PowerMatrix& reference,
                          const OptConfig& config);

}  // namespace cfsec
