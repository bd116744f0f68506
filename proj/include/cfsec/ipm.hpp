#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace cfsec {

/// Symmetric matrix  diag(d) + sum_s w_s v_s v_s^T + sum_j c_j u_j u_j^T,
/// where each v_s lives on a contiguous segment (segments disjoint, w_s > 0)
/// and the u_j are dense with weights of any sign. The total must be
/// positive definite.
struct HessianParts {
  struct Segment {
    Eigen::Index start = 0;
    double weight = 0.0;
    Eigen::VectorXd v;
  };

  Eigen::VectorXd diag;
  std::vector<Segment> segments;
  std::vector<Eigen::VectorXd> low_rank;
  std::vector<double> low_rank_weight;

  void reset(Eigen::Index n);
  void add_segment(Eigen::Index start, Eigen::VectorXd v, double weight);
  void add_low_rank(Eigen::VectorXd u, double weight);
  Eigen::VectorXd apply(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd dense() const;
};

/// Solves H x = rhs with a Sherman-Morrison block inverse plus a Woodbury
/// correction and iterative refinement; falls back to a dense LDLT.
/// Throws SolverFailure when no finite solution is obtained.
Eigen::VectorXd solve_structured(const HessianParts& hess, const Eigen::VectorXd& rhs);

/// minimize f0(x)  s.t.  x_j >= 0 for the first num_nonneg() variables,
///                       g_i(x) < 0 for i < num_general(),
/// with f0 and every g_i convex and twice differentiable.
class ConvexProgram {
 public:
  virtual ~ConvexProgram() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Eigen::Index num_nonneg() const = 0;
  virtual int num_general() const = 0;
  /// Returns false if x is outside the domain of f0 or g.
  virtual bool values(const Eigen::VectorXd& x, double& f0, Eigen::VectorXd& g) const = 0;
  /// grad f0 and the num_general() x dim() Jacobian of g.
  virtual void gradients(const Eigen::VectorXd& x, Eigen::VectorXd& grad0,
                         Eigen::MatrixXd& jac) const = 0;
  /// Adds hess f0 + sum_i lambda_i hess g_i to h, which arrives reset.
  virtual void add_hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                           HessianParts& h) const = 0;
  /// Contiguous support (start, length) of grad g_i; length 0 means dense.
  virtual std::pair<Eigen::Index, Eigen::Index> support(int) const { return {0, 0}; }
  /// Checked after every iteration with the current surrogate gap.
  virtual bool stop_early(const Eigen::VectorXd&, double) const { return false; }
};

struct IpmOptions {
  double gap_tol = 1e-9;        // surrogate duality gap
  double residual_tol = 1e-8;   // dual residual, relative to max(1, |grad f0|)
  double mu = 10.0;
  int max_iter = 200;
  double initial_gap = 0.0;     // 0: 0.1 max(1, |f0(x0)|)
};

struct IpmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;       // nonneg multipliers first, then general ones
  double gap = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stopped_early = false;
};

/// Primal-dual interior-point method started from a strictly feasible x0.
/// Throws SolverFailure if x0 is not strictly feasible or the Newton system
/// cannot be solved.
IpmResult solve_ipm(const ConvexProgram& program, Eigen::VectorXd x0, const IpmOptions& options);

}  // namespace cfsec
