#include "cfsec/poweropt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cfsec/ipm.hpp"
#include "cfsec/errors.hpp"

namespace cfsec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Inner solves are inexact; the outer loop re-linearizes anyway.
constexpr int kSubproblemIterations = 30;

bool has_cap(const OptProblem& p) { return std::isfinite(p.theta_e); }

}  // namespace

OptProblem assemble_problem(const LargeScaleState& ls, const GroupingPlan& grouping,
                            const Eigen::VectorXd& theta, double theta_e, double rho_max,
                            int antennas_per_ap, int eav_antennas, Eigen::MatrixXi free) {
  const int n_ap = ls.num_aps();
  const int n_user = ls.num_users();
  if (theta.size() != n_user) throw InvalidArgument("assemble_problem: theta must have K entries");
  for (int k = 1; k < n_user; ++k)
    if (!(theta(k) >= 0.0)) throw InvalidArgument("assemble_problem: QoS floors must be >= 0");
  if (!(theta_e > 0.0)) throw InvalidArgument("assemble_problem: theta_E must be positive");
  if (!(rho_max > 0.0)) throw InvalidArgument("assemble_problem: rho_max must be positive");
  if (eav_antennas < 1) throw InvalidArgument("assemble_problem: N_E must be >= 1");
  if (free.size() == 0) free = Eigen::MatrixXi::Ones(n_ap, n_user);
  if (free.rows() != n_ap || free.cols() != n_user)
    throw InvalidArgument("assemble_problem: free mask must be L x K");

  OptProblem p;
  p.a.resize(n_ap, n_user);
  p.a_diag.resize(n_ap, n_user);
  p.b_e.resize(n_ap);
  p.b_e_diag.resize(n_ap);
  for (int l = 0; l < n_ap; ++l) {
    const double dof = antennas_per_ap - grouping.strong_count(l);
    for (int k = 0; k < n_user; ++k) {
      p.a(l, k) = std::sqrt(std::max(0.0, dof * ls.gamma(l, k)));
      p.a_diag(l, k) =
          std::sqrt(std::max(0.0, ls.beta(l, k) - grouping.delta(l, k) * ls.gamma(l, k)));
    }
    p.b_e(l) = std::sqrt(std::max(0.0, dof * ls.gamma_e(l)));
    p.b_e_diag(l) =
        std::sqrt(std::max(0.0, ls.beta_e(l) - grouping.delta(l, 0) * ls.gamma_e(l)));
  }
  p.theta = theta;
  p.theta_e = theta_e;
  p.rho_max = rho_max;
  p.eav_antennas = eav_antennas;
  p.free = std::move(free);
  return p;
}

double phi_user(const OptProblem& p, const Eigen::MatrixXd& psi, int k) {
  const Eigen::VectorXd power = psi.rowwise().squaredNorm();
  return p.a_diag.col(k).array().square().matrix().dot(power) + 1.0;
}

double phi_eav(const OptProblem& p, const Eigen::MatrixXd& psi) {
  const Eigen::VectorXd others =
      psi.rowwise().squaredNorm() - psi.col(0).array().square().matrix();
  return p.b_e_diag.array().square().matrix().dot(others) + 1.0;
}

double phi_eav_linearized(const OptProblem& p, const Eigen::MatrixXd& psi,
                          const Eigen::MatrixXd& ref) {
  double v = 1.0;
  for (Eigen::Index l = 0; l < psi.rows(); ++l) {
    const double d = p.b_e_diag(l) * p.b_e_diag(l);
    for (Eigen::Index t = 1; t < psi.cols(); ++t)
      v += d * ref(l, t) * (2.0 * psi(l, t) - ref(l, t));
  }
  return v;
}

Eigen::VectorXd sinr_users_psi(const OptProblem& p, const Eigen::MatrixXd& psi) {
  Eigen::VectorXd out(p.num_users());
  for (int k = 0; k < p.num_users(); ++k) {
    const double s = p.a.col(k).dot(psi.col(k));
    out(k) = s * s / phi_user(p, psi, k);
  }
  return out;
}

double sinr_eav_psi(const OptProblem& p, const Eigen::MatrixXd& psi) {
  const double s = p.b_e.dot(psi.col(0));
  const double leak = (p.b_e_diag.array() * psi.col(0).array()).matrix().squaredNorm();
  return (s * s + leak) / phi_eav(p, psi);
}

double quad_over_lin_bound(double x, double y, double xbar, double ybar) {
  const double r = xbar / ybar;
  return 2.0 * r * x - r * r * y;
}

double surrogate_objective(const OptProblem& p, const Eigen::MatrixXd& psi,
                           const Eigen::MatrixXd& ref) {
  return quad_over_lin_bound(p.a.col(0).dot(psi.col(0)), phi_user(p, psi, 0),
                             p.a.col(0).dot(ref.col(0)), phi_user(p, ref, 0));
}

double max_violation(const OptProblem& p, const Eigen::MatrixXd& psi) {
  double v = 0.0;
  for (Eigen::Index l = 0; l < psi.rows(); ++l) {
    v = std::max(v, (psi.row(l).squaredNorm() - p.rho_max) / p.rho_max);
    for (Eigen::Index k = 0; k < psi.cols(); ++k) {
      v = std::max(v, -psi(l, k) / std::sqrt(p.rho_max));
      if (!p.free(l, k)) v = std::max(v, psi(l, k) * psi(l, k) / p.rho_max);
    }
  }
  const Eigen::VectorXd sinr = sinr_users_psi(p, psi);
  for (int k = 1; k < p.num_users(); ++k)
    if (p.theta(k) > 0.0) v = std::max(v, (p.theta(k) - sinr(k)) / p.theta(k));
  if (has_cap(p)) v = std::max(v, p.eav_antennas * sinr_eav_psi(p, psi) - p.theta_e);
  return v;
}

namespace {

// Problem data in the normalized variable x = Psi / sqrt(rho_max), so that
// every budget reads ||x_l||^2 <= 1. Only free entries are optimization
// variables; they are stored row-major.
struct Scaled {
  int n_ap = 0;
  int n_user = 0;
  Eigen::MatrixXd at;  // sqrt(rho_max) a
  Eigen::MatrixXd ct;  // rho_max a_diag^2
  Eigen::VectorXd bt;  // sqrt(rho_max) b_e
  Eigen::VectorXd dt;  // rho_max b_e_diag^2
  Eigen::VectorXd theta;
  double theta_e = kInf;  // per-antenna cap
  std::vector<int> qos;
  Eigen::MatrixXi index;
  std::vector<Eigen::Index> row_start, row_len;
  Eigen::Index n = 0;

  explicit Scaled(const OptProblem& p) {
    n_ap = p.num_aps();
    n_user = p.num_users();
    const double r = p.rho_max;
    at = std::sqrt(r) * p.a;
    ct = r * p.a_diag.array().square().matrix();
    bt = std::sqrt(r) * p.b_e;
    dt = r * p.b_e_diag.array().square().matrix();
    theta = p.theta;
    if (has_cap(p)) theta_e = p.theta_e / p.eav_antennas;
    for (int k = 1; k < n_user; ++k)
      if (p.theta(k) > 0.0) qos.push_back(k);
    index = Eigen::MatrixXi::Constant(n_ap, n_user, -1);
    row_start.resize(n_ap);
    row_len.resize(n_ap);
    for (int l = 0; l < n_ap; ++l) {
      row_start[l] = n;
      for (int k = 0; k < n_user; ++k)
        if (p.free(l, k)) index(l, k) = static_cast<int>(n++);
      row_len[l] = n - row_start[l];
    }
  }

  bool cap() const { return std::isfinite(theta_e); }

  Eigen::MatrixXd unpack(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_ap, n_user);
    for (int l = 0; l < n_ap; ++l)
      for (int k = 0; k < n_user; ++k)
        if (index(l, k) >= 0) m(l, k) = x(index(l, k));
    return m;
  }

  // Writes the free entries of m into out (which may be longer than n).
  void pack_into(const Eigen::MatrixXd& m, Eigen::VectorXd& out) const {
    for (int l = 0; l < n_ap; ++l)
      for (int k = 0; k < n_user; ++k)
        if (index(l, k) >= 0) out(index(l, k)) = m(l, k);
  }

  Eigen::VectorXd pack(const Eigen::MatrixXd& m, Eigen::Index total) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(total);
    pack_into(m, out);
    return out;
  }

  Eigen::MatrixXd column_matrix(const Eigen::VectorXd& v, int k) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_ap, n_user);
    m.col(k) = v;
    return m;
  }

  double eav_numerator(const Eigen::MatrixXd& x) const {
    const double s = bt.dot(x.col(0));
    return s * s + dt.dot(x.col(0).array().square().matrix());
  }

  double phi_e(const Eigen::MatrixXd& x) const {
    return dt.dot(x.rowwise().squaredNorm() - x.col(0).array().square().matrix()) + 1.0;
  }
};

// Affine lower bound of phi_E around xbar: lin_const + <lin, x>.
struct EavLinear {
  Eigen::MatrixXd lin;
  double lin_const = 1.0;

  EavLinear(const Scaled& s, const Eigen::MatrixXd& xbar) {
    lin = Eigen::MatrixXd::Zero(s.n_ap, s.n_user);
    for (int l = 0; l < s.n_ap; ++l)
      for (int t = 1; t < s.n_user; ++t) {
        lin(l, t) = 2.0 * s.dt(l) * xbar(l, t);
        lin_const -= s.dt(l) * xbar(l, t) * xbar(l, t);
      }
  }

  double operator()(const Eigen::MatrixXd& x) const {
    return lin_const + (lin.array() * x.array()).sum();
  }
};

enum class Mode { kMaxSinr, kMinEavGap, kPhaseOne };

// One convex program over the free entries of x (row-major), linearized at
// xbar where needed:
//   kMaxSinr   maximize the SINR_0 surrogate s.t. budgets, QoS, cap
//   kMinEavGap minimize num_E / theta_E - phi_E^lin s.t. budgets, QoS
//   kPhaseOne  minimize sigma s.t. budgets, sqrt(phi_k) - a_k^T x_k / sqrt(theta_k) <= sigma
// In kPhaseOne an extra last variable tau = sigma_max - sigma >= 0 is used.
class Surrogate final : public ConvexProgram {
 public:
  Surrogate(const Scaled& s, Mode mode, const Eigen::MatrixXd& xbar, double sigma_max = 0.0)
      : s_(s), mode_(mode), eav_(s, xbar), sigma_max_(sigma_max) {
    const double sig = s.at.col(0).dot(xbar.col(0));
    const double phi = s.ct.col(0).dot(xbar.rowwise().squaredNorm()) + 1.0;
    a_coef_ = 2.0 * sig / phi;
    b_coef_ = (sig / phi) * (sig / phi);
    for (int l = 0; l < s.n_ap; ++l)
      if (s.row_len[l] > 0) budget_rows_.push_back(l);
    with_cap_ = mode == Mode::kMaxSinr && s.cap();
  }

  Eigen::Index dim() const override { return s_.n + (mode_ == Mode::kPhaseOne ? 1 : 0); }
  Eigen::Index num_nonneg() const override { return dim(); }
  int num_general() const override {
    return static_cast<int>(budget_rows_.size() + s_.qos.size()) + (with_cap_ ? 1 : 0);
  }

  double sigma(const Eigen::VectorXd& z) const { return sigma_max_ - z(s_.n); }

  bool values(const Eigen::VectorXd& z, double& f0, Eigen::VectorXd& g) const override {
    const Eigen::MatrixXd x = s_.unpack(z);
    const Eigen::VectorXd power = x.rowwise().squaredNorm();
    int i = 0;
    for (int l : budget_rows_) g(i++) = power(l) - 1.0;
    const double shift = mode_ == Mode::kPhaseOne ? sigma(z) : 0.0;
    for (int k : s_.qos)
      g(i++) = std::sqrt(s_.ct.col(k).dot(power) + 1.0) -
               s_.at.col(k).dot(x.col(k)) / std::sqrt(s_.theta(k)) - shift;
    if (with_cap_) {
      const double lin = eav_(x);
      if (!(lin > 0.0)) return false;
      g(i++) = std::sqrt(s_.eav_numerator(x)) - std::sqrt(s_.theta_e * lin);
    }
    switch (mode_) {
      case Mode::kMaxSinr:
        f0 = -a_coef_ * s_.at.col(0).dot(x.col(0)) + b_coef_ * (s_.ct.col(0).dot(power) + 1.0);
        break;
      case Mode::kMinEavGap:
        f0 = s_.eav_numerator(x) / s_.theta_e - eav_(x);
        break;
      case Mode::kPhaseOne:
        f0 = sigma(z);
        break;
    }
    return true;
  }

  void gradients(const Eigen::VectorXd& z, Eigen::VectorXd& grad0,
                 Eigen::MatrixXd& jac) const override {
    const Eigen::Index dim = this->dim();
    const Eigen::MatrixXd x = s_.unpack(z);
    const Eigen::VectorXd power = x.rowwise().squaredNorm();
    jac.setZero(num_general(), dim);
    int i = 0;
    for (int l : budget_rows_) {
      Eigen::MatrixXd row = Eigen::MatrixXd::Zero(s_.n_ap, s_.n_user);
      row.row(l) = 2.0 * x.row(l);
      jac.row(i++) = s_.pack(row, dim).transpose();
    }
    for (int k : s_.qos) {
      const double root = std::sqrt(s_.ct.col(k).dot(power) + 1.0);
      Eigen::MatrixXd gk = (s_.ct.col(k).asDiagonal() * x) / root;
      gk.col(k) -= s_.at.col(k) / std::sqrt(s_.theta(k));
      Eigen::VectorXd v = s_.pack(gk, dim);
      if (mode_ == Mode::kPhaseOne) v(s_.n) = 1.0;
      jac.row(i++) = v.transpose();
    }
    if (with_cap_) jac.row(i++) = s_.pack(cap_gradient(x), dim).transpose();

    switch (mode_) {
      case Mode::kMaxSinr: {
        Eigen::MatrixXd g = 2.0 * b_coef_ * (s_.ct.col(0).asDiagonal() * x);
        g.col(0) -= a_coef_ * s_.at.col(0);
        grad0 = s_.pack(g, dim);
        break;
      }
      case Mode::kMinEavGap:
        grad0 = s_.pack(eav_gradient(x), dim);
        break;
      case Mode::kPhaseOne:
        grad0 = Eigen::VectorXd::Zero(dim);
        grad0(s_.n) = -1.0;
        break;
    }
  }

  void add_hessian(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
                   HessianParts& h) const override {
    const Eigen::Index dim = this->dim();
    const Eigen::MatrixXd x = s_.unpack(z);
    const Eigen::VectorXd power = x.rowwise().squaredNorm();
    Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(s_.n_ap, s_.n_user);
    double cap_weight = 0.0;
    if (mode_ == Mode::kMaxSinr)
      for (int l = 0; l < s_.n_ap; ++l) dm.row(l).array() += 2.0 * b_coef_ * s_.ct(l, 0);
    if (mode_ == Mode::kMinEavGap) cap_weight += 1.0;
    int i = 0;
    for (int l : budget_rows_) dm.row(l).array() += 2.0 * lambda(i++);
    for (int k : s_.qos) {
      const double lam = lambda(i++);
      const double phi = s_.ct.col(k).dot(power) + 1.0;
      const double root = std::sqrt(phi);
      for (int l = 0; l < s_.n_ap; ++l) dm.row(l).array() += lam * s_.ct(l, k) / root;
      h.add_low_rank(s_.pack(s_.ct.col(k).asDiagonal() * x, dim), -lam / (phi * root));
    }
    if (with_cap_) {
      // sqrt(num) - sqrt(theta' phi^lin)
      const double lam = lambda(i++);
      const double num = s_.eav_numerator(x);
      const double root = std::sqrt(num);
      const double lin = eav_(x);
      dm.col(0) += lam * s_.dt / root;
      h.add_low_rank(s_.pack(s_.column_matrix(s_.bt, 0), dim), lam / root);
      h.add_low_rank(s_.pack(num_gradient(x), dim), -lam / (4.0 * num * root));
      h.add_low_rank(s_.pack(eav_.lin, dim), lam * std::sqrt(s_.theta_e) / (4.0 * lin * std::sqrt(lin)));
    }
    if (cap_weight > 0.0) {
      dm.col(0) += cap_weight * (2.0 / s_.theta_e) * s_.dt;
      h.add_low_rank(s_.pack(s_.column_matrix(s_.bt, 0), dim), cap_weight * 2.0 / s_.theta_e);
    }
    h.diag += s_.pack(dm, dim);
  }

  std::pair<Eigen::Index, Eigen::Index> support(int i) const override {
    if (i < static_cast<int>(budget_rows_.size())) {
      const int l = budget_rows_[i];
      return {s_.row_start[l], s_.row_len[l]};
    }
    return {0, 0};
  }

  bool stop_early(const Eigen::VectorXd& z, double gap) const override {
    if (mode_ == Mode::kPhaseOne) {
      const double sg = sigma(z);
      return sg < 0.0 && gap <= -sg;
    }
    if (mode_ == Mode::kMinEavGap) {
      const Eigen::MatrixXd x = s_.unpack(z);
      const double excess = s_.eav_numerator(x) / s_.theta_e - s_.phi_e(x);
      return excess < 0.0 && gap <= -excess;
    }
    return false;
  }

 private:
  Eigen::MatrixXd num_gradient(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(s_.n_ap, s_.n_user);
    g.col(0) = 2.0 * (s_.bt.dot(x.col(0)) * s_.bt + s_.dt.cwiseProduct(x.col(0)));
    return g;
  }

  // Gradient of num_E / theta_E - phi_E^lin.
  Eigen::MatrixXd eav_gradient(const Eigen::MatrixXd& x) const {
    return num_gradient(x) / s_.theta_e - eav_.lin;
  }

  Eigen::MatrixXd cap_gradient(const Eigen::MatrixXd& x) const {
    return num_gradient(x) / (2.0 * std::sqrt(s_.eav_numerator(x))) -
           (std::sqrt(s_.theta_e) / (2.0 * std::sqrt(eav_(x)))) * eav_.lin;
  }

  const Scaled& s_;
  Mode mode_;
  EavLinear eav_;
  double sigma_max_;
  double a_coef_ = 0.0;
  double b_coef_ = 0.0;
  std::vector<int> budget_rows_;
  bool with_cap_ = false;
};

double qos_margin(const Scaled& s, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd power = x.rowwise().squaredNorm();
  double worst = -kInf;
  for (int k : s.qos)
    worst = std::max(worst, std::sqrt(s.ct.col(k).dot(power) + 1.0) -
                                s.at.col(k).dot(x.col(k)) / std::sqrt(s.theta(k)));
  return worst;
}

bool strictly_feasible(const ConvexProgram& prog, const Eigen::VectorXd& z) {
  double f0 = 0.0;
  Eigen::VectorXd g(prog.num_general());
  return (z.head(prog.num_nonneg()).array() > 0.0).all() && prog.values(z, f0, g) &&
         (g.array() < 0.0).all();
}

Eigen::MatrixXd to_psi(const Scaled& s, const OptProblem& p, const Eigen::VectorXd& flat) {
  return std::sqrt(p.rho_max) * s.unpack(flat.head(s.n));
}

}  // namespace

SubproblemResult solve_subproblem(const OptProblem& p, const Eigen::MatrixXd& psi_prev) {
  const Scaled s(p);
  if (psi_prev.rows() != s.n_ap || psi_prev.cols() != s.n_user)
    throw InvalidArgument("solve_subproblem: psi has the wrong shape");
  const Eigen::MatrixXd xbar = psi_prev / std::sqrt(p.rho_max);
  SubproblemResult out;
  out.psi = psi_prev;
  out.objective = surrogate_objective(p, psi_prev, psi_prev);
  const Surrogate program(s, Mode::kMaxSinr, xbar);
  const Eigen::VectorXd x0 = s.pack(xbar, s.n);
  if (!strictly_feasible(program, x0))
    throw Infeasible("solve_subproblem: linearization point is not strictly feasible");
  if (!(s.at.col(0).dot(xbar.col(0)) > 0.0)) return out;

  const double scale = std::max(1.0, std::abs(out.objective));
  IpmOptions opt;
  opt.gap_tol = 1e-7 * scale;
  opt.max_iter = kSubproblemIterations;
  const IpmResult r = solve_ipm(program, x0, opt);
  const Eigen::MatrixXd psi = to_psi(s, p, r.x);
  const double value = surrogate_objective(p, psi, psi_prev);
  out.duality_gap = r.gap;
  out.dual_residual = r.dual_residual;
  out.iterations = r.iterations;
  if (value >= out.objective) {
    out.psi = psi;
    out.objective = value;
  }
  return out;
}

Eigen::MatrixXd find_feasible_start(const OptProblem& p, int max_init_iter) {
  const Scaled s(p);
  Eigen::VectorXd flat(s.n);
  for (int l = 0; l < s.n_ap; ++l)
    for (int k = 0; k < s.n_user; ++k)
      if (s.index(l, k) >= 0)
        flat(s.index(l, k)) = 0.5 / std::sqrt(static_cast<double>(s.row_len[l]));

  if (!s.qos.empty()) {
    const double sigma0 = qos_margin(s, s.unpack(flat));
    if (!(sigma0 < 0.0)) {
      const double sigma_max = sigma0 + 1.0 + std::abs(sigma0);
      const Surrogate phase(s, Mode::kPhaseOne, s.unpack(flat), sigma_max);
      Eigen::VectorXd z(s.n + 1);
      z << flat, sigma_max - (sigma0 + 0.5);
      IpmOptions opt;
      opt.gap_tol = 1e-10 * (std::abs(sigma0) + 1.0);
      const IpmResult r = solve_ipm(phase, z, opt);
      if (!(phase.sigma(r.x) < 0.0))
        throw Infeasible("QoS floors cannot be met within the per-AP budget");
      flat = r.x.head(s.n);
    }
  }

  if (s.cap()) {
    for (int it = 0;; ++it) {
      const Eigen::MatrixXd x = s.unpack(flat);
      if (s.eav_numerator(x) / s.theta_e - s.phi_e(x) < 0.0) break;
      if (it >= max_init_iter)
        throw Infeasible("eavesdropper cap cannot be met together with the QoS floors");
      const Surrogate restore(s, Mode::kMinEavGap, x);
      double f0 = 0.0;
      Eigen::VectorXd g(restore.num_general());
      restore.values(flat, f0, g);
      IpmOptions opt;
      opt.gap_tol = 1e-9 * std::max(1.0, std::abs(f0));
      flat = solve_ipm(restore, flat, opt).x;
    }
  }
  return to_psi(s, p, flat);
}

SCAState path_following(const OptProblem& p, const Eigen::MatrixXd& psi0, double eps_obj,
                        int max_iter) {
  if (!(eps_obj > 0.0) || max_iter < 1)
    throw InvalidArgument("path_following: eps_obj > 0 and max_iter >= 1 required");
  SCAState st;
  st.psi = psi0;
  double current = sinr_users_psi(p, psi0)(0);
  st.objective_trace.push_back(current);
  st.records.push_back({0, current, max_violation(p, psi0), 0.0});
  st.status = ScaStatus::kMaxIter;
  for (int kappa = 1; kappa <= max_iter; ++kappa) {
    const SubproblemResult sub = solve_subproblem(p, st.psi);
    double next = sinr_users_psi(p, sub.psi)(0);
    Eigen::MatrixXd psi = sub.psi;
    if (!(next >= current)) {
      psi = st.psi;
      next = current;
    }
    const double gain = (next - current) / std::max(std::abs(current), 1e-300);
    st.psi = std::move(psi);
    st.kappa = kappa;
    st.objective_trace.push_back(next);
    st.records.push_back({kappa, next, max_violation(p, st.psi), sub.duality_gap});
    current = next;
    if (gain < eps_obj) {
      st.status = ScaStatus::kConverged;
      break;
    }
  }
  return st;
}

std::string sca_trace_csv_header() { return "run_id,iteration,objective,max_violation,duality_gap"; }

std::string sca_trace_csv_rows(const std::string& run_id, const SCAState& state) {
  std::ostringstream os;
  for (const auto& r : state.records)
    os << run_id << ',' << r.iteration << ',' << format_double(r.objective) << ','
       << format_double(r.max_violation) << ',' << format_double(r.duality_gap) << '\n';
  return os.str();
}

OptOutcome optimize_power(const LargeScaleState& ls, const GroupingPlan& grouping,
                          const Scenario& scenario, const PowerMatrix& reference,
                          const OptConfig& config) {
  const int m = scenario.antennas_per_ap;
  const PowerMatrix equal =
      PowerMatrix::equal(ls.num_aps(), ls.num_users(), scenario.rho_max);
  Eigen::VectorXd theta = config.theta_fraction * sinr_users_closed(ls, grouping, equal, m);
  theta(0) = 0.0;
  const Eigen::MatrixXi free = (reference.rho.array() > 0.0).cast<int>();
  OptOutcome out;
  out.problem = assemble_problem(ls, grouping, theta, config.theta_e, scenario.rho_max, m,
                                 scenario.eav_antennas, free);
  const Eigen::MatrixXd psi0 = find_feasible_start(out.problem, config.max_init_iter);
  out.state = path_following(out.problem, psi0, config.eps_obj, config.max_iter);
  out.power.rho = out.state.psi.array().square().matrix();
  return out;
}

}  // namespace cfsec
