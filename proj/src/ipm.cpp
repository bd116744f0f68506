#include "cfsec/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cfsec/errors.hpp"

namespace cfsec {

void HessianParts::reset(Eigen::Index n) {
  diag = Eigen::VectorXd::Zero(n);
  segments.clear();
  low_rank.clear();
  low_rank_weight.clear();
}

void HessianParts::add_segment(Eigen::Index start, Eigen::VectorXd v, double weight) {
  segments.push_back({start, weight, std::move(v)});
}

void HessianParts::add_low_rank(Eigen::VectorXd u, double weight) {
  low_rank.push_back(std::move(u));
  low_rank_weight.push_back(weight);
}

Eigen::VectorXd HessianParts::apply(const Eigen::VectorXd& y) const {
  Eigen::VectorXd out = diag.cwiseProduct(y);
  for (const auto& s : segments) {
    const auto len = s.v.size();
    out.segment(s.start, len) += s.weight * s.v.dot(y.segment(s.start, len)) * s.v;
  }
  for (std::size_t j = 0; j < low_rank.size(); ++j)
    out += low_rank_weight[j] * low_rank[j].dot(y) * low_rank[j];
  return out;
}

Eigen::MatrixXd HessianParts::dense() const {
  Eigen::MatrixXd h = diag.asDiagonal();
  for (const auto& s : segments) {
    const auto len = s.v.size();
    h.block(s.start, s.start, len, len) += s.weight * s.v * s.v.transpose();
  }
  for (std::size_t j = 0; j < low_rank.size(); ++j)
    h += low_rank_weight[j] * low_rank[j] * low_rank[j].transpose();
  return h;
}

namespace {

class BlockInverse {
 public:
  explicit BlockInverse(const HessianParts& h) : h_(h), dinv_(h.diag.cwiseInverse()) {
    for (const auto& s : h.segments) {
      Eigen::VectorXd dv = s.v.cwiseProduct(dinv_.segment(s.start, s.v.size()));
      scale_.push_back(s.weight / (1.0 + s.weight * s.v.dot(dv)));
      dinv_v_.push_back(std::move(dv));
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& y) const {
    Eigen::VectorXd z = dinv_.cwiseProduct(y);
    for (std::size_t i = 0; i < h_.segments.size(); ++i) {
      const auto& s = h_.segments[i];
      const double proj = dinv_v_[i].dot(y.segment(s.start, s.v.size()));
      z.segment(s.start, s.v.size()) -= scale_[i] * proj * dinv_v_[i];
    }
    return z;
  }

 private:
  const HessianParts& h_;
  Eigen::VectorXd dinv_;
  std::vector<Eigen::VectorXd> dinv_v_;
  std::vector<double> scale_;
};

double relative_residual(const HessianParts& h, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& rhs, Eigen::VectorXd& residual) {
  residual = rhs - h.apply(x);
  return residual.norm() / std::max(rhs.norm(), 1e-300);
}

Eigen::VectorXd solve_dense(const HessianParts& h, const Eigen::VectorXd& rhs) {
  Eigen::MatrixXd dense = h.dense();
  const double ridge = 1e-13 * dense.diagonal().cwiseAbs().maxCoeff();
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) dense.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(dense);
    if (ldlt.info() != Eigen::Success) continue;
    Eigen::VectorXd x = ldlt.solve(rhs);
    x += ldlt.solve(rhs - dense * x);
    if (x.allFinite()) return x;
  }
  throw SolverFailure("interior point: Newton system could not be solved");
}

}  // namespace

Eigen::VectorXd solve_structured(const HessianParts& h, const Eigen::VectorXd& rhs) {
  constexpr double kAccept = 1e-9;
  if (!(h.diag.array() > 0.0).all()) return solve_dense(h, rhs);
  const BlockInverse base(h);
  const auto r = static_cast<Eigen::Index>(h.low_rank.size());
  Eigen::MatrixXd base_u(rhs.size(), r);
  for (Eigen::Index j = 0; j < r; ++j) base_u.col(j) = base.apply(h.low_rank[j]);
  Eigen::MatrixXd cap = Eigen::MatrixXd::Identity(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j)
      cap(i, j) += h.low_rank_weight[i] * h.low_rank[i].dot(base_u.col(j));
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(cap);

  auto solve_once = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd x = base.apply(b);
    if (r == 0) return x;
    Eigen::VectorXd s(r);
    for (Eigen::Index i = 0; i < r; ++i) s(i) = h.low_rank_weight[i] * h.low_rank[i].dot(x);
    x -= base_u * lu.solve(s);
    return x;
  };

  Eigen::VectorXd x = solve_once(rhs);
  Eigen::VectorXd residual;
  for (int round = 0; round < 3 && x.allFinite(); ++round) {
    if (relative_residual(h, x, rhs, residual) <= kAccept) return x;
    x += solve_once(residual);
  }
  if (x.allFinite() && relative_residual(h, x, rhs, residual) <= kAccept) return x;
  return solve_dense(h, rhs);
}

namespace {

struct Point {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd slack;  // nonneg entries of x, then -g
  double f0 = 0.0;
};

bool evaluate(const ConvexProgram& p, Point& pt) {
  const Eigen::Index nn = p.num_nonneg();
  Eigen::VectorXd g(p.num_general());
  if (!p.values(pt.x, pt.f0, g)) return false;
  if (!std::isfinite(pt.f0) || !g.allFinite()) return false;
  pt.slack.resize(nn + g.size());
  pt.slack.head(nn) = pt.x.head(nn);
  pt.slack.tail(g.size()) = -g;
  return (pt.slack.array() > 0.0).all();
}

// Lawson-Hanson: argmin ||A z - b|| over z >= 0, for small column counts.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.cols();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * z);
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w(j) > tol && (best < 0 || w(j) > w(best))) best = j;
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t j = 0; j < idx.size(); ++j) ap.col(j) = a.col(idx[j]);
      const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
      bool ok = true;
      for (std::size_t j = 0; j < idx.size(); ++j) ok = ok && zp(j) > 0.0;
      if (ok) {
        z.setZero();
        for (std::size_t j = 0; j < idx.size(); ++j) z(idx[j]) = zp(j);
        break;
      }
      double alpha = 1.0;
      for (std::size_t j = 0; j < idx.size(); ++j)
        if (zp(j) <= 0.0) alpha = std::min(alpha, z(idx[j]) / (z(idx[j]) - zp(j)));
      for (std::size_t j = 0; j < idx.size(); ++j) {
        z(idx[j]) += alpha * (zp(j) - z(idx[j]));
        if (z(idx[j]) <= tol) {
          z(idx[j]) = 0.0;
          passive[idx[j]] = false;
        }
      }
    }
  }
  return z;
}

}  // namespace

IpmResult solve_ipm(const ConvexProgram& p, Eigen::VectorXd x0, const IpmOptions& options) {
  constexpr double kArmijo = 0.01;
  constexpr double kShrink = 0.5;
  const Eigen::Index n = p.dim();
  const Eigen::Index nn = p.num_nonneg();
  const int mg = p.num_general();
  const double m = static_cast<double>(nn + mg);

  Point cur;
  cur.x = std::move(x0);
  if (!evaluate(p, cur)) throw SolverFailure("interior point: start is not strictly feasible");
  const double gap0 = options.initial_gap > 0.0 ? options.initial_gap
                                                : 0.1 * std::max(1.0, std::abs(cur.f0));
  cur.lambda = (gap0 / m) * cur.slack.cwiseInverse();
  if (mg > 0) {
    // Multipliers of the general constraints from a nonnegative least-squares
    // fit of the stationarity condition; the bounds absorb what is left.
    Eigen::VectorXd grad0;
    Eigen::MatrixXd jac;
    p.gradients(cur.x, grad0, jac);
    const Eigen::VectorXd lg = nnls(jac.transpose(), -grad0);
    cur.lambda.tail(mg) = cur.lambda.tail(mg).cwiseMax(lg);
    const Eigen::VectorXd rest = grad0 + jac.transpose() * cur.lambda.tail(mg);
    cur.lambda.head(nn) = cur.lambda.head(nn).cwiseMax(rest.head(nn));
  }

  IpmResult res;
  Eigen::VectorXd grad0, dual;
  Eigen::MatrixXd jac;
  HessianParts h;
  for (int it = 0; it < options.max_iter; ++it) {
    const double gap = cur.lambda.dot(cur.slack);
    p.gradients(cur.x, grad0, jac);
    dual = grad0;
    dual.head(nn) -= cur.lambda.head(nn);
    if (mg > 0) dual += jac.transpose() * cur.lambda.tail(mg);
    res.gap = gap;
    res.dual_residual = dual.norm();
    res.iterations = it;
    if (p.stop_early(cur.x, gap)) {
      res.stopped_early = true;
      break;
    }
    const double grad_scale = std::max(1.0, grad0.norm());
    if (gap <= options.gap_tol && res.dual_residual <= options.residual_tol * grad_scale) {
      res.converged = true;
      break;
    }
    const double t = options.mu * m / gap;

    // Reduced Newton system:
    // (hess f0 + sum lambda_i hess g_i + sum lambda_i / s_i grad g_i grad g_i^T) dx
    //   = -(grad f0 + sum grad g_i / (t s_i))  with the nonneg bounds folded in.
    h.reset(n);
    // Curvature weights never drop below the primal barrier ones, so a
    // nearly active curved constraint with a lagging multiplier still shapes
    // the step.
    const Eigen::VectorXd curv =
        cur.lambda.tail(mg).cwiseMax((1.0 / t) * cur.slack.tail(mg).cwiseInverse());
    p.add_hessian(cur.x, curv, h);
    Eigen::VectorXd rhs = -grad0;
    for (Eigen::Index j = 0; j < nn; ++j) {
      h.diag(j) += cur.lambda(j) / cur.slack(j);
      rhs(j) += 1.0 / (t * cur.slack(j));
    }
    for (int i = 0; i < mg; ++i) {
      const double s = cur.slack(nn + i);
      const double w = cur.lambda(nn + i) / s;
      rhs -= jac.row(i).transpose() / (t * s);
      const auto [start, len] = p.support(i);
      if (len > 0)
        h.add_segment(start, jac.row(i).segment(start, len).transpose(), w);
      else
        h.add_low_rank(jac.row(i).transpose(), w);
    }
    const Eigen::VectorXd dx = solve_structured(h, rhs);

    Eigen::VectorXd ds(nn + mg);
    ds.head(nn) = dx.head(nn);
    if (mg > 0) ds.tail(mg) = -(jac * dx);
    const Eigen::VectorXd dl = (1.0 / t) * cur.slack.cwiseInverse() - cur.lambda -
                               cur.lambda.cwiseQuotient(cur.slack).cwiseProduct(ds);

    double step = 1.0;
    for (Eigen::Index i = 0; i < dl.size(); ++i)
      if (dl(i) < 0.0) step = std::min(step, -cur.lambda(i) / dl(i));
    for (Eigen::Index j = 0; j < nn; ++j)
      if (dx(j) < 0.0) step = std::min(step, -cur.x(j) / dx(j));
    step *= 0.99;

    // Primal barrier merit t f0 - sum log s; dx is a descent direction for
    // it whenever the reduced matrix is positive definite.
    auto merit = [&](const Point& pt) { return t * pt.f0 - pt.slack.array().log().sum(); };
    const double m0 = merit(cur);
    const double slope = -t * rhs.dot(dx);
    Point next;
    bool moved = false;
    while (step > 1e-14) {
      next.x = cur.x + step * dx;
      next.lambda = cur.lambda + step * dl;
      if (evaluate(p, next) && (next.lambda.array() > 0.0).all() &&
          merit(next) <= m0 + kArmijo * step * std::min(slope, 0.0)) {
        moved = true;
        break;
      }
      step *= kShrink;
    }
    if (!moved) break;
    cur = std::move(next);
  }
  if (!res.converged && !res.stopped_early) {
    p.gradients(cur.x, grad0, jac);
    dual = grad0;
    dual.head(nn) -= cur.lambda.head(nn);
    if (mg > 0) dual += jac.transpose() * cur.lambda.tail(mg);
    res.gap = cur.lambda.dot(cur.slack);
    res.dual_residual = dual.norm();
  }
  res.x = cur.x;
  res.lambda = cur.lambda;
  return res;
}

}  // namespace cfsec
