#include "cfsec/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cfsec/errors.hpp"

namespace cfsec {

GroupingPlan GroupingPlan::from_strong_sets(std::vector<std::vector<int>> strong, int num_users) {
  GroupingPlan g;
  const int n_ap = static_cast<int>(strong.size());
  g.delta = Eigen::MatrixXi::Zero(n_ap, num_users);
  g.weak.resize(n_ap);
  g.zf_servers.resize(num_users);
  g.mrt_servers.resize(num_users);
  for (int l = 0; l < n_ap; ++l) {
    std::sort(strong[l].begin(), strong[l].end());
    for (int k : strong[l]) {
      if (k < 0 || k >= num_users) throw InvalidArgument("grouping: user index out of range");
      if (g.delta(l, k)) throw InvalidArgument("grouping: duplicate strong user");
      g.delta(l, k) = 1;
    }
    for (int k = 0; k < num_users; ++k) {
      if (g.delta(l, k)) {
        g.zf_servers[k].push_back(l);
      } else {
        g.weak[l].push_back(k);
        g.mrt_servers[k].push_back(l);
      }
    }
  }
  g.strong = std::move(strong);
  return g;
}

GroupingPlan build_grouping(const LargeScaleState& large_scale, double threshold_quantile,
                            int antennas_per_ap) {
  if (!(threshold_quantile >= 0.0 && threshold_quantile <= 1.0))
    throw InvalidArgument("build_grouping: threshold_quantile must lie in [0, 1]");
  const int n_ap = large_scale.num_aps();
  const int n_user = large_scale.num_users();
  const int cap = std::max(antennas_per_ap - 1, 0);
  std::vector<std::vector<int>> strong(n_ap);
  std::vector<int> order(n_user);
  for (int l = 0; l < n_ap; ++l) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return large_scale.beta(l, a) > large_scale.beta(l, b);
    });
    double total = 0.0;
    for (int k : order) total += large_scale.beta(l, k);
    const double target = (1.0 - threshold_quantile) * total;
    double cumulative = 0.0;
    for (int k : order) {
      if (!(cumulative < target)) break;
      strong[l].push_back(k);
      cumulative += large_scale.beta(l, k);
    }
    if (static_cast<int>(strong[l].size()) > cap) strong[l].resize(cap);
  }
  return GroupingPlan::from_strong_sets(std::move(strong), n_user);
}

GroupingPlan all_weak_grouping(int num_aps, int num_users) {
  return GroupingPlan::from_strong_sets(std::vector<std::vector<int>>(num_aps), num_users);
}

GroupingPlan all_strong_grouping(int num_aps, int num_users, int antennas_per_ap) {
  if (antennas_per_ap <= num_users) throw InvalidArgument("full ZF requires M > K");
  std::vector<int> everyone(num_users);
  std::iota(everyone.begin(), everyone.end(), 0);
  return GroupingPlan::from_strong_sets(std::vector<std::vector<int>>(num_aps, everyone),
                                        num_users);
}

PrecoderSet build_ppzf(const ChannelRealization& realization, const GroupingPlan& grouping,
                       const LargeScaleState& large_scale) {
  const int n_ap = large_scale.num_aps();
  const int n_user = large_scale.num_users();
  PrecoderSet out;
  out.w.resize(n_ap);
  out.modes.resize(static_cast<std::size_t>(n_ap) * n_user);
  for (int l = 0; l < n_ap; ++l) {
    const Eigen::MatrixXcd& hh = realization.h_hat[l];
    const Eigen::Index m = hh.rows();
    const auto& s_set = grouping.strong[l];
    const auto s = static_cast<Eigen::Index>(s_set.size());
    if (s > 0 && s >= m)
      throw InvalidArgument("build_ppzf: AP " + std::to_string(l) + " has |S_l| >= M");
    const double dof = static_cast<double>(m - s);
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(m, n_user);

    Eigen::MatrixXcd hs;
    Eigen::MatrixXcd gram_inv;
    if (s > 0) {
      hs.resize(m, s);
      for (Eigen::Index j = 0; j < s; ++j) hs.col(j) = hh.col(s_set[j]);
      const Eigen::MatrixXcd gram = hs.adjoint() * hs;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      if (!(lo > 0.0) || hi / lo > kMaxGramCondition)
        throw SingularGram("build_ppzf: ill-conditioned strong-user Gram matrix at AP " +
                           std::to_string(l));
      gram_inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                 eig.eigenvectors().adjoint();
      const Eigen::MatrixXcd zf = hs * gram_inv;
      for (Eigen::Index j = 0; j < s; ++j) {
        const int k = s_set[j];
        const double g = large_scale.gamma(l, k);
        w.col(k) = zf.col(j) * std::sqrt(dof * g);
        out.modes[static_cast<std::size_t>(l) * n_user + k] = PrecoderMode::kPzf;
      }
    }
    for (int k : grouping.weak[l]) {
      const double g = large_scale.gamma(l, k);
      out.modes[static_cast<std::size_t>(l) * n_user + k] = PrecoderMode::kPmrt;
      if (!(g > 0.0)) continue;
      Eigen::VectorXcd v = hh.col(k);
      if (s > 0) v -= hs * (gram_inv * (hs.adjoint() * v));
      w.col(k) = v / std::sqrt(dof * g);
    }
    out.w[l] = std::move(w);
  }
  return out;
}

PrecoderSet build_mrt(const ChannelRealization& realization, const LargeScaleState& large_scale) {
  const int n_ap = large_scale.num_aps();
  const int n_user = large_scale.num_users();
  PrecoderSet out;
  out.w.resize(n_ap);
  out.modes.assign(static_cast<std::size_t>(n_ap) * n_user, PrecoderMode::kMrt);
  for (int l = 0; l < n_ap; ++l) {
    const Eigen::MatrixXcd& hh = realization.h_hat[l];
    const double m = static_cast<double>(hh.rows());
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(hh.rows(), n_user);
    for (int k = 0; k < n_user; ++k) {
      const double g = large_scale.gamma(l, k);
      if (g > 0.0) w.col(k) = hh.col(k) / std::sqrt(m * g);
    }
    out.w[l] = std::move(w);
  }
  return out;
}

PrecoderSet build_full_zf(const ChannelRealization& realization,
                          const LargeScaleState& large_scale) {
  const int m = realization.h_hat.empty() ? 0 : static_cast<int>(realization.h_hat[0].rows());
  const auto grouping = all_strong_grouping(large_scale.num_aps(), large_scale.num_users(), m);
  PrecoderSet out = build_ppzf(realization, grouping, large_scale);
  std::fill(out.modes.begin(), out.modes.end(), PrecoderMode::kZf);
  return out;
}

}  // namespace cfsec
