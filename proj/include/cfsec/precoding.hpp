#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cfsec/channel.hpp"
#include "cfsec/scenario.hpp"

namespace cfsec {

/// Per-AP strong/weak partition of the users and its per-user dual view.
struct GroupingPlan {
  std::vector<std::vector<int>> strong;       // S_l, ascending user indices
  std::vector<std::vector<int>> weak;         // W_l
  std::vector<std::vector<int>> zf_servers;   // Z_k, ascending AP indices
  std::vector<std::vector<int>> mrt_servers;  // M_k
  Eigen::MatrixXi delta;                      // L x K, 1 iff k in S_l

  int num_aps() const { return static_cast<int>(strong.size()); }
  int num_users() const { return static_cast<int>(delta.cols()); }
  int strong_count(int ap) const { return static_cast<int>(strong[ap].size()); }

  /// Builds every derived view from the per-AP strong sets.
  static GroupingPlan from_strong_sets(std::vector<std::vector<int>> strong, int num_users);
};

/// Strong users of AP l: the strongest users (by beta, ties to the lower
/// index) whose cumulative gain first reaches (1 - threshold_quantile) of the
/// AP's total gain, then truncated to the M-1 strongest. threshold_quantile
/// = 0 makes every user strong, 1 makes every user weak.
GroupingPlan build_grouping(const LargeScaleState& large_scale,
                            double threshold_quantile, int antennas_per_ap);

/// Every user weak at every AP (PPZF degenerates to MRT).
GroupingPlan all_weak_grouping(int num_aps, int num_users);

/// Every user strong at every AP (full ZF). Requires M > K.
GroupingPlan all_strong_grouping(int num_aps, int num_users, int antennas_per_ap);

enum class PrecoderMode { kPzf, kPmrt, kZf, kMrt };

struct PrecoderSet {
  std::vector<Eigen::MatrixXcd> w;  // per AP, M x K
  std::vector<PrecoderMode> modes;  // row-major L x K

  PrecoderMode mode(int ap, int user) const {
    return modes[static_cast<std::size_t>(ap) * w[ap].cols() + user];
  }
};

/// Gram matrices whose condition number exceeds this are rejected.
inline constexpr double kMaxGramCondition = 1e12;

/// Protective partial ZF: PZF toward S_l, null-space-projected MRT toward
/// W_l, both with the analytic normalization sqrt((M - |S_l|) gamma).
/// Throws SingularGram for ill-conditioned strong-user Gram matrices and
/// InvalidArgument when |S_l| >= M for a nonempty S_l.
PrecoderSet build_ppzf(const ChannelRealization& realization,
                       const GroupingPlan& grouping,
                       const LargeScaleState& large_scale);

/// w = h_hat / sqrt(M gamma).
PrecoderSet build_mrt(const ChannelRealization& realization,
                      const LargeScaleState& large_scale);

/// PPZF with every user strong; requires M > K.
PrecoderSet build_full_zf(const ChannelRealization& realization,
                          const LargeScaleState& large_scale);

}  // namespace cfsec
