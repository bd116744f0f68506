#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cfsec/precoding.hpp"
#include "cfsec/scenario.hpp"
#include "cfsec/secrecy.hpp"

namespace cfsec {

struct SelectionResult {
  std::vector<int> ordered_aps;  // by zeta = beta_{l,0} / beta_{l,E}, descending
  std::vector<double> zeta;      // indexed by AP
  std::vector<int> chosen;       // admitted APs in order of consideration
  std::vector<double> sse_trace; // SSE after each admission, strictly increasing
  double sse = 0.0;              // 0 when nothing was admitted
  double baseline_sse = 0.0;     // every AP serving user 0

  std::vector<bool> membership(int num_aps) const;
};

/// Maps the set of APs serving user 0 to a power allocation.
using PowerPolicy = std::function<PowerMatrix(const std::vector<bool>& serves_attacked)>;

/// Equal allocation rho_max / K at serving APs. Elsewhere rho_{l,0} = 0 and
/// rho_max is split equally over the other K - 1 users.
PowerMatrix selection_power(int num_aps, int num_users, double rho_max,
                            const std::vector<bool>& serves_attacked);

PowerPolicy equal_power_policy(int num_aps, int num_users, double rho_max);

/// Greedy AP selection for user 0: visit APs by decreasing zeta (ties to the
/// lower index) and keep an AP only when it strictly raises the closed-form
/// SSE. Throws InvalidArgument if some beta_{l,E} <= 0.
SelectionResult greedy_select(const LargeScaleState& large_scale,
                              const GroupingPlan& grouping,
                              const PowerPolicy& policy, int antennas_per_ap,
                              int eav_antennas);

/// Closed-form SSE of one candidate set.
double subset_sse(const LargeScaleState& large_scale, const GroupingPlan& grouping,
                  const PowerPolicy& policy, const std::vector<bool>& serves_attacked,
                  int antennas_per_ap, int eav_antennas);

struct SubsetSearch {
  std::vector<int> best;
  double best_sse = 0.0;
};

/// Exhaustive search over every nonempty subset. Requires L <= 20.
SubsetSearch exhaustive_select(const LargeScaleState& large_scale,
                               const GroupingPlan& grouping,
                               const PowerPolicy& policy, int antennas_per_ap,
                               int eav_antennas);

/// drop_id,n_selected,members,sse,baseline_sse (members joined by ';').
std::string selection_csv_header();
std::string selection_csv_row(const std::string& drop_id, const SelectionResult& result);

}  // namespace cfsec
