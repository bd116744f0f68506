#include "cfsec/selection.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "cfsec/errors.hpp"

namespace cfsec {

std::vector<bool> SelectionResult::membership(int num_aps) const {
  std::vector<bool> in(num_aps, false);
  for (int l : chosen) in[l] = true;
  return in;
}

PowerMatrix selection_power(int num_aps, int num_users, double rho_max,
                            const std::vector<bool>& serves_attacked) {
  if (static_cast<int>(serves_attacked.size()) != num_aps)
    throw InvalidArgument("selection_power: membership size must equal L");
  PowerMatrix p = PowerMatrix::equal(num_aps, num_users, rho_max);
  for (int l = 0; l < num_aps; ++l) {
    if (serves_attacked[l]) continue;
    p.rho(l, 0) = 0.0;
    if (num_users > 1) p.rho.row(l).tail(num_users - 1).setConstant(rho_max / (num_users - 1));
  }
  return p;
}

PowerPolicy equal_power_policy(int num_aps, int num_users, double rho_max) {
  return [=](const std::vector<bool>& in) {
    return selection_power(num_aps, num_users, rho_max, in);
  };
}

double subset_sse(const LargeScaleState& ls, const GroupingPlan& grouping,
                  const PowerPolicy& policy, const std::vector<bool>& serves_attacked,
                  int antennas_per_ap, int eav_antennas) {
  if (std::none_of(serves_attacked.begin(), serves_attacked.end(), [](bool b) { return b; }))
    return 0.0;
  const PowerMatrix p = policy(serves_attacked);
  return secrecy_report(ls, grouping, p, antennas_per_ap, eav_antennas).sse;
}

SelectionResult greedy_select(const LargeScaleState& ls, const GroupingPlan& grouping,
                              const PowerPolicy& policy, int antennas_per_ap,
                              int eav_antennas) {
  const int n_ap = ls.num_aps();
  if (ls.beta_e.size() != n_ap || (ls.beta_e.array() <= 0.0).any())
    throw InvalidArgument("greedy_select: every beta_{l,E} must be positive");
  SelectionResult out;
  out.zeta.resize(n_ap);
  for (int l = 0; l < n_ap; ++l) out.zeta[l] = ls.beta(l, 0) / ls.beta_e(l);
  out.ordered_aps.resize(n_ap);
  std::iota(out.ordered_aps.begin(), out.ordered_aps.end(), 0);
  std::stable_sort(out.ordered_aps.begin(), out.ordered_aps.end(),
                   [&](int a, int b) { return out.zeta[a] > out.zeta[b]; });

  std::vector<bool> in(n_ap, false);
  double best = 0.0;
  for (int l : out.ordered_aps) {
    in[l] = true;
    const double r = subset_sse(ls, grouping, policy, in, antennas_per_ap, eav_antennas);
    if (r > best) {
      best = r;
      out.chosen.push_back(l);
      out.sse_trace.push_back(r);
    } else {
      in[l] = false;
    }
  }
  out.sse = best;
  out.baseline_sse = subset_sse(ls, grouping, policy, std::vector<bool>(n_ap, true),
                                antennas_per_ap, eav_antennas);
  return out;
}

SubsetSearch exhaustive_select(const LargeScaleState& ls, const GroupingPlan& grouping,
                               const PowerPolicy& policy, int antennas_per_ap,
                               int eav_antennas) {
  const int n_ap = ls.num_aps();
  if (n_ap > 20) throw InvalidArgument("exhaustive_select: L must be <= 20");
  SubsetSearch out;
  std::vector<bool> in(n_ap);
  for (std::uint32_t mask = 1; mask < (1u << n_ap); ++mask) {
    for (int l = 0; l < n_ap; ++l) in[l] = (mask >> l) & 1u;
    const double r = subset_sse(ls, grouping, policy, in, antennas_per_ap, eav_antennas);
    if (r > out.best_sse) {
      out.best_sse = r;
      out.best.clear();
      for (int l = 0; l < n_ap; ++l)
        if (in[l]) out.best.push_back(l);
    }
  }
  return out;
}

std::string selection_csv_header() { return "drop_id,n_selected,members,sse,baseline_sse"; }

std::string selection_csv_row(const std::string& drop_id, const SelectionResult& result) {
  std::ostringstream os;
  os << drop_id << ',' << result.chosen.size() << ',';
  for (std::size_t i = 0; i < result.chosen.size(); ++i) os << (i ? ";" : "") << result.chosen[i];
  os << ',' << format_double(result.sse) << ',' << format_double(result.baseline_sse);
  return os.str();
}

}  // namespace cfsec
