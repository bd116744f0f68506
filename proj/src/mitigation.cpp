#include "cfsec/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfsec/errors.hpp"
#include "cfsec/parallel.hpp"
#include "cfsec/selection.hpp"

namespace cfsec {

double throughput(double rate, int n_pr, double tau_p, double tau, double bandwidth) {
  if (!(tau > 0.0)) throw InvalidArgument("throughput: tau must be positive");
  return bandwidth * std::max(0.0, 1.0 - n_pr * tau_p / tau) * rate;
}

Eigen::VectorXd gamma_after_protocol(const LargeScaleState& ls, const Scenario& scenario,
                                     int n_pr, bool attacked) {
  const int n_ap = ls.num_aps();
  Eigen::VectorXd g(n_ap);
  const bool clean = n_pr == 2 || !attacked;
  for (int l = 0; l < n_ap; ++l)
    g(l) = clean ? estimate_variance_clean(ls.beta(l, 0), scenario.tau_p, scenario.rho_u)
                 : estimate_variance_attacked(ls.beta(l, 0), ls.beta_e(l), scenario.tau_p,
                                              scenario.rho_u, scenario.rho_e);
  return g;
}

double sinr_user_retransmitted(const LargeScaleState& ls, const GroupingPlan& grouping,
                               const PowerMatrix& power, int antennas_per_ap,
                               const Eigen::VectorXd& gamma_pr) {
  if (gamma_pr.size() != ls.num_aps())
    throw InvalidArgument("sinr_user_retransmitted: gamma_pr has the wrong length");
  LargeScaleState patched = ls;
  patched.gamma.col(0) = gamma_pr;
  return sinr_users_closed(patched, grouping, power, antennas_per_ap)(0);
}

double sinr_eav_retransmitted(const LargeScaleState& ls, const PowerMatrix& power) {
  const Eigen::VectorXd leak = power.rho.transpose() * ls.beta_e;
  return leak(0) / (leak.sum() - leak(0) + 1.0);
}

RetransmissionOutcome run_retransmission_protocol(const Scenario& scenario,
                                                  const LargeScaleState& ls,
                                                  const GroupingPlan& grouping,
                                                  const PowerMatrix& power,
                                                  const DetectionConfig& detection_config,
                                                  Engine& rng, std::optional<bool> detection) {
  const int m = scenario.antennas_per_ap;
  const bool attacked = scenario.rho_e > 0.0;
  RetransmissionOutcome out;
  if (attacked) {
    if (detection) {
      out.detected = *detection;
    } else {
      const Eigen::MatrixXd xi =
          sample_pilot_power(observe_pilots(ls, scenario, detection_config.n_cb, rng));
      const DetectionResult r = decide_all(xi, ls, scenario, detection_config);
      out.detected = r.flagged_user && *r.flagged_user == 0;
    }
  }
  out.n_pr = out.detected ? 2 : 1;
  out.gamma_pr = gamma_after_protocol(ls, scenario, out.n_pr, attacked);
  if (out.detected) {
    out.sinr_user = sinr_user_retransmitted(ls, grouping, power, m, out.gamma_pr);
    out.sinr_eav = sinr_eav_retransmitted(ls, power);
  } else {
    out.sinr_user = sinr_users_closed(ls, grouping, power, m)(0);
    out.sinr_eav = sinr_eav_closed(ls, grouping, power, m);
  }
  out.rate_user = std::log2(1.0 + out.sinr_user);
  out.rate_eav = std::log2(1.0 + out.sinr_eav);
  out.throughput_user1 =
      throughput(out.rate_user, out.n_pr, scenario.tau_p, scenario.tau, scenario.bandwidth_hz);
  out.throughput_eav =
      throughput(out.rate_eav, out.n_pr, scenario.tau_p, scenario.tau, scenario.bandwidth_hz);
  return out;
}

std::string precoder_name(PrecoderKind kind) {
  switch (kind) {
    case PrecoderKind::kPpzf: return "PPZF";
    case PrecoderKind::kZf: return "ZF";
    case PrecoderKind::kMrt: return "MRT";
  }
  return "?";
}

PrecoderKind parse_precoder(const std::string& name) {
  if (name == "PPZF") return PrecoderKind::kPpzf;
  if (name == "ZF") return PrecoderKind::kZf;
  if (name == "MRT") return PrecoderKind::kMrt;
  throw InvalidArgument("unknown precoder '" + name + "' (PPZF, ZF, MRT)");
}

GroupingPlan grouping_for(PrecoderKind kind, const LargeScaleState& ls, int antennas_per_ap,
                          double threshold_quantile) {
  switch (kind) {
    case PrecoderKind::kPpzf: return build_grouping(ls, threshold_quantile, antennas_per_ap);
    case PrecoderKind::kZf: return all_strong_grouping(ls.num_aps(), ls.num_users(), antennas_per_ap);
    case PrecoderKind::kMrt: break;
  }
  return all_weak_grouping(ls.num_aps(), ls.num_users());
}

CrossoverCurve crossover_sweep(const Scenario& scenario, PrecoderKind precoder,
                               const std::vector<double>& grid,
                               const DetectionConfig& detection_config,
                               const CrossoverOptions& options) {
  if (grid.empty()) throw InvalidArgument("crossover_sweep: empty grid");
  for (double x : grid)
    if (!(x > 0.0 && x <= 0.5)) throw InvalidArgument("crossover_sweep: grid must lie in (0, 0.5]");
  if (options.n_drops < 1) throw InvalidArgument("crossover_sweep: n_drops must be >= 1");
  scenario.validate();
  detection_config.validate();

  struct DropRates {
    double baseline = 0.0;
    double retx = 0.0;
    int n_pr = 1;
  };
  const auto n = static_cast<std::size_t>(options.n_drops);
  std::vector<DropRates> rates(n);
  parallel_for(n, options.threads, [&](std::size_t d) {
    const Drop drop = draw_drop(scenario, d);
    const LargeScaleState& ls = drop.large_scale;
    const int m = scenario.antennas_per_ap;
    const GroupingPlan g = grouping_for(precoder, ls, m, options.threshold_quantile);
    const auto policy = equal_power_policy(ls.num_aps(), ls.num_users(), scenario.rho_max);
    const SelectionResult sel = greedy_select(ls, g, policy, m, scenario.eav_antennas);
    const PowerMatrix power = policy(sel.membership(ls.num_aps()));
    Engine rng = derive_stream(scenario.seed, StreamPurpose::kDetection, d);
    const RetransmissionOutcome o =
        run_retransmission_protocol(scenario, ls, g, power, detection_config, rng);
    rates[d].baseline = secrecy_rate(sinr_users_closed(ls, g, power, m)(0),
                                     sinr_eav_closed(ls, g, power, m));
    rates[d].retx = std::max(0.0, o.rate_user - o.rate_eav);
    rates[d].n_pr = o.n_pr;
  });

  CrossoverCurve curve;
  curve.precoder = precoder;
  curve.n_drops = options.n_drops;
  for (const auto& r : rates) curve.detection_rate += r.n_pr == 2 ? 1.0 : 0.0;
  curve.detection_rate /= options.n_drops;
  const double b = scenario.bandwidth_hz;
  for (double x : grid) {
    CrossoverPoint p;
    p.tau_p_over_tau = x;
    for (const auto& r : rates) {
      p.throughput_baseline += b * std::max(0.0, 1.0 - x) * r.baseline;
      p.throughput_retx += b * std::max(0.0, 1.0 - r.n_pr * x) * r.retx;
    }
    p.throughput_baseline /= options.n_drops;
    p.throughput_retx /= options.n_drops;
    curve.points.push_back(p);
  }
  for (std::size_t i = 1; i < curve.points.size() && !curve.crossover; ++i) {
    const auto& a = curve.points[i - 1];
    const auto& c = curve.points[i];
    const double da = a.throughput_retx - a.throughput_baseline;
    const double dc = c.throughput_retx - c.throughput_baseline;
    if (da == 0.0) {
      curve.crossover = a.tau_p_over_tau;
    } else if ((da > 0.0) != (dc > 0.0)) {
      curve.crossover = a.tau_p_over_tau + (c.tau_p_over_tau - a.tau_p_over_tau) * da / (da - dc);
    }
  }
  return curve;
}

std::string crossover_csv_header() {
  return "tau_p_over_tau,throughput_baseline,throughput_retx,scheme";
}

std::string crossover_csv_rows(const CrossoverCurve& curve) {
  std::ostringstream os;
  for (const auto& p : curve.points)
    os << format_double(p.tau_p_over_tau) << ',' << format_double(p.throughput_baseline) << ','
       << format_double(p.throughput_retx) << ',' << precoder_name(curve.precoder) << '\n';
  return os.str();
}

}  // namespace cfsec
