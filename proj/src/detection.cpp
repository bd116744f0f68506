#include "cfsec/detection.hpp"

#include <cmath>
#include <sstream>

#include "cfsec/errors.hpp"
#include "cfsec/parallel.hpp"
#include "cfsec/secrecy.hpp"

namespace cfsec {

void DetectionConfig::validate() const {
  if (n_cb < 1) throw InvalidArgument("detection: n_cb must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("detection: epsilon must be positive");
  if (!(majority_fraction >= 0.5 && majority_fraction <= 1.0))
    throw InvalidArgument("detection: majority_fraction must lie in [0.5, 1]");
}

SubbandProjections observe_pilots(const LargeScaleState& large_scale, const Scenario& scenario,
                                  int n_cb, Engine& rng) {
  if (n_cb < 1) throw InvalidArgument("observe_pilots: n_cb must be >= 1");
  const PilotBook pilots = PilotBook::orthonormal(scenario.tau_p, large_scale.num_users());
  SubbandProjections out;
  out.reserve(n_cb);
  for (int n = 0; n < n_cb; ++n) {
    const ChannelRealization r = draw_small_scale(large_scale, scenario, rng);
    out.push_back(project_pilots(uplink_training(r, pilots, scenario, rng), pilots));
  }
  return out;
}

Eigen::MatrixXd sample_pilot_power(const SubbandProjections& projections) {
  if (projections.empty() || projections[0].empty())
    throw InvalidArgument("sample_pilot_power: no observations");
  const auto n_ap = static_cast<Eigen::Index>(projections[0].size());
  const Eigen::Index m = projections[0][0].rows();
  const Eigen::Index k = projections[0][0].cols();
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(n_ap, k);
  for (const auto& band : projections)
    for (Eigen::Index l = 0; l < n_ap; ++l)
      xi.row(l) += band[l].colwise().squaredNorm();
  return xi / static_cast<double>(m * static_cast<Eigen::Index>(projections.size()));
}

Eigen::MatrixXd clean_pilot_power(const LargeScaleState& ls, const Scenario& scenario) {
  return (scenario.tau_p * scenario.rho_u * ls.beta).array() + 1.0;
}

DetectionResult decide_all(const Eigen::MatrixXd& xi, const LargeScaleState& ls,
                           const Scenario& scenario, const DetectionConfig& config) {
  config.validate();
  if (xi.rows() != ls.num_aps() || xi.cols() != ls.num_users())
    throw InvalidArgument("decide: xi has the wrong shape");
  DetectionResult r;
  r.xi = xi;
  r.upsilon = xi.cwiseQuotient(clean_pilot_power(ls, scenario));
  r.per_ap_flags = ((r.upsilon.array() - 1.0).abs() > config.epsilon).cast<int>();
  const double n_ap = static_cast<double>(ls.num_aps());
  int declared = 0;
  for (int k = 0; k < ls.num_users(); ++k) {
    const double fraction = r.per_ap_flags.col(k).sum() / n_ap;
    const bool attacked = fraction > 0.5 && fraction >= config.majority_fraction;
    r.verdict.push_back(attacked);
    if (attacked) {
      ++declared;
      r.flagged_user = k;
    }
  }
  if (declared != 1) r.flagged_user.reset();
  return r;
}

DetectionResult decide(const Eigen::MatrixXd& xi, const LargeScaleState& ls,
                       const Scenario& scenario, const DetectionConfig& config) {
  DetectionResult r = decide_all(xi, ls, scenario, config);
  int declared = 0;
  for (bool v : r.verdict) declared += v ? 1 : 0;
  if (declared > 1) throw Ambiguous("decide: " + std::to_string(declared) + " users flagged");
  return r;
}

bool correct_detection(const DetectionResult& result, int attacked_user) {
  for (std::size_t k = 0; k < result.verdict.size(); ++k)
    if (result.verdict[k] != (static_cast<int>(k) == attacked_user)) return false;
  return true;
}

std::vector<DetectionPoint> sweep_threshold(const Scenario& scenario,
                                            const std::vector<double>& epsilons,
                                            const DetectionConfig& config,
                                            const SweepOptions& options) {
  if (epsilons.empty()) throw InvalidArgument("sweep_threshold: empty epsilon grid");
  if (options.n_trials < 1) throw InvalidArgument("sweep_threshold: n_trials must be >= 1");
  scenario.validate();
  for (double e : epsilons) {
    DetectionConfig c = config;
    c.epsilon = e;
    c.validate();
  }
  const auto n_trials = static_cast<std::size_t>(options.n_trials);
  std::vector<std::vector<char>> hits(n_trials, std::vector<char>(epsilons.size(), 0));
  parallel_for(n_trials, options.threads, [&](std::size_t t) {
    const Drop drop = draw_drop(scenario, t);
    Engine rng = derive_stream(scenario.seed, StreamPurpose::kDetection, t);
    const Eigen::MatrixXd xi =
        sample_pilot_power(observe_pilots(drop.large_scale, scenario, config.n_cb, rng));
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      DetectionConfig c = config;
      c.epsilon = epsilons[e];
      hits[t][e] = correct_detection(decide_all(xi, drop.large_scale, scenario, c), 0) ? 1 : 0;
    }
  });
  std::vector<DetectionPoint> curve;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    int count = 0;
    for (const auto& h : hits) count += h[e];
    curve.push_back({epsilons[e], static_cast<double>(count) / options.n_trials, options.n_trials});
  }
  return curve;
}

std::size_t argmax_point(const std::vector<DetectionPoint>& curve) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].probability > curve[best].probability) best = i;
  return best;
}

std::string detection_csv_header() { return "epsilon,detection_probability,n_trials,scenario_id"; }

std::string detection_csv_rows(const std::vector<DetectionPoint>& curve,
                               const std::string& scenario_id) {
  std::ostringstream os;
  for (const auto& p : curve)
    os << format_double(p.epsilon) << ',' << format_double(p.probability) << ',' << p.n_trials
       << ',' << scenario_id << '\n';
  return os.str();
}

}  // namespace cfsec
