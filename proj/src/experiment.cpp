#include "cfsec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cfsec/errors.hpp"
#include "cfsec/parallel.hpp"
#include "cfsec/secrecy.hpp"
#include "cfsec/selection.hpp"

namespace cfsec {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw InvalidArgument(what + ": expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw InvalidArgument(what + ": unknown key '" + key + "'");
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad value for '") + key + "': " + e.what());
  }
}

Scenario scenario_from(const json& j) {
  const json* power = j.contains("power_mw") ? &j.at("power_mw") : nullptr;
  return scenario_with_powers(j.contains("scenario") ? j.at("scenario") : json::object(), power);
}

DetectionConfig detection_from(const json& j) {
  DetectionConfig c;
  read_if(j, "n_cb", c.n_cb);
  read_if(j, "epsilon", c.epsilon);
  read_if(j, "majority_fraction", c.majority_fraction);
  c.validate();
  return c;
}

double relative_deviation(double reference, double estimate) {
  const double diff = std::abs(estimate - reference);
  if (diff == 0.0) return 0.0;
  return diff / std::max(std::abs(reference), 1e-300);
}

}  // namespace

std::string MethodSpec::name() const {
  return precoder_name(precoder) + (selection ? "/selection/" : "/all/") +
         (optimized ? "OPA" : "EPA");
}

MethodSpec MethodSpec::parse(const std::string& text) {
  const auto a = text.find('/');
  const auto b = a == std::string::npos ? a : text.find('/', a + 1);
  if (b == std::string::npos)
    throw InvalidArgument("method '" + text + "': expected PRECODER/{all,selection}/{EPA,OPA}");
  MethodSpec m;
  m.precoder = parse_precoder(text.substr(0, a));
  const std::string aps = text.substr(a + 1, b - a - 1);
  const std::string power = text.substr(b + 1);
  if (aps != "all" && aps != "selection")
    throw InvalidArgument("method '" + text + "': AP set must be 'all' or 'selection'");
  if (power != "EPA" && power != "OPA")
    throw InvalidArgument("method '" + text + "': power must be 'EPA' or 'OPA'");
  m.selection = aps == "selection";
  m.optimized = power == "OPA";
  return m;
}

Scenario scenario_with_powers(const json& scenario, const json* power_mw) {
  Scenario s = scenario_from_json(scenario);
  const bool has_rho = scenario.contains("rho_u") || scenario.contains("rho_E") ||
                       scenario.contains("rho_max");
  if (power_mw && has_rho)
    throw InvalidArgument("give either power_mw or rho_* in the scenario, not both");
  if (has_rho) return s;
  double ap = 200.0, user = 100.0, eav = 100.0;
  if (power_mw) {
    check_keys(*power_mw, {"ap", "user", "eav"}, "power_mw");
    read_if(*power_mw, "ap", ap);
    read_if(*power_mw, "user", user);
    read_if(*power_mw, "eav", eav);
  }
  set_powers_mw(s, user, eav, ap);
  s.validate();
  return s;
}

void ExperimentSpec::validate() const {
  if (n_drops < 1) throw InvalidArgument("experiment: n_drops must be >= 1");
  if (sweep_values.empty()) throw InvalidArgument("experiment: empty sweep grid");
  if (methods.empty()) throw InvalidArgument("experiment: no methods");
  if (!(threshold_quantile >= 0.0 && threshold_quantile <= 1.0))
    throw InvalidArgument("experiment: threshold_quantile must lie in [0, 1]");
  for (double v : sweep_values) {
    const Scenario s = apply_sweep(scenario, sweep_param, v);
    for (const auto& m : methods)
      if (m.precoder == PrecoderKind::kZf && s.antennas_per_ap <= s.num_users)
        throw InvalidArgument("experiment: ZF needs M > K (" + sweep_param + " = " +
                              format_double(v) + ")");
  }
}

ExperimentSpec experiment_from_json(const json& j) {
  check_keys(j, {"name", "scenario", "power_mw", "sweep", "n_drops", "methods", "output_path",
                 "threshold_quantile", "optimizer"},
             "experiment");
  ExperimentSpec spec;
  read_if(j, "name", spec.name);
  spec.scenario = scenario_from(j);
  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    check_keys(sw, {"param", "values"}, "sweep");
    read_if(sw, "param", spec.sweep_param);
    read_if(sw, "values", spec.sweep_values);
  }
  read_if(j, "n_drops", spec.n_drops);
  std::vector<std::string> methods;
  read_if(j, "methods", methods);
  for (const auto& m : methods) spec.methods.push_back(MethodSpec::parse(m));
  read_if(j, "output_path", spec.output_path);
  read_if(j, "threshold_quantile", spec.threshold_quantile);
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    check_keys(o, {"theta_fraction", "theta_e", "eps_obj", "max_iter", "max_init_iter"},
               "optimizer");
    read_if(o, "theta_fraction", spec.optimizer.theta_fraction);
    read_if(o, "theta_e", spec.optimizer.theta_e);
    read_if(o, "eps_obj", spec.optimizer.eps_obj);
    read_if(o, "max_iter", spec.optimizer.max_iter);
    read_if(o, "max_init_iter", spec.optimizer.max_init_iter);
  }
  spec.validate();
  return spec;
}

json experiment_to_json(const ExperimentSpec& spec) {
  json methods = json::array();
  for (const auto& m : spec.methods) methods.push_back(m.name());
  return json{{"name", spec.name},
              {"scenario", scenario_to_json(spec.scenario)},
              {"sweep", {{"param", spec.sweep_param}, {"values", spec.sweep_values}}},
              {"n_drops", spec.n_drops},
              {"methods", methods},
              {"output_path", spec.output_path},
              {"threshold_quantile", spec.threshold_quantile},
              {"optimizer",
               {{"theta_fraction", spec.optimizer.theta_fraction},
                {"theta_e", spec.optimizer.theta_e},
                {"eps_obj", spec.optimizer.eps_obj},
                {"max_iter", spec.optimizer.max_iter},
                {"max_init_iter", spec.optimizer.max_init_iter}}}};
}

Scenario apply_sweep(const Scenario& base, const std::string& param, double value) {
  Scenario s = base;
  auto as_int = [&] {
    const double r = std::round(value);
    if (r != value || r < 1.0) throw InvalidArgument("sweep " + param + ": needs positive integers");
    return static_cast<int>(r);
  };
  if (param == "none") {
  } else if (param == "L") {
    s.num_aps = as_int();
  } else if (param == "M") {
    s.antennas_per_ap = as_int();
  } else if (param == "K") {
    s.num_users = as_int();
    s.tau_p = s.num_users;
  } else if (param == "N_E") {
    s.eav_antennas = as_int();
  } else if (param == "r") {
    s.r_eav = value;
  } else {
    throw InvalidArgument("unknown sweep parameter '" + param + "' (none, L, M, K, N_E, r)");
  }
  s.validate();
  return s;
}

DropEvaluation evaluate_method(const Scenario& scenario, const LargeScaleState& ls,
                               const MethodSpec& method, double threshold_quantile,
                               const OptConfig& optimizer, bool trace,
                               const std::string& run_id) {
  const int m = scenario.antennas_per_ap;
  const GroupingPlan g = grouping_for(method.precoder, ls, m, threshold_quantile);
  const auto policy = equal_power_policy(ls.num_aps(), ls.num_users(), scenario.rho_max);
  PowerMatrix power = PowerMatrix::equal(ls.num_aps(), ls.num_users(), scenario.rho_max);
  if (method.selection)
    power = policy(greedy_select(ls, g, policy, m, scenario.eav_antennas).membership(ls.num_aps()));
  DropEvaluation out;
  if (method.optimized) {
    try {
      const OptOutcome o = optimize_power(ls, g, scenario, power, optimizer);
      power = o.power;
      if (trace) out.trace = sca_trace_csv_rows(run_id, o.state);
    } catch (const Infeasible&) {
      out.infeasible = true;
    } catch (const NumericalError&) {
      out.infeasible = true;
    }
    if (out.infeasible) return out;
  }
  const SecrecyReport r = secrecy_report(ls, g, power, m, scenario.eav_antennas);
  out.sse = r.sse;
  out.sinr_user = r.sinr_users(0);
  out.sinr_eav = r.sinr_eav;
  return out;
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(v.size());
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

bool ExperimentResult::infeasible_dominated() const {
  for (const auto& r : rows)
    if (2 * r.n_infeasible > r.n_drops + r.n_infeasible) return true;
  return false;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  ExperimentResult result;
  std::ostringstream trace;
  if (options.trace) trace << sca_trace_csv_header() << '\n';
  const std::size_t n_methods = spec.methods.size();
  for (double value : spec.sweep_values) {
    const Scenario sc = apply_sweep(spec.scenario, spec.sweep_param, value);
    const auto n = static_cast<std::size_t>(spec.n_drops);
    std::vector<std::vector<DropEvaluation>> evals(n);
    parallel_for(n, options.threads, [&](std::size_t d) {
      const Drop drop = draw_drop(sc, d);
      for (const auto& method : spec.methods) {
        const std::string run_id = spec.sweep_param + "=" + format_double(value) + ";" +
                                   method.name() + ";drop=" + std::to_string(d);
        evals[d].push_back(evaluate_method(sc, drop.large_scale, method, spec.threshold_quantile,
                                           spec.optimizer, options.trace, run_id));
      }
    });
    for (std::size_t k = 0; k < n_methods; ++k) {
      std::vector<double> sse, s1, se;
      ResultRow row;
      row.grid_param = spec.sweep_param;
      row.value = value;
      row.method = spec.methods[k].name();
      row.seed = sc.seed;
      for (const auto& drop : evals) {
        const DropEvaluation& e = drop[k];
        if (options.trace) trace << e.trace;
        if (e.infeasible) {
          ++row.n_infeasible;
          continue;
        }
        sse.push_back(e.sse);
        s1.push_back(e.sinr_user);
        se.push_back(e.sinr_eav);
      }
      std::tie(row.mean_sse, row.stderr_sse) = mean_and_stderr(sse);
      row.mean_sinr1 = mean_and_stderr(s1).first;
      row.mean_sinr_e = mean_and_stderr(se).first;
      row.n_drops = static_cast<int>(sse.size());
      result.rows.push_back(row);
    }
  }
  if (options.trace) result.trace_csv = trace.str();
  return result;
}

std::string experiment_csv_header() {
  return "grid_param,value,method,mean_sse,stderr_sse,mean_sinr1,mean_sinrE,n_drops,seed,"
         "n_infeasible,schema_version";
}

std::string experiment_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << experiment_csv_header() << '\n';
  for (const auto& r : result.rows)
    os << r.grid_param << ',' << format_double(r.value) << ',' << r.method << ','
       << format_double(r.mean_sse) << ',' << format_double(r.stderr_sse) << ','
       << format_double(r.mean_sinr1) << ',' << format_double(r.mean_sinr_e) << ',' << r.n_drops
       << ',' << r.seed << ',' << r.n_infeasible << ',' << kCsvSchemaVersion << '\n';
  return os.str();
}

ValidationSpec validation_from_json(const json& j) {
  check_keys(j, {"n_instances", "n_trials", "seed", "tol_user", "tol_eav", "gamma_perturbation",
                 "eav_antennas"},
             "validation");
  ValidationSpec v;
  read_if(j, "n_instances", v.n_instances);
  read_if(j, "n_trials", v.n_trials);
  read_if(j, "seed", v.seed);
  read_if(j, "tol_user", v.tol_user);
  read_if(j, "tol_eav", v.tol_eav);
  read_if(j, "gamma_perturbation", v.gamma_perturbation);
  read_if(j, "eav_antennas", v.eav_antennas);
  if (v.n_instances < 1 || v.n_trials < 1 || v.eav_antennas < 1)
    throw InvalidArgument("validation: counts must be positive");
  return v;
}

ValidationReport validate_closed_forms(const ValidationSpec& spec, int threads) {
  ValidationReport report;
  const double quantiles[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < spec.n_instances; ++i) {
    Engine rng = derive_stream(spec.seed, StreamPurpose::kScenarioMeta, static_cast<std::uint64_t>(i));
    std::uniform_int_distribution<int> pick_l(1, 4), pick_m(2, 6), pick_k(1, 3), pick_q(0, 4);
    Scenario sc = Scenario::defaults();
    do {
      sc.num_aps = pick_l(rng);
      sc.antennas_per_ap = pick_m(rng);
      sc.num_users = pick_k(rng);
    } while (sc.num_aps * sc.antennas_per_ap <= sc.num_users);
    const double q = quantiles[pick_q(rng)];
    sc.tau_p = sc.num_users;
    sc.eav_antennas = spec.eav_antennas;
    sc.area_side = 400.0;
    sc.r_eav = 50.0;
    sc.seed = rng();
    sc.validate();

    const LargeScaleState ls = draw_drop(sc, 0).large_scale;
    const GroupingPlan g = build_grouping(ls, q, sc.antennas_per_ap);
    const PowerMatrix p = PowerMatrix::equal(sc.num_aps, sc.num_users, sc.rho_max);
    LargeScaleState assumed = ls;
    assumed.gamma *= 1.0 + spec.gamma_perturbation;
    assumed.gamma_e *= 1.0 + spec.gamma_perturbation;

    McOptions mc;
    mc.n_trials = spec.n_trials;
    mc.seed = rng();
    mc.threads = threads;
    const McEstimate est = secrecy_monte_carlo(ls, g, p, sc, mc);
    const Eigen::VectorXd users = sinr_users_closed(assumed, g, p, sc.antennas_per_ap);
    const double eav = sinr_eav_closed(assumed, g, p, sc.antennas_per_ap);

    auto add = [&](const std::string& what, double closed, double mc_value, double tol, bool user) {
      ValidationRow row{i, what, closed, mc_value, relative_deviation(closed, mc_value), tol, true};
      row.pass = row.rel_dev <= tol;
      report.passed = report.passed && row.pass;
      double& worst = user ? report.max_dev_user : report.max_dev_eav;
      worst = std::max(worst, row.rel_dev);
      report.rows.push_back(row);
    };
    for (int k = 0; k < sc.num_users; ++k)
      add("sinr_user_" + std::to_string(k), users(k), est.sinr_users(k), spec.tol_user, true);
    add("sinr_eav", eav, est.sinr_eav, spec.tol_eav, false);
    if (sc.eav_antennas > 1)
      add("sinr_eav_mrc", sc.eav_antennas * eav, est.sinr_eav_mrc, spec.tol_eav, false);
  }
  return report;
}

std::string validation_csv(const ValidationReport& report) {
  std::ostringstream os;
  os << "instance,quantity,closed_form,monte_carlo,rel_dev,tolerance,pass,schema_version\n";
  for (const auto& r : report.rows)
    os << r.instance << ',' << r.quantity << ',' << format_double(r.closed) << ','
       << format_double(r.monte_carlo) << ',' << format_double(r.rel_dev) << ','
       << format_double(r.tolerance) << ',' << (r.pass ? 1 : 0) << ',' << kCsvSchemaVersion
       << '\n';
  return os.str();
}

DetectSpec detect_from_json(const json& j) {
  check_keys(j, {"scenario", "power_mw", "epsilons", "n_cb", "majority_fraction", "n_trials",
                 "output_path"},
             "detect");
  DetectSpec d;
  d.scenario = scenario_from(j);
  read_if(j, "epsilons", d.epsilons);
  d.detection = detection_from(j);
  read_if(j, "n_trials", d.n_trials);
  read_if(j, "output_path", d.output_path);
  if (d.epsilons.empty()) {
    for (int i = 3; i <= 12; ++i) d.epsilons.push_back(i / 100.0);
  }
  if (d.n_trials < 1) throw InvalidArgument("detect: n_trials must be >= 1");
  return d;
}

MitigateSpec mitigate_from_json(const json& j) {
  check_keys(j, {"scenario", "power_mw", "tau_p_over_tau", "precoders", "n_cb", "epsilon",
                 "majority_fraction", "n_drops", "threshold_quantile", "output_path"},
             "mitigate");
  MitigateSpec m;
  m.scenario = scenario_from(j);
  read_if(j, "tau_p_over_tau", m.tau_p_over_tau);
  if (j.contains("precoders")) {
    std::vector<std::string> names;
    read_if(j, "precoders", names);
    m.precoders.clear();
    for (const auto& n : names) m.precoders.push_back(parse_precoder(n));
  }
  m.detection = detection_from(j);
  read_if(j, "n_drops", m.n_drops);
  read_if(j, "threshold_quantile", m.threshold_quantile);
  read_if(j, "output_path", m.output_path);
  if (m.tau_p_over_tau.empty())
    for (int i = 1; i <= 45; ++i) m.tau_p_over_tau.push_back(i / 100.0);
  if (m.precoders.empty()) throw InvalidArgument("mitigate: no precoders");
  if (m.n_drops < 1) throw InvalidArgument("mitigate: n_drops must be >= 1");
  return m;
}

}  // namespace cfsec
