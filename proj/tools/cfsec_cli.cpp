// cfsec: batch driver for the secrecy simulation pipelines.
//
//   cfsec gen      [--seed S] [--out scenario.json]
//   cfsec run      --config exp.json [--seed S] [--threads N] [--out f.csv] [--trace]
//   cfsec validate [--config v.json] [--seed S] [--threads N] [--out f.csv]
//   cfsec detect   --config d.json [--seed S] [--threads N] [--out f.csv]
//   cfsec mitigate --config m.json [--seed S] [--threads N] [--out f.csv]
//
// Exit status: 0 ok, 1 bad input, 2 closed-form validation failed,
// 3 more than half of the drops of some row were infeasible.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cfsec/errors.hpp"
#include "cfsec/experiment.hpp"

using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  bool trace = false;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cfsec::InvalidArgument("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw cfsec::InvalidArgument("config '" + path + "': " + e.what());
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cfsec::InvalidArgument("cannot write '" + path + "'");
  out << text;
}

std::string pick_out(const Common& c, const std::string& from_config) {
  return c.out.empty() ? from_config : c.out;
}

int cmd_gen(const Common& c) {
  cfsec::Scenario s = cfsec::Scenario::defaults();
  if (!c.config.empty()) s = cfsec::scenario_with_powers(load_json(c.config), nullptr);
  if (c.seed) s.seed = *c.seed;
  emit(cfsec::scenario_to_json(s).dump(2) + "\n", c.out);
  return cfsec::kExitOk;
}

int cmd_run(const Common& c) {
  cfsec::ExperimentSpec spec = cfsec::experiment_from_json(load_json(c.config));
  if (c.seed) spec.scenario.seed = *c.seed;
  const auto result = cfsec::run_experiment(spec, {c.threads, c.trace});
  const std::string out = pick_out(c, spec.output_path);
  emit(cfsec::experiment_csv(result), out);
  if (c.trace) emit(result.trace_csv, (out.empty() ? std::string("run") : out) + ".trace.csv");
  if (result.infeasible_dominated()) {
    std::cerr << "more than half of the drops were infeasible for at least one row\n";
    return cfsec::kExitInfeasible;
  }
  return cfsec::kExitOk;
}

int cmd_validate(const Common& c) {
  cfsec::ValidationSpec spec;
  if (!c.config.empty()) spec = cfsec::validation_from_json(load_json(c.config));
  if (c.seed) spec.seed = *c.seed;
  const auto report = cfsec::validate_closed_forms(spec, c.threads);
  emit(cfsec::validation_csv(report), c.out);
  std::cerr << "max relative deviation: users " << report.max_dev_user << " (tol "
            << spec.tol_user << "), eavesdropper " << report.max_dev_eav << " (tol "
            << spec.tol_eav << ")\n";
  return report.passed ? cfsec::kExitOk : cfsec::kExitValidationFailed;
}

int cmd_detect(const Common& c) {
  cfsec::DetectSpec spec = cfsec::detect_from_json(load_json(c.config));
  if (c.seed) spec.scenario.seed = *c.seed;
  const auto curve = cfsec::sweep_threshold(spec.scenario, spec.epsilons, spec.detection,
                                            {spec.n_trials, c.threads});
  const std::string id = "seed=" + std::to_string(spec.scenario.seed);
  emit(cfsec::detection_csv_header() + "\n" + cfsec::detection_csv_rows(curve, id),
       pick_out(c, spec.output_path));
  const auto& best = curve[cfsec::argmax_point(curve)];
  std::cerr << "best epsilon " << best.epsilon << " with detection probability "
            << best.probability << "\n";
  return cfsec::kExitOk;
}

int cmd_mitigate(const Common& c) {
  cfsec::MitigateSpec spec = cfsec::mitigate_from_json(load_json(c.config));
  if (c.seed) spec.scenario.seed = *c.seed;
  std::string csv = cfsec::crossover_csv_header() + "\n";
  for (auto kind : spec.precoders) {
    const auto curve = cfsec::crossover_sweep(
        spec.scenario, kind, spec.tau_p_over_tau, spec.detection,
        {spec.n_drops, c.threads, spec.threshold_quantile});
    csv += cfsec::crossover_csv_rows(curve);
    std::cerr << cfsec::precoder_name(kind) << ": ";
    if (curve.crossover)
      std::cerr << "crossover at tau_p/tau = " << *curve.crossover;
    else
      std::cerr << "no crossover on the grid";
    std::cerr << ", detection rate " << curve.detection_rate << "\n";
  }
  emit(csv, pick_out(c, spec.output_path));
  return cfsec::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO secrecy simulator"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", c.config, "JSON config");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Override the root seed");
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "Output path (stdout if omitted)");
  };
  auto* gen = app.add_subcommand("gen", "Emit a scenario JSON");
  add_common(gen, false);
  auto* run = app.add_subcommand("run", "Run an experiment sweep");
  add_common(run, true);
  run->add_flag("--trace", c.trace, "Also write the SCA trace to <out>.trace.csv");
  auto* validate = app.add_subcommand("validate", "Closed forms against Monte Carlo");
  add_common(validate, false);
  auto* detect = app.add_subcommand("detect", "Detection threshold sweep");
  add_common(detect, true);
  auto* mitigate = app.add_subcommand("mitigate", "Retransmission crossover sweep");
  add_common(mitigate, true);

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_gen(c);
    if (run->parsed()) return cmd_run(c);
    if (validate->parsed()) return cmd_validate(c);
    if (detect->parsed()) return cmd_detect(c);
    return cmd_mitigate(c);
  } catch (const cfsec::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 1;
  }
}
