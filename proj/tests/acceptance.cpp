// Acceptance run: one PASS/FAIL line per criterion. Optional arguments name
// the criteria to run (e.g. "acceptance 3 7"); --threads N sets the worker
// count. Exit status is the number of failed criteria (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "cfsec/errors.hpp"
#include "cfsec/experiment.hpp"
#include "cfsec/parallel.hpp"
#include "cfsec/selection.hpp"
#include "oracles.hpp"

using namespace cfsec;

namespace {

int g_threads = 1;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [violated]");
  }
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Scenario network(int l, int m, int k, double r, std::uint64_t seed) {
  Scenario s = Scenario::defaults();
  s.num_aps = l;
  s.antennas_per_ap = m;
  s.num_users = k;
  s.tau_p = k;
  s.r_eav = r;
  s.seed = seed;
  return s;
}

struct MethodMeans {
  double sse = 0.0;
  int feasible = 0;
  int infeasible = 0;
};

std::vector<MethodMeans> mean_sse(const Scenario& s, int n_drops,
                                  const std::vector<std::string>& methods) {
  std::vector<MethodSpec> specs;
  for (const auto& m : methods) specs.push_back(MethodSpec::parse(m));
  std::vector<std::vector<DropEvaluation>> evals(n_drops);
  parallel_for(n_drops, g_threads, [&](std::size_t d) {
    const LargeScaleState ls = draw_drop(s, d).large_scale;
    for (const auto& m : specs) evals[d].push_back(evaluate_method(s, ls, m, 0.5, OptConfig{}));
  });
  std::vector<MethodMeans> out(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (const auto& e : evals) {
      if (e[i].infeasible) {
        ++out[i].infeasible;
      } else {
        out[i].sse += e[i].sse;
        ++out[i].feasible;
      }
    }
    out[i].sse /= std::max(out[i].feasible, 1);
  }
  return out;
}

// 1. Closed forms against the Monte Carlo oracle.
void closed_form_validation(Verdict& v) {
  Stopwatch t;
  ValidationSpec spec;
  spec.n_instances = 20;
  spec.n_trials = 100000;
  const auto report = validate_closed_forms(spec, g_threads);
  const double secs = t.seconds();
  v.require(report.max_dev_user <= 0.03, "max user dev " + num(report.max_dev_user) + " <= 0.03");
  v.require(report.max_dev_eav <= 0.05, "max eav dev " + num(report.max_dev_eav) + " <= 0.05");
  v.require(secs <= 300, "runtime " + num(secs, 3) + " s <= 300 s");
}

// 2. Precoder orthogonality and unit average power.
void precoder_invariants(Verdict& v) {
  Stopwatch t;
  Scenario s = network(4, 6, 4, 100, 2);
  s.area_side = 300;
  const LargeScaleState ls = draw_drop(s, 0).large_scale;
  const GroupingPlan g = build_grouping(ls, 0.5, 6);
  double worst = 0.0;
  double power[4] = {0, 0, 0, 0};  // PZF, PMRT, ZF, MRT
  long count[4] = {0, 0, 0, 0};
  Engine rng = derive_stream(s.seed, StreamPurpose::kSmallScale);
  const int n = 10000;
  for (int trial = 0; trial < n; ++trial) {
    const ChannelRealization r = draw_estimated_channels(ls, s, rng);
    const PrecoderSet pp = build_ppzf(r, g, ls);
    const PrecoderSet zf = build_full_zf(r, ls);
    const PrecoderSet mrt = build_mrt(r, ls);
    for (int l = 0; l < 4; ++l) {
      for (int k = 0; k < s.num_users; ++k) {
        const int mode = pp.mode(l, k) == PrecoderMode::kPzf ? 0 : 1;
        power[mode] += pp.w[l].col(k).squaredNorm();
        ++count[mode];
        power[2] += zf.w[l].col(k).squaredNorm();
        ++count[2];
        power[3] += mrt.w[l].col(k).squaredNorm();
        ++count[3];
        for (int j = 0; j < s.num_users; ++j) {
          if (j == k) continue;
          worst = std::max(worst, std::abs(r.h_hat[l].col(k).dot(zf.w[l].col(j))));
          if (g.delta(l, k)) worst = std::max(worst, std::abs(r.h_hat[l].col(k).dot(pp.w[l].col(j))));
        }
      }
    }
  }
  v.require(worst < 1e-10, "max |h^H w| " + num(worst, 3) + " < 1e-10");
  const char* names[4] = {"PZF", "PMRT", "ZF", "MRT"};
  for (int i = 0; i < 4; ++i) {
    const double mean = count[i] ? power[i] / count[i] : 0.0;
    v.require(count[i] > 0 && std::abs(mean - 1.0) <= 0.01,
              std::string("E|w|^2 ") + names[i] + " " + num(mean, 5));
  }
  const double secs = t.seconds();
  v.require(secs <= 60, "runtime " + num(secs, 3) + " s <= 60 s");
}

// 3. SCA monotonicity, feasibility and optimality against a grid.
void sca_correctness(Verdict& v) {
  Stopwatch t;
  const Scenario s = network(12, 4, 6, 100, 3);
  int solved = 0, infeasible = 0;
  double worst_drop = 0.0, worst_violation = 0.0;
  for (int d = 0; solved < 50 && d < 200; ++d) {
    const LargeScaleState ls = draw_drop(s, d).large_scale;
    const GroupingPlan g = build_grouping(ls, 0.5, 4);
    OptOutcome o;
    try {
      o = optimize_power(ls, g, s, PowerMatrix::equal(12, 6, s.rho_max), OptConfig{});
    } catch (const Infeasible&) {
      ++infeasible;
      continue;
    }
    ++solved;
    const auto& tr = o.state.objective_trace;
    for (std::size_t i = 1; i < tr.size(); ++i)
      worst_drop = std::max(worst_drop, (tr[i - 1] - tr[i]) / std::max(1.0, std::abs(tr[i - 1])));
    worst_violation = std::max(worst_violation, max_violation(o.problem, o.state.psi));
  }
  v.require(solved == 50, num(solved) + " feasible instances (" + num(infeasible) + " infeasible skipped)");
  v.require(worst_drop <= 1e-9, "largest trace decrease " + num(worst_drop, 3) + " <= 1e-9");
  v.require(worst_violation <= 1e-6, "max violation " + num(worst_violation, 3) + " <= 1e-6");

  Scenario tiny = network(2, 4, 2, 100, 4);
  tiny.area_side = 300;
  double worst_ratio = 1e300;
  int compared = 0;
  for (int d = 0; compared < 10 && d < 40; ++d) {
    const LargeScaleState ls = draw_drop(tiny, d).large_scale;
    OptOutcome o;
    try {
      o = optimize_power(ls, build_grouping(ls, 0.5, 4), tiny, PowerMatrix::equal(2, 2, tiny.rho_max),
                         OptConfig{});
    } catch (const Infeasible&) {
      continue;
    }
    const auto grid = oracle::grid_search_2x2(o.problem, 0.02);
    if (!grid.found || grid.sinr <= 0) continue;
    ++compared;
    worst_ratio = std::min(worst_ratio, o.state.objective_trace.back() / grid.sinr);
  }
  v.require(compared == 10 && worst_ratio >= 0.95,
            "SINR_1 / grid optimum min " + num(worst_ratio) + " >= 0.95 over " + num(compared) + " instances");
  const double secs = t.seconds();
  v.require(secs <= 600, "runtime " + num(secs, 3) + " s <= 600 s");
}

// 4. Greedy AP selection.
void selection_behavior(Verdict& v) {
  const Scenario s = network(30, 4, 10, 100, 5);
  bool strictly = true;
  for (int d = 0; d < 100; ++d) {
    const LargeScaleState ls = draw_drop(s, d).large_scale;
    for (auto kind : {PrecoderKind::kPpzf, PrecoderKind::kMrt}) {
      const auto r = greedy_select(ls, grouping_for(kind, ls, 4),
                                   equal_power_policy(30, 10, s.rho_max), 4, 1);
      for (std::size_t i = 1; i < r.sse_trace.size(); ++i) strictly = strictly && r.sse_trace[i] > r.sse_trace[i - 1];
    }
  }
  v.require(strictly, "sse_trace strictly increasing");
  const auto m = mean_sse(s, 100, {"PPZF/all/EPA", "PPZF/selection/EPA", "MRT/all/EPA", "MRT/selection/EPA"});
  const double gain_ppzf = m[1].sse / m[0].sse - 1.0, gain_mrt = m[3].sse / m[2].sse - 1.0;
  v.require(m[1].sse >= m[0].sse, "PPZF " + num(m[1].sse) + " (sel) vs " + num(m[0].sse) + " (all)");
  v.require(m[3].sse >= m[2].sse, "MRT " + num(m[3].sse) + " (sel) vs " + num(m[2].sse) + " (all)");
  v.require(std::max(gain_ppzf, gain_mrt) >= 0.2,
            "best gain " + num(100 * std::max(gain_ppzf, gain_mrt), 3) + "% >= 20%");
}

// 5. Precoder ordering under selection and optimized power.
void precoder_ordering(Verdict& v) {
  const Scenario s = network(30, 4, 10, 100, 6);
  const auto m = mean_sse(s, 200, {"PPZF/selection/OPA", "MRT/selection/OPA", "PPZF/selection/EPA",
                                   "MRT/selection/EPA"});
  const double ratio = m[0].sse / m[1].sse;
  v.require(ratio >= 1.5, "PPZF/MRT " + num(ratio) + " >= 1.5 (" + num(m[0].sse) + " vs " +
                              num(m[1].sse) + ", infeasible " + num(m[0].infeasible) + "/" +
                              num(m[1].infeasible) + ")");
  v.detail << "; for reference, selection with EPA gives " << num(m[2].sse / m[3].sse);
  // Full ZF needs M > K, so the ZF comparison runs with fewer users.
  const Scenario z = network(30, 4, 3, 100, 6);
  const auto mz = mean_sse(z, 200, {"PPZF/selection/OPA", "ZF/selection/OPA"});
  v.require(mz[0].sse > mz[1].sse,
            "K=3: PPZF " + num(mz[0].sse) + " > ZF " + num(mz[1].sse));
}

// 6. Optimized against equal power allocation.
void power_gain(Verdict& v) {
  const Scenario s = network(30, 4, 10, 100, 7);
  const auto m = mean_sse(s, 100, {"PPZF/all/EPA", "PPZF/all/OPA", "MRT/all/EPA", "MRT/all/OPA"});
  v.require(m[1].sse >= m[0].sse, "PPZF OPA " + num(m[1].sse) + " >= EPA " + num(m[0].sse));
  v.require(m[3].sse >= m[2].sse, "MRT OPA " + num(m[3].sse) + " >= EPA " + num(m[2].sse));
  const double gain = m[1].sse / m[0].sse - 1.0;
  v.require(gain >= 0.2, "PPZF gain " + num(100 * gain, 3) + "% >= 20% (infeasible " +
                             num(m[1].infeasible) + ")");
}

// 7. Detection probability over the threshold grid.
void detection(Verdict& v) {
  Stopwatch t;
  const Scenario s = network(10, 2, 4, 100, 8);
  std::vector<double> eps;
  for (int i = 3; i <= 12; ++i) eps.push_back(i / 100.0);
  const auto curve = sweep_threshold(s, eps, DetectionConfig{}, {1000, g_threads});
  const std::size_t best = argmax_point(curve);
  std::ostringstream shape;
  for (const auto& p : curve) shape << (shape.tellp() > 0 ? " " : "") << num(p.probability, 3);
  v.require(curve[best].probability >= 0.95,
            "max P " + num(curve[best].probability, 3) + " >= 0.95 (curve " + shape.str() + ")");
  v.require(curve[best].epsilon >= 0.04 - 1e-12 && curve[best].epsilon <= 0.10 + 1e-12,
            "argmax eps " + num(curve[best].epsilon, 3) + " in [0.04, 0.10]");
  v.require(best > 0 && best + 1 < curve.size(), "interior argmax");
  const double secs = t.seconds();
  v.require(secs <= 300, "runtime " + num(secs, 3) + " s <= 300 s");
}

// 8. Multi-antenna eavesdropper.
void mrc_scaling(Verdict& v) {
  const Scenario s = network(20, 4, 6, 100, 9);
  bool exact = true, monotone = true;
  for (int d = 0; d < 50; ++d) {
    const LargeScaleState ls = draw_drop(s, d).large_scale;
    const GroupingPlan g = build_grouping(ls, 0.5, 4);
    const PowerMatrix p = PowerMatrix::equal(20, 6, s.rho_max);
    const double one = sinr_eav_closed(ls, g, p, 4);
    double prev = 1e300;
    for (int n = 1; n <= 8; ++n) {
      exact = exact && sinr_eav_mrc(ls, g, p, 4, n) == n * one;
      const double sse = secrecy_report(ls, g, p, 4, n).sse;
      monotone = monotone && sse <= prev;
      prev = sse;
    }
  }
  v.require(exact, "sinr_eav_mrc(N_E) == N_E * sinr_eav_closed");
  v.require(monotone, "SSE non-increasing in N_E");

  Scenario small = network(4, 4, 3, 50, 10);
  small.area_side = 400;
  small.eav_antennas = 4;
  double worst = 0.0;
  for (int d = 0; d < 3; ++d) {
    const LargeScaleState ls = draw_drop(small, d).large_scale;
    const GroupingPlan g = build_grouping(ls, 0.5, 4);
    const PowerMatrix p = PowerMatrix::equal(4, 3, small.rho_max);
    McOptions mc;
    mc.n_trials = 100000;
    mc.seed = 100 + d;
    mc.threads = g_threads;
    const McEstimate est = secrecy_monte_carlo(ls, g, p, small, mc);
    const double cf = sinr_eav_mrc(ls, g, p, 4, 4);
    worst = std::max(worst, std::abs(est.sinr_eav_mrc - cf) / cf);
  }
  v.require(worst <= 0.05, "MC MRC max dev " + num(worst) + " <= 0.05");
}

// 9. Retransmission crossover.
void crossover(Verdict& v) {
  const Scenario s = network(50, 4, 10, 200, 11);
  std::vector<double> grid;
  for (int i = 1; i <= 45; ++i) grid.push_back(i / 100.0);
  const auto c = crossover_sweep(s, PrecoderKind::kPpzf, grid, DetectionConfig{}, {100, g_threads, 0.5});
  v.require(c.crossover && *c.crossover >= 0.13 && *c.crossover <= 0.33,
            "crossover " + (c.crossover ? num(*c.crossover) : std::string("none")) + " in [0.13, 0.33]");
  const auto& lo = c.points.front();
  const auto& hi = c.points.back();
  v.require(lo.throughput_retx > lo.throughput_baseline,
            "retx dominates at 0.01 (" + num(lo.throughput_retx) + " > " + num(lo.throughput_baseline) + ")");
  v.require(hi.throughput_baseline > hi.throughput_retx,
            "baseline dominates at 0.45 (" + num(hi.throughput_baseline) + " > " + num(hi.throughput_retx) + ")");
  v.detail << "; detection rate " << num(c.detection_rate, 3);
}

// 10. Serial and parallel runs give byte-identical CSVs.
void reproducibility(Verdict& v) {
  const auto spec = experiment_from_json(nlohmann::json::parse(R"({
    "scenario": {"L": 12, "M": 6, "K": 4, "tau_p": 4, "seed": 12},
    "sweep": {"param": "L", "values": [8, 12]},
    "n_drops": 4,
    "methods": ["PPZF/all/EPA", "PPZF/selection/OPA", "MRT/selection/OPA", "ZF/all/EPA"]
  })"));
  const auto a = run_experiment(spec, {1, true});
  const auto b = run_experiment(spec, {4, true});
  const auto c = run_experiment(spec, {1, true});
  v.require(experiment_csv(a) == experiment_csv(b), "serial == 4 threads");
  v.require(experiment_csv(a) == experiment_csv(c), "repeat run identical");
  v.require(a.trace_csv == b.trace_csv, "SCA traces identical");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--threads" && i + 1 < argc) {
      g_threads = std::max(1, std::atoi(argv[++i]));
    } else {
      only.insert(std::atoi(arg.c_str()));
    }
  }
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria = {
      {"closed-form validation", closed_form_validation},
      {"precoder invariants", precoder_invariants},
      {"SCA correctness", sca_correctness},
      {"selection behavior", selection_behavior},
      {"precoder ordering", precoder_ordering},
      {"power-optimization gain", power_gain},
      {"detection", detection},
      {"MRC scaling", mrc_scaling},
      {"retransmission crossover", crossover},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    Stopwatch t;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s C%d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first,
                v.detail.str().c_str(), t.seconds());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
