#include "cfsec/secrecy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "cfsec/channel.hpp"
#include "cfsec/errors.hpp"
#include "cfsec/rng.hpp"

namespace cfsec {

PowerMatrix PowerMatrix::equal(int num_aps, int num_users, double rho_max) {
  if (num_aps < 1 || num_users < 1) throw InvalidArgument("PowerMatrix::equal: empty shape");
  return {Eigen::MatrixXd::Constant(num_aps, num_users, rho_max / num_users)};
}

void PowerMatrix::validate(double rho_max, double rel_tol) const {
  if (!rho.allFinite()) throw InvalidArgument("PowerMatrix: non-finite entry");
  if (rho.size() > 0 && rho.minCoeff() < 0.0) throw InvalidArgument("PowerMatrix: negative entry");
  for (Eigen::Index l = 0; l < rho.rows(); ++l)
    if (rho.row(l).sum() > rho_max * (1.0 + rel_tol))
      throw InvalidArgument("PowerMatrix: AP " + std::to_string(l) + " exceeds rho_max");
}

namespace {

void check_shapes(const LargeScaleState& ls, const GroupingPlan& g, const PowerMatrix& p) {
  if (p.rho.rows() != ls.beta.rows() || p.rho.cols() != ls.beta.cols())
    throw InvalidArgument("power matrix shape does not match large-scale state");
  if (g.num_aps() != ls.num_aps() || g.num_users() != ls.num_users())
    throw InvalidArgument("grouping shape does not match large-scale state");
}

}  // namespace

Eigen::VectorXd sinr_users_closed(const LargeScaleState& ls, const GroupingPlan& grouping,
                                  const PowerMatrix& power, int antennas_per_ap) {
  check_shapes(ls, grouping, power);
  const int n_ap = ls.num_aps();
  const int n_user = ls.num_users();
  const Eigen::VectorXd per_ap = power.rho.rowwise().sum();
  Eigen::VectorXd out(n_user);
  for (int k = 0; k < n_user; ++k) {
    double amp = 0.0;
    double den = 1.0;
    for (int l = 0; l < n_ap; ++l) {
      const double dof = antennas_per_ap - grouping.strong_count(l);
      amp += std::sqrt(std::max(0.0, dof * power.rho(l, k) * ls.gamma(l, k)));
      const double leak = ls.beta(l, k) - grouping.delta(l, k) * ls.gamma(l, k);
      den += per_ap(l) * std::max(0.0, leak);
    }
    out(k) = amp * amp / den;
  }
  return out;
}

double sinr_eav_closed(const LargeScaleState& ls, const GroupingPlan& grouping,
                       const PowerMatrix& power, int antennas_per_ap) {
  check_shapes(ls, grouping, power);
  const int n_ap = ls.num_aps();
  double amp = 0.0;
  double num = 0.0;
  double den = 1.0;
  for (int l = 0; l < n_ap; ++l) {
    const double r1 = power.rho(l, 0);
    const double dof = antennas_per_ap - grouping.strong_count(l);
    amp += std::sqrt(std::max(0.0, r1 * dof * ls.gamma_e(l)));
    num += r1 * ls.beta_e(l);
    if (grouping.delta(l, 0)) num -= r1 * ls.gamma_e(l);
    const double others = power.rho.row(l).sum() - r1;
    den += others * std::max(0.0, ls.beta_e(l) - grouping.delta(l, 0) * ls.gamma_e(l));
  }
  return std::max(0.0, amp * amp + num) / den;
}

double sinr_eav_mrc(const LargeScaleState& ls, const GroupingPlan& grouping,
                    const PowerMatrix& power, int antennas_per_ap, int eav_antennas) {
  if (eav_antennas < 1) throw InvalidArgument("sinr_eav_mrc: N_E must be >= 1");
  return eav_antennas * sinr_eav_closed(ls, grouping, power, antennas_per_ap);
}

double secrecy_rate(double sinr_user, double sinr_eav) {
  return std::max(0.0, std::log2((1.0 + sinr_user) / (1.0 + sinr_eav)));
}

SecrecyReport make_report(Eigen::VectorXd sinr_users, double sinr_eav) {
  SecrecyReport r;
  r.se_users = sinr_users.unaryExpr([](double s) { return std::log2(1.0 + s); });
  r.sinr_users = std::move(sinr_users);
  r.sinr_eav = sinr_eav;
  r.se_eav = std::log2(1.0 + sinr_eav);
  r.sse = r.sinr_users.size() > 0 ? secrecy_rate(r.sinr_users(0), sinr_eav) : 0.0;
  return r;
}

SecrecyReport secrecy_report(const LargeScaleState& ls, const GroupingPlan& grouping,
                             const PowerMatrix& power, int antennas_per_ap, int eav_antennas) {
  return make_report(sinr_users_closed(ls, grouping, power, antennas_per_ap),
                     sinr_eav_mrc(ls, grouping, power, antennas_per_ap, eav_antennas));
}

namespace {

// Neumaier-compensated running sum.
struct Compensated {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

// Moment layout: [re x_kk (K) | im x_kk (K) | |x_kt|^2 (K*K) | |z_nt|^2 (N_E*K)]
struct Moments {
  std::vector<Compensated> m;
  std::size_t trials = 0;
};

void run_block(const LargeScaleState& ls, const GroupingPlan& grouping, const PowerMatrix& power,
               const Scenario& scenario, std::uint64_t seed, std::size_t block, std::size_t count,
               Moments& out) {
  const int n_ap = ls.num_aps();
  const int n_user = ls.num_users();
  const int n_e = scenario.eav_antennas;
  const auto off_abs = static_cast<std::size_t>(2 * n_user);
  const auto off_eav = off_abs + static_cast<std::size_t>(n_user) * n_user;
  out.m.assign(off_eav + static_cast<std::size_t>(n_e) * n_user, {});
  out.trials = count;

  Engine rng = derive_stream(seed, StreamPurpose::kOracle, block);
  ComplexNormal cn;
  const Eigen::MatrixXd amp = power.rho.cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd coupling(n_ap), residual(n_ap);
  for (int l = 0; l < n_ap; ++l) {
    const double g1 = ls.gamma(l, 0);
    coupling(l) = g1 > 0.0 ? std::sqrt(ls.gamma_e(l) / g1) : 0.0;
    residual(l) = std::sqrt(std::max(0.0, ls.beta_e(l) - ls.gamma_e(l)));
  }

  Eigen::MatrixXcd x(n_user, n_user);
  Eigen::MatrixXcd z(n_e, n_user);
  Eigen::MatrixXcd he;
  for (std::size_t trial = 0; trial < count; ++trial) {
    const ChannelRealization r = draw_estimated_channels(ls, scenario, rng);
    const PrecoderSet pre = build_ppzf(r, grouping, ls);
    x.setZero();
    z.setZero();
    for (int l = 0; l < n_ap; ++l) {
      const Eigen::MatrixXcd wl = pre.w[l] * amp.row(l).transpose().asDiagonal();
      x.noalias() += r.h[l].adjoint() * wl;
      he = r.h_e[l];
      for (int n = 1; n < n_e; ++n)
        for (Eigen::Index a = 0; a < he.rows(); ++a)
          he(a, n) = coupling(l) * r.h_hat[l](a, 0) + residual(l) * cn(rng);
      z.noalias() += he.adjoint() * wl;
    }
    for (int k = 0; k < n_user; ++k) {
      out.m[k].add(x(k, k).real());
      out.m[n_user + k].add(x(k, k).imag());
    }
    for (int k = 0; k < n_user; ++k)
      for (int t = 0; t < n_user; ++t) out.m[off_abs + k * n_user + t].add(std::norm(x(k, t)));
    for (int n = 0; n < n_e; ++n)
      for (int t = 0; t < n_user; ++t) out.m[off_eav + n * n_user + t].add(std::norm(z(n, t)));
  }
}

}  // namespace

McEstimate secrecy_monte_carlo(const LargeScaleState& ls, const GroupingPlan& grouping,
                               const PowerMatrix& power, const Scenario& scenario,
                               const McOptions& options) {
  check_shapes(ls, grouping, power);
  if (options.n_trials < 1) throw InvalidArgument("Monte Carlo: n_trials must be >= 1");
  if (options.block_size < 1) throw InvalidArgument("Monte Carlo: block_size must be >= 1");
  const std::size_t n_blocks = (options.n_trials + options.block_size - 1) / options.block_size;
  std::vector<Moments> blocks(n_blocks);
  auto block_count = [&](std::size_t b) {
    return std::min(options.block_size, options.n_trials - b * options.block_size);
  };
  const auto n_threads = static_cast<std::size_t>(
      std::clamp<long>(options.threads, 1, static_cast<long>(n_blocks)));
  if (n_threads == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b)
      run_block(ls, grouping, power, scenario, options.seed, b, block_count(b), blocks[b]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t b = w; b < n_blocks; b += n_threads)
            run_block(ls, grouping, power, scenario, options.seed, b, block_count(b), blocks[b]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const std::size_t n_mom = blocks[0].m.size();
  std::vector<Compensated> total(n_mom);
  for (const auto& b : blocks)
    for (std::size_t i = 0; i < n_mom; ++i) {
      total[i].add(b.m[i].sum);
      total[i].add(b.m[i].c);
    }
  const double n = static_cast<double>(options.n_trials);
  auto mean = [&](std::size_t i) { return total[i].value() / n; };

  const int n_user = ls.num_users();
  const int n_e = scenario.eav_antennas;
  const auto off_abs = static_cast<std::size_t>(2 * n_user);
  const auto off_eav = off_abs + static_cast<std::size_t>(n_user) * n_user;
  McEstimate est;
  est.n_trials = options.n_trials;
  est.sinr_users.resize(n_user);
  for (int k = 0; k < n_user; ++k) {
    const double cp = std::norm(std::complex<double>(mean(k), mean(n_user + k)));
    double total_power = 0.0;
    for (int t = 0; t < n_user; ++t) total_power += mean(off_abs + k * n_user + t);
    est.sinr_users(k) = cp / (total_power - cp + 1.0);
  }
  est.sinr_eav_per_antenna.resize(n_e);
  for (int a = 0; a < n_e; ++a) {
    double interference = 0.0;
    for (int t = 1; t < n_user; ++t) interference += mean(off_eav + a * n_user + t);
    est.sinr_eav_per_antenna(a) = mean(off_eav + a * n_user) / (interference + 1.0);
  }
  est.sinr_eav = est.sinr_eav_per_antenna(0);
  est.sinr_eav_mrc = est.sinr_eav_per_antenna.sum();
  return est;
}

Eigen::VectorXd sinr_users_mc(const LargeScaleState& ls, const GroupingPlan& grouping,
                              const PowerMatrix& power, const Scenario& scenario,
                              const McOptions& options) {
  return secrecy_monte_carlo(ls, grouping, power, scenario, options).sinr_users;
}

double sinr_eav_mc(const LargeScaleState& ls, const GroupingPlan& grouping,
                   const PowerMatrix& power, const Scenario& scenario,
                   const McOptions& options) {
  return secrecy_monte_carlo(ls, grouping, power, scenario, options).sinr_eav;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string secrecy_csv_header(int num_users) {
  std::ostringstream os;
  os << "scenario_id,seed,method";
  for (int k = 0; k < num_users; ++k) os << ",sinr_u" << k;
  for (int k = 0; k < num_users; ++k) os << ",se_u" << k;
  os << ",sinr_eav,se_eav,sse";
  return os.str();
}

std::string secrecy_csv_row(const std::string& scenario_id, std::uint64_t seed,
                            const std::string& method, const SecrecyReport& report) {
  std::ostringstream os;
  os << scenario_id << ',' << seed << ',' << method;
  for (Eigen::Index k = 0; k < report.sinr_users.size(); ++k)
    os << ',' << format_double(report.sinr_users(k));
  for (Eigen::Index k = 0; k < report.se_users.size(); ++k)
    os << ',' << format_double(report.se_users(k));
  os << ',' << format_double(report.sinr_eav) << ',' << format_double(report.se_eav) << ','
     << format_double(report.sse);
  return os.str();
}

}  // namespace cfsec
