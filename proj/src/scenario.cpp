#include "cfsec/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "cfsec/errors.hpp"

namespace cfsec {

Scenario Scenario::defaults() {
  Scenario s;
  set_powers_mw(s, 100.0, 100.0, 200.0);
  s.tau_p = s.num_users;
  return s;
}

void Scenario::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("scenario: " + what); };
  if (num_aps < 1) fail("L must be >= 1");
  if (antennas_per_ap < 1) fail("M must be >= 1");
  if (num_users < 1) fail("K must be >= 1");
  if (eav_antennas < 1) fail("N_E must be >= 1");
  if (static_cast<long>(num_aps) * antennas_per_ap <= num_users) fail("requires L*M > K");
  if (tau_p < num_users) fail("requires tau_p >= K");
  if (tau <= 0) fail("tau must be positive");
  if (!(area_side > 0.0)) fail("area_side must be positive");
  if (!(r_eav >= 0.0) || !(r_eav < area_side)) fail("requires 0 <= r_eav < area_side");
  if (!(rho_u > 0.0)) fail("rho_u must be positive");
  if (!(rho_max > 0.0)) fail("rho_max must be positive");
  if (!(rho_e >= 0.0)) fail("rho_E must be nonnegative");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth_hz must be positive");
  if (!(shadow_std_db >= 0.0)) fail("shadow_std_db must be nonnegative");
}

double Scenario::noise_power_w() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

double snr_from_mw(double power_mw, double noise_dbm) {
  return power_mw * 1e-3 / std::pow(10.0, (noise_dbm - 30.0) / 10.0);
}

void set_powers_mw(Scenario& s, double user_mw, double eav_mw, double ap_mw) {
  s.rho_u = snr_from_mw(user_mw, s.noise_dbm);
  s.rho_e = snr_from_mw(eav_mw, s.noise_dbm);
  s.rho_max = snr_from_mw(ap_mw, s.noise_dbm);
}

double wrap_distance(Point a, Point b, double area_side) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, area_side - dx);
  dy = std::min(dy, area_side - dy);
  return std::hypot(dx, dy);
}

double path_loss_db(double distance_m) {
  if (!(distance_m > 0.0)) throw InvalidArgument("path_loss_db: distance must be positive");
  return -30.5 - 36.7 * std::log10(distance_m);
}

double path_gain(double distance_m) {
  return std::pow(10.0, path_loss_db(std::max(distance_m, 1.0)) / 10.0);
}

Eigen::MatrixXd shadow_covariance(std::span<const Point> user_positions, double area_side,
                                  double std_db, double decorrelation_m) {
  const auto k = static_cast<Eigen::Index>(user_positions.size());
  if (k < 1) throw InvalidArgument("shadow_covariance: need at least one user");
  Eigen::MatrixXd cov(k, k);
  const double var = std_db * std_db;
  for (Eigen::Index i = 0; i < k; ++i) {
    cov(i, i) = var;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double zeta = wrap_distance(user_positions[i], user_positions[j], area_side);
      cov(i, j) = cov(j, i) = var * std::exp2(-zeta / decorrelation_m);
    }
  }
  // PSD repair: the kernel evaluated with torus distances is not guaranteed
  // positive semidefinite.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() < 0.0) {
    lambda = lambda.cwiseMax(0.0);
    Eigen::MatrixXd repaired = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    cov = 0.5 * (repaired + repaired.transpose());
  }
  return cov;
}

double estimate_variance_clean(double beta, double tau_p, double rho_u) {
  const double snr = tau_p * rho_u;
  return snr * beta * beta / (snr * beta + 1.0);
}

double estimate_variance_attacked(double beta, double beta_e, double tau_p, double rho_u,
                                  double rho_e) {
  return tau_p * rho_u * beta * beta / (tau_p * rho_u * beta + tau_p * rho_e * beta_e + 1.0);
}

double estimate_variance_eav(double beta, double beta_e, double tau_p, double rho_u, double rho_e) {
  return tau_p * rho_e * beta_e * beta_e / (tau_p * rho_u * beta + tau_p * rho_e * beta_e + 1.0);
}

LargeScaleState make_large_scale(Eigen::MatrixXd beta, Eigen::VectorXd beta_e,
                                 const Scenario& scenario, Eigen::MatrixXd shadow) {
  if (beta.rows() != beta_e.size()) throw InvalidArgument("make_large_scale: size mismatch");
  if (beta.cols() < 1) throw InvalidArgument("make_large_scale: need at least one user");
  LargeScaleState st;
  const double tp = scenario.tau_p;
  st.gamma.resize(beta.rows(), beta.cols());
  st.gamma_e.resize(beta.rows());
  for (Eigen::Index l = 0; l < beta.rows(); ++l) {
    st.gamma(l, 0) = estimate_variance_attacked(beta(l, 0), beta_e(l), tp, scenario.rho_u, scenario.rho_e);
    for (Eigen::Index k = 1; k < beta.cols(); ++k)
      st.gamma(l, k) = estimate_variance_clean(beta(l, k), tp, scenario.rho_u);
    st.gamma_e(l) = estimate_variance_eav(beta(l, 0), beta_e(l), tp, scenario.rho_u, scenario.rho_e);
  }
  st.shadow = shadow.size() ? std::move(shadow) : Eigen::MatrixXd::Zero(beta.rows(), beta.cols());
  st.beta = std::move(beta);
  st.beta_e = std::move(beta_e);
  return st;
}

Geometry draw_geometry(const Scenario& scenario, Engine& rng) {
  std::uniform_real_distribution<double> coord(0.0, scenario.area_side);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Geometry g;
  g.ap_positions.resize(scenario.num_aps);
  g.user_positions.resize(scenario.num_users);
  for (auto& p : g.ap_positions) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  for (auto& p : g.user_positions) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  // Uniform over the disk around user 0, wrapped back into the square.
  const double radius = scenario.r_eav * std::sqrt(unit(rng));
  const double angle = 2.0 * std::numbers::pi * unit(rng);
  auto wrap = [side = scenario.area_side](double v) {
    double w = std::fmod(v, side);
    if (w < 0.0) w += side;
    return w >= side ? 0.0 : w;
  };
  g.eav_position.x = wrap(g.user_positions[0].x + radius * std::cos(angle));
  g.eav_position.y = wrap(g.user_positions[0].y + radius * std::sin(angle));
  return g;
}

void validate_geometry(const Scenario& scenario, const Geometry& geometry) {
  if (static_cast<int>(geometry.ap_positions.size()) != scenario.num_aps ||
      static_cast<int>(geometry.user_positions.size()) != scenario.num_users)
    throw InvalidArgument("geometry: point counts do not match the scenario");
  auto inside = [side = scenario.area_side](Point p) {
    return p.x >= 0.0 && p.x < side && p.y >= 0.0 && p.y < side;
  };
  for (const auto& p : geometry.ap_positions)
    if (!inside(p)) throw InvalidArgument("geometry: AP outside the area");
  for (const auto& p : geometry.user_positions)
    if (!inside(p)) throw InvalidArgument("geometry: user outside the area");
  if (!inside(geometry.eav_position)) throw InvalidArgument("geometry: eavesdropper outside the area");
  const double d = wrap_distance(geometry.eav_position, geometry.user_positions[0], scenario.area_side);
  if (d > scenario.r_eav * (1.0 + 1e-12) + 1e-9)
    throw InvalidArgument("geometry: eavesdropper farther than r_eav from user 0");
}

LargeScaleState draw_large_scale(const Scenario& scenario, const Geometry& geometry, Engine& rng) {
  const int n_ap = scenario.num_aps;
  const int n_user = scenario.num_users;
  validate_geometry(scenario, geometry);

  const Eigen::MatrixXd cov =
      shadow_covariance(geometry.user_positions, scenario.area_side, scenario.shadow_std_db);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::MatrixXd factor =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd shadow(n_ap, n_user);
  Eigen::VectorXd z(n_user);
  for (int l = 0; l < n_ap; ++l) {
    for (int k = 0; k < n_user; ++k) z(k) = normal(rng);
    shadow.row(l) = (factor * z).transpose();
  }
  Eigen::VectorXd shadow_e(n_ap);
  for (int l = 0; l < n_ap; ++l) shadow_e(l) = scenario.shadow_std_db * normal(rng);

  Eigen::MatrixXd beta(n_ap, n_user);
  Eigen::VectorXd beta_e(n_ap);
  for (int l = 0; l < n_ap; ++l) {
    const Point ap = geometry.ap_positions[l];
    for (int k = 0; k < n_user; ++k) {
      const double d = wrap_distance(ap, geometry.user_positions[k], scenario.area_side);
      beta(l, k) = path_gain(d) * std::pow(10.0, shadow(l, k) / 10.0);
    }
    const double de = wrap_distance(ap, geometry.eav_position, scenario.area_side);
    beta_e(l) = path_gain(de) * std::pow(10.0, shadow_e(l) / 10.0);
  }
  return make_large_scale(std::move(beta), std::move(beta_e), scenario, std::move(shadow));
}

Drop draw_drop(const Scenario& scenario, std::uint64_t drop_index) {
  Engine geo_rng = derive_stream(scenario.seed, StreamPurpose::kGeometry, drop_index);
  Engine shadow_rng = derive_stream(scenario.seed, StreamPurpose::kShadowing, drop_index);
  Drop d;
  d.geometry = draw_geometry(scenario, geo_rng);
  d.large_scale = draw_large_scale(scenario, d.geometry, shadow_rng);
  return d;
}

namespace {

const std::set<std::string>& scenario_keys() {
  static const std::set<std::string> keys = {
      "L",   "M",   "K",   "N_E",   "area_side", "r_eav",        "rho_u",     "rho_E",
      "rho_max", "tau_p", "tau", "bandwidth_hz", "noise_dbm", "seed", "shadow_std_db"};
  return keys;
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("scenario: bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("scenario: expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (!scenario_keys().count(key)) throw InvalidArgument("scenario: unknown key '" + key + "'");
  Scenario s = Scenario::defaults();
  read_if(j, "L", s.num_aps);
  read_if(j, "M", s.antennas_per_ap);
  read_if(j, "K", s.num_users);
  read_if(j, "N_E", s.eav_antennas);
  read_if(j, "area_side", s.area_side);
  read_if(j, "r_eav", s.r_eav);
  read_if(j, "rho_u", s.rho_u);
  read_if(j, "rho_E", s.rho_e);
  read_if(j, "rho_max", s.rho_max);
  read_if(j, "tau_p", s.tau_p);
  read_if(j, "tau", s.tau);
  read_if(j, "bandwidth_hz", s.bandwidth_hz);
  read_if(j, "noise_dbm", s.noise_dbm);
  read_if(j, "seed", s.seed);
  read_if(j, "shadow_std_db", s.shadow_std_db);
  if (!j.contains("tau_p")) s.tau_p = s.num_users;
  s.validate();
  return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  return nlohmann::json{{"L", s.num_aps},
                        {"M", s.antennas_per_ap},
                        {"K", s.num_users},
                        {"N_E", s.eav_antennas},
                        {"area_side", s.area_side},
                        {"r_eav", s.r_eav},
                        {"rho_u", s.rho_u},
                        {"rho_E", s.rho_e},
                        {"rho_max", s.rho_max},
                        {"tau_p", s.tau_p},
                        {"tau", s.tau},
                        {"bandwidth_hz", s.bandwidth_hz},
                        {"noise_dbm", s.noise_dbm},
                        {"seed", s.seed},
                        {"shadow_std_db", s.shadow_std_db}};
}

namespace {

std::vector<Point> points_from_json(const nlohmann::json& arr, const char* what) {
  if (!arr.is_array()) throw InvalidArgument(std::string("geometry: '") + what + "' must be an array");
  std::vector<Point> pts;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2)
      throw InvalidArgument(std::string("geometry: '") + what + "' entries must be [x, y]");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

}  // namespace

Geometry geometry_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items())
    if (key != "ap_positions" && key != "user_positions" && key != "eav_position")
      throw InvalidArgument("geometry: unknown key '" + key + "'");
  Geometry g;
  g.ap_positions = points_from_json(j.at("ap_positions"), "ap_positions");
  g.user_positions = points_from_json(j.at("user_positions"), "user_positions");
  const auto e = points_from_json(nlohmann::json::array({j.at("eav_position")}), "eav_position");
  g.eav_position = e.front();
  return g;
}

nlohmann::json geometry_to_json(const Geometry& g) {
  auto pts = [](const std::vector<Point>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back({p.x, p.y});
    return a;
  };
  return nlohmann::json{{"ap_positions", pts(g.ap_positions)},
                        {"user_positions", pts(g.user_positions)},
                        {"eav_position", {g.eav_position.x, g.eav_position.y}}};
}

}  // namespace cfsec
