#include "mfso3/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mfso3 {

namespace {

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9 * std::max(1.0, std::abs(x)); }

Vector3 angular_acceleration(const PendulumConfig& cfg, const Matrix3& J_inv, const Rotation& R,
                             const Vector3& W) {
  const Vector3 torque = cfg.mass * cfg.rho.cross(cfg.gravity * (R.transpose() * Vector3::UnitZ()));
  return J_inv * ((cfg.J * W).cross(W) + torque);
}

}  // namespace

void PendulumConfig::validate() const {
  if (!J.allFinite() || !(J - J.transpose()).isZero(1e-12)) {
    throw std::invalid_argument("pendulum: inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(J, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("pendulum: inertia must be positive definite");
  }
  if (!rho.allFinite() || !omega0.allFinite() || !std::isfinite(mass) || !std::isfinite(gravity)) {
    throw std::invalid_argument("pendulum: non-finite parameter");
  }
}

double pendulum_energy(const PendulumConfig& cfg, const Rotation& R, const Vector3& omega) {
  return 0.5 * omega.dot(cfg.J * omega) - cfg.mass * cfg.gravity * Vector3::UnitZ().dot(R * cfg.rho);
}

Trajectory simulate_truth(const PendulumConfig& cfg, double duration, double rate, int substeps) {
  cfg.validate();
  if (!(rate > 0.0) || !(duration >= 0.0) || substeps < 1) {
    throw std::invalid_argument("simulate_truth: need rate > 0, duration >= 0, substeps >= 1");
  }
  const Matrix3 J_inv = cfg.J.inverse();
  const int n = static_cast<int>(std::round(duration * rate));
  Trajectory out;
  out.h = 1.0 / rate;
  out.R.reserve(n + 1);
  out.omega.reserve(n + 1);
  Rotation R = cfg.R0;
  Vector3 W = cfg.omega0;
  out.R.push_back(R);
  out.omega.push_back(W);
  const double dt = out.h / substeps;
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m < substeps; ++m) {
      // Heun on the group; the dexp^-1 correction of the second stage is
      // W* x W* = 0.
      const Vector3 a1 = angular_acceleration(cfg, J_inv, R, W);
      const Rotation R_star = R * exp_so3(dt * W);
      const Vector3 W_star = W + dt * a1;
      const Vector3 a2 = angular_acceleration(cfg, J_inv, R_star, W_star);
      R = R * exp_so3(0.5 * dt * (W + W_star));
      W = W + 0.5 * dt * (a1 + a2);
    }
    out.R.push_back(R);
    out.omega.push_back(W);
  }
  return out;
}

std::vector<Vector3> simulate_gyro(const std::vector<Vector3>& omega_true, const Matrix3& H, double h,
                                   Rng& rng, GyroNoiseModel model) {
  if (!(h > 0.0)) throw std::invalid_argument("simulate_gyro: step must be positive");
  std::normal_distribution<double> normal;
  const double scale = model == GyroNoiseModel::increment ? std::sqrt(h) : 1.0 / std::sqrt(h);
  std::vector<Vector3> out;
  if (omega_true.empty()) return out;
  out.reserve(omega_true.size() - 1);
  for (std::size_t k = 0; k + 1 < omega_true.size(); ++k) {
    Vector3 xi;
    for (int i = 0; i < 3; ++i) xi[i] = normal(rng);
    out.push_back(omega_true[k] + scale * (H * xi));
  }
  return out;
}

Rotation simulate_attitude_measurement(const Rotation& R_true, const MatrixFisher& error, Rng& rng) {
  return R_true * error.sample(rng);
}

int ScenarioConfig::steps() const { return static_cast<int>(std::round(duration * gyro_rate)); }

int ScenarioConfig::measurement_ratio() const {
  return static_cast<int>(std::round(gyro_rate / measurement_rate));
}

std::vector<std::string> ScenarioConfig::problems() const {
  std::vector<std::string> out;
  auto diagonal = [](const Matrix3& m) {
    Matrix3 off = m;
    off.diagonal().setZero();
    return off.isZero(0.0);
  };
  if (!(duration > 0.0) || !std::isfinite(duration)) out.push_back("duration: must be positive");
  if (!(gyro_rate > 0.0) || !std::isfinite(gyro_rate)) out.push_back("gyro_rate: must be positive");
  if (!(measurement_rate > 0.0) || !std::isfinite(measurement_rate)) {
    out.push_back("measurement_rate: must be positive");
  } else if (gyro_rate > 0.0 && (!is_integer(gyro_rate / measurement_rate) ||
                                 gyro_rate < measurement_rate)) {
    out.push_back("measurement_rate: gyro_rate must be an integer multiple of measurement_rate");
  }
  if (gyro_rate > 0.0 && duration > 0.0 && !is_integer(duration * gyro_rate)) {
    out.push_back("duration: must span a whole number of gyro intervals");
  }
  if (!H.allFinite() || !diagonal(H)) out.push_back("gyro_noise: H must be finite and diagonal");
  if (H_sim && (!H_sim->allFinite() || !diagonal(*H_sim))) {
    out.push_back("gyro_noise_sim: must be finite and diagonal");
  }
  if (gyro_rate > 0.0 && std::isfinite(gyro_rate) && H.allFinite() &&
      (H * H.transpose()).trace() / gyro_rate >= 2.0 / 3.0) {
    out.push_back("gyro_noise: h tr(H H^T) must stay below 2/3");
  }
  for (std::size_t i = 0; i < attitude_sensors.size(); ++i) {
    if (!attitude_sensors[i].allFinite()) {
      out.push_back("attitude_sensors[" + std::to_string(i) + "].F: non-finite entries");
    }
  }
  for (std::size_t i = 0; i < direction_sensors.size(); ++i) {
    const auto& d = direction_sensors[i];
    const std::string p = "direction_sensors[" + std::to_string(i) + "]";
    if (!d.a.allFinite() || std::abs(d.a.norm() - 1.0) > 1e-9) out.push_back(p + ".a: must be a unit vector");
    if (!(d.b > 0.0) || !std::isfinite(d.b)) out.push_back(p + ".b: must be positive");
    if (!d.B.allFinite() || (d.B.transpose() * d.B - Matrix3::Identity()).norm() > 1e-9 ||
        std::abs(d.B.determinant() - 1.0) > 1e-9) {
      out.push_back(p + ".B: must be a rotation matrix");
    }
  }
  if (!initial_F.allFinite()) out.push_back("initial_F: non-finite entries");
  if (!(sigma > 0.0 && sigma < 1.0)) out.push_back("sigma: must lie in (0, 1)");
  if (truth_substeps < 1) out.push_back("truth_substeps: must be >= 1");
  try {
    pendulum.validate();
  } catch (const std::invalid_argument& e) {
    out.push_back(e.what());
  }
  return out;
}

RunSummary summarize(const EstimationRun& run, double t_start) {
  RunSummary out;
  int n = 0;
  for (const StepRecord& r : run.records) {
    if (r.t < t_start - 1e-12) {
      out.peak_inv_pair_sums = out.peak_inv_pair_sums.cwiseMax(r.inv_pair_sums);
      continue;
    }
    out.mean_error_deg += r.error_deg;
    out.mean_pair_sums += Vector3(r.s[1] + r.s[2], r.s[2] + r.s[0], r.s[0] + r.s[1]);
    out.mean_inv_pair_sums += r.inv_pair_sums;
    ++n;
  }
  if (n == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.mean_error_deg = nan;
    out.mean_pair_sums.setConstant(nan);
    out.mean_inv_pair_sums.setConstant(nan);
    return out;
  }
  out.mean_error_deg /= n;
  out.mean_pair_sums /= n;
  out.mean_inv_pair_sums /= n;
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig& sc, const NewtonOptions& newton) {
  const auto problems = sc.problems();
  if (!problems.empty()) {
    std::ostringstream os;
    os << "invalid scenario '" << sc.name << "':";
    for (const auto& p : problems) os << "\n  " << p;
    throw std::invalid_argument(os.str());
  }

  const QuadratureRule& rule = newton.rule ? *newton.rule : default_rule();
  ScenarioResult out;
  const double h = 1.0 / sc.gyro_rate;
  const int n = sc.steps();
  const int ratio = sc.measurement_ratio();
  out.truth = simulate_truth(sc.pendulum, n * h, sc.gyro_rate, sc.truth_substeps);

  // independent streams for gyro and attitude/direction sensors
  std::seed_seq gyro_seed{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32), 1u};
  std::seed_seq meas_seed{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32), 2u};
  Rng gyro_rng(gyro_seed);
  Rng meas_rng(meas_seed);

  out.gyro = simulate_gyro(out.truth.omega, sc.H_sim.value_or(sc.H), h, gyro_rng, sc.gyro_noise_model);

  std::vector<MatrixFisher> errors;
  errors.reserve(sc.attitude_sensors.size());
  for (const Matrix3& F : sc.attitude_sensors) errors.emplace_back(F, rule);
  std::vector<VonMisesFisherS2> directions;
  for (const auto& d : sc.direction_sensors) {
    directions.emplace_back(d.a, d.b, Rotation::from_matrix(d.B, 1e-9));
  }

  for (int step = ratio; step <= n; step += ratio) {
    MeasurementEpoch epoch;
    epoch.step = step;
    const Rotation& R = out.truth.R[step];
    for (std::size_t i = 0; i < errors.size(); ++i) {
      epoch.attitude.push_back({simulate_attitude_measurement(R, errors[i], meas_rng),
                                AttitudeSensor{sc.attitude_sensors[i]}});
    }
    for (const auto& d : directions) {
      epoch.direction.push_back({vmf_s2_sample(d, R, meas_rng), d});
    }
    out.measurements.push_back(std::move(epoch));
  }

  const MatrixFisher initial(sc.initial_F, rule);
  FilterConfig cfg;
  cfg.h = h;
  cfg.gyro = GyroModel(sc.H);
  cfg.sigma = sc.sigma;
  cfg.newton = newton;

  cfg.mode = FilterMode::first_order;
  out.first_order = run_filter(initial, out.gyro, out.measurements, cfg, &out.truth.R);
  cfg.mode = FilterMode::unscented;
  out.unscented = run_filter(initial, out.gyro, out.measurements, cfg, &out.truth.R);

  out.first_order_summary = summarize(out.first_order);
  out.unscented_summary = summarize(out.unscented);
  return out;
}

}  // namespace mfso3
