#pragma once

#include "mfso3/estimator.hpp"
#include "mfso3/matrix_fisher.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfso3 {

/// Rigid body pivoting under uniform gravity (e3 is the gravity direction).
struct PendulumConfig {
  Matrix3 J = Eigen::Vector3d(0.2, 0.3, 0.4).asDiagonal();  // kg m^2
  Vector3 rho{0.01, 0.004, 0.02};                          // pivot to mass center, body frame (m)
  double mass = 1.0;                                       // kg
  double gravity = 9.81;                                   // m/s^2
  Rotation R0;
  Vector3 omega0 = Vector3::Constant(4.14);  // rad/s

  /// Throws std::invalid_argument if J is not symmetric positive definite
  /// or a scalar is non-finite.
  void validate() const;
};

struct Trajectory {
  double h = 0.0;
  std::vector<Rotation> R;      // R[k] at t = k h
  std::vector<Vector3> omega;   // body angular velocity at t = k h
};

/// Kinetic plus potential energy, 1/2 W^T J W - m g e3^T R rho.
double pendulum_energy(const PendulumConfig& cfg, const Rotation& R, const Vector3& omega);

/// Samples at `rate` Hz over [0, duration], integrating the Euler equations
/// with a Lie-group Heun step, `substeps` steps per sample.
Trajectory simulate_truth(const PendulumConfig& cfg, double duration, double rate, int substeps = 1);

enum class GyroNoiseModel {
  increment,  // Omega + H xi sqrt(h)
  white,      // Omega + H xi / sqrt(h)
};

/// Measured angular velocity at every sample except the last, one per
/// propagation interval.
std::vector<Vector3> simulate_gyro(const std::vector<Vector3>& omega_true, const Matrix3& H, double h,
                                   Rng& rng, GyroNoiseModel model = GyroNoiseModel::increment);

/// Z = R_true E with E ~ error.
Rotation simulate_attitude_measurement(const Rotation& R_true, const MatrixFisher& error, Rng& rng);

struct DirectionSensorConfig {
  Vector3 a = Vector3::UnitZ();
  double b = 1.0;
  Matrix3 B = Matrix3::Identity();
};

struct ScenarioConfig {
  std::string name = "scenario";
  double duration = 10.0;        // s
  double gyro_rate = 50.0;       // Hz
  double measurement_rate = 10.0;  // Hz
  Matrix3 H = Matrix3::Zero();   // filter's gyro noise model
  std::optional<Matrix3> H_sim;  // noise used to simulate the gyro, H when absent
  GyroNoiseModel gyro_noise_model = GyroNoiseModel::increment;
  std::vector<Matrix3> attitude_sensors;  // F_Z per sensor
  std::vector<DirectionSensorConfig> direction_sensors;
  Matrix3 initial_F = Matrix3::Zero();
  double sigma = kDefaultSigma;
  std::uint64_t seed = 1;
  PendulumConfig pendulum;
  int truth_substeps = 1;

  int steps() const;             // gyro samples
  int measurement_ratio() const;  // gyro samples per measurement

  /// All problems, one per entry; empty when valid.
  std::vector<std::string> problems() const;
};

struct RunSummary {
  double mean_error_deg = 0.0;       // over t >= t_start
  Vector3 mean_pair_sums = Vector3::Zero();  // s2+s3, s3+s1, s1+s2 averaged over t >= t_start
  Vector3 mean_inv_pair_sums = Vector3::Zero();
  Vector3 peak_inv_pair_sums = Vector3::Zero();  // max over t < t_start
};

RunSummary summarize(const EstimationRun& run, double t_start = 0.5);

struct ScenarioResult {
  Trajectory truth;
  std::vector<Vector3> gyro;
  std::vector<MeasurementEpoch> measurements;
  EstimationRun first_order;
  EstimationRun unscented;
  RunSummary first_order_summary;
  RunSummary unscented_summary;
};

/// Both filters on one shared realization. Throws std::invalid_argument
/// listing every problem of an invalid config.
ScenarioResult run_scenario(const ScenarioConfig& sc, const NewtonOptions& newton = {});

}  // namespace mfso3
