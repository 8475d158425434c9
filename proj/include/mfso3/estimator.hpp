#pragma once

#include "mfso3/fitting.hpp"
#include "mfso3/matrix_fisher.hpp"
#include "mfso3/vmf.hpp"

#include <array>
#include <vector>

namespace mfso3 {

inline constexpr double kDefaultSigma = 0.9;

/// Gyro noise in (R^T dR)^vee = Omega dt + H dW. H is diagonal (rad/sqrt(s)).
struct GyroModel {
  Matrix3 H = Matrix3::Zero();
  Matrix3 G = Matrix3::Zero();  // H H^T

  GyroModel() = default;
  /// Throws std::invalid_argument for a non-diagonal or non-finite H.
  explicit GyroModel(const Matrix3& H);
};

/// Moment map of the diffusion over one step, I + (h/2)(G - tr(G) I).
/// Throws std::invalid_argument unless h tr(G) < 2/3.
Matrix3 diffusion_factor(const GyroModel& gyro, double h);

/// Attitude sensor: the error R^T Z follows M(F_Z).
struct AttitudeSensor {
  Matrix3 F_Z = Matrix3::Zero();
};

struct AttitudeMeasurement {
  Rotation Z;
  AttitudeSensor sensor;
};

struct DirectionMeasurement {
  Vector3 z;
  VonMisesFisherS2 sensor;
};

/// Seven sigma rotations whose weighted sum is exactly E[R]. Order:
/// R0 = UV^T, then R_i(+theta_i), R_i(-theta_i) for i = 1, 2, 3.
struct UnscentedSet {
  std::array<Rotation, 7> points;
  std::array<double, 7> weights{};
  Vector3 theta = Vector3::Zero();
  double sigma = kDefaultSigma;

  Matrix3 weighted_moment() const;
};

/// Infimum of admissible sigma for singular values s (0 at s = 0). The
/// (2s1+s2-s3-1)/(2s1+s2-s3+1) term applies only when s2 + s3 < 1.
double sigma_lower_bound(const Vector3& s);

/// Throws SigmaOutOfRange unless sigma_lower_bound(s) < sigma < 1.
UnscentedSet unscented_transform(const MatrixFisher& dist, double sigma = kDefaultSigma);

MatrixFisher inverse_unscented(const UnscentedSet& set, const NewtonOptions& opts = {});

struct FilterState {
  int k = 0;
  MatrixFisher dist;
  double h = 0.01;
};

/// Moment propagation over one gyro interval with Omega held fixed.
FilterState propagate_first_order(const FilterState& state, const Vector3& omega,
                                  const GyroModel& gyro, const NewtonOptions& opts = {});

/// Sigma points transported by exp(h Omega^), then the diffusion factor.
FilterState propagate_unscented(const FilterState& state, const Vector3& omega,
                                const GyroModel& gyro, double sigma = kDefaultSigma,
                                const NewtonOptions& opts = {});

/// Conjugate update F + sum Z F_Z^T + sum b B a z^T.
FilterState correct(const FilterState& state, const std::vector<AttitudeMeasurement>& attitude,
                    const std::vector<DirectionMeasurement>& direction,
                    const QuadratureRule& rule = default_rule());

enum class FilterMode { first_order, unscented };

const char* to_string(FilterMode mode);

/// Measurements available at the end of gyro step `step` (time step * h).
struct MeasurementEpoch {
  int step = 0;
  std::vector<AttitudeMeasurement> attitude;
  std::vector<DirectionMeasurement> direction;
};

struct StepRecord {
  double t = 0.0;
  Matrix3 F = Matrix3::Zero();
  Vector3 s = Vector3::Zero();
  Rotation mean;
  double error_deg = 0.0;  // NaN without truth
  Vector3 inv_pair_sums = Vector3::Zero();  // 1/(s2+s3), 1/(s3+s1), 1/(s1+s2)
  bool corrected = false;
};

struct EstimationRun {
  FilterMode mode = FilterMode::first_order;
  std::vector<StepRecord> records;
};

struct FilterConfig {
  double h = 0.02;
  GyroModel gyro;
  FilterMode mode = FilterMode::first_order;
  double sigma = kDefaultSigma;
  NewtonOptions newton;
};

/// Runs the filter over gyro samples omega[0..N-1] (left endpoints of each
/// step) and records N + 1 states at t = k h. Measurements with step k are
/// applied after propagating to t_k (step 0 corrects the prior). `truth`,
/// when given, must hold N + 1 rotations. Failures are rethrown as
/// FilterStepError.
EstimationRun run_filter(const MatrixFisher& initial, const std::vector<Vector3>& omega,
                         const std::vector<MeasurementEpoch>& measurements,
                         const FilterConfig& cfg, const std::vector<Rotation>* truth = nullptr);

}  // namespace mfso3
