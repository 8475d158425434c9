#include "mfso3/estimator.hpp"

#include "mfso3/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mfso3 {

namespace {

FilterState refit(const FilterState& state, const Matrix3& moment, const NewtonOptions& opts) {
  FitResult fit = fit_from_moment(moment, opts);
  return {state.k + 1, std::move(fit.distribution), state.h};
}

double pair_inverse(double a, double b) {
  const double sum = a + b;
  return sum > 0.0 ? 1.0 / sum : std::numeric_limits<double>::infinity();
}

}  // namespace

GyroModel::GyroModel(const Matrix3& H_) : H(H_), G(H_ * H_.transpose()) {
  if (!H.allFinite()) throw std::invalid_argument("GyroModel: H has non-finite entries");
  Matrix3 off = H;
  off.diagonal().setZero();
  if (!off.isZero(0.0)) throw std::invalid_argument("GyroModel: H must be diagonal");
}

Matrix3 diffusion_factor(const GyroModel& gyro, double h) {
  const double trG = gyro.G.trace();
  if (!(h > 0.0) || h * trG >= 2.0 / 3.0) {
    std::ostringstream os;
    os << "diffusion factor requires h > 0 and h tr(G) < 2/3 (h = " << h << ", tr(G) = " << trG
       << ")";
    throw std::invalid_argument(os.str());
  }
  return Matrix3::Identity() + 0.5 * h * (gyro.G - trG * Matrix3::Identity());
}

Matrix3 UnscentedSet::weighted_moment() const {
  Matrix3 m = Matrix3::Zero();
  for (int i = 0; i < 7; ++i) m += weights[i] * points[i].matrix();
  return m;
}

double sigma_lower_bound(const Vector3& s) {
  // the first bound keeps the pair < 1 branch inside (-1, 1); only s2 + s3 can fall there
  const double a = 2.0 * s[0] + s[1] - s[2];
  const double first = s[1] + s[2] < 1.0 ? (a - 1.0) / (a + 1.0) : 0.0;
  const double den = s[0] + s[1];
  const double second = den > 0.0 ? (s[0] - s[2]) / den : 0.0;
  return std::max(first, second);
}

UnscentedSet unscented_transform(const MatrixFisher& dist, double sigma) {
  const Vector3& s = dist.s();
  const double lower = sigma_lower_bound(s);
  if (!(sigma > lower && sigma < 1.0)) {
    std::ostringstream os;
    os << "sigma = " << sigma << " outside the admissible interval (" << lower << ", 1)";
    throw SigmaOutOfRange(os.str(), lower);
  }
  const double log_c = dist.log_c();
  const Vector3 d = dist.normalizing().moment_diag();
  const Rotation& U = dist.svd().U;
  const Rotation Vt = dist.svd().V.transpose();

  UnscentedSet set;
  set.sigma = sigma;
  set.points[0] = U * Vt;
  double wsum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    const double pair = s[j] + s[k];
    const double level = log_c - s[i];
    double cos_t;
    if (pair >= 1.0) {
      cos_t = sigma + (1.0 - sigma) * level / pair;
    } else {
      // pi/3 at pair = 0, continuous with the branch above at pair = 1
      cos_t = (sigma + (1.0 - sigma) * level - 0.5) * pair + 0.5;
    }
    cos_t = std::clamp(cos_t, -1.0, 1.0);
    const double theta = std::acos(cos_t);
    set.theta[i] = theta;
    const double w = (d[i] - d[j] - d[k] + 1.0) / (4.0 * (1.0 - cos_t));
    const Vector3 axis = Vector3::Unit(i);
    set.points[1 + 2 * i] = U * exp_so3(theta * axis) * Vt;
    set.points[2 + 2 * i] = U * exp_so3(-theta * axis) * Vt;
    set.weights[1 + 2 * i] = w;
    set.weights[2 + 2 * i] = w;
    wsum += w;
  }
  set.weights[0] = 1.0 - 2.0 * wsum;
  return set;
}

MatrixFisher inverse_unscented(const UnscentedSet& set, const NewtonOptions& opts) {
  return fit_from_moment(set.weighted_moment(), opts).distribution;
}

FilterState propagate_first_order(const FilterState& state, const Vector3& omega,
                                  const GyroModel& gyro, const NewtonOptions& opts) {
  const Matrix3 D = diffusion_factor(gyro, state.h);
  const Matrix3 moment = state.dist.first_moment() * D * exp_so3(state.h * omega).matrix();
  return refit(state, moment, opts);
}

FilterState propagate_unscented(const FilterState& state, const Vector3& omega,
                                const GyroModel& gyro, double sigma, const NewtonOptions& opts) {
  const Matrix3 D = diffusion_factor(gyro, state.h);
  UnscentedSet set = unscented_transform(state.dist, sigma);
  const Rotation step = exp_so3(state.h * omega);
  for (Rotation& R : set.points) R = R * step;
  return refit(state, set.weighted_moment() * D, opts);
}

FilterState correct(const FilterState& state, const std::vector<AttitudeMeasurement>& attitude,
                    const std::vector<DirectionMeasurement>& direction,
                    const QuadratureRule& rule) {
  if (attitude.empty() && direction.empty()) return state;
  Matrix3 F = state.dist.F();
  for (const auto& m : attitude) F += m.Z.matrix() * m.sensor.F_Z.transpose();
  for (const auto& m : direction) {
    F += m.sensor.b * (m.sensor.B * m.sensor.a) * m.z.transpose();
  }
  return {state.k, MatrixFisher(F, rule), state.h};
}

const char* to_string(FilterMode mode) {
  return mode == FilterMode::first_order ? "first_order" : "unscented";
}

EstimationRun run_filter(const MatrixFisher& initial, const std::vector<Vector3>& omega,
                         const std::vector<MeasurementEpoch>& measurements,
                         const FilterConfig& cfg, const std::vector<Rotation>* truth) {
  const int n = static_cast<int>(omega.size());
  if (truth && static_cast<int>(truth->size()) != n + 1) {
    throw std::invalid_argument("run_filter: truth must hold one rotation per recorded step");
  }
  for (std::size_t i = 1; i < measurements.size(); ++i) {
    if (measurements[i].step <= measurements[i - 1].step) {
      throw std::invalid_argument("run_filter: measurement epochs must be strictly increasing");
    }
  }

  const QuadratureRule& rule = cfg.newton.rule ? *cfg.newton.rule : default_rule();
  EstimationRun run;
  run.mode = cfg.mode;
  run.records.reserve(n + 1);
  FilterState state{0, initial, cfg.h};
  std::size_t next = 0;

  auto record = [&](bool corrected) {
    StepRecord r;
    r.t = state.k * cfg.h;
    r.F = state.dist.F();
    r.s = state.dist.s();
    r.mean = state.dist.mean_attitude().R;
    r.error_deg = std::numeric_limits<double>::quiet_NaN();
    if (truth) {
      r.error_deg = rotation_angle((*truth)[state.k].transpose() * r.mean) * 180.0 / std::numbers::pi;
    }
    r.inv_pair_sums = {pair_inverse(r.s[1], r.s[2]), pair_inverse(r.s[2], r.s[0]),
                       pair_inverse(r.s[0], r.s[1])};
    r.corrected = corrected;
    run.records.push_back(std::move(r));
  };

  auto apply_measurements = [&]() {
    while (next < measurements.size() && measurements[next].step < state.k) ++next;
    if (next < measurements.size() && measurements[next].step == state.k) {
      state = correct(state, measurements[next].attitude, measurements[next].direction, rule);
      ++next;
      return true;
    }
    return false;
  };

  try {
    record(apply_measurements());
    for (int k = 0; k < n; ++k) {
      if (cfg.mode == FilterMode::first_order) {
        state = propagate_first_order(state, omega[k], cfg.gyro, cfg.newton);
      } else {
        state = propagate_unscented(state, omega[k], cfg.gyro, cfg.sigma, cfg.newton);
      }
      record(apply_measurements());
    }
  } catch (const FilterStepError&) {
    throw;
  } catch (const std::exception& e) {
    throw FilterStepError(state.k, state.k * cfg.h, e.what());
  }
  return run;
}

}  // namespace mfso3
