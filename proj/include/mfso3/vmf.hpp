#pragma once

#include "mfso3/so3.hpp"

namespace mfso3 {

/// Direction-sensor model: z in S^2 is von Mises-Fisher about R^T B a with
/// concentration b.
struct VonMisesFisherS2 {
  Vector3 a = Vector3::UnitZ();
  double b = 1.0;
  Rotation B;

  /// Validates |a| = 1 within 1e-12 and b > 0; throws std::invalid_argument.
  VonMisesFisherS2(const Vector3& a, double b, const Rotation& B = Rotation::identity());

  Vector3 pole(const Rotation& R) const { return R.transpose() * (B * a); }
};

/// Density of z relative to the uniform distribution on S^2 (so it tends
/// to 1 as b -> 0).
double vmf_s2_pdf(const VonMisesFisherS2& m, const Rotation& R, const Vector3& z);

double vmf_s2_log_pdf(const VonMisesFisherS2& m, const Rotation& R, const Vector3& z);

Vector3 vmf_s2_sample(const VonMisesFisherS2& m, const Rotation& R, Rng& rng);

}  // namespace mfso3
