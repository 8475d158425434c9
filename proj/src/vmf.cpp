#include "mfso3/vmf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mfso3 {

VonMisesFisherS2::VonMisesFisherS2(const Vector3& a_, double b_, const Rotation& B_)
    : a(a_), b(b_), B(B_) {
  if (!a.allFinite() || std::abs(a.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("von Mises-Fisher: mean direction must be a unit vector");
  }
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw std::invalid_argument("von Mises-Fisher: concentration must be positive, got " +
                                std::to_string(b));
  }
}

double vmf_s2_log_pdf(const VonMisesFisherS2& m, const Rotation& R, const Vector3& z) {
  // b / sinh(b) exp(b mu.z) written to stay finite for large b and exact as b -> 0
  const double b = m.b;
  return b * (m.pole(R).dot(z) - 1.0) + std::log(2.0 * b / -std::expm1(-2.0 * b));
}

double vmf_s2_pdf(const VonMisesFisherS2& m, const Rotation& R, const Vector3& z) {
  return std::exp(vmf_s2_log_pdf(m, R, z));
}

Vector3 vmf_s2_sample(const VonMisesFisherS2& m, const Rotation& R, Rng& rng) {
  std::uniform_real_distribution<double> uniform;
  const Vector3 mu = m.pole(R).normalized();
  const double xi = uniform(rng);
  const double w = std::clamp(1.0 + std::log1p((1.0 - xi) * std::expm1(-2.0 * m.b)) / m.b, -1.0, 1.0);
  const double phi = 2.0 * std::numbers::pi * uniform(rng);

  // orthonormal pair perpendicular to mu
  Vector3 t = std::abs(mu.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY();
  const Vector3 e1 = (t - t.dot(mu) * mu).normalized();
  const Vector3 e2 = mu.cross(e1);
  const double r = std::sqrt(std::max(0.0, 1.0 - w * w));
  return w * mu + r * (std::cos(phi) * e1 + std::sin(phi) * e2);
}

}  // namespace mfso3
