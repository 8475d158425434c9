#pragma once

#include <Eigen/Dense>

#include <random>

namespace mfso3 {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Rng = std::mt19937_64;

/// Element of SO(3). Construction from an arbitrary matrix is validated;
/// products and inverses of rotations stay rotations.
class Rotation {
 public:
  Rotation() : m_(Matrix3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Throws std::invalid_argument unless R^T R = I and det R = 1 within `tol`.
  static Rotation from_matrix(const Matrix3& m, double tol = 1e-9);

  /// Skips validation. For producers that build rotations by construction
  /// (exponential map, orthogonal factors of an SVD, quaternions).
  static Rotation trusted(const Matrix3& m) { return Rotation(m, Trusted{}); }

  const Matrix3& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  Rotation transpose() const { return Rotation(m_.transpose(), Trusted{}); }
  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_, Trusted{}); }
  Vector3 operator*(const Vector3& v) const { return m_ * v; }

  /// Frobenius distance of R^T R from I plus |det R - 1|.
  double orthogonality_error() const;

 private:
  struct Trusted {};
  Rotation(const Matrix3& m, Trusted) : m_(m) {}
  Matrix3 m_;
};

struct Quaternion {
  Vector3 vec = Vector3::Zero();
  double scalar = 1.0;

  double norm() const { return std::sqrt(vec.squaredNorm() + scalar * scalar); }
};

/// F = U diag(s) V^T with U, V in SO(3) and s1 >= s2 >= |s3|.
struct ProperSVD {
  Rotation U;
  Rotation V;
  Vector3 s = Vector3::Zero();

  Matrix3 reconstruct() const { return U.matrix() * s.asDiagonal() * V.matrix().transpose(); }
};

Matrix3 hat(const Vector3& v);

/// Inverse of hat. Off-diagonal pairs are averaged; throws std::invalid_argument
/// if the symmetric part exceeds `tol` (max abs entry).
Vector3 vee(const Matrix3& S, double tol = 1e-10);

Rotation exp_so3(const Vector3& v);

/// Rotation vector with norm in [0, pi]. At angle pi the axis is chosen with
/// its first nonzero component positive.
Vector3 log_so3(const Rotation& R);

/// Rotation angle in [0, pi].
double rotation_angle(const Rotation& R);

ProperSVD proper_svd(const Matrix3& F);

Rotation quat_to_rotation(const Quaternion& x);

/// Haar-uniform rotation (uniform quaternion on S^3).
Rotation sample_uniform(Rng& rng);

}  // namespace mfso3
