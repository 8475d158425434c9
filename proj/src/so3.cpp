#include "mfso3/so3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfso3 {

namespace {

constexpr double kSmallAngle = 1e-6;

}  // namespace

Rotation Rotation::from_matrix(const Matrix3& m, double tol) {
  if (!m.allFinite()) throw std::invalid_argument("rotation matrix has non-finite entries");
  Rotation r(m, Trusted{});
  const double err = r.orthogonality_error();
  if (err > tol) {
    throw std::invalid_argument("matrix is not in SO(3): orthogonality/determinant error " +
                                std::to_string(err));
  }
  return r;
}

double Rotation::orthogonality_error() const {
  return (m_.transpose() * m_ - Matrix3::Identity()).norm() + std::abs(m_.determinant() - 1.0);
}

Matrix3 hat(const Vector3& v) {
  Matrix3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

Vector3 vee(const Matrix3& S, double tol) {
  const Matrix3 sym = 0.5 * (S + S.transpose());
  if (sym.cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("vee: matrix is not antisymmetric (symmetric part " +
                                std::to_string(sym.cwiseAbs().maxCoeff()) + ")");
  }
  return {0.5 * (S(2, 1) - S(1, 2)), 0.5 * (S(0, 2) - S(2, 0)), 0.5 * (S(1, 0) - S(0, 1))};
}

Rotation exp_so3(const Vector3& v) {
  const double theta2 = v.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;  // sin(theta)/theta
  double b;  // (1 - cos(theta))/theta^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Matrix3 K = hat(v);
  return Rotation::trusted(Matrix3::Identity() + a * K + b * K * K);
}

Vector3 log_so3(const Rotation& R) {
  const Matrix3& m = R.matrix();
  const Vector3 w{0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)), 0.5 * (m(1, 0) - m(0, 1))};
  const double sin_t = w.norm();
  const double cos_t = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(sin_t, cos_t);

  if (theta < kSmallAngle) return (1.0 + theta * theta / 6.0) * w;
  if (cos_t > -0.9) return (theta / sin_t) * w;

  // Near pi the antisymmetric part vanishes; recover the axis from n n^T.
  const Matrix3 nn = (0.5 * (m + m.transpose()) - cos_t * Matrix3::Identity()) / (1.0 - cos_t);
  int col = 0;
  nn.diagonal().maxCoeff(&col);
  Vector3 n = nn.col(col) / std::sqrt(std::max(nn(col, col), 1e-300));
  n.normalize();
  const double d = n.dot(w);
  if (std::abs(d) > 1e-14) {
    if (d < 0.0) n = -n;
  } else {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(n[i]) > 1e-12) {
        if (n[i] < 0.0) n = -n;
        break;
      }
    }
  }
  return theta * n;
}

double rotation_angle(const Rotation& R) {
  const Matrix3& m = R.matrix();
  const Vector3 w{0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)), 0.5 * (m(1, 0) - m(0, 1))};
  return std::atan2(w.norm(), std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0));
}

ProperSVD proper_svd(const Matrix3& F) {
  ProperSVD out;
  if (F.isZero(0.0)) return out;

  Eigen::JacobiSVD<Matrix3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 U = svd.matrixU();
  Matrix3 V = svd.matrixV();
  const Vector3 sv = svd.singularValues();
  const double det_u = U.determinant() > 0.0 ? 1.0 : -1.0;
  const double det_v = V.determinant() > 0.0 ? 1.0 : -1.0;
  U.col(2) *= det_u;
  V.col(2) *= det_v;

  out.U = Rotation::trusted(U);
  out.V = Rotation::trusted(V);
  // s3 = 0 keeps +0 whatever the determinant sign.
  out.s = {sv[0], sv[1], sv[2] == 0.0 ? 0.0 : det_u * det_v * sv[2]};
  return out;
}

Rotation quat_to_rotation(const Quaternion& x) {
  const Vector3& q = x.vec;
  const double q4 = x.scalar;
  const Matrix3 m = (q4 * q4 - q.squaredNorm()) * Matrix3::Identity() + 2.0 * q * q.transpose() +
                    2.0 * q4 * hat(q);
  return Rotation::trusted(m);
}

Rotation sample_uniform(Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::Vector4d x;
  do {
    for (int i = 0; i < 4; ++i) x[i] = normal(rng);
  } while (x.norm() < 1e-12);
  x.normalize();
  return quat_to_rotation({x.head<3>(), x[3]});
}

}  // namespace mfso3
