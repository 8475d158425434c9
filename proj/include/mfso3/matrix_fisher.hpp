#pragma once

#include "mfso3/so3.hpp"
#include "mfso3/special.hpp"

#include <Eigen/Dense>

namespace mfso3 {

/// Normalizing constant of M(S) in exponentially scaled form,
/// c_bar = exp(-tr S) c(S), with its derivatives in s.
struct NormalizingInfo {
  double log_c = 0.0;
  double c_bar = 1.0;
  Vector3 grad_bar = Vector3::Zero();
  Matrix3 hess_bar = Matrix3::Zero();

  /// Diagonal of E[Q], i.e. (1/c) dc/ds_i = 1 + (1/c_bar) dc_bar/ds_i.
  Vector3 moment_diag() const { return Vector3::Ones() + grad_bar / c_bar; }

  /// E[Q_ii Q_jj] = (1/c) d^2 c / ds_i ds_j.
  Matrix3 second_moments() const;

  /// d moment_diag / ds, the covariance of diag(Q).
  Matrix3 moment_jacobian() const;
};

/// Proper singular values must satisfy s1 >= s2 >= |s3|; throws
/// std::invalid_argument otherwise. `rule` is the per-panel Gauss-Legendre
/// rule of the graded composite quadrature.
NormalizingInfo normalizer(const Vector3& s, const QuadratureRule& rule = default_rule());

/// c_bar alone, integrating with index k (0-based) as the cosine variable.
/// Every k gives the same value; exposed for consistency checks.
double scaled_normalizer(const Vector3& s, int k, const QuadratureRule& rule = default_rule());

namespace detail {
// As normalizer() without the ordering check. Newton trial points may
// step slightly out of order.
NormalizingInfo normalizer_unchecked(const Vector3& s, const QuadratureRule& rule);
}  // namespace detail

/// diag(B) of the Bingham form x^T B x = tr(S Q(x)) on unit quaternions,
/// B = diag(2S - tr(S) I, tr(S)).
Eigen::Vector4d bingham_param(const Vector3& s);

struct SamplerStats {
  long proposals = 0;
  long accepted = 0;

  double acceptance_rate() const {
    return proposals == 0 ? 1.0 : static_cast<double>(accepted) / proposals;
  }
};

struct MeanAttitude {
  Rotation R;
  bool degenerate = false;  // s2 + s3 <= 0: the mode is not unique
};

/// Matrix Fisher distribution M(F), density exp(tr(F^T R)) / c(F) with
/// respect to the unit-mass Haar measure. Immutable; the proper SVD and the
/// normalizer are computed on construction.
class MatrixFisher {
 public:
  explicit MatrixFisher(const Matrix3& F = Matrix3::Zero(),
                        const QuadratureRule& rule = default_rule());

  /// Builds from an existing proper SVD without refactoring F.
  static MatrixFisher from_svd(const ProperSVD& svd, const QuadratureRule& rule = default_rule());

  const Matrix3& F() const { return F_; }
  const ProperSVD& svd() const { return svd_; }
  const Vector3& s() const { return svd_.s; }
  const NormalizingInfo& normalizing() const { return info_; }
  double log_c() const { return info_.log_c; }

  double log_pdf(const Rotation& R) const;

  /// E[R] = U diag(d) V^T.
  Matrix3 first_moment() const;

  /// E[Q_ii Q_jj] for Q = U^T R V. Mixed moments with off-diagonal
  /// entries vanish and are not returned.
  Matrix3 second_moments() const { return info_.second_moments(); }

  MeanAttitude mean_attitude() const;

  /// Density of column `axis` (0-based) of R at r in S^2, relative to the
  /// uniform distribution on the sphere.
  double marginal_axis_density(int axis, const Vector3& r) const;

  Rotation sample(Rng& rng, SamplerStats* stats = nullptr) const;

 private:
  MatrixFisher(const Matrix3& F, const ProperSVD& svd, const QuadratureRule& rule);

  Matrix3 F_;
  ProperSVD svd_;
  NormalizingInfo info_;
  // ACG proposal for the Bingham form
  Eigen::Vector4d bingham_A_;
  Eigen::Vector4d acg_scale_;  // 1/sqrt of the diagonal proposal precision
  double acg_log_bound_ = 0.0;
};

/// Prob[angle(R, mean) <= theta] for R ~ M(s I), s >= 0, theta in [0, pi].
double cumulative_isotropic(double s, double theta,
                            const QuadratureRule& rule = default_rule());

}  // namespace mfso3
