#include "mfso3/matrix_fisher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mfso3 {

namespace {

// (p, q, k) index triples; k is the index paired with the cosine variable u.
constexpr std::array<std::array<int, 3>, 3> kCycles = {{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}};

int grading_levels(const Vector3& s) {
  const double spread = std::max(1.0, s.cwiseAbs().sum());
  return std::max(2, static_cast<int>(std::ceil(std::log2(spread))) + 3);
}

void check_ordered(const Vector3& s) {
  const double tol = 1e-12 * (1.0 + s.cwiseAbs().maxCoeff());
  if (!s.allFinite() || s[0] < s[1] - tol || s[1] < std::abs(s[2]) - tol) {
    throw std::invalid_argument("normalizer: singular values must satisfy s1 >= s2 >= |s3|, got (" +
                                std::to_string(s[0]) + ", " + std::to_string(s[1]) + ", " +
                                std::to_string(s[2]) + ")");
  }
}

struct CycleIntegrals {
  double c_bar = 0.0;
  double grad = 0.0;   // d c_bar / ds_k
  double hess = 0.0;   // d^2 c_bar / ds_k^2
  double mixed = 0.0;  // d^2 c_bar / ds_k ds_p
};

CycleIntegrals integrate_cycle(const Vector3& s, int cycle, const GradedNodes& q) {
  const auto [p, qi, k] = kCycles[cycle];
  const double sp = s[p];
  const double sq = s[qi];
  const double sk = s[k];
  const double tr = s.sum();
  CycleIntegrals out;
  for (std::size_t n = 0; n < q.nodes.size(); ++n) {
    const double u = q.nodes[n];
    const double w = q.weights[n];
    const double a = 0.5 * (sp - sq) * (1.0 - u);
    const double b = 0.5 * (sp + sq) * (1.0 + u);
    const auto [a0, a1] = bessel_i01_scaled(a);
    const auto [b0, b1] = bessel_i01_scaled(b);
    const double e = std::exp(std::abs(a) + std::abs(b) + sk * u - tr);
    const double base = 0.5 * a0 * b0 * e;
    const double um1 = u - 1.0;
    out.c_bar += w * base;
    out.grad += w * base * um1;
    out.hess += w * base * um1 * um1;
    // d/ds_p of the scaled integrand, times (u - 1) from d/ds_k
    const double dp = 0.25 * ((1.0 - u) * a1 * b0 + (1.0 + u) * a0 * b1) * e - base;
    out.mixed += w * dp * um1;
  }
  return out;
}

}  // namespace

Matrix3 NormalizingInfo::second_moments() const {
  Matrix3 m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      m(i, j) = (c_bar + grad_bar[i] + grad_bar[j] + hess_bar(i, j)) / c_bar;
    }
  }
  return m;
}

Matrix3 NormalizingInfo::moment_jacobian() const {
  const Vector3 g = grad_bar / c_bar;
  return hess_bar / c_bar - g * g.transpose();
}

namespace detail {

NormalizingInfo normalizer_unchecked(const Vector3& s, const QuadratureRule& rule) {
  const GradedNodes q = graded_nodes(rule, -1.0, 1.0, grading_levels(s), true, true);
  NormalizingInfo info;
  for (int c = 0; c < 3; ++c) {
    const auto [p, qi, k] = kCycles[c];
    (void)qi;
    const CycleIntegrals r = integrate_cycle(s, c, q);
    if (c == 0) info.c_bar = r.c_bar;
    info.grad_bar[k] = r.grad;
    info.hess_bar(k, k) = r.hess;
    info.hess_bar(k, p) = r.mixed;
    info.hess_bar(p, k) = r.mixed;
  }
  info.log_c = s.sum() + std::log(info.c_bar);
  return info;
}

}  // namespace detail

NormalizingInfo normalizer(const Vector3& s, const QuadratureRule& rule) {
  check_ordered(s);
  return detail::normalizer_unchecked(s, rule);
}

double scaled_normalizer(const Vector3& s, int k, const QuadratureRule& rule) {
  if (k < 0 || k > 2) throw std::invalid_argument("scaled_normalizer: k must be 0, 1 or 2");
  const GradedNodes q = graded_nodes(rule, -1.0, 1.0, grading_levels(s), true, true);
  // cycle c pairs u with index (c + 2) mod 3
  return integrate_cycle(s, (k + 1) % 3, q).c_bar;
}

Eigen::Vector4d bingham_param(const Vector3& s) {
  const double tr = s.sum();
  return {2.0 * s[0] - tr, 2.0 * s[1] - tr, 2.0 * s[2] - tr, tr};
}

MatrixFisher::MatrixFisher(const Matrix3& F, const QuadratureRule& rule)
    : MatrixFisher(F, proper_svd(F), rule) {}

MatrixFisher MatrixFisher::from_svd(const ProperSVD& svd, const QuadratureRule& rule) {
  return MatrixFisher(svd.reconstruct(), svd, rule);
}

MatrixFisher::MatrixFisher(const Matrix3& F, const ProperSVD& svd, const QuadratureRule& rule)
    : F_(F), svd_(svd) {
  if (!F.allFinite()) throw std::invalid_argument("MatrixFisher: parameter has non-finite entries");
  info_ = normalizer(svd_.s, rule);

  // Angular central Gaussian envelope for exp(-x^T A x) on S^3.
  const Eigen::Vector4d B = bingham_param(svd_.s);
  bingham_A_ = Eigen::Vector4d::Constant(B.maxCoeff()) - B;
  auto excess = [&](double b) { return (1.0 / (b + 2.0 * bingham_A_.array())).sum() - 1.0; };
  double lo = 1.0;
  double hi = 4.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  const double b = 0.5 * (lo + hi);
  const Eigen::Vector4d omega = Eigen::Vector4d::Ones() + 2.0 * bingham_A_ / b;
  acg_scale_ = omega.cwiseSqrt().cwiseInverse();
  acg_log_bound_ = -0.5 * (4.0 - b) + 2.0 * std::log(4.0 / b);
}

double MatrixFisher::log_pdf(const Rotation& R) const {
  return (F_.transpose() * R.matrix()).trace() - info_.log_c;
}

Matrix3 MatrixFisher::first_moment() const {
  return svd_.U.matrix() * info_.moment_diag().asDiagonal() * svd_.V.matrix().transpose();
}

MeanAttitude MatrixFisher::mean_attitude() const {
  // The mode is unique iff every pair sum s_i + s_j is positive.
  return {svd_.U * svd_.V.transpose(), svd_.s[1] + svd_.s[2] <= 0.0};
}

double MatrixFisher::marginal_axis_density(int axis, const Vector3& r) const {
  if (axis < 0 || axis > 2) throw std::invalid_argument("marginal_axis_density: axis must be 0, 1 or 2");
  const int j = (axis + 1) % 3;
  const int k = (axis + 2) % 3;
  Eigen::Matrix<double, 3, 2> fjk;
  fjk.col(0) = F_.col(j);
  fjk.col(1) = F_.col(k);
  const Eigen::Matrix2d m = fjk.transpose() * (Matrix3::Identity() - r * r.transpose()) * fjk;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m, Eigen::EigenvaluesOnly);
  const double s1 = std::sqrt(std::max(eig.eigenvalues()[1], 0.0));
  const double s2 = std::sqrt(std::max(eig.eigenvalues()[0], 0.0));
  const double sign = r.dot(F_.col(j).cross(F_.col(k))) >= 0.0 ? 1.0 : -1.0;
  const double arg = s1 + sign * s2;
  return std::exp(F_.col(axis).dot(r) - info_.log_c + std::abs(arg)) * bessel_i0_scaled(arg);
}

Rotation MatrixFisher::sample(Rng& rng, SamplerStats* stats) const {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  for (;;) {
    Eigen::Vector4d y;
    for (int i = 0; i < 4; ++i) y[i] = acg_scale_[i] * normal(rng);
    const double norm = y.norm();
    if (norm == 0.0) continue;
    const Eigen::Vector4d x = y / norm;
    const Eigen::Vector4d x2 = x.cwiseAbs2();
    const double xax = bingham_A_.dot(x2);
    const double xox = x2.dot(acg_scale_.cwiseAbs2().cwiseInverse());
    const double log_ratio = -xax + 2.0 * std::log(xox) - acg_log_bound_;
    if (stats) ++stats->proposals;
    if (std::log(uniform(rng)) < log_ratio) {
      if (stats) ++stats->accepted;
      const Rotation Q = quat_to_rotation({x.head<3>(), x[3]});
      return svd_.U * Q * svd_.V.transpose();
    }
  }
}

double cumulative_isotropic(double s, double theta, const QuadratureRule& rule) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("cumulative_isotropic: s must be finite and >= 0");
  }
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::invalid_argument("cumulative_isotropic: theta must lie in [0, pi]");
  }
  if (theta == 0.0) return 0.0;
  const int levels = std::max(2, static_cast<int>(std::ceil(0.5 * std::log2(1.0 + 4.0 * s))) + 3);
  const GradedNodes q = graded_nodes(rule, 0.0, theta, levels, true, false);
  double sum = 0.0;
  for (std::size_t n = 0; n < q.nodes.size(); ++n) {
    const double h = std::sin(0.5 * q.nodes[n]);
    const double h2 = h * h;
    sum += q.weights[n] * 2.0 * h2 * std::exp(-4.0 * s * h2);
  }
  const auto [i0, i1] = bessel_i01_scaled(2.0 * s);
  return std::clamp(sum / (std::numbers::pi * (i0 - i1)), 0.0, 1.0);
}

}  // namespace mfso3
