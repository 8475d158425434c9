#include "euler_oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

namespace {

// Newton on P_n from the usual cosine guesses.
void legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

}  // namespace

EulerMoments euler_moments(const Eigen::Vector3d& s, int n_az, int n_beta) {
  const double pi = std::numbers::pi;
  std::vector<double> bx, bw;
  legendre_nodes(n_beta, bx, bw);
  std::vector<Eigen::Matrix3d> za(n_az);
  for (int i = 0; i < n_az; ++i) za[i] = rot_z(2.0 * pi * i / n_az);

  // The exponent is bounded by tr(S); factor it out to keep sums tame.
  const double shift = s.cwiseAbs().sum();
  double c = 0.0;
  Eigen::Vector3d dc = Eigen::Vector3d::Zero();
  Eigen::Matrix3d d2 = Eigen::Matrix3d::Zero();
  for (int b = 0; b < n_beta; ++b) {
    const double beta = 0.5 * pi * (bx[b] + 1.0);
    const double wb = 0.5 * pi * bw[b] * std::sin(beta);
    const Eigen::Matrix3d rx = rot_x(beta);
    for (int i = 0; i < n_az; ++i) {
      const Eigen::Matrix3d left = za[i] * rx;
      for (int k = 0; k < n_az; ++k) {
        const Eigen::Matrix3d Q = left * za[k];
        const Eigen::Vector3d q = Q.diagonal();
        const double e = std::exp(s.dot(q) - shift) * wb;
        c += e;
        dc += e * q;
        d2 += e * q * q.transpose();
      }
    }
  }
  const double az_weight = (2.0 * pi / n_az) * (2.0 * pi / n_az) / (8.0 * pi * pi);
  EulerMoments out;
  out.mean = dc / c;
  out.second = d2 / c;
  const double scale = az_weight * std::exp(shift);
  out.c = c * scale;
  out.dc = dc * scale;
  return out;
}

double bessel_i0_series(double x) {
  const long double t = 0.25L * x * x;
  long double term = 1.0L, sum = 1.0L;
  for (int n = 1; n < 500; ++n) {
    term *= t / (static_cast<long double>(n) * n);
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  return static_cast<double>(sum);
}

double bessel_i1_series(double x) {
  const long double t = 0.25L * x * x;
  long double term = 0.5L * x, sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= t / (static_cast<long double>(n) * (n + 1));
    sum += term;
    if (std::abs(term) < 1e-22L * std::abs(sum)) break;
  }
  return static_cast<double>(sum);
}

}  // namespace oracle
