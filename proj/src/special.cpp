#include "mfso3/special.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mfso3 {

namespace {

constexpr double kSeriesLimit = 15.0;
constexpr double kEps = 1e-17;

// Unscaled I0, I1 by the power series; accurate for moderate |x|.
std::pair<double, double> series_i01(double x) {
  const double t = 0.25 * x * x;
  double a = 1.0;  // t^n / (n!)^2
  double b = 1.0;  // t^n / (n! (n+1)!)
  double sum0 = 1.0;
  double sum1 = 1.0;
  for (int n = 1; n < 200; ++n) {
    a *= t / (static_cast<double>(n) * n);
    b *= t / (static_cast<double>(n) * (n + 1));
    sum0 += a;
    sum1 += b;
    if (a < kEps * sum0 && b < kEps * sum1) break;
  }
  return {sum0, 0.5 * x * sum1};
}

// Scaled I0, I1 for |x| > kSeriesLimit from the large-argument expansion.
std::pair<double, double> asymptotic_i01_scaled(double x) {
  const double z = std::abs(x);
  double t0 = 1.0;
  double t1 = 1.0;
  double sum0 = 1.0;
  double sum1 = 1.0;
  double prev0 = 1.0;
  double prev1 = 1.0;
  bool done0 = false;
  bool done1 = false;
  for (int k = 1; k < 80 && !(done0 && done1); ++k) {
    const double odd2 = static_cast<double>(2 * k - 1) * (2 * k - 1);
    const double denom = 8.0 * k * z;
    if (!done0) {
      t0 *= odd2 / denom;
      if (std::abs(t0) > std::abs(prev0)) {
        done0 = true;  // series starts diverging
      } else {
        sum0 += t0;
        prev0 = t0;
        done0 = std::abs(t0) < kEps * std::abs(sum0);
      }
    }
    if (!done1) {
      t1 *= -(4.0 - odd2) / denom;
      if (std::abs(t1) > std::abs(prev1)) {
        done1 = true;
      } else {
        sum1 += t1;
        prev1 = t1;
        done1 = std::abs(t1) < kEps * std::abs(sum1);
      }
    }
  }
  const double pre = 1.0 / std::sqrt(2.0 * std::numbers::pi * z);
  return {pre * sum0, (x < 0.0 ? -1.0 : 1.0) * pre * sum1};
}

}  // namespace

std::pair<double, double> bessel_i01_scaled(double x) {
  if (std::abs(x) <= kSeriesLimit) {
    const auto [i0, i1] = series_i01(x);
    const double e = std::exp(-std::abs(x));
    return {e * i0, e * i1};
  }
  return asymptotic_i01_scaled(x);
}

double bessel_i0(double x) {
  if (std::abs(x) <= kSeriesLimit) return series_i01(x).first;
  return std::exp(std::abs(x)) * asymptotic_i01_scaled(x).first;
}

double bessel_i1(double x) {
  if (std::abs(x) <= kSeriesLimit) return series_i01(x).second;
  return std::exp(std::abs(x)) * asymptotic_i01_scaled(x).second;
}

double bessel_i0_scaled(double x) { return bessel_i01_scaled(x).first; }

double bessel_i1_scaled(double x) { return bessel_i01_scaled(x).second; }

QuadratureRule gauss_legendre(int n) {
  if (n < 2 || n > 512) {
    throw std::invalid_argument("gauss_legendre: order must be in [2, 512], got " +
                                std::to_string(n));
  }
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

const QuadratureRule& default_rule() {
  static const QuadratureRule rule = gauss_legendre(kDefaultQuadratureOrder);
  return rule;
}

GradedNodes graded_nodes(const QuadratureRule& rule, double a, double b, int levels,
                         bool grade_left, bool grade_right) {
  std::vector<std::pair<double, double>> panels;
  auto graded_towards = [&](double near, double far) {
    // panels [near, near + d 2^-levels], then doubling widths up to `far`
    const double d = far - near;
    double lo = 0.0;
    for (int j = levels; j >= 0; --j) {
      const double hi = std::ldexp(1.0, -j);
      panels.emplace_back(near + d * lo, near + d * hi);
      lo = hi;
    }
  };
  if (grade_left && grade_right) {
    const double mid = 0.5 * (a + b);
    graded_towards(a, mid);
    const std::size_t split = panels.size();
    graded_towards(b, mid);
    std::reverse(panels.begin() + split, panels.end());
  } else if (grade_left) {
    graded_towards(a, b);
  } else if (grade_right) {
    graded_towards(b, a);
    std::reverse(panels.begin(), panels.end());
  } else {
    panels.emplace_back(a, b);
  }

  GradedNodes out;
  out.nodes.reserve(panels.size() * rule.nodes.size());
  out.weights.reserve(panels.size() * rule.nodes.size());
  for (auto [p, q] : panels) {
    if (q < p) std::swap(p, q);
    const double half = 0.5 * (q - p);
    const double center = 0.5 * (q + p);
    for (int k = 0; k < rule.size(); ++k) {
      out.nodes.push_back(center + half * rule.nodes[k]);
      out.weights.push_back(half * rule.weights[k]);
    }
  }
  return out;
}

}  // namespace mfso3
