#pragma once

#include <utility>
#include <vector>

namespace mfso3 {

// Modified Bessel functions of the first kind, orders 0 and 1.
// Power series for |x| <= 15, asymptotic expansion beyond. The unscaled
// forms overflow past |x| ~ 700; use the scaled forms there.
double bessel_i0(double x);
double bessel_i1(double x);

/// exp(-|x|) I0(x)
double bessel_i0_scaled(double x);
/// exp(-|x|) I1(x)
double bessel_i1_scaled(double x);

/// Both scaled functions from a single series evaluation.
std::pair<double, double> bessel_i01_scaled(double x);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // positive, sum to 2

  int size() const { return static_cast<int>(nodes.size()); }
};

/// n in [2, 512]; exact for polynomials of degree <= 2n - 1.
QuadratureRule gauss_legendre(int n);

/// Per-panel order used by the normalizer and the cumulative distribution.
inline constexpr int kDefaultQuadratureOrder = 16;

/// Shared, lazily built rule of the default order.
const QuadratureRule& default_rule();

/// Composite rule on [a, b]: `rule` mapped onto geometrically graded panels
/// whose widths halve towards the endpoint(s) flagged. `levels` is the number
/// of halvings, so the smallest panel has width (b - a) 2^-levels (one-sided)
/// or (b - a) 2^-(levels+1) (two-sided). Nodes come out in ascending order.
struct GradedNodes {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GradedNodes graded_nodes(const QuadratureRule& rule, double a, double b, int levels,
                         bool grade_left, bool grade_right);

}  // namespace mfso3
