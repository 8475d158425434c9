#pragma once

#include "mfso3/matrix_fisher.hpp"

#include <vector>

namespace mfso3 {

struct NewtonOptions {
  double tolerance = 1e-10;  // max-norm of the moment residual
  int max_iterations = 100;
  const QuadratureRule* rule = nullptr;  // default_rule() when null
};

struct NewtonResult {
  Vector3 s = Vector3::Zero();
  int iterations = 0;
  double residual = 0.0;
  // Two of the fitted singular values coincide: F satisfies the moment
  // equations but the maximum-likelihood estimate is not unique.
  bool tied = false;
};

/// Solves (1/c) dc/ds_i = d_i for s, with d the proper singular values of a
/// first moment. Damped Newton on the scaled system with residual-halving
/// line search. Throws InfeasibleMoment or NoConvergence.
NewtonResult newton_solve(const Vector3& d, const NewtonOptions& opts = {});

/// Margin of d inside the attainable set of moment diagonals:
/// 1 - (d1 + d2 - d3). Positive for any feasible d.
double moment_margin(const Vector3& d);

struct FitResult {
  MatrixFisher distribution;
  Vector3 d = Vector3::Zero();
  NewtonResult newton;
};

/// F with E[R] = M under M(F).
FitResult fit_from_moment(const Matrix3& M, const NewtonOptions& opts = {});

/// Maximum-likelihood fit: moment matching of the arithmetic mean.
FitResult fit_from_samples(const std::vector<Rotation>& samples, const NewtonOptions& opts = {});

}  // namespace mfso3
