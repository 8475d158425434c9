#include "mfso3/fitting.hpp"

#include "mfso3/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mfso3 {

namespace {

constexpr double kFeasibilityMargin = 1e-9;
constexpr int kMaxHalvings = 60;

std::string format_d(const Vector3& d) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << d[0] << ", " << d[1] << ", " << d[2] << ")";
  return os.str();
}

// Concentrated regime: Q ~ exp(hat(eta)) with Var(eta_i) = 1/(s_j + s_k),
// so 1 - d_i ~ (Var eta_j + Var eta_k) / 2.
Vector3 initial_guess(const Vector3& d) {
  if (d[0] <= 0.5) return Vector3::Zero();
  const Vector3 e = Vector3::Ones() - d;
  const Vector3 x = Vector3::Constant(e.sum()) - 2.0 * e;
  if ((x.array() <= 0.0).any()) return Vector3::Zero();
  Vector3 s;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    s[i] = 0.5 * (1.0 / x[j] + 1.0 / x[k] - 1.0 / x[i]);
  }
  return s.allFinite() ? s : Vector3::Zero();
}

}  // namespace

double moment_margin(const Vector3& d) { return 1.0 - (d[0] + d[1] - d[2]); }

NewtonResult newton_solve(const Vector3& d, const NewtonOptions& opts) {
  if (!d.allFinite()) throw std::invalid_argument("newton_solve: non-finite moment diagonal");
  if (d[0] >= 1.0 - kFeasibilityMargin || moment_margin(d) <= kFeasibilityMargin) {
    throw InfeasibleMoment("moment diagonal " + format_d(d) +
                               " lies outside the interior of the attainable set (d1 < 1, "
                               "d1 + d2 - d3 < 1)",
                           d);
  }
  const QuadratureRule& rule = opts.rule ? *opts.rule : default_rule();

  NewtonResult out;
  Vector3 s = initial_guess(d);
  NormalizingInfo info = detail::normalizer_unchecked(s, rule);
  Vector3 f = info.moment_diag() - d;
  double norm = f.cwiseAbs().maxCoeff();

  bool polished = false;
  while (true) {
    if (norm < opts.tolerance) {
      if (polished || out.iterations == 0) break;
      polished = true;
    }
    if (out.iterations >= opts.max_iterations) {
      throw NoConvergence("newton_solve: no convergence for d = " + format_d(d) + " after " +
                              std::to_string(out.iterations) + " iterations (residual " +
                              std::to_string(norm) + ")",
                          out.iterations, norm);
    }
    const Vector3 step = info.moment_jacobian().ldlt().solve(f);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, alpha *= 0.5) {
      const Vector3 trial = s - alpha * step;
      if (!trial.allFinite()) continue;
      NormalizingInfo ti = detail::normalizer_unchecked(trial, rule);
      if (!std::isfinite(ti.c_bar) || ti.c_bar <= 0.0) continue;
      const Vector3 tf = ti.moment_diag() - d;
      const double tn = tf.cwiseAbs().maxCoeff();
      if (std::isfinite(tn) && tn < norm) {
        s = trial;
        info = ti;
        f = tf;
        norm = tn;
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) {
      if (norm < opts.tolerance) break;  // polishing step could not improve
      throw NoConvergence("newton_solve: line search failed for d = " + format_d(d) +
                              " (residual " + std::to_string(norm) + ")",
                          out.iterations, norm);
    }
  }

  out.s = s;
  out.residual = norm;
  const double tie_tol = 1e-8 * (1.0 + std::abs(s[0]));
  out.tied = std::abs(s[0] - s[1]) < tie_tol || std::abs(s[1] - s[2]) < tie_tol;
  return out;
}

FitResult fit_from_moment(const Matrix3& M, const NewtonOptions& opts) {
  if (!M.allFinite()) throw std::invalid_argument("fit_from_moment: non-finite moment matrix");
  const ProperSVD svd = proper_svd(M);
  FitResult out;
  out.d = svd.s;
  out.newton = newton_solve(svd.s, opts);
  const QuadratureRule& rule = opts.rule ? *opts.rule : default_rule();
  ProperSVD fitted = svd;
  fitted.s = out.newton.s;
  const Vector3& s = fitted.s;
  if (s[0] >= s[1] && s[1] >= std::abs(s[2])) {
    out.distribution = MatrixFisher::from_svd(fitted, rule);
  } else {
    out.distribution = MatrixFisher(fitted.reconstruct(), rule);
  }
  return out;
}

FitResult fit_from_samples(const std::vector<Rotation>& samples, const NewtonOptions& opts) {
  if (samples.empty()) throw std::invalid_argument("fit_from_samples: no samples");
  Matrix3 mean = Matrix3::Zero();
  for (const Rotation& R : samples) mean += R.matrix();
  mean /= static_cast<double>(samples.size());
  return fit_from_moment(mean, opts);
}

}  // namespace mfso3
