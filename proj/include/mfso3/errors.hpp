#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mfso3 {

/// Moment matrix whose largest proper singular value is too close to 1
/// (or beyond) for a matrix Fisher parameter to exist.
class InfeasibleMoment : public std::runtime_error {
 public:
  InfeasibleMoment(const std::string& what, const Eigen::Vector3d& d)
      : std::runtime_error(what), d_(d) {}
  const Eigen::Vector3d& d() const { return d_; }

 private:
  Eigen::Vector3d d_;
};

class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Unscented parameter outside (lower, 1).
class SigmaOutOfRange : public std::invalid_argument {
 public:
  SigmaOutOfRange(const std::string& what, double lower)
      : std::invalid_argument(what), lower_(lower) {}
  double lower() const { return lower_; }

 private:
  double lower_;
};

/// Failure inside a filter run, tagged with the step at which it occurred.
class FilterStepError : public std::runtime_error {
 public:
  FilterStepError(int step, double t, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + " (t = " + std::to_string(t) +
                           " s): " + what),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace mfso3
