#pragma once

#include <Eigen/Dense>

#include <functional>

namespace fsi {

struct NelderMeadOptions {
  double initial_step = 0.1;      // edge length of the initial simplex
  double diameter_tolerance = 1e-4;
  int max_evaluations = 200;
};

struct NelderMeadResult {
  Eigen::VectorXd argmin;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;  // simplex diameter fell below tolerance
};

/// Derivative-free minimization. The objective may return +inf for
/// infeasible points; those vertices are treated as worst.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NelderMeadOptions& options = {});

}  // namespace fsi
