#pragma once

#include "fsi/index_param.hpp"

#include <Eigen/Dense>

#include <string>

namespace fsi {

enum class KernelFamily { Gaussian, Epanechnikov };

const char* to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Symmetric probability density kernel K. The constructor checks
/// numerically that K integrates to one.
class Kernel {
 public:
  explicit Kernel(KernelFamily family = KernelFamily::Gaussian);

  KernelFamily family() const noexcept { return family_; }

  double operator()(double w) const noexcept;
  /// K_h(u) = K(u / h) / h
  double scaled(double u, double h) const noexcept { return (*this)(u / h) / h; }

 private:
  KernelFamily family_;
};

/// Local-linear equivalent-kernel weights at one query point, together with
/// the kernel moments they are built from. The weights average to one.
struct LocalWeights {
  Eigen::VectorXd weights;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma2 = 0.0;  // mu0 * mu2 - mu1^2
};

/// Weights for the scalar predictor values `u` at `u0`:
/// s_i = sigma^-2 K_h(u_i - u0) [mu2 - mu1 (u_i - u0)],
/// mu_j = n^-1 sum_i K_h(u_i - u0) (u_i - u0)^j.
/// Throws DegenerateWindow when sigma^2 <= 1e-12 mu0 mu2 (no local spread).
LocalWeights scalar_local_weights(const Eigen::VectorXd& u, double u0, double h, const Kernel& kernel);

/// scalar_local_weights on the projections theta' X_i at theta' x.
LocalWeights projected_local_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, const IndexParam& theta,
                                     double h, const Kernel& kernel);

/// Intercept equivalent-kernel weights of multivariate local-linear regression
/// with the product kernel prod_j K_h(X_ij - x_j), scaled to average one.
/// Throws DegenerateWindow when the local design matrix is singular.
Eigen::VectorXd multivariate_local_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, double h,
                                           const Kernel& kernel);

}  // namespace fsi
