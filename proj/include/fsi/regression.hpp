#pragma once

#include "fsi/geometry.hpp"
#include "fsi/index_param.hpp"
#include "fsi/smoothing.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace fsi {

/// Column means and standard deviations removed from the covariates.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  Eigen::VectorXd apply(const Eigen::VectorXd& raw) const;
};

/// n covariate rows X (n x p) paired with n responses stored as the columns
/// of Y (dimension x n) in one metric space.
class RegressionDataset {
 public:
  RegressionDataset(Eigen::MatrixXd X, Eigen::MatrixXd Y, MetricSpace space);

  Eigen::Index size() const noexcept { return X_.rows(); }
  Eigen::Index covariate_dimension() const noexcept { return X_.cols(); }
  const Eigen::MatrixXd& X() const noexcept { return X_; }
  const Eigen::MatrixXd& Y() const noexcept { return Y_; }
  const MetricSpace& space() const noexcept { return space_; }
  const std::optional<Standardization>& standardization() const noexcept { return standardization_; }

  /// Centers and scales every covariate column to mean 0 and sample sd 1.
  /// Throws InputError for a constant column.
  RegressionDataset standardized() const;

  RegressionDataset subset(std::span<const Eigen::Index> rows) const;
  RegressionDataset without(Eigen::Index row) const;
  RegressionDataset with_covariates(Eigen::MatrixXd X) const;

 private:
  Eigen::MatrixXd X_;
  Eigen::MatrixXd Y_;
  MetricSpace space_;
  std::optional<Standardization> standardization_;
};

/// Options shared by the local estimators.
struct LocalFitOptions {
  SphereSolverOptions solver;
  /// Sphere solver initial point; defaults to the Nadaraya-Watson projection
  /// at the query point.
  std::optional<Eigen::Vector3d> warm_start;
};

/// Local Frechet estimate at the index value theta' x.
FittedObject local_frechet_at(const RegressionDataset& data, const Eigen::VectorXd& x, const IndexParam& theta,
                              double h, const Kernel& kernel, const LocalFitOptions& options = {});

/// Same estimator on precomputed projections u_i = theta' X_i at u0.
FittedObject local_frechet_on_index(const RegressionDataset& data, const Eigen::VectorXd& u, double u0, double h,
                                    const Kernel& kernel, const LocalFitOptions& options = {});

/// Global Frechet weights s_i(x) = 1 + (X_i - Xbar)' Sigma^-1 (x - Xbar).
Eigen::VectorXd global_frechet_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& x);

/// Weighted Frechet mean with the global Frechet weights. On the sphere the
/// solve starts from the extrinsic projection and never returns a point with
/// a worse objective than that start.
FittedObject global_frechet_fit(const RegressionDataset& data, const Eigen::VectorXd& x,
                                const SphereSolverOptions& solver = {});

/// Local Frechet with multivariate local-linear weights (product kernel).
FittedObject multivariate_local_frechet_at(const RegressionDataset& data, const Eigen::VectorXd& x, double h,
                                           const Kernel& kernel, const SphereSolverOptions& solver = {});

/// Leave-one-out Nadaraya-Watson estimate at X_i on the index theta' X,
/// projected back onto the sphere. Falls back to equal weights when the
/// kernel weights vanish or cancel.
Eigen::Vector3d nadaraya_watson_sphere_init(const RegressionDataset& data, Eigen::Index i, const IndexParam& theta,
                                            double h, const Kernel& kernel);

/// Nadaraya-Watson projection on the index values u at u0, optionally
/// skipping observation `exclude`.
Eigen::Vector3d nadaraya_watson_sphere_on_index(const Eigen::MatrixXd& Y, const Eigen::VectorXd& u, double u0,
                                                double h, const Kernel& kernel, Eigen::Index exclude = -1);

}  // namespace fsi
