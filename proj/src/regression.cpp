#include "fsi/regression.hpp"

#include "fsi/errors.hpp"

#include <cmath>
#include <string>

namespace fsi {

Eigen::VectorXd Standardization::apply(const Eigen::VectorXd& raw) const {
  if (raw.size() != mean.size()) throw InputError("Standardization::apply: dimension mismatch");
  return (raw - mean).cwiseQuotient(sd);
}

RegressionDataset::RegressionDataset(Eigen::MatrixXd X, Eigen::MatrixXd Y, MetricSpace space)
    : X_(std::move(X)), Y_(std::move(Y)), space_(std::move(space)) {
  if (X_.rows() != Y_.cols()) {
    throw InputError("RegressionDataset: " + std::to_string(X_.rows()) + " covariate rows but " +
                     std::to_string(Y_.cols()) + " responses");
  }
  if (X_.rows() == 0) throw InputError("RegressionDataset: no observations");
  if (!X_.allFinite()) throw InputError("RegressionDataset: non-finite covariate entries");
  if (Y_.rows() != space_.dimension()) throw InputError("RegressionDataset: response dimension mismatch");
  for (Eigen::Index i = 0; i < Y_.cols(); ++i) {
    try {
      space_.validate(Y_.col(i));
    } catch (const InputError& e) {
      throw InputError("RegressionDataset: response " + std::to_string(i) + ": " + e.what());
    }
  }
}

RegressionDataset RegressionDataset::standardized() const {
  const Eigen::Index n = size();
  if (n < 2) throw InputError("standardization needs at least two observations");
  Standardization s;
  s.mean = X_.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X_.rowwise() - s.mean.transpose();
  s.sd = (centered.colwise().squaredNorm() / static_cast<double>(n - 1)).cwiseSqrt().transpose();
  for (Eigen::Index j = 0; j < s.sd.size(); ++j) {
    if (!(s.sd[j] > 0.0)) {
      throw InputError("covariate column " + std::to_string(j) + " is constant (singular covariance)");
    }
  }
  RegressionDataset out(centered * s.sd.cwiseInverse().asDiagonal(), Y_, space_);
  out.standardization_ = std::move(s);
  return out;
}

RegressionDataset RegressionDataset::subset(std::span<const Eigen::Index> rows) const {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), X_.cols());
  Eigen::MatrixXd Y(Y_.rows(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Eigen::Index r = rows[k];
    if (r < 0 || r >= size()) throw InputError("RegressionDataset::subset: row out of range");
    X.row(static_cast<Eigen::Index>(k)) = X_.row(r);
    Y.col(static_cast<Eigen::Index>(k)) = Y_.col(r);
  }
  RegressionDataset out(std::move(X), std::move(Y), space_);
  out.standardization_ = standardization_;
  return out;
}

RegressionDataset RegressionDataset::without(Eigen::Index row) const {
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (i != row) rows.push_back(i);
  }
  return subset(rows);
}

RegressionDataset RegressionDataset::with_covariates(Eigen::MatrixXd X) const {
  return RegressionDataset(std::move(X), Y_, space_);
}

Eigen::Vector3d nadaraya_watson_sphere_on_index(const Eigen::MatrixXd& Y, const Eigen::VectorXd& u, double u0,
                                                double h, const Kernel& kernel, Eigen::Index exclude) {
  Eigen::VectorXd w(u.size());
  for (Eigen::Index l = 0; l < u.size(); ++l) w[l] = l == exclude ? 0.0 : kernel((u0 - u[l]) / h);
  if (w.sum() > 0.0) {
    if (auto proj = extrinsic_mean_projection(Y, w)) return *proj;
  }
  Eigen::VectorXd equal = Eigen::VectorXd::Ones(u.size());
  if (exclude >= 0 && exclude < u.size()) equal[exclude] = 0.0;
  if (auto proj = extrinsic_mean_projection(Y, equal)) return *proj;
  // Responses cancel exactly; any response is as good a start as another.
  return Y.col(exclude == 0 && Y.cols() > 1 ? 1 : 0);
}

Eigen::Vector3d nadaraya_watson_sphere_init(const RegressionDataset& data, Eigen::Index i, const IndexParam& theta,
                                            double h, const Kernel& kernel) {
  if (data.space().kind() != SpaceKind::Sphere) throw InputError("nadaraya_watson_sphere_init: sphere responses only");
  if (i < 0 || i >= data.size()) throw InputError("nadaraya_watson_sphere_init: index out of range");
  if (data.size() < 2) throw InputError("nadaraya_watson_sphere_init: need another observation");
  const Eigen::VectorXd u = data.X() * theta.theta();
  return nadaraya_watson_sphere_on_index(data.Y(), u, u[i], h, kernel, i);
}

FittedObject local_frechet_on_index(const RegressionDataset& data, const Eigen::VectorXd& u, double u0, double h,
                                    const Kernel& kernel, const LocalFitOptions& options) {
  const LocalWeights lw = scalar_local_weights(u, u0, h, kernel);
  std::optional<Eigen::Vector3d> start = options.warm_start;
  if (data.space().kind() == SpaceKind::Sphere && !start) {
    start = nadaraya_watson_sphere_on_index(data.Y(), u, u0, h, kernel);
  }
  return data.space().weighted_frechet_mean(data.Y(), lw.weights, start, options.solver);
}

FittedObject local_frechet_at(const RegressionDataset& data, const Eigen::VectorXd& x, const IndexParam& theta,
                              double h, const Kernel& kernel, const LocalFitOptions& options) {
  if (x.size() != data.covariate_dimension() || theta.dimension() != data.covariate_dimension()) {
    throw InputError("local_frechet_at: dimension mismatch");
  }
  const Eigen::VectorXd u = data.X() * theta.theta();
  return local_frechet_on_index(data, u, theta.project(x), h, kernel, options);
}

Eigen::VectorXd global_frechet_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& x) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (x.size() != p) throw InputError("global_frechet_weights: dimension mismatch");
  if (n <= p) throw InputError("global_frechet_weights: need more observations than covariates");
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  // Sample covariance with divisor n, matching the empirical weights.
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1e-300, eig.eigenvalues().maxCoeff()))) {
    throw InputError("global Frechet regression: singular covariate covariance");
  }
  const Eigen::VectorXd b = cov.ldlt().solve(x - mean.transpose());
  return (centered * b).array() + 1.0;
}

FittedObject global_frechet_fit(const RegressionDataset& data, const Eigen::VectorXd& x,
                                const SphereSolverOptions& solver) {
  const Eigen::VectorXd w = global_frechet_weights(data.X(), x);
  if (data.space().kind() != SpaceKind::Sphere) return data.space().weighted_frechet_mean(data.Y(), w);

  Eigen::Vector3d start;
  if (auto proj = extrinsic_mean_projection(data.Y(), w)) {
    start = *proj;
  } else {
    start = *extrinsic_mean_projection(data.Y(), Eigen::VectorXd::Ones(w.size()));
  }
  FittedObject fit = data.space().weighted_frechet_mean(data.Y(), w, start, solver);
  const double start_value = data.space().weighted_objective(data.Y(), w, start);
  if (fit.criterion_value > start_value) {
    fit.point = start;
    fit.criterion_value = start_value;
  }
  return fit;
}

FittedObject multivariate_local_frechet_at(const RegressionDataset& data, const Eigen::VectorXd& x, double h,
                                           const Kernel& kernel, const SphereSolverOptions& solver) {
  const Eigen::VectorXd w = multivariate_local_weights(data.X(), x, h, kernel);
  return data.space().weighted_frechet_mean(data.Y(), w, std::nullopt, solver);
}

}  // namespace fsi
