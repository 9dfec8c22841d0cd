#include "fsi/smoothing.hpp"

#include "fsi/errors.hpp"

#include <cmath>
#include <numbers>

namespace fsi {

namespace {

constexpr double kDegenerateRelative = 1e-12;

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("bandwidth must be positive and finite");
}

}  // namespace

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Epanechnikov: return "epanechnikov";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "epanechnikov") return KernelFamily::Epanechnikov;
  throw InputError("unknown kernel family '" + name + "'");
}

Kernel::Kernel(KernelFamily family) : family_(family) {
  // Composite Simpson on [-10, 10]; both families are negligible outside.
  constexpr int intervals = 4000;
  constexpr double lo = -10.0;
  constexpr double hi = 10.0;
  constexpr double step = (hi - lo) / intervals;
  double sum = (*this)(lo) + (*this)(hi);
  for (int k = 1; k < intervals; ++k) sum += (k % 2 ? 4.0 : 2.0) * (*this)(lo + k * step);
  const double mass = sum * step / 3.0;
  if (std::abs(mass - 1.0) > 1e-6) throw InputError("kernel does not integrate to one");
}

double Kernel::operator()(double w) const noexcept {
  switch (family_) {
    case KernelFamily::Gaussian:
      return std::exp(-0.5 * w * w) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    case KernelFamily::Epanechnikov:
      return std::abs(w) <= 1.0 ? 0.75 * (1.0 - w * w) : 0.0;
  }
  return 0.0;
}

LocalWeights scalar_local_weights(const Eigen::VectorXd& u, double u0, double h, const Kernel& kernel) {
  check_bandwidth(h);
  const Eigen::Index n = u.size();
  if (n < 2) throw InputError("local weights need at least two observations");
  if (!std::isfinite(u0)) throw InputError("non-finite query point");

  LocalWeights lw;
  lw.weights.resize(n);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = u[i] - u0;
    const double k = kernel.scaled(d, h);
    lw.weights[i] = k;  // kernel values for now
    s0 += k;
    s1 += k * d;
    s2 += k * d * d;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  lw.mu0 = s0 * inv_n;
  lw.mu1 = s1 * inv_n;
  lw.mu2 = s2 * inv_n;
  lw.sigma2 = lw.mu0 * lw.mu2 - lw.mu1 * lw.mu1;
  if (!(lw.sigma2 > kDegenerateRelative * lw.mu0 * lw.mu2)) {
    throw DegenerateWindow("local design has no spread at the query point (bandwidth too small?)");
  }
  const double inv_sigma2 = 1.0 / lw.sigma2;
  for (Eigen::Index i = 0; i < n; ++i) {
    lw.weights[i] *= inv_sigma2 * (lw.mu2 - lw.mu1 * (u[i] - u0));
  }
  return lw;
}

LocalWeights projected_local_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, const IndexParam& theta,
                                     double h, const Kernel& kernel) {
  if (X.cols() != theta.dimension() || x.size() != theta.dimension()) {
    throw InputError("projected_local_weights: dimension mismatch");
  }
  const Eigen::VectorXd u = X * theta.theta();
  return scalar_local_weights(u, theta.project(x), h, kernel);
}

Eigen::VectorXd multivariate_local_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, double h,
                                           const Kernel& kernel) {
  check_bandwidth(h);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (x.size() != p) throw InputError("multivariate_local_weights: dimension mismatch");
  if (n <= p + 1) throw InputError("multivariate_local_weights: need n > p + 1 observations");

  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd kappa(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double k = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) k *= kernel.scaled(X(i, j) - x[j], h);
    kappa[i] = k;
    design(i, 0) = 1.0;
    design.row(i).tail(p) = X.row(i) - x.transpose();
  }
  const Eigen::MatrixXd gram = design.transpose() * kappa.asDiagonal() * design / static_cast<double>(n);

  // Scale-free singularity test: the diagonally scaled Gram matrix is a
  // correlation-type matrix with unit diagonal.
  const Eigen::VectorXd diag = gram.diagonal();
  if (!(diag.minCoeff() > 0.0)) throw DegenerateWindow("multivariate local design has empty window");
  const Eigen::VectorXd inv_sqrt = diag.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * gram * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > kDegenerateRelative * eig.eigenvalues().maxCoeff())) {
    throw DegenerateWindow("multivariate local design matrix is singular");
  }

  // First row of gram^{-1}, i.e. gram^{-1} e_1 by symmetry.
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(p + 1, 0);
  const Eigen::VectorXd row = gram.ldlt().solve(e1);
  return (design * row).cwiseProduct(kappa);
}

}  // namespace fsi
