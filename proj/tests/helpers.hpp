#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace testing {

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::Vector3d v(z(rng), z(rng), z(rng));
  return v / v.norm();
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

// Local-linear fit at u0 by solving the 2x2 weighted normal equations directly.
inline double local_linear_fit(const Eigen::VectorXd& u, const Eigen::VectorXd& y, double u0, double h) {
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double d = u[i] - u0;
    const double k = std::exp(-0.5 * d * d / (h * h));
    A(0, 0) += k;
    A(0, 1) += k * d;
    A(1, 1) += k * d * d;
    b[0] += k * y[i];
    b[1] += k * d * y[i];
  }
  A(1, 0) = A(0, 1);
  return A.fullPivLu().solve(b)[0];
}

// Multivariate local-linear fit at x with a product Gaussian kernel.
inline double multivariate_local_linear_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd D(n, p + 1);
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(i, 0) = 1.0;
    D.row(i).tail(p) = X.row(i) - x.transpose();
    double prod = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) prod *= std::exp(-0.5 * D(i, j + 1) * D(i, j + 1) / (h * h));
    k[i] = prod;
  }
  const Eigen::MatrixXd A = D.transpose() * k.asDiagonal() * D;
  const Eigen::VectorXd b = D.transpose() * k.asDiagonal() * y;
  return A.fullPivLu().solve(b)[0];
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fsi_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
