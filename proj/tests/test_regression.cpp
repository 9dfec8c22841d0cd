#include "fsi/errors.hpp"
#include "fsi/regression.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

using namespace fsi;

namespace {

RegressionDataset euclidean_data(std::mt19937_64& rng, int n, int p) {
  std::normal_distribution<double> z;
  const Eigen::MatrixXd X = testing::random_matrix(rng, n, p);
  Eigen::MatrixXd Y(1, n);
  for (int i = 0; i < n; ++i) Y(0, i) = std::sin(X.row(i).sum()) + 0.2 * z(rng);
  return RegressionDataset(X, Y, MetricSpace::euclidean());
}

}  // namespace

TEST_CASE("dataset validation") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(RegressionDataset(X, Eigen::MatrixXd::Zero(1, 4), MetricSpace::euclidean()), InputError);
  CHECK_THROWS_AS(RegressionDataset(X, Eigen::MatrixXd::Ones(3, 3), MetricSpace::sphere()), InputError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 3);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(RegressionDataset(X, bad, MetricSpace::euclidean()), InputError);
}

TEST_CASE("standardization centers and scales covariates") {
  std::mt19937_64 rng(21);
  RegressionDataset data = euclidean_data(rng, 30, 3);
  const Eigen::MatrixXd shifted = (data.X().array() * 5.0 + 2.0).matrix();
  const RegressionDataset s = data.with_covariates(shifted).standardized();
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(s.X().col(j).mean()) < 1e-12);
    const double var = (s.X().col(j).array() - s.X().col(j).mean()).square().sum() / 29.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
  REQUIRE(s.standardization().has_value());
  const Eigen::VectorXd raw = shifted.row(4).transpose();
  CHECK((s.standardization()->apply(raw) - s.X().row(4).transpose()).norm() < 1e-12);

  Eigen::MatrixXd constant = shifted;
  constant.col(1).setConstant(3.0);
  CHECK_THROWS_AS(data.with_covariates(constant).standardized(), InputError);
}

TEST_CASE("subset and leave-one-out views") {
  std::mt19937_64 rng(22);
  const RegressionDataset data = euclidean_data(rng, 10, 2);
  const RegressionDataset loo = data.without(3);
  CHECK(loo.size() == 9);
  CHECK(loo.X().row(3) == data.X().row(4));
  const std::array<Eigen::Index, 2> rows{7, 1};
  const RegressionDataset sub = data.subset(rows);
  CHECK(sub.Y()(0, 0) == data.Y()(0, 7));
  CHECK(sub.Y()(0, 1) == data.Y()(0, 1));
}

TEST_CASE("local Frechet on Euclidean responses is local-linear regression") {
  std::mt19937_64 rng(23);
  for (const int p : {1, 2, 5}) {
    const RegressionDataset data = euclidean_data(rng, 50, p);
    std::normal_distribution<double> z;
    Eigen::VectorXd v(p);
    for (auto& c : v) c = z(rng);
    const IndexParam theta = IndexParam::from_vector(v);
    const Eigen::VectorXd u = data.X() * theta.theta();
    for (int i = 0; i < 50; i += 7) {
      const Eigen::VectorXd x = data.X().row(i).transpose();
      const double fit = local_frechet_at(data, x, theta, 0.4, Kernel()).point[0];
      CHECK(std::abs(fit - testing::local_linear_fit(u, data.Y().row(0).transpose(), u[i], 0.4)) < 1e-8);
    }
  }
}

TEST_CASE("global Frechet on Euclidean responses is least squares") {
  std::mt19937_64 rng(24);
  const RegressionDataset data = euclidean_data(rng, 40, 3);
  Eigen::MatrixXd D(40, 4);
  D.col(0).setOnes();
  D.rightCols(3) = data.X();
  const Eigen::VectorXd beta = D.colPivHouseholderQr().solve(data.Y().row(0).transpose());
  const Eigen::Vector3d x(0.3, -0.1, 0.7);
  const double expected = beta[0] + beta.tail(3).dot(x);
  CHECK(global_frechet_fit(data, x).point[0] == doctest::Approx(expected).epsilon(1e-10));
  CHECK(global_frechet_weights(data.X(), x).mean() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("multivariate local Frechet on Euclidean responses") {
  std::mt19937_64 rng(25);
  const RegressionDataset data = euclidean_data(rng, 80, 2);
  const Eigen::Vector2d x(0.2, -0.3);
  const double fit = multivariate_local_frechet_at(data, x, 0.5, Kernel()).point[0];
  CHECK(fit == doctest::Approx(testing::multivariate_local_linear_fit(data.X(), data.Y().row(0).transpose(), x, 0.5))
                   .epsilon(1e-9));
}

TEST_CASE("sphere fits stay on the sphere") {
  std::mt19937_64 rng(26);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 40, 2);
  Eigen::MatrixXd Y(3, 40);
  for (int i = 0; i < 40; ++i) {
    const double a = X.row(i).sum();
    Y.col(i) = Eigen::Vector3d(std::cos(a), std::sin(a), 0.3).normalized();
  }
  const RegressionDataset data(X, Y, MetricSpace::sphere());
  const IndexParam theta = IndexParam::from_vector(Eigen::Vector2d(1, 1));
  for (int i = 0; i < 40; i += 5) {
    const Eigen::VectorXd x = X.row(i).transpose();
    const FittedObject fit = local_frechet_at(data, x, theta, 0.12, Kernel());
    CHECK(std::abs(fit.point.norm() - 1.0) < 1e-12);
    // Noiseless responses that depend on the index only are recovered closely.
    CHECK((fit.point - Y.col(i)).norm() < 0.02);
    const Eigen::Vector3d init = nadaraya_watson_sphere_init(data, i, theta, 0.3, Kernel());
    CHECK(std::abs(init.norm() - 1.0) < 1e-12);
  }
  CHECK(std::abs(global_frechet_fit(data, Eigen::Vector2d(0.1, 0.1)).point.norm() - 1.0) < 1e-12);
}
