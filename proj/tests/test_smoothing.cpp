#include "fsi/errors.hpp"
#include "fsi/smoothing.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fsi;

TEST_CASE("kernels integrate to one and are symmetric") {
  for (const KernelFamily family : {KernelFamily::Gaussian, KernelFamily::Epanechnikov}) {
    const Kernel k(family);
    double total = 0.0;
    const int steps = 200000;
    const double a = -8.0, step = 16.0 / steps;
    for (int i = 0; i < steps; ++i) total += k(a + (i + 0.5) * step) * step;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(k(0.7) == k(-0.7));
  }
  CHECK(Kernel(KernelFamily::Epanechnikov)(1.5) == 0.0);
  CHECK(Kernel().scaled(0.4, 2.0) == doctest::Approx(Kernel()(0.2) / 2.0));
  CHECK(kernel_family_from_string("epanechnikov") == KernelFamily::Epanechnikov);
  CHECK_THROWS_AS(kernel_family_from_string("box"), InputError);
}

TEST_CASE("scalar local weights average to one and reproduce lines") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1, 1);
  const Kernel kernel;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd u(30);
    for (auto& v : u) v = unif(rng);
    const double u0 = 0.8 * unif(rng);
    const LocalWeights lw = scalar_local_weights(u, u0, 0.3, kernel);
    CHECK(lw.weights.mean() == doctest::Approx(1.0).epsilon(1e-12));
    // Local-linear weights have zero first moment around u0.
    CHECK(std::abs((lw.weights.array() * (u.array() - u0)).mean()) < 1e-12);
    CHECK(lw.sigma2 == doctest::Approx(lw.mu0 * lw.mu2 - lw.mu1 * lw.mu1));
  }
}

TEST_CASE("scalar local weights match a direct weighted least-squares fit") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  Eigen::VectorXd u(40), y(40);
  for (int i = 0; i < 40; ++i) u[i] = z(rng), y[i] = std::sin(2 * u[i]) + 0.1 * z(rng);
  for (const double u0 : {-1.0, 0.0, 0.5}) {
    const LocalWeights lw = scalar_local_weights(u, u0, 0.4, Kernel());
    CHECK(lw.weights.dot(y) / 40.0 == doctest::Approx(testing::local_linear_fit(u, y, u0, 0.4)).epsilon(1e-10));
  }
}

TEST_CASE("projected weights on a three-point design") {
  // Values computed independently in double precision.
  Eigen::MatrixXd X(3, 2);
  X << -0.8, 0.6, 1.9000000000000001, -0.7999999999999999, 0.19999999999999996, 1.1;
  const Eigen::Vector2d x(-2.1000000000000005, 2.1999999999999997);
  const IndexParam theta = IndexParam::from_vector(Eigen::Vector2d(0.6, 0.8));
  const LocalWeights lw = projected_local_weights(X, x, theta, 1.0, Kernel());
  CHECK(lw.weights[0] == doctest::Approx(0.9575033053615786).epsilon(1e-12));
  CHECK(lw.weights[1] == doctest::Approx(1.0849933892768446).epsilon(1e-12));
  CHECK(lw.weights[2] == doctest::Approx(0.9575033053615767).epsilon(1e-12));
}

TEST_CASE("degenerate windows are reported") {
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(5, 0.3);
  CHECK_THROWS_AS(scalar_local_weights(u, 0.3, 0.5, Kernel()), DegenerateWindow);
  // Compact kernel with no observation inside the window.
  const Eigen::VectorXd far = Eigen::VectorXd::LinSpaced(5, 0, 1);
  CHECK_THROWS_AS(scalar_local_weights(far, 10.0, 0.2, Kernel(KernelFamily::Epanechnikov)), DegenerateWindow);
}

TEST_CASE("multivariate weights match a direct product-kernel fit") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 60, 3);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y[i] = X(i, 0) - 2 * X(i, 1) * X(i, 2);
  const Eigen::Vector3d x(0.1, -0.2, 0.3);
  const Eigen::VectorXd w = multivariate_local_weights(X, x, 0.5, Kernel());
  CHECK(w.mean() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.dot(y) / 60.0 == doctest::Approx(testing::multivariate_local_linear_fit(X, y, x, 0.5)).epsilon(1e-9));

  const Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(10, 2);
  CHECK_THROWS_AS(multivariate_local_weights(flat, Eigen::Vector2d::Zero(), 0.5, Kernel()), DegenerateWindow);
}

TEST_CASE("projected weights with p = 1 reduce to scalar weights") {
  std::mt19937_64 rng(14);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 25, 1);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.2);
  const auto a = projected_local_weights(X, x, IndexParam::scalar(), 0.3, Kernel()).weights;
  const auto b = scalar_local_weights(X.col(0), 0.2, 0.3, Kernel()).weights;
  CHECK((a - b).norm() < 1e-15);
}
