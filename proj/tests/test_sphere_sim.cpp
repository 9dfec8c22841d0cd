#include "fsi/csv.hpp"
#include "fsi/errors.hpp"
#include "fsi/sphere_sim.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fsi;

TEST_CASE("regression function lies on the sphere") {
  for (const int p : {2, 5}) {
    for (double u = -std::sqrt(p); u <= std::sqrt(p); u += 0.05) {
      CHECK(std::abs(sphere_regression_function(u, p).norm() - 1.0) < 1e-12);
    }
  }
  const Eigen::Vector3d m0 = sphere_regression_function(0.0, 2);
  CHECK((m0 - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("tangent basis is orthonormal and orthogonal to the base point") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector3d m = testing::random_unit(rng);
    const Eigen::Matrix<double, 3, 2> b = tangent_basis(m);
    CHECK((b.transpose() * b - Eigen::Matrix2d::Identity()).norm() < 1e-12);
    CHECK((b.transpose() * m).norm() < 1e-12);
  }
}

TEST_CASE("settings validation and labels") {
  SimSetting s;
  s.n = 50;
  CHECK(s.label() == "n50_p2_s0.4");
  CHECK((s.true_index().theta() - Eigen::Vector2d(1, 1).normalized()).norm() < 1e-15);
  s.p = 1;
  CHECK_THROWS_AS(s.validate(), InputError);
  s.p = 2;
  s.sigma2 = 0.0;
  CHECK_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("generated data are reproducible and valid") {
  SimSetting s;
  s.n = 40;
  s.p = 3;
  s.seed = 9;
  const SphereSample a = generate_sphere_dataset(s, 2);
  const SphereSample b = generate_sphere_dataset(s, 2);
  const SphereSample c = generate_sphere_dataset(s, 3);
  CHECK(a.data.X() == b.data.X());
  CHECK(a.data.Y() == b.data.Y());
  CHECK(a.data.X() != c.data.X());
  CHECK(a.data.size() == 40);
  CHECK(a.data.covariate_dimension() == 3);
  CHECK((a.data.X().array().abs() <= 1.0 / std::sqrt(3.0)).all());
  CHECK((a.index.array().abs() <= 1.0).all());
  for (int i = 0; i < 40; ++i) {
    CHECK(std::abs(a.data.Y().col(i).norm() - 1.0) < 1e-12);
    CHECK((a.truth.col(i) - sphere_regression_function(a.index[i], 3)).norm() < 1e-12);
  }
}

TEST_CASE("noise level controls the spread around the truth") {
  SimSetting s;
  s.n = 400;
  s.sigma2 = 0.1;
  const SphereSample lo = generate_sphere_dataset(s, 0);
  s.sigma2 = 0.8;
  const SphereSample hi = generate_sphere_dataset(s, 0);
  CHECK(msee(lo.data.Y(), lo.truth) < msee(hi.data.Y(), hi.truth));
  s.sigma2 = 1e-8;
  const SphereSample tiny = generate_sphere_dataset(s, 0);
  for (int i = 0; i < s.n; ++i) CHECK((tiny.data.Y().col(i) - tiny.truth.col(i)).norm() < 1e-3);
}

TEST_CASE("error metrics") {
  CHECK(se_theta(Eigen::Vector2d(0.6, 0.8), Eigen::Vector2d(0.6, 0.8)) == 0.0);
  CHECK(se_theta(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == doctest::Approx(std::numbers::pi * std::numbers::pi / 4));
  CHECK(se_theta(Eigen::Vector2d(0.6, 0.8), Eigen::Vector2d(-0.6, -0.8)) < 1e-12);
  // Reference value computed independently.
  const Eigen::Matrix3d fitted = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d truth;
  truth << 0.6, 0.0, 0.8, 0.8, 0.6, 0.0, 0.0, 0.8, 0.6;
  CHECK(msee(fitted, truth) == doctest::Approx(0.8598764213286575).epsilon(1e-12));
  CHECK_THROWS_AS(msee(Eigen::Matrix3d::Identity(), Eigen::MatrixXd::Identity(3, 2)), InputError);
}

TEST_CASE("small simulation run produces complete records and summaries") {
  SimSetting s;
  s.n = 40;
  s.replicates = 2;
  SimConfig config;
  config.bandwidths = {0.2, 0.4};
  config.fsi.start_count = 4;
  const SimReport report = run_simulation({s}, config);
  CHECK(report.records.size() == 4);
  REQUIRE(report.summaries.size() == 1);
  CHECK(report.failures() == 0);
  const SettingSummary& sum = report.summaries.front();
  CHECK(sum.se.average.size() == 2);
  CHECK(sum.se.count[0] == 2);
  for (const auto& r : report.records) {
    CHECK(std::isfinite(r.se));
    CHECK(std::isfinite(r.msee_fsi));
    CHECK(std::isfinite(r.msee_mlf));
  }

  config.threads = 2;
  const SimReport again = run_simulation({s}, config);
  for (std::size_t k = 0; k < report.records.size(); ++k) {
    CHECK(report.records[k].se == again.records[k].se);
    CHECK(report.records[k].msee_fsi == again.records[k].msee_fsi);
  }

  const auto dir = testing::fresh_dir("sim");
  write_summary_csv(report, dir / "summary.csv");
  write_replicates_csv(report, dir / "replicates.csv");
  const CsvTable summary = read_csv(dir / "summary.csv");
  CHECK(summary.rows.size() == 1);
  CHECK(summary.has_column("msee_fsi_avg"));
  CHECK(read_csv(dir / "replicates.csv").rows.size() == 4);
}
