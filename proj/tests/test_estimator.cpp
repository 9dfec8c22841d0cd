#include "fsi/errors.hpp"
#include "fsi/fsi.hpp"
#include "fsi/parallel.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace fsi;
constexpr double kPi = std::numbers::pi;

namespace {

RegressionDataset index_data(std::mt19937_64& rng, int n, const Eigen::VectorXd& theta0, double noise) {
  std::normal_distribution<double> z;
  const Eigen::MatrixXd X = testing::random_matrix(rng, n, theta0.size());
  Eigen::MatrixXd Y(1, n);
  for (int i = 0; i < n; ++i) Y(0, i) = std::sin(2.0 * X.row(i).dot(theta0)) + noise * z(rng);
  return RegressionDataset(X, Y, MetricSpace::euclidean());
}

}  // namespace

TEST_CASE("index parameters are unit vectors with a positive leading entry") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  for (int k = 0; k < 1000; ++k) {
    const int p = 2 + k % 5;
    Eigen::VectorXd v(p);
    for (auto& c : v) c = z(rng);
    const IndexParam a = normalize_identifiable(v);
    const IndexParam b = normalize_identifiable(-3.0 * v);
    CHECK(std::abs(a.theta().norm() - 1.0) < 1e-12);
    CHECK(a.theta()[0] > 0.0);
    CHECK((a.theta() - b.theta()).norm() < 1e-12);
    CHECK((polar_to_theta(theta_to_polar(a.theta())) - a.theta()).norm() < 1e-10);
    CHECK((a.eta().array().abs() <= kPi / 2).all());
  }
  Eigen::Vector3d lead_zero(0.0, -2.0, 1.0);
  CHECK(normalize_identifiable(lead_zero).theta()[1] > 0.0);
  CHECK_THROWS_AS(normalize_identifiable(Eigen::Vector2d::Zero()), InputError);
  CHECK_THROWS_AS(polar_to_theta(Eigen::VectorXd::Constant(1, 2.0)), InputError);
  CHECK(IndexParam::scalar().theta()[0] == 1.0);
}

TEST_CASE("polar map for p = 2") {
  const Eigen::VectorXd t = polar_to_theta(Eigen::VectorXd::Constant(1, kPi / 6));
  CHECK(t[0] == doctest::Approx(std::cos(kPi / 6)));
  CHECK(t[1] == doctest::Approx(0.5));
}

TEST_CASE("Nelder-Mead minimizes a smooth bowl and tolerates infinities") {
  auto bowl = [](const Eigen::VectorXd& v) { return (v - Eigen::Vector2d(0.3, -0.2)).squaredNorm(); };
  NelderMeadOptions opt;
  opt.diameter_tolerance = 1e-8;
  opt.max_evaluations = 1000;
  const NelderMeadResult r = nelder_mead(bowl, Eigen::Vector2d(1.0, 1.0), opt);
  CHECK(r.converged);
  CHECK((r.argmin - Eigen::Vector2d(0.3, -0.2)).norm() < 1e-6);

  auto walled = [&](const Eigen::VectorXd& v) {
    return v[0] < 0.0 ? std::numeric_limits<double>::infinity() : bowl(v);
  };
  const NelderMeadResult w = nelder_mead(walled, Eigen::Vector2d(1.0, 1.0), opt);
  CHECK(std::isfinite(w.value));
  CHECK((w.argmin - Eigen::Vector2d(0.3, -0.2)).norm() < 1e-5);
}

TEST_CASE("start generation") {
  FsiConfig config;
  CHECK(generate_starts(2, config).size() == 10);
  CHECK(generate_starts(4, config).size() == 50);
  CHECK(generate_starts(7, config).size() == 100);
  CHECK(default_retained_count(2) == 2);
  CHECK(default_retained_count(5) == 3);
  CHECK(default_retained_count(9) == 5);
  for (const auto& s : generate_starts(4, config)) CHECK((s.array().abs() <= kPi / 2).all());
  // Same seed, same starts.
  CHECK(generate_starts(3, config)[5] == generate_starts(3, config)[5]);
  config.seed = 2;
  CHECK(generate_starts(3, config)[0] != generate_starts(3, FsiConfig{})[0]);

  config.start_scheme = StartScheme::Lattice;
  const auto lattice = generate_starts(3, config);
  CHECK(lattice.size() == 9);
  std::set<std::pair<double, double>> unique;
  for (const auto& s : lattice) unique.insert({s[0], s[1]});
  CHECK(unique.size() == 9);
  CHECK_THROWS_AS(generate_starts(1, config), InputError);
}

TEST_CASE("in-sample criterion on a six-point design") {
  // Reference value computed independently in double precision.
  Eigen::MatrixXd X(6, 2);
  X << 0.1, -0.3, 0.4, 0.2, -0.5, 0.7, 0.9, -0.1, -0.2, -0.8, 0.3, 0.6;
  Eigen::MatrixXd Y(1, 6);
  Y << 1.0, 2.5, -0.5, 3.0, 0.2, 1.7;
  const RegressionDataset data(X, Y, MetricSpace::euclidean());
  const IndexParam theta = IndexParam::from_vector(Eigen::Vector2d(1, 2));
  CHECK(wn_criterion(data, theta, 0.7, Kernel()) == doctest::Approx(1.2371687467534713).epsilon(1e-10));
}

TEST_CASE("sphere proxy criterion on a ten-point design") {
  Eigen::MatrixXd X(10, 2);
  X << -0.7428595944616008, -0.00144427511977008, 0.20299671524671492, -0.9426219832561109,
      -0.7041478308450881, 0.856422045920739, -0.8591588476916063, -0.740452101201404, 0.8966569065835501,
      0.24376718559276567, -0.26201375254041803, 0.0227800436065253, 0.3256859050335985, -0.4493823684777414,
      -0.7240638542660893, 0.5760791890079837, 0.34072116820496756, 0.02476462696632087, 0.6334728719393161,
      0.09815053774005267;
  Eigen::MatrixXd Yt(10, 3);
  Yt << 0.748353198299626, -0.6418287072835583, 0.16740191486789174, 0.6461860342985218, -0.7026532194254467,
      -0.2978624889250147, 0.6048134322407374, -0.49729128883959123, -0.6220145385965165, 0.47508865247911036,
      0.8516590339751852, -0.2212863803627268, 0.8466019316587864, 0.2517149862624815, 0.4689400121577281,
      0.6105871005702812, 0.366624394403088, 0.7019757446277943, 0.5986822658062247, -0.7365499223487159,
      0.31475983939700003, 0.5460319109640499, 0.5445648868248357, -0.6366303764716238, 0.6573098613649,
      -0.3279709546394514, -0.6785121952222692, 0.5414824512628613, 0.4887134544962148, -0.6840730329202717;
  const RegressionDataset data(X, Yt.transpose(), MetricSpace::sphere());
  const IndexParam theta = IndexParam::from_vector(Eigen::Vector2d(0.8, -0.6));
  CHECK(wn_proxy_sphere(data, theta, 0.6, Kernel()) == doctest::Approx(0.6327233644747967).epsilon(1e-10));
}

TEST_CASE("index recovery on noiseless Euclidean data") {
  std::mt19937_64 rng(32);
  const Eigen::VectorXd theta0 = Eigen::Vector3d(1.0, -0.5, 0.3).normalized();
  const RegressionDataset data = index_data(rng, 120, theta0, 0.0);
  FsiConfig config;
  const IndexEstimate est = estimate_index(data, 0.15, config);
  REQUIRE(est.feasible());
  CHECK(std::acos(std::min(1.0, std::abs(est.theta->theta().dot(theta0)))) < 0.02);
  CHECK(est.theta->theta()[0] > 0.0);
  CHECK(est.criterion == doctest::Approx(wn_criterion(data, *est.theta, 0.15, Kernel())));
  int retained = 0;
  for (const auto& s : est.starts) retained += s.retained;
  CHECK(retained == default_retained_count(3));
}

TEST_CASE("estimation rejects p = 1 and tiny samples") {
  std::mt19937_64 rng(33);
  const RegressionDataset scalar = index_data(rng, 20, Eigen::VectorXd::Ones(1), 0.1);
  CHECK_THROWS_AS(estimate_index(scalar, 0.2, FsiConfig{}), InputError);
  const RegressionDataset tiny = index_data(rng, 8, Eigen::Vector2d(1, 0), 0.1);
  CHECK_THROWS_AS(estimate_index(tiny, 0.2, FsiConfig{}), InputError);
}

TEST_CASE("bandwidth grids are increasing and positive") {
  std::mt19937_64 rng(34);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 50, 3);
  const auto grid = default_bandwidth_grid(X, 10);
  REQUIRE(grid.size() == 10);
  CHECK(grid.front() > 0.0);
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] > grid[k - 1]);
  CHECK_THROWS_AS(bandwidth_grid_for_index(Eigen::VectorXd::Constant(5, 1.0), 10), InputError);
}

TEST_CASE("leave-one-out prefers the larger bandwidth on ties and skips infeasible ones") {
  std::mt19937_64 rng(35);
  const RegressionDataset data = index_data(rng, 20, Eigen::Vector2d(1, 0), 0.1);
  // Prediction independent of h: every score ties.
  const LooFitter constant = [](const RegressionDataset& train, const Eigen::VectorXd&, double) {
    return Eigen::VectorXd(train.Y().rowwise().mean());
  };
  const std::vector<double> grid{0.1, 0.3, 0.2};
  CHECK(loocv_bandwidth(data, grid, constant).h_star == 0.3);

  const LooFitter fragile = [&](const RegressionDataset& train, const Eigen::VectorXd& x, double h) {
    if (h > 0.25) throw DegenerateWindow("synthetic failure");
    return constant(train, x, h);
  };
  const LoocvResult r = loocv_bandwidth(data, grid, fragile);
  CHECK(r.h_star == 0.2);
  CHECK(std::isinf(r.scores[1]));

  const LooFitter broken = [](const RegressionDataset&, const Eigen::VectorXd&, double) -> Eigen::VectorXd {
    throw DegenerateWindow("always");
  };
  CHECK_THROWS_AS(loocv_bandwidth(data, grid, broken), FitFailure);
}

TEST_CASE("full fit is deterministic across thread counts") {
  std::mt19937_64 rng(36);
  const RegressionDataset data = index_data(rng, 60, Eigen::Vector2d(0.6, 0.8), 0.1);
  FsiConfig config;
  config.bandwidths = {0.1, 0.2, 0.4};
  const FsiFit a = fit_fsi(data, config);
  config.threads = 3;
  const FsiFit b = fit_fsi(data, config);
  CHECK(a.theta_hat.theta() == b.theta_hat.theta());
  CHECK(a.h_star == b.h_star);
  CHECK(a.loocv_scores == b.loocv_scores);
  CHECK(a.fitted == b.fitted);
  CHECK(a.path.size() == 3);
  CHECK(std::acos(std::min(1.0, a.theta_hat.theta().dot(Eigen::Vector2d(0.6, 0.8)))) < 0.1);

  const Eigen::VectorXd x = data.X().row(0).transpose();
  CHECK(predict(a, data, x).point[0] == doctest::Approx(a.fitted(0, 0)).epsilon(1e-10));
  CHECK_FALSE(is_extrapolation(a, data, x));
  CHECK(is_extrapolation(a, data, Eigen::Vector2d(30.0, 40.0)));
}

TEST_CASE("refitting the index inside leave-one-out") {
  std::mt19937_64 rng(37);
  const RegressionDataset data = index_data(rng, 30, Eigen::Vector2d(0.6, 0.8), 0.05);
  FsiConfig config;
  config.bandwidths = {0.2, 0.4};
  config.loocv = LoocvVariant::RefitTheta;
  config.start_count = 4;
  const FsiFit fit = fit_fsi(data, config);
  CHECK(fit.loocv_scores.size() == 2);
  CHECK(std::isfinite(fit.loocv_scores[0]));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 7) throw InputError("boom");
                  }),
                  InputError);
}
