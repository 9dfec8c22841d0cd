#pragma once

#include "fsi/fsi.hpp"
#include "fsi/index_param.hpp"
#include "fsi/regression.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fsi {

struct SimSetting {
  int n = 100;
  int p = 2;
  double sigma2 = 0.4;
  int replicates = 1;
  std::optional<Eigen::VectorXd> theta0;  // default: (1, ..., 1) normalized
  std::uint64_t seed = 1;

  IndexParam true_index() const;
  /// Throws InputError for p < 2, sigma2 <= 0, replicates < 1 or n < 10.
  void validate() const;
  std::string label() const;
};

/// m(u) = (sqrt(1 - u^2/p) cos(pi u/sqrt p), sqrt(1 - u^2/p) sin(pi u/sqrt p), u/sqrt p)
Eigen::Vector3d sphere_regression_function(double u, int p);

/// Orthonormal basis of the tangent plane at m: Gram-Schmidt on the two
/// coordinate axes least aligned with m. Columns are the basis vectors.
Eigen::Matrix<double, 3, 2> tangent_basis(const Eigen::Vector3d& m);

struct SphereSample {
  RegressionDataset data;
  Eigen::MatrixXd truth;  // 3 x n, m(X_i)
  Eigen::VectorXd index;  // U_i = theta0' X_i
};

/// One simulated data set; the random stream depends only on (setting.seed, replicate).
SphereSample generate_sphere_dataset(const SimSetting& setting, std::uint64_t replicate);

/// [arccos |theta0' theta_hat|]^2
double se_theta(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta0);

/// n^-1 sum_i [arccos(truth_i' fitted_i)]^2 over matching columns.
double msee(const Eigen::MatrixXd& fitted, const Eigen::MatrixXd& truth);

struct SimConfig {
  std::vector<double> bandwidths;
  FsiConfig fsi;     // seed is replaced by each setting's seed
  unsigned threads = 1;
  bool run_mlf = true;
};

struct ReplicateRecord {
  std::size_t setting = 0;
  int replicate = 0;
  double h = 0.0;
  double se = 0.0;        // NaN when the fit failed
  double msee_fsi = 0.0;  // NaN when the fit failed
  double msee_mlf = 0.0;  // NaN when the fit failed or mLF was skipped
};

struct MetricSummary {
  std::vector<double> average;  // per bandwidth, over successful replicates
  std::vector<double> sd;       // sample sd (n - 1)
  std::vector<int> count;
  std::size_t best = 0;         // bandwidth index minimizing the average
};

struct SettingSummary {
  SimSetting setting;
  MetricSummary se;
  MetricSummary msee_fsi;
  MetricSummary msee_mlf;
  int failures = 0;  // (replicate, bandwidth, metric) cells without a value
};

struct SimReport {
  std::vector<double> bandwidths;
  std::vector<ReplicateRecord> records;
  std::vector<SettingSummary> summaries;

  int failures() const;
};

SimReport run_simulation(const std::vector<SimSetting>& settings, const SimConfig& config);

void write_replicates_csv(const SimReport& report, const std::filesystem::path& path);
void write_summary_csv(const SimReport& report, const std::filesystem::path& path);

}  // namespace fsi
