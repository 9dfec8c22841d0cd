#pragma once

#include "fsi/fsi.hpp"
#include "fsi/geometry.hpp"
#include "fsi/regression.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fsi {

/// Survivor counts l_x at integer ages for one unit (country).
struct Lifetable {
  std::string unit;
  std::vector<double> ages;
  std::vector<double> survivors;

  /// Throws InputError naming the unit when ages are not increasing or
  /// survivors increase anywhere.
  void validate() const;
};

/// Reads `age,lx` CSV; the unit id is the file stem.
Lifetable read_lifetable(const std::filesystem::path& path);
void write_lifetable(const Lifetable& table, const std::filesystem::path& path);

/// Death-count histogram restricted to [lo, hi): bin edges and probabilities.
struct DeathHistogram {
  std::vector<double> edges;  // size = masses.size() + 1
  std::vector<double> masses;  // sum to one
};

DeathHistogram death_histogram(const Lifetable& table, double lo, double hi);

/// Silverman's rule on the histogram, counting nonempty bins as the sample size.
double silverman_bandwidth(const DeathHistogram& hist);

/// Quantile function of the age-at-death distribution on [lo, hi].
/// bandwidth == 0: the histogram itself (uniform within bins).
/// bandwidth > 0: Gaussian kernel density on bin midpoints, reflected at lo and hi.
/// nullopt: Silverman bandwidth.
QuantileGrid lifetable_to_quantile(const Lifetable& table, double lo, double hi, const ProbabilityGrid& grid,
                                   std::optional<double> bandwidth = std::nullopt);

/// Pointwise average of quantile functions.
QuantileGrid sample_frechet_mean_wasserstein(std::span<const QuantileGrid> Y);

/// Unweighted Frechet mean of the columns of Y.
Eigen::VectorXd sample_frechet_mean(const Eigen::MatrixXd& Y, const MetricSpace& space);

/// 1 - sum d^2(Y_i, fitted_i) / sum d^2(Y_i, mean). Throws InputError for
/// zero Frechet variance.
double frechet_r2(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& fitted, const MetricSpace& space);

/// A regression model trained on a data set, returning a predictor.
using Predictor = std::function<Eigen::VectorXd(const Eigen::VectorXd& x)>;

struct Model {
  std::string name;
  std::function<Predictor(const RegressionDataset& train)> train;
};

Model global_frechet_model(const SphereSolverOptions& solver = {});
/// Local Frechet on covariate `column` alone with fixed bandwidth h.
Model local_frechet_model(std::string name, Eigen::Index column, double h, KernelFamily kernel = KernelFamily::Gaussian);
/// FSI refit of theta on each training set at fixed bandwidth h.
Model fsi_model(double h, const FsiConfig& config);
/// Predicts the training sample Frechet mean everywhere.
Model mean_model();

struct SplitScores {
  std::vector<std::vector<Eigen::Index>> test_sets;
  std::vector<std::vector<double>> mspe;  // [model][split]; NaN when the fit failed
  std::vector<double> mean;               // over successful splits
  std::vector<double> sd;                 // sample sd over successful splits
  std::vector<int> failed;
};

/// Random train/test splits (seeded shuffle) scored by mean squared distance on the test part.
SplitScores mspe_splits(const RegressionDataset& data, const std::vector<Model>& models, int n_splits, int test_size,
                        std::uint64_t seed, unsigned threads = 1);

struct MortalityConfig {
  double age_lo = 20.0;
  double age_hi = 110.0;
  Eigen::Index grid_size = 101;
  std::optional<double> density_bandwidth;  // nullopt: Silverman
  std::vector<std::string> covariates{"hdi", "hce", "gdpc", "im", "co2e"};
  int splits = 30;
  int test_size = 10;
  std::uint64_t seed = 1;
  int bandwidth_grid_size = 10;
  int whatif_points = 7;
  FsiConfig fsi = [] {
    FsiConfig c;
    c.start_scheme = StartScheme::Lattice;
    return c;
  }();
  unsigned threads = 1;
};

struct ModelResult {
  std::string name;
  double r2 = 0.0;
  std::optional<double> h_star;  // none for GF
  Eigen::MatrixXd fitted;
};

struct WhatIfRow {
  std::string covariate;
  double raw_value = 0.0;
  double standardized_value = 0.0;
  Eigen::VectorXd quantiles;
};

struct MortalityResult {
  std::vector<std::string> units;
  std::vector<std::string> warnings;
  RegressionDataset data;  // standardized covariates, quantile responses
  Eigen::MatrixXd raw_covariates;
  std::vector<ModelResult> models;
  FsiFit fsi;
  std::optional<SplitScores> splits;
  std::vector<WhatIfRow> whatif;
};

MortalityResult run_mortality_pipeline(const std::filesystem::path& lifetable_dir,
                                       const std::filesystem::path& covariates_file, const MortalityConfig& config);

/// Writes comparison.csv, theta_hat.json, fitted_quantiles.csv, splits.csv, whatif.csv.
void write_mortality_outputs(const MortalityResult& result, const MortalityConfig& config,
                             const std::filesystem::path& out_dir);

struct SyntheticMortalityConfig {
  int units = 40;
  std::uint64_t seed = 2024;
  Eigen::VectorXd theta0;  // empty: built-in default
  double mean_noise = 0.8;  // years
};

/// Writes <unit>.csv lifetables, covariates.csv and truth.json into `dir`.
/// Each unit's age at death on [20, 110] is normal with mean 74 + 7 tanh(2U)
/// and sd 11 - 3 tanh(2U), truncated, where U = theta0' z and z are the
/// standardized covariates; 2% of deaths fall uniformly below age 20.
void write_synthetic_mortality(const std::filesystem::path& dir, const SyntheticMortalityConfig& config);

Eigen::VectorXd default_synthetic_theta();

}  // namespace fsi
