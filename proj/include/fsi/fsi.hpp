#pragma once

#include "fsi/geometry.hpp"
#include "fsi/index_param.hpp"
#include "fsi/nelder_mead.hpp"
#include "fsi/regression.hpp"
#include "fsi/smoothing.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fsi {

enum class StartScheme { Random, Lattice };
enum class LoocvVariant { FixedTheta, RefitTheta };

/// Default multi-start pool size K_p and retained count for dimension p.
int default_start_count(Eigen::Index p);
int default_retained_count(Eigen::Index p);

struct FsiConfig {
  std::vector<double> bandwidths;  // empty: default_bandwidth_grid
  int auto_grid_size = 10;
  std::optional<int> start_count;     // K_p override
  std::optional<int> retained_count;  // retained starts override
  std::uint64_t seed = 1;
  KernelFamily kernel = KernelFamily::Gaussian;
  StartScheme start_scheme = StartScheme::Random;
  LoocvVariant loocv = LoocvVariant::FixedTheta;
  double simplex_step = 0.1;          // radians
  double simplex_tolerance = 1e-4;    // radians
  int evaluations_per_angle = 200;    // budget is this times (p - 1)
  SphereSolverOptions solver;
  unsigned threads = 1;
};

/// Starting angle vectors: K_p uniform draws on [-pi/2, pi/2]^(p-1), or the
/// 3^(p-1) lattice with nodes {-pi/3, 0, pi/3} (the centers of three equal cells).
std::vector<Eigen::VectorXd> generate_starts(Eigen::Index p, const FsiConfig& config);

/// In-sample criterion W_n(theta) = n^-1 sum_i d^2(Y_i, Yhat_i(theta, h)) together
/// with the fitted objects (columns).
struct CriterionEvaluation {
  double value = 0.0;
  Eigen::MatrixXd fitted;
};

CriterionEvaluation evaluate_wn(const RegressionDataset& data, const IndexParam& theta, double h,
                                const Kernel& kernel, const SphereSolverOptions& solver = {});

double wn_criterion(const RegressionDataset& data, const IndexParam& theta, double h, const Kernel& kernel,
                    const SphereSolverOptions& solver = {});

/// Sphere-only proxy: fitted values replaced by the normalized Euclidean
/// local-linear fit of the response vectors.
double wn_proxy_sphere(const RegressionDataset& data, const IndexParam& theta, double h, const Kernel& kernel);

struct StartTrace {
  Eigen::VectorXd start;          // angles
  Eigen::VectorXd refined;        // after the proxy stage (equal to start without one)
  double screen_value = 0.0;      // proxy value (sphere) or W_n at the start
  bool retained = false;
  Eigen::VectorXd final_angles;   // after direct W_n minimization (retained only)
  double final_value = 0.0;
  int evaluations = 0;
};

/// theta-hat(h) for one bandwidth.
struct IndexEstimate {
  double h = 0.0;
  std::optional<IndexParam> theta;  // empty when every start was infeasible
  double criterion = 0.0;           // W_n at theta
  Eigen::MatrixXd fitted;           // fitted objects at theta, h
  std::vector<StartTrace> starts;

  bool feasible() const noexcept { return theta.has_value(); }
};

IndexEstimate estimate_index(const RegressionDataset& data, double h, const FsiConfig& config);

/// 10 (or `size`) log-spaced bandwidths between the 5th and 50th percentiles
/// of pairwise index distances at the first principal direction of X.
std::vector<double> default_bandwidth_grid(const Eigen::MatrixXd& X, int size = 10);

/// Same rule on given index values.
std::vector<double> bandwidth_grid_for_index(const Eigen::VectorXd& u, int size = 10);

/// Fits on `train` and returns the prediction at covariate x with bandwidth h.
using LooFitter = std::function<Eigen::VectorXd(const RegressionDataset& train, const Eigen::VectorXd& x, double h)>;

struct LoocvResult {
  double h_star = 0.0;
  std::vector<double> scores;  // sum_i d^2(Y_i, Yhat_i^(-i)(h)); +inf when infeasible
};

/// Leave-one-out bandwidth choice. Bandwidths whose refits raise numerical
/// errors are skipped; ties go to the larger bandwidth.
LoocvResult loocv_bandwidth(const RegressionDataset& data, std::span<const double> grid, const LooFitter& fitter,
                            unsigned threads = 1);

LooFitter local_index_fitter(const IndexParam& theta, const Kernel& kernel, const SphereSolverOptions& solver = {});
LooFitter multivariate_local_fitter(const Kernel& kernel, const SphereSolverOptions& solver = {});

struct FsiFit {
  IndexParam theta_hat = IndexParam::scalar();
  double h_star = 0.0;
  double criterion = 0.0;          // W_n(theta_hat) at h_star
  KernelFamily kernel = KernelFamily::Gaussian;
  SphereSolverOptions solver;
  std::vector<IndexEstimate> path;  // one per grid bandwidth
  std::vector<double> loocv_scores;
  Eigen::MatrixXd fitted;           // columns: fitted objects at X_i
};

/// Full pipeline: theta-hat(h) over the grid, h* by leave-one-out, fitted objects.
FsiFit fit_fsi(const RegressionDataset& data, const FsiConfig& config);

/// Pipeline with the bandwidth fixed (no leave-one-out step).
FsiFit fit_fsi_fixed_bandwidth(const RegressionDataset& data, double h, const FsiConfig& config);

/// Final estimator at a new covariate vector.
FittedObject predict(const FsiFit& fit, const RegressionDataset& data, const Eigen::VectorXd& x_new);

/// True when theta-hat' x_new falls outside the training index range widened by h*.
bool is_extrapolation(const FsiFit& fit, const RegressionDataset& data, const Eigen::VectorXd& x_new);

}  // namespace fsi
