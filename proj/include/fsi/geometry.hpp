#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>

namespace fsi {

// ---------------------------------------------------------------------------
// Sphere S^2
// ---------------------------------------------------------------------------

/// Unit vector in R^3. Construction rejects inputs whose norm deviates from
/// one by more than 1e-8 and renormalizes the rest.
class SpherePoint {
 public:
  explicit SpherePoint(const Eigen::Vector3d& v);
  SpherePoint(double x, double y, double z) : SpherePoint(Eigen::Vector3d(x, y, z)) {}

  /// Projects any nonzero vector onto the sphere.
  static SpherePoint normalize(const Eigen::Vector3d& v);

  const Eigen::Vector3d& coords() const noexcept { return coords_; }
  double operator[](int k) const { return coords_[k]; }

 private:
  struct Trusted {};
  SpherePoint(const Eigen::Vector3d& v, Trusted) : coords_(v) {}
  Eigen::Vector3d coords_;
};

/// Geodesic distance arccos(a.b) in radians, in [0, pi].
double sphere_distance(const SpherePoint& a, const SpherePoint& b);

/// Exponential map: cos|v| base + sin|v| v/|v|. The tangent must be
/// orthogonal to base within 1e-8.
SpherePoint sphere_exp(const SpherePoint& base, const Eigen::Vector3d& tangent);

/// Inverse of sphere_exp. Throws for antipodal pairs.
Eigen::Vector3d sphere_log(const SpherePoint& base, const SpherePoint& target);

namespace sphere {

// Unchecked kernels on raw unit vectors, used in the hot loops.
// The angle is evaluated as atan2(|a x b|, a.b), which equals arccos(a.b)
// but keeps full precision for nearly coincident points.
double angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b);
Eigen::Vector3d exp(const Eigen::Vector3d& base, const Eigen::Vector3d& tangent);
Eigen::Vector3d log(const Eigen::Vector3d& base, const Eigen::Vector3d& target);

}  // namespace sphere

// ---------------------------------------------------------------------------
// 1-D Wasserstein space via quantile functions on a shared grid
// ---------------------------------------------------------------------------

using ProbabilityGrid = std::shared_ptr<const Eigen::VectorXd>;

/// Strictly increasing levels 0 = t_1 < ... < t_M = 1.
ProbabilityGrid make_probability_grid(const Eigen::VectorXd& levels);
ProbabilityGrid uniform_probability_grid(Eigen::Index size = 101);

/// Trapezoidal quadrature weights for the grid (sum to one).
Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& levels);

/// Quantile function sampled on a probability grid; values are nondecreasing.
class QuantileGrid {
 public:
  QuantileGrid(ProbabilityGrid grid, Eigen::VectorXd values);

  const ProbabilityGrid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& levels() const noexcept { return *grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }

 private:
  ProbabilityGrid grid_;
  Eigen::VectorXd values_;
};

double wasserstein_distance(const QuantileGrid& g1, const QuantileGrid& g2);

/// L2 projection (under the given positive quadrature weights) of a sequence
/// onto the cone of nondecreasing sequences, by pool-adjacent-violators.
Eigen::VectorXd isotonic_projection(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

// ---------------------------------------------------------------------------
// Metric space abstraction
// ---------------------------------------------------------------------------

enum class SpaceKind { Sphere, Wasserstein1D, Euclidean1D };

const char* to_string(SpaceKind kind);

struct SphereSolverOptions {
  double tolerance = 1e-9;  // on the gradient norm of the weight-normalized objective
  int max_iterations = 500;
};

/// Result of a weighted Frechet mean computation.
struct FittedObject {
  Eigen::VectorXd point;
  double criterion_value = 0.0;  // sum_i w_i d^2(y_i, point) with the caller's weights
  int iterations = 0;            // sphere solver only
  double gradient_norm = 0.0;    // sphere solver only
};

/// Tag of the response space plus, for Wasserstein1D, the shared grid.
/// Points are plain column vectors: 3 coordinates on the sphere, M quantile
/// values in Wasserstein space, one value for Euclidean responses.
class MetricSpace {
 public:
  static MetricSpace sphere();
  static MetricSpace euclidean();
  static MetricSpace wasserstein(ProbabilityGrid grid);

  SpaceKind kind() const noexcept { return kind_; }
  Eigen::Index dimension() const noexcept;
  /// Probability levels; only meaningful for Wasserstein1D.
  const ProbabilityGrid& grid() const noexcept { return grid_; }

  bool same_as(const MetricSpace& other) const;

  double distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                  const Eigen::Ref<const Eigen::VectorXd>& b) const;
  double squared_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                          const Eigen::Ref<const Eigen::VectorXd>& b) const;

  /// Throws InputError if the point violates the space's invariants.
  void validate(const Eigen::Ref<const Eigen::VectorXd>& point) const;

  /// argmin_w sum_i weights_i d^2(Y.col(i), w). Weights may be signed.
  /// `warm_start` is used by the sphere solver only; by default the solver
  /// starts at the normalized extrinsic weighted mean.
  FittedObject weighted_frechet_mean(const Eigen::MatrixXd& responses,
                                     const Eigen::VectorXd& weights,
                                     const std::optional<Eigen::Vector3d>& warm_start = std::nullopt,
                                     const SphereSolverOptions& options = {}) const;

  /// sum_i weights_i d^2(Y.col(i), point)
  double weighted_objective(const Eigen::MatrixXd& responses, const Eigen::VectorXd& weights,
                            const Eigen::Ref<const Eigen::VectorXd>& point) const;

 private:
  MetricSpace(SpaceKind kind, ProbabilityGrid grid, ProbabilityGrid quadrature)
      : kind_(kind), grid_(std::move(grid)), quadrature_(std::move(quadrature)) {}
  SpaceKind kind_;
  ProbabilityGrid grid_;
  ProbabilityGrid quadrature_;  // trapezoid weights matching grid_
};

/// Riemannian Newton / gradient descent for the weighted Frechet mean on S^2.
/// With negative weights the objective has cone points at the antipodes of
/// negatively weighted responses; a cone point that is a local minimum is
/// returned as such, with gradient_norm reported as 0.
FittedObject sphere_frechet_mean(const Eigen::MatrixXd& responses, const Eigen::VectorXd& weights,
                                 const Eigen::Vector3d& initial, const SphereSolverOptions& options = {});

/// Normalized sum_i w_i y_i, or nullopt when the sum vanishes.
std::optional<Eigen::Vector3d> extrinsic_mean_projection(const Eigen::MatrixXd& responses,
                                                         const Eigen::VectorXd& weights);

}  // namespace fsi
