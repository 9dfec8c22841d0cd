#include "fsi/geometry.hpp"

#include "fsi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fsi {

namespace {

constexpr double kUnitNormTolerance = 1e-8;
constexpr double kTangentTolerance = 1e-8;
constexpr double kAntipodalMargin = 1e-10;

void require_unit(const Eigen::Vector3d& v, const char* what) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitNormTolerance) {
    throw InputError(std::string(what) + ": not a unit vector");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Sphere
// ---------------------------------------------------------------------------

SpherePoint::SpherePoint(const Eigen::Vector3d& v) : coords_(v) {
  require_unit(v, "SpherePoint");
  coords_ /= coords_.norm();
}

SpherePoint SpherePoint::normalize(const Eigen::Vector3d& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InputError("SpherePoint::normalize: zero or non-finite vector");
  }
  return SpherePoint(v / norm, Trusted{});
}

namespace sphere {

double angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Eigen::Vector3d exp(const Eigen::Vector3d& base, const Eigen::Vector3d& tangent) {
  const double len = tangent.norm();
  if (len == 0.0) return base;
  Eigen::Vector3d out = std::cos(len) * base + (std::sin(len) / len) * tangent;
  return out / out.norm();
}

Eigen::Vector3d log(const Eigen::Vector3d& base, const Eigen::Vector3d& target) {
  const double c = base.dot(target);
  const Eigen::Vector3d perp = target - c * base;
  const double s = perp.norm();
  if (s < 1e-300) {
    if (c > 0.0) return Eigen::Vector3d::Zero();
    throw SolverFailure("sphere log map undefined for antipodal points");
  }
  const double theta = std::atan2(s, c);
  return perp * (theta / s);
}

}  // namespace sphere

double sphere_distance(const SpherePoint& a, const SpherePoint& b) {
  return sphere::angle(a.coords(), b.coords());
}

SpherePoint sphere_exp(const SpherePoint& base, const Eigen::Vector3d& tangent) {
  if (!tangent.allFinite()) throw InputError("sphere_exp: non-finite tangent");
  if (std::abs(base.coords().dot(tangent)) > kTangentTolerance * std::max(1.0, tangent.norm())) {
    throw InputError("sphere_exp: tangent vector is not orthogonal to the base point");
  }
  return SpherePoint::normalize(sphere::exp(base.coords(), tangent));
}

Eigen::Vector3d sphere_log(const SpherePoint& base, const SpherePoint& target) {
  if (base.coords().dot(target.coords()) <= -1.0 + kAntipodalMargin) {
    throw InputError("sphere_log: antipodal points, log map undefined");
  }
  return sphere::log(base.coords(), target.coords());
}

std::optional<Eigen::Vector3d> extrinsic_mean_projection(const Eigen::MatrixXd& responses,
                                                         const Eigen::VectorXd& weights) {
  const Eigen::Vector3d sum = responses * weights;
  const double norm = sum.norm();
  if (!(norm > 1e-12 * std::max(1.0, weights.cwiseAbs().sum()))) return std::nullopt;
  return Eigen::Vector3d(sum / norm);
}

namespace {

// Orthonormal basis of the tangent plane at x.
void tangent_basis(const Eigen::Vector3d& x, Eigen::Vector3d& e1, Eigen::Vector3d& e2) {
  Eigen::Index axis = 0;
  x.cwiseAbs().minCoeff(&axis);
  Eigen::Vector3d a = Eigen::Vector3d::Unit(axis);
  e1 = a - x.dot(a) * x;
  e1.normalize();
  e2 = x.cross(e1);
}

double sphere_objective(const Eigen::MatrixXd& Y, const Eigen::VectorXd& w, const Eigen::Vector3d& x) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < Y.cols(); ++i) {
    if (w[i] == 0.0) continue;
    const double d = sphere::angle(Y.col(i), x);
    f += w[i] * d * d;
  }
  return f;
}

// Gradient of the objective at x, leaving out response `skip` and any
// response antipodal to x.
Eigen::Vector3d partial_gradient(const Eigen::MatrixXd& Y, const Eigen::VectorXd& w, const Eigen::Vector3d& x,
                                 Eigen::Index skip) {
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < Y.cols(); ++i) {
    if (i == skip || w[i] == 0.0) continue;
    const Eigen::Vector3d y = Y.col(i);
    const double c = x.dot(y);
    const Eigen::Vector3d perp = y - c * x;
    const double s = perp.norm();
    if (s < 1e-12) continue;
    grad -= 2.0 * w[i] * (std::atan2(s, c) / s) * perp;
  }
  return grad;
}

// The antipode of a negatively weighted response is a cone point of the
// objective: that term rises at rate 2 pi |w_i| in every direction. It is a
// local minimum when the rest of the gradient is no steeper.
bool is_cone_minimum(const Eigen::MatrixXd& Y, const Eigen::VectorXd& w, Eigen::Index i) {
  if (!(w[i] < 0.0)) return false;
  const Eigen::Vector3d x = -Y.col(i).normalized();
  return partial_gradient(Y, w, x, i).norm() <= 2.0 * std::numbers::pi * -w[i];
}

// Lowest cone-point local minimum, if any.
std::optional<std::pair<Eigen::Vector3d, double>> best_cone_minimum(const Eigen::MatrixXd& Y,
                                                                    const Eigen::VectorXd& w) {
  std::optional<std::pair<Eigen::Vector3d, double>> best;
  for (Eigen::Index i = 0; i < Y.cols(); ++i) {
    if (!is_cone_minimum(Y, w, i)) continue;
    const Eigen::Vector3d x = -Y.col(i).normalized();
    const double f = sphere_objective(Y, w, x);
    if (!best || f < best->second) best = std::make_pair(x, f);
  }
  return best;
}

}  // namespace

FittedObject sphere_frechet_mean(const Eigen::MatrixXd& Y, const Eigen::VectorXd& weights,
                                 const Eigen::Vector3d& initial, const SphereSolverOptions& options) {
  if (Y.rows() != 3) throw InputError("sphere_frechet_mean: responses must have 3 rows");
  if (Y.cols() == 0) throw InputError("sphere_frechet_mean: no responses");
  if (weights.size() != Y.cols()) throw InputError("sphere_frechet_mean: weight count mismatch");
  if (!weights.allFinite()) throw InputError("sphere_frechet_mean: non-finite weights");
  if (!(weights.maxCoeff() > 0.0)) {
    throw InputError("sphere_frechet_mean: at least one weight must be positive");
  }

  // The minimizer does not depend on the weight scale; work with sum|w| = 1.
  const double scale = weights.cwiseAbs().sum();
  const Eigen::VectorXd w = weights / scale;

  Eigen::Vector3d x = initial.normalized();
  double f = sphere_objective(Y, w, x);
  double gnorm = 0.0;
  int iter = 0;

  for (;; ++iter) {
    Eigen::Vector3d e1, e2;
    tangent_basis(x, e1, e2);

    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    Eigen::Index antipodal = -1;
    Eigen::Index near_cone = -1;
    double near_gap = 5e-11;  // 1 + x.y, about (1e-5 rad)^2 / 2
    for (Eigen::Index i = 0; i < Y.cols(); ++i) {
      if (w[i] == 0.0) continue;
      const Eigen::Vector3d y = Y.col(i);
      const double c = x.dot(y);
      if (w[i] < 0.0 && 1.0 + c < near_gap) {
        near_gap = 1.0 + c;
        near_cone = i;
      }
      const Eigen::Vector3d perp = y - c * x;
      const double s = perp.norm();
      if (s < 1e-12) {
        if (c < 0.0) {
          antipodal = i;
          break;
        }
        // d^2 is locally |v|^2: Hessian 2I, no gradient contribution.
        hess += 2.0 * w[i] * Eigen::Matrix2d::Identity();
        continue;
      }
      const double theta = std::atan2(s, c);
      grad -= 2.0 * w[i] * (theta / s) * perp;
      const Eigen::Vector2d u(e1.dot(perp) / s, e2.dot(perp) / s);
      const double radial_cot = theta * c / s;  // theta cot(theta)
      const Eigen::Matrix2d uu = u * u.transpose();
      hess += 2.0 * w[i] * (uu + radial_cot * (Eigen::Matrix2d::Identity() - uu));
    }
    if (near_cone >= 0 && is_cone_minimum(Y, w, near_cone)) {
      x = -Y.col(near_cone).normalized();
      f = sphere_objective(Y, w, x);
      gnorm = 0.0;
      break;
    }
    if (antipodal >= 0) {
      // Sitting on an antipode that is not a minimum: step off it downhill.
      Eigen::Vector3d dir = -partial_gradient(Y, w, x, antipodal);
      if (dir.norm() < 1e-12) dir = e1;
      if (iter >= options.max_iterations) throw SolverFailure("sphere_frechet_mean: stuck at an antipodal point");
      x = sphere::exp(x, 1e-6 * dir.normalized());
      f = sphere_objective(Y, w, x);
      continue;
    }
    gnorm = grad.norm();
    if (gnorm < options.tolerance) break;
    if (iter >= options.max_iterations) {
      if (auto cone = best_cone_minimum(Y, w); cone && cone->second <= f + 1e-12 * std::max(1.0, std::abs(f))) {
        x = cone->first;
        f = cone->second;
        gnorm = 0.0;
        break;
      }
      throw SolverFailure("sphere_frechet_mean: no convergence after " +
                          std::to_string(options.max_iterations) +
                          " iterations (gradient norm " + std::to_string(gnorm) + ")");
    }

    const Eigen::Vector2d g(e1.dot(grad), e2.dot(grad));
    Eigen::Vector2d step = -0.5 * g;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(hess);
    if (eig.eigenvalues().minCoeff() > 1e-8 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
      step = -hess.ldlt().solve(g);
    }
    double slope = g.dot(step);
    if (!(slope < 0.0)) {
      step = -0.5 * g;
      slope = g.dot(step);
    }
    // Keep each trial inside a quarter great circle.
    const double max_len = std::numbers::pi / 2;
    double t = std::min(1.0, max_len / step.norm());

    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::Vector3d v = t * (step[0] * e1 + step[1] * e2);
      const Eigen::Vector3d candidate = sphere::exp(x, v);
      const double fc = sphere_objective(Y, w, candidate);
      if (fc <= f + 1e-4 * t * slope + 1e-15 * std::max(1.0, std::abs(f))) {
        x = candidate;
        f = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable decrease left; accept if already at the rounding floor.
      if (gnorm < 1e3 * options.tolerance) break;
      if (auto cone = best_cone_minimum(Y, w); cone && cone->second <= f + 1e-12 * std::max(1.0, std::abs(f))) {
        x = cone->first;
        f = cone->second;
        gnorm = 0.0;
        break;
      }
      throw SolverFailure("sphere_frechet_mean: line search failed (gradient norm " +
                          std::to_string(gnorm) + ")");
    }
  }

  FittedObject out;
  out.point = x;
  out.criterion_value = f * scale;
  out.iterations = iter;
  out.gradient_norm = gnorm;
  return out;
}

// ---------------------------------------------------------------------------
// Wasserstein
// ---------------------------------------------------------------------------

ProbabilityGrid make_probability_grid(const Eigen::VectorXd& levels) {
  const Eigen::Index m = levels.size();
  if (m < 2) throw InputError("probability grid needs at least two levels");
  if (levels[0] != 0.0 || levels[m - 1] != 1.0) {
    throw InputError("probability grid must start at 0 and end at 1");
  }
  for (Eigen::Index k = 1; k < m; ++k) {
    if (!(levels[k] > levels[k - 1])) throw InputError("probability grid must be strictly increasing");
  }
  return std::make_shared<const Eigen::VectorXd>(levels);
}

ProbabilityGrid uniform_probability_grid(Eigen::Index size) {
  if (size < 2) throw InputError("probability grid needs at least two levels");
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(size, 0.0, 1.0);
  t[0] = 0.0;
  t[size - 1] = 1.0;
  return make_probability_grid(t);
}

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& t) {
  const Eigen::Index m = t.size();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    const double half = 0.5 * (t[k + 1] - t[k]);
    c[k] += half;
    c[k + 1] += half;
  }
  return c;
}

QuantileGrid::QuantileGrid(ProbabilityGrid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InputError("QuantileGrid: missing probability grid");
  if (values_.size() != grid_->size()) throw InputError("QuantileGrid: grid and values differ in length");
  if (!values_.allFinite()) throw InputError("QuantileGrid: non-finite quantile value");
  for (Eigen::Index k = 1; k < values_.size(); ++k) {
    if (values_[k] < values_[k - 1]) throw InputError("QuantileGrid: values must be nondecreasing");
  }
}

namespace {

bool same_grid(const ProbabilityGrid& a, const ProbabilityGrid& b) {
  if (a == b) return true;
  if (!a || !b || a->size() != b->size()) return false;
  return *a == *b;
}

}  // namespace

double wasserstein_distance(const QuantileGrid& g1, const QuantileGrid& g2) {
  if (!same_grid(g1.grid(), g2.grid())) throw InputError("wasserstein_distance: grids differ");
  const Eigen::VectorXd c = trapezoid_weights(g1.levels());
  const Eigen::VectorXd diff = g1.values() - g2.values();
  return std::sqrt(c.dot(diff.cwiseAbs2()));
}

Eigen::VectorXd isotonic_projection(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  const Eigen::Index m = values.size();
  if (weights.size() != m) throw InputError("isotonic_projection: weight count mismatch");
  struct Block {
    double mean;
    double weight;
    Eigen::Index length;
  };
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    blocks.push_back({values[k], weights[k], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.length += top.length;
    }
  }
  Eigen::VectorXd out(m);
  Eigen::Index k = 0;
  for (const Block& b : blocks) {
    out.segment(k, b.length).setConstant(b.mean);
    k += b.length;
  }
  return out;
}

// ---------------------------------------------------------------------------
// MetricSpace
// ---------------------------------------------------------------------------

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Sphere: return "sphere";
    case SpaceKind::Wasserstein1D: return "wasserstein";
    case SpaceKind::Euclidean1D: return "euclidean";
  }
  return "unknown";
}

MetricSpace MetricSpace::sphere() { return MetricSpace(SpaceKind::Sphere, nullptr, nullptr); }

MetricSpace MetricSpace::euclidean() { return MetricSpace(SpaceKind::Euclidean1D, nullptr, nullptr); }

MetricSpace MetricSpace::wasserstein(ProbabilityGrid grid) {
  if (!grid) throw InputError("MetricSpace::wasserstein: missing grid");
  auto quad = std::make_shared<const Eigen::VectorXd>(trapezoid_weights(*grid));
  return MetricSpace(SpaceKind::Wasserstein1D, std::move(grid), std::move(quad));
}

Eigen::Index MetricSpace::dimension() const noexcept {
  switch (kind_) {
    case SpaceKind::Sphere: return 3;
    case SpaceKind::Wasserstein1D: return grid_->size();
    case SpaceKind::Euclidean1D: return 1;
  }
  return 0;
}

bool MetricSpace::same_as(const MetricSpace& other) const {
  if (kind_ != other.kind_) return false;
  return kind_ != SpaceKind::Wasserstein1D || same_grid(grid_, other.grid_);
}

double MetricSpace::squared_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                                     const Eigen::Ref<const Eigen::VectorXd>& b) const {
  switch (kind_) {
    case SpaceKind::Sphere: {
      const double d = sphere::angle(a.head<3>(), b.head<3>());
      return d * d;
    }
    case SpaceKind::Wasserstein1D:
      return quadrature_->dot((a - b).cwiseAbs2());
    case SpaceKind::Euclidean1D: {
      const double d = a[0] - b[0];
      return d * d;
    }
  }
  return 0.0;
}

double MetricSpace::distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                             const Eigen::Ref<const Eigen::VectorXd>& b) const {
  if (kind_ == SpaceKind::Sphere) return sphere::angle(a.head<3>(), b.head<3>());
  return std::sqrt(squared_distance(a, b));
}

void MetricSpace::validate(const Eigen::Ref<const Eigen::VectorXd>& point) const {
  if (point.size() != dimension()) {
    throw InputError(std::string("point has wrong dimension for ") + to_string(kind_) + " responses");
  }
  if (!point.allFinite()) throw InputError("point has non-finite entries");
  if (kind_ == SpaceKind::Sphere) {
    require_unit(point.head<3>(), "sphere response");
  } else if (kind_ == SpaceKind::Wasserstein1D) {
    for (Eigen::Index k = 1; k < point.size(); ++k) {
      if (point[k] < point[k - 1]) throw InputError("quantile values must be nondecreasing");
    }
  }
}

double MetricSpace::weighted_objective(const Eigen::MatrixXd& responses, const Eigen::VectorXd& weights,
                                       const Eigen::Ref<const Eigen::VectorXd>& point) const {
  double f = 0.0;
  for (Eigen::Index i = 0; i < responses.cols(); ++i) {
    if (weights[i] != 0.0) f += weights[i] * squared_distance(responses.col(i), point);
  }
  return f;
}

FittedObject MetricSpace::weighted_frechet_mean(const Eigen::MatrixXd& responses,
                                                const Eigen::VectorXd& weights,
                                                const std::optional<Eigen::Vector3d>& warm_start,
                                                const SphereSolverOptions& options) const {
  if (responses.cols() == 0) throw InputError("weighted_frechet_mean: no responses");
  if (responses.rows() != dimension()) throw InputError("weighted_frechet_mean: response dimension mismatch");
  if (weights.size() != responses.cols()) throw InputError("weighted_frechet_mean: weight count mismatch");
  if (!weights.allFinite()) throw InputError("weighted_frechet_mean: non-finite weights");

  if (kind_ == SpaceKind::Sphere) {
    Eigen::Vector3d init;
    if (warm_start) {
      init = warm_start->normalized();
    } else if (auto proj = extrinsic_mean_projection(responses, weights)) {
      init = *proj;
    } else if (auto eq = extrinsic_mean_projection(responses, Eigen::VectorXd::Ones(responses.cols()))) {
      init = *eq;
    } else {
      init = responses.col(0);
    }
    return sphere_frechet_mean(responses, weights, init, options);
  }

  const double total = weights.sum();
  if (!(total > 1e-14 * weights.cwiseAbs().sum())) {
    throw InputError("weighted_frechet_mean: weights must have a positive sum");
  }
  FittedObject out;
  Eigen::VectorXd avg = responses * weights / total;
  if (kind_ == SpaceKind::Wasserstein1D) avg = isotonic_projection(avg, *quadrature_);
  out.point = std::move(avg);
  out.criterion_value = weighted_objective(responses, weights, out.point);
  return out;
}

}  // namespace fsi
