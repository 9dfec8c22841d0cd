#include "fsi/index_param.hpp"

#include "fsi/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace fsi {

Eigen::VectorXd angles_to_unit_vector(const Eigen::VectorXd& eta) {
  const Eigen::Index p = eta.size() + 1;
  Eigen::VectorXd theta(p);
  // Build from the last coordinate backwards; `tail` is prod_{j>=k} cos(eta_j).
  double tail = 1.0;
  for (Eigen::Index k = p - 1; k >= 1; --k) {
    theta[k] = std::sin(eta[k - 1]) * tail;
    tail *= std::cos(eta[k - 1]);
  }
  theta[0] = tail;
  return theta;
}

Eigen::VectorXd polar_to_theta(const Eigen::VectorXd& eta) {
  constexpr double half_pi = std::numbers::pi / 2;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    if (!(std::abs(eta[j]) <= half_pi)) throw InputError("polar_to_theta: angle outside [-pi/2, pi/2]");
  }
  return angles_to_unit_vector(eta);
}

Eigen::VectorXd theta_to_polar(const Eigen::VectorXd& theta) {
  const Eigen::Index p = theta.size();
  if (p < 1) throw InputError("theta_to_polar: empty vector");
  Eigen::VectorXd eta(p - 1);
  // eta_{k-1} = atan2(theta_k, |theta_{1..k-1}|)
  double head_sq = theta[0] * theta[0];
  for (Eigen::Index k = 1; k < p; ++k) {
    eta[k - 1] = std::atan2(theta[k], std::sqrt(head_sq));
    head_sq += theta[k] * theta[k];
  }
  return eta;
}

IndexParam normalize_identifiable(const Eigen::VectorXd& v) { return IndexParam::from_vector(v); }

IndexParam IndexParam::from_vector(const Eigen::VectorXd& v) {
  if (v.size() == 0 || !v.allFinite()) throw InputError("normalize_identifiable: empty or non-finite vector");
  const double norm = v.norm();
  if (!(norm > 0.0)) throw InputError("normalize_identifiable: zero vector");
  // Already-unit vectors are left untouched so that normalization is idempotent.
  Eigen::VectorXd theta = std::abs(norm - 1.0) <= 4 * std::numeric_limits<double>::epsilon() ? v : Eigen::VectorXd(v / norm);
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (theta[j] != 0.0) {
      if (theta[j] < 0.0) theta = -theta;
      break;
    }
  }
  Eigen::VectorXd eta = theta_to_polar(theta);
  return IndexParam(std::move(theta), std::move(eta));
}

IndexParam IndexParam::from_angles(const Eigen::VectorXd& eta) {
  Eigen::VectorXd theta = polar_to_theta(eta);
  if (theta[0] > 0.0) return IndexParam(std::move(theta), eta);
  // theta_1 = 0 on the boundary; fall back to the sign rule.
  return from_vector(theta);
}

}  // namespace fsi
