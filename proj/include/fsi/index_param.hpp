#pragma once

#include <Eigen/Dense>

namespace fsi {

/// Index coefficient theta in Theta_p: unit norm, first nonzero entry positive.
/// Carries its hyperspherical angles alongside.
class IndexParam {
 public:
  /// Builds from angles in [-pi/2, pi/2]^(p-1).
  static IndexParam from_angles(const Eigen::VectorXd& eta);
  /// Equivalent to normalize_identifiable(v).
  static IndexParam from_vector(const Eigen::VectorXd& v);
  /// The single element of Theta_1.
  static IndexParam scalar() { return from_vector(Eigen::VectorXd::Ones(1)); }

  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  const Eigen::VectorXd& eta() const noexcept { return eta_; }
  Eigen::Index dimension() const noexcept { return theta_.size(); }

  /// theta' x
  double project(const Eigen::Ref<const Eigen::VectorXd>& x) const { return theta_.dot(x); }

 private:
  IndexParam(Eigen::VectorXd theta, Eigen::VectorXd eta) : theta_(std::move(theta)), eta_(std::move(eta)) {}
  Eigen::VectorXd theta_;
  Eigen::VectorXd eta_;
};

/// Hyperspherical map with theta_1 = prod_j cos(eta_j),
/// theta_k = sin(eta_{k-1}) prod_{j>=k} cos(eta_j), theta_p = sin(eta_{p-1}).
/// Angles must lie in [-pi/2, pi/2].
Eigen::VectorXd polar_to_theta(const Eigen::VectorXd& eta);

/// Same map without the range check; angles outside the range produce unit
/// vectors with a possibly negative first entry.
Eigen::VectorXd angles_to_unit_vector(const Eigen::VectorXd& eta);

/// Inverse of polar_to_theta for unit vectors with theta_1 >= 0.
Eigen::VectorXd theta_to_polar(const Eigen::VectorXd& theta);

/// v / |v|, sign-flipped so that the first nonzero entry is positive.
IndexParam normalize_identifiable(const Eigen::VectorXd& v);

}  // namespace fsi
