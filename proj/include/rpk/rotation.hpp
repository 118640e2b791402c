// Rotation axis and its skew-symmetric generator.
//
// The generator matrix is laid out so that r_matrix() * y == -cross(y) for
// every y; both routes are kept and cross-checked in tests rather than
// collapsing them into one another.
#pragma once

#include <cmath>
#include <stdexcept>

#include "rpk/linalg.hpp"

namespace rpk {

class RotationAxis {
 public:
  RotationAxis() : omega_(Eigen::Vector3d::Zero()) {}

  explicit RotationAxis(const Eigen::Vector3d& omega) : omega_(omega) {
    if (!omega.allFinite()) throw std::invalid_argument("rotation axis must be finite");
  }

  /// Planar rotation about the third axis, the d = 2 configuration.
  static RotationAxis planar(double w) { return RotationAxis(Eigen::Vector3d(0.0, 0.0, w)); }

  const Eigen::Vector3d& omega() const { return omega_; }
  bool is_zero() const { return omega_.isZero(0.0); }
  double planar_rate() const {
    require_planar();
    return omega_[2];
  }

  /// Full 3x3 generator: rows [0, w3, -w2; -w3, 0, w1; w2, -w1, 0].
  Eigen::Matrix3d r_matrix() const {
    Eigen::Matrix3d r;
    r << 0.0, omega_[2], -omega_[1],  //
        -omega_[2], 0.0, omega_[0],   //
        omega_[1], -omega_[0], 0.0;
    return r;
  }

  /// D x D generator block. For D = 2 the axis must be planar; the block is
  /// the upper-left corner of r_matrix().
  template <int D>
  RMat<D> generator() const {
    if constexpr (D == 3) {
      return r_matrix();
    } else {
      static_assert(D == 2, "only d = 2 and d = 3 are supported");
      require_planar();
      RMat<2> r;
      r << 0.0, omega_[2], -omega_[2], 0.0;
      return r;
    }
  }

  /// omega x v (for D = 2: planar axis acting on an in-plane vector).
  template <int D>
  RVec<D> cross(const RVec<D>& v) const {
    if constexpr (D == 3) {
      return omega_.cross(v);
    } else {
      static_assert(D == 2, "only d = 2 and d = 3 are supported");
      require_planar();
      return RVec<2>(-omega_[2] * v[1], omega_[2] * v[0]);
    }
  }

  /// exp(t * generator). Rodrigues for D = 3, closed form for D = 2.
  template <int D>
  RMat<D> frame_rotation(double t) const {
    if constexpr (D == 2) {
      require_planar();
      const double a = omega_[2] * t;
      RMat<2> m;
      m << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
      return m;
    } else {
      static_assert(D == 3, "only d = 2 and d = 3 are supported");
      const double w = omega_.norm();
      if (w == 0.0) return RMat<3>::Identity();
      // generator = |w| * K with K the unit skew matrix of axis -omega.
      const Eigen::Matrix3d k = r_matrix() / w;
      const double a = w * t;
      return Eigen::Matrix3d::Identity() + std::sin(a) * k + (1.0 - std::cos(a)) * (k * k);
    }
  }

 private:
  void require_planar() const {
    if (omega_[0] != 0.0 || omega_[1] != 0.0)
      throw std::invalid_argument("d = 2 requires rotation axis (0, 0, w)");
  }

  Eigen::Vector3d omega_;
};

}  // namespace rpk
