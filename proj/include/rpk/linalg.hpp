// Small fixed-size linear-algebra aliases and helpers shared across the library.
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace rpk {

using cplx = std::complex<double>;

template <int D>
using RVec = Eigen::Matrix<double, D, 1>;
template <int D>
using RMat = Eigen::Matrix<double, D, D>;
template <int D>
using CVec = Eigen::Matrix<cplx, D, 1>;
template <int D>
using CMat = Eigen::Matrix<cplx, D, D>;

constexpr cplx I_UNIT{0.0, 1.0};

/// Spectral (operator 2-) norm of a real symmetric matrix.
template <int D>
double sym_operator_norm(const RMat<D>& m) {
  Eigen::SelfAdjointEigenSolver<RMat<D>> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Smallest singular value, used for invertibility diagnostics.
template <int D>
double min_singular_value(const CMat<D>& m) {
  Eigen::JacobiSVD<CMat<D>> svd(m);
  return svd.singularValues().minCoeff();
}

/// Smallest eigenvalue of the Hermitian part of m.
template <int D>
double min_hermitian_eigenvalue(const CMat<D>& m) {
  CMat<D> h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat<D>> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <int D>
bool all_finite(const RVec<D>& v) {
  return v.allFinite();
}

}  // namespace rpk
