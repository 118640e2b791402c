// External potentials: smooth confining potentials with bounded Hessian,
// analytic derivatives, and the rescaled effective potential seen by a
// wave-packet amplitude.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "rpk/linalg.hpp"

namespace rpk {

/// A smooth sub-quadratic potential with analytic value/gradient/Hessian.
///
/// hessian_bound is a finite sup-norm bound on the Hessian (operator norm),
/// third_derivative_bound a sup bound on |D^3 V[u,u,u]| over unit u. Only
/// these two orders are tracked; they are what the error estimates use.
template <int D>
struct PotentialModel {
  std::string name;
  std::function<double(const RVec<D>&)> value;
  std::function<RVec<D>(const RVec<D>&)> gradient;
  std::function<RMat<D>(const RVec<D>&)> hessian;
  double hessian_bound = 0.0;
  double third_derivative_bound = 0.0;
};

template <int D>
PotentialModel<D> zero_potential() {
  PotentialModel<D> v;
  v.name = "zero";
  v.value = [](const RVec<D>&) { return 0.0; };
  v.gradient = [](const RVec<D>&) { return RVec<D>::Zero().eval(); };
  v.hessian = [](const RVec<D>&) { return RMat<D>::Zero().eval(); };
  v.hessian_bound = 0.0;
  v.third_derivative_bound = 0.0;
  return v;
}

/// V(x) = |x|^2 / 2.
template <int D>
PotentialModel<D> harmonic_isotropic() {
  PotentialModel<D> v;
  v.name = "harmonic_isotropic";
  v.value = [](const RVec<D>& x) { return 0.5 * x.squaredNorm(); };
  v.gradient = [](const RVec<D>& x) { return x.eval(); };
  v.hessian = [](const RVec<D>&) { return RMat<D>::Identity().eval(); };
  v.hessian_bound = 1.0;
  v.third_derivative_bound = 0.0;
  return v;
}

/// V(x) = sum_j gamma_j x_j^2. gamma_j = 1/2 recovers the isotropic case.
template <int D>
PotentialModel<D> harmonic_anisotropic(const RVec<D>& gammas) {
  if ((gammas.array() <= 0.0).any())
    throw std::invalid_argument("harmonic_anisotropic: coefficients must be positive");
  PotentialModel<D> v;
  v.name = "harmonic_anisotropic";
  v.value = [gammas](const RVec<D>& x) { return (gammas.array() * x.array().square()).sum(); };
  v.gradient = [gammas](const RVec<D>& x) { return (2.0 * gammas.array() * x.array()).matrix().eval(); };
  v.hessian = [gammas](const RVec<D>&) { return (2.0 * gammas).asDiagonal().toDenseMatrix().eval(); };
  v.hessian_bound = 2.0 * gammas.maxCoeff();
  v.third_derivative_bound = 0.0;
  return v;
}

/// V(x) = |x|^2 / 2 + a cos(k . x): bounded-Hessian but genuinely
/// non-quadratic, with sup |D^3 V| = |a| |k|^3.
template <int D>
PotentialModel<D> harmonic_plus_cosine(double a, const RVec<D>& k) {
  if (!std::isfinite(a) || !k.allFinite())
    throw std::invalid_argument("harmonic_plus_cosine: parameters must be finite");
  PotentialModel<D> v;
  v.name = "harmonic_plus_cosine";
  v.value = [a, k](const RVec<D>& x) { return 0.5 * x.squaredNorm() + a * std::cos(k.dot(x)); };
  v.gradient = [a, k](const RVec<D>& x) { return (x - a * std::sin(k.dot(x)) * k).eval(); };
  v.hessian = [a, k](const RVec<D>& x) {
    return (RMat<D>::Identity() - a * std::cos(k.dot(x)) * (k * k.transpose())).eval();
  };
  const double kn = k.norm();
  v.hessian_bound = 1.0 + std::abs(a) * kn * kn;
  v.third_derivative_bound = std::abs(a) * kn * kn * kn;
  return v;
}

/// Rescaled potential (V(q + sqrt(eps) y) - V(q) - sqrt(eps) y . grad V(q)) / eps.
/// For quadratic V this equals y . hessian(q) y / 2 identically.
template <int D>
double effective_potential(const PotentialModel<D>& v, const RVec<D>& q, double eps,
                           const RVec<D>& y) {
  if (!(eps > 0.0)) throw std::invalid_argument("effective_potential: eps must be positive");
  const double s = std::sqrt(eps);
  return (v.value(q + s * y) - v.value(q) - s * y.dot(v.gradient(q))) / eps;
}

/// Deviation of the effective potential from its Hessian quadratic form.
/// Bounded by third_derivative_bound / 6 * sqrt(eps) * |y|^3.
template <int D>
double taylor_remainder(const PotentialModel<D>& v, const RVec<D>& q, double eps,
                        const RVec<D>& y) {
  return effective_potential(v, q, eps, y) - 0.5 * y.dot(v.hessian(q) * y);
}

}  // namespace rpk
