// Gaussian wave-packet parameter matrices (A, B) and their propagation along
// a classical trajectory:
//   Adot = i B - [R, A],   Bdot = i Q_V(t) A - [R, B],
// with R the rotation generator and Q_V the Hessian of the potential at q(t).
// The structural conditions on (A, B) — invertibility, complex-symmetric
// B A^-1, F = A*B + B*A = 2I, G = A^T B - B^T A = 0, Re(B A^-1) = (A A*)^-1
// positive definite — are monitored as residuals at every step.
#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpk/classical.hpp"
#include "rpk/io.hpp"
#include "rpk/linalg.hpp"
#include "rpk/potential.hpp"
#include "rpk/rk4.hpp"
#include "rpk/rotation.hpp"

namespace rpk {

template <int D>
struct PacketMatrices {
  CMat<D> A = CMat<D>::Identity();
  CMat<D> B = CMat<D>::Identity();
  cplx sqrt_det_A{1.0, 0.0};  // continuously tracked branch of (det A)^(1/2)

  CMat<D> width() const { return B * A.inverse(); }           // B A^-1
  RMat<D> m1() const { return width().real(); }               // Re B A^-1
  RMat<D> m2() const { return width().imag(); }               // Im B A^-1
};

/// Residuals of the structural conditions (Frobenius norms, absolute).
struct MatrixResiduals {
  double symmetry = 0.0;      // ||BA^-1 - (BA^-1)^T||
  double f_invariant = 0.0;   // ||A*B + B*A - 2I||
  double g_invariant = 0.0;   // ||A^T B - B^T A||
  double re_identity = 0.0;   // ||Re(BA^-1) - (AA*)^-1||
  double sqrt_det = 0.0;      // |sqrt_det_A^2 - det A| / |det A|
  double min_singular = 0.0;  // min over A, B of smallest singular value
  double min_real_eig = 0.0;  // smallest eigenvalue of Re(BA^-1)

  double max_residual() const {
    double m = symmetry;
    m = std::max(m, f_invariant);
    m = std::max(m, g_invariant);
    m = std::max(m, re_identity);
    m = std::max(m, sqrt_det);
    return m;
  }
};

template <int D>
MatrixResiduals residuals(const PacketMatrices<D>& m) {
  MatrixResiduals r;
  const CMat<D> w = m.width();
  r.symmetry = (w - w.transpose()).norm();
  r.f_invariant = (m.A.adjoint() * m.B + m.B.adjoint() * m.A - 2.0 * CMat<D>::Identity()).norm();
  r.g_invariant = (m.A.transpose() * m.B - m.B.transpose() * m.A).norm();
  r.re_identity = (w.real() - (m.A * m.A.adjoint()).real().inverse()).norm();
  const cplx det = m.A.determinant();
  r.sqrt_det = std::abs(m.sqrt_det_A * m.sqrt_det_A - det) / std::max(1e-300, std::abs(det));
  r.min_singular = std::min(min_singular_value<D>(m.A), min_singular_value<D>(m.B));
  r.min_real_eig = min_hermitian_eigenvalue<D>(w.real().template cast<cplx>().eval());
  return r;
}

/// Validating factory: checks every structural condition and names the first
/// one that fails. The square-root branch is initialised to the principal
/// branch of det A (a global +-1 phase ambiguity at t = 0 is unavoidable;
/// it is physically irrelevant).
template <int D>
PacketMatrices<D> make_packet_matrices(const CMat<D>& a, const CMat<D>& b, double tol = 1e-8) {
  PacketMatrices<D> m;
  m.A = a;
  m.B = b;
  if (min_singular_value<D>(a) <= 1e-10) throw std::invalid_argument("packet matrices: A is not invertible");
  if (min_singular_value<D>(b) <= 1e-10) throw std::invalid_argument("packet matrices: B is not invertible");
  m.sqrt_det_A = std::sqrt(a.determinant());
  const MatrixResiduals r = residuals(m);
  if (r.symmetry > tol) throw std::invalid_argument("packet matrices: B A^-1 is not symmetric");
  if (r.f_invariant > tol) throw std::invalid_argument("packet matrices: A*B + B*A != 2I");
  if (r.g_invariant > tol) throw std::invalid_argument("packet matrices: A^T B != B^T A");
  if (r.re_identity > tol) throw std::invalid_argument("packet matrices: Re(B A^-1) != (A A*)^-1");
  if (r.min_real_eig <= 0.0)
    throw std::invalid_argument("packet matrices: Re(B A^-1) is not positive definite");
  return m;
}

template <int D>
PacketMatrices<D> identity_matrices() {
  return make_packet_matrices<D>(CMat<D>::Identity(), CMat<D>::Identity());
}

/// A0 = diag(d), B0 = diag(d)^-1 with d real positive.
template <int D>
PacketMatrices<D> diag_width_matrices(const RVec<D>& d) {
  if ((d.array() <= 0.0).any())
    throw std::invalid_argument("diag_width: diagonal entries must be positive");
  CMat<D> a = CMat<D>::Zero(), b = CMat<D>::Zero();
  for (int i = 0; i < D; ++i) {
    a(i, i) = d[i];
    b(i, i) = 1.0 / d[i];
  }
  return make_packet_matrices<D>(a, b);
}

/// A0 = I, B0 = I + iC with C real symmetric.
template <int D>
PacketMatrices<D> perturbed_matrices(const RMat<D>& c) {
  if ((c - c.transpose()).norm() > 1e-12 * std::max(1.0, c.norm()))
    throw std::invalid_argument("perturbed: C must be real symmetric");
  const CMat<D> b = CMat<D>::Identity() + I_UNIT * c.template cast<cplx>();
  return make_packet_matrices<D>(CMat<D>::Identity(), b);
}

/// Right-hand sides (Adot, Bdot) for symmetric Q and generator R.
template <int D>
std::pair<CMat<D>, CMat<D>> matrix_rhs(const CMat<D>& a, const CMat<D>& b, const RMat<D>& q,
                                       const RMat<D>& r) {
  const CMat<D> rc = r.template cast<cplx>();
  const CMat<D> adot = I_UNIT * b - (rc * a - a * rc);
  const CMat<D> bdot = I_UNIT * (q.template cast<cplx>() * a) - (rc * b - b * rc);
  return {adot, bdot};
}

/// Augmented state (q, p, S, A, B) for joint RK4 integration; the Hessian is
/// re-evaluated from the potential at every RK4 stage position of q.
template <int D>
struct PacketState {
  RVec<D> q = RVec<D>::Zero();
  RVec<D> p = RVec<D>::Zero();
  double S = 0.0;
  CMat<D> A = CMat<D>::Zero();
  CMat<D> B = CMat<D>::Zero();

  PacketState operator+(const PacketState& o) const {
    return {q + o.q, p + o.p, S + o.S, A + o.A, B + o.B};
  }
  friend PacketState operator*(double c, const PacketState& x) {
    return {c * x.q, c * x.p, c * x.S, c * x.A, c * x.B};
  }
};

struct PropagationOptions {
  double warn_tol = 1e-8;
  double abort_tol = 1e-6;
};

template <int D>
struct PacketPath {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<PacketMatrices<D>> matrices;
  std::vector<MatrixResiduals> residuals;

  MatrixResiduals max_residuals() const {
    MatrixResiduals m;
    m.min_singular = 1e300;
    m.min_real_eig = 1e300;
    for (const auto& r : residuals) {
      m.symmetry = std::max(m.symmetry, r.symmetry);
      m.f_invariant = std::max(m.f_invariant, r.f_invariant);
      m.g_invariant = std::max(m.g_invariant, r.g_invariant);
      m.re_identity = std::max(m.re_identity, r.re_identity);
      m.sqrt_det = std::max(m.sqrt_det, r.sqrt_det);
      m.min_singular = std::min(m.min_singular, r.min_singular);
      m.min_real_eig = std::min(m.min_real_eig, r.min_real_eig);
    }
    return m;
  }
};

/// Propagate (A, B) along a stored trajectory by co-integrating the full
/// (q, p, S, A, B) system with RK4. The (q, p) stages repeat the arithmetic
/// of the trajectory integrator, so stage Hessians are evaluated at exactly
/// the positions the trajectory saw. Aborts when any structural residual
/// exceeds abort_tol.
template <int D>
PacketPath<D> propagate_matrices(const PacketMatrices<D>& m0, const Trajectory<D>& traj,
                                 PropagationOptions opts = {}) {
  if (traj.states.empty()) throw std::invalid_argument("propagate_matrices: empty trajectory");
  const PotentialModel<D>& v = traj.potential;
  const RotationAxis& omega = traj.omega;
  const RMat<D> r = omega.generator<D>();

  auto rhs = [&](double, const PacketState<D>& y) {
    PacketState<D> d;
    d.q = y.p + omega.cross<D>(y.q);
    d.p = -v.gradient(y.q) + omega.cross<D>(y.p);
    d.S = 0.5 * y.p.squaredNorm() - v.value(y.q);
    auto [adot, bdot] = matrix_rhs<D>(y.A, y.B, v.hessian(y.q), r);
    d.A = adot;
    d.B = bdot;
    return d;
  };

  PacketPath<D> path;
  path.dt = traj.dt;
  path.times.reserve(traj.size());
  path.matrices.reserve(traj.size());
  path.residuals.reserve(traj.size());

  PacketMatrices<D> m = m0;
  bool warned = false;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& node = traj.states[n];
    const MatrixResiduals res = residuals(m);
    if (res.max_residual() > opts.abort_tol)
      throw std::runtime_error("propagate_matrices: invariant residual " +
                               std::to_string(res.max_residual()) + " exceeds abort tolerance at t = " +
                               std::to_string(node.t));
    if (!warned && (res.max_residual() > opts.warn_tol || res.min_singular < 1e-10)) {
      std::cerr << "[W] propagate_matrices: residual " << res.max_residual() << " at t = " << node.t
                << "\n";
      warned = true;
    }
    path.times.push_back(node.t);
    path.matrices.push_back(m);
    path.residuals.push_back(res);
    if (n + 1 == traj.size()) break;

    PacketState<D> y{node.q, node.p, node.S, m.A, m.B};
    y = rk4_step(rhs, node.t, y, traj.dt);
    m.A = y.A;
    m.B = y.B;
    // Branch tracking: pick the square root of det A closest to the previous
    // value. Step sizes keep |delta det A| small enough for this to be
    // unambiguous.
    const cplx det = m.A.determinant();
    cplx root = std::sqrt(det);
    if (std::abs(root - m.sqrt_det_A) > std::abs(-root - m.sqrt_det_A)) root = -root;
    m.sqrt_det_A = root;
  }
  return path;
}

/// Gaussian amplitude v(y) = (det A)^(-1/2) exp(-y . (B A^-1) y / 2) with the
/// tracked branch of the square root.
template <int D>
cplx gaussian_eval(const PacketMatrices<D>& m, const RVec<D>& y) {
  const CMat<D> w = m.width();
  const CVec<D> yc = y.template cast<cplx>();
  const cplx quad = yc.dot(w * yc);  // y^T (BA^-1) y for real y
  return std::exp(-0.5 * quad) / m.sqrt_det_A;
}

/// Conjugated matrices exp(tR) A exp(-tR), exp(tR) B exp(-tR). For potentials
/// symmetric about the rotation axis these satisfy the rotation-free system
/// Adot = iB, Bdot = i Q_V A.
template <int D>
std::vector<std::pair<CMat<D>, CMat<D>>> conjugate_frame(const PacketPath<D>& path,
                                                         const RotationAxis& omega) {
  std::vector<std::pair<CMat<D>, CMat<D>>> out;
  out.reserve(path.matrices.size());
  for (std::size_t n = 0; n < path.matrices.size(); ++n) {
    const RMat<D> e = omega.frame_rotation<D>(path.times[n]);
    const RMat<D> einv = omega.frame_rotation<D>(-path.times[n]);
    const CMat<D> ec = e.template cast<cplx>(), ei = einv.template cast<cplx>();
    out.emplace_back(ec * path.matrices[n].A * ei, ec * path.matrices[n].B * ei);
  }
  return out;
}

/// CSV export: t, Re/Im of A and B entries (row-major), residuals, sqrt_det_A.
template <int D>
void write_matrices_csv(const PacketPath<D>& path, const std::filesystem::path& file) {
  std::vector<std::string> cols{"t"};
  for (const char* mat : {"A", "B"})
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        const std::string e = std::string(mat) + std::to_string(i + 1) + std::to_string(j + 1);
        cols.push_back("re_" + e);
        cols.push_back("im_" + e);
      }
  cols.insert(cols.end(), {"res_symmetry", "res_F", "res_G", "res_Re", "res_sqrt_det",
                           "min_singular", "min_real_eig", "re_sqrt_det_A", "im_sqrt_det_A"});
  CsvWriter csv(file, cols);
  for (std::size_t n = 0; n < path.matrices.size(); ++n) {
    const auto& m = path.matrices[n];
    const auto& r = path.residuals[n];
    std::vector<double> row{path.times[n]};
    for (const CMat<D>* mat : {&m.A, &m.B})
      for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) {
          row.push_back((*mat)(i, j).real());
          row.push_back((*mat)(i, j).imag());
        }
    row.insert(row.end(), {r.symmetry, r.f_invariant, r.g_invariant, r.re_identity, r.sqrt_det,
                           r.min_singular, r.min_real_eig, m.sqrt_det_A.real(), m.sqrt_det_A.imag()});
    csv.row(row);
  }
}

}  // namespace rpk
