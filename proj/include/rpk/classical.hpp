// Classical rotating-frame Hamiltonian flow: trajectories of
//   qdot = p + omega x q,   pdot = -grad V(q) + omega x p,
// together with the action S (time integral of |p|^2/2 - V(q)) and the
// conserved energies used as integrator diagnostics.
#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpk/io.hpp"
#include "rpk/linalg.hpp"
#include "rpk/potential.hpp"
#include "rpk/rk4.hpp"
#include "rpk/rotation.hpp"

namespace rpk {

template <int D>
struct ClassicalState {
  double t = 0.0;
  RVec<D> q = RVec<D>::Zero();
  RVec<D> p = RVec<D>::Zero();
  double S = 0.0;
};

/// The (q, p, S) triple as a plain vector-space element for RK4.
template <int D>
struct PhasePoint {
  RVec<D> q = RVec<D>::Zero();
  RVec<D> p = RVec<D>::Zero();
  double S = 0.0;

  PhasePoint operator+(const PhasePoint& o) const { return {q + o.q, p + o.p, S + o.S}; }
  friend PhasePoint operator*(double a, const PhasePoint& x) { return {a * x.q, a * x.p, a * x.S}; }
};

/// Right-hand side of the augmented flow: (p + omega x q, -grad V + omega x p,
/// |p|^2/2 - V(q)).
template <int D>
PhasePoint<D> flow_rhs(const ClassicalState<D>& state, const PotentialModel<D>& v,
                       const RotationAxis& omega) {
  PhasePoint<D> d;
  d.q = state.p + omega.cross<D>(state.q);
  d.p = -v.gradient(state.q) + omega.cross<D>(state.p);
  d.S = 0.5 * state.p.squaredNorm() - v.value(state.q);
  return d;
}

/// H(q, p) = |p|^2/2 + V(q) + omega . (q x p).
template <int D>
double energy(const ClassicalState<D>& state, const PotentialModel<D>& v,
              const RotationAxis& omega) {
  double coupling;
  if constexpr (D == 3) {
    coupling = omega.omega().dot(state.q.cross(state.p));
  } else {
    coupling = omega.planar_rate() * (state.q[0] * state.p[1] - state.q[1] * state.p[0]);
  }
  return 0.5 * state.p.squaredNorm() + v.value(state.q) + coupling;
}

/// |qdot|^2/2 - |omega x q|^2/2 + V(q) with qdot = p + omega x q; agrees with
/// energy() pointwise and is constant along trajectories.
template <int D>
double rotating_energy(const ClassicalState<D>& state, const PotentialModel<D>& v,
                       const RotationAxis& omega) {
  const RVec<D> qdot = state.p + omega.cross<D>(state.q);
  const RVec<D> wq = omega.cross<D>(state.q);
  return 0.5 * qdot.squaredNorm() - 0.5 * wq.squaredNorm() + v.value(state.q);
}

/// pi = p + omega x q; (q, pi) satisfies qdot = pi,
/// pidot = -grad V + 2 omega x pi - omega x (omega x q).
template <int D>
RVec<D> canonical_momentum(const ClassicalState<D>& state, const RotationAxis& omega) {
  return state.p + omega.cross<D>(state.q);
}

template <int D>
struct Trajectory {
  double dt = 0.0;
  std::vector<ClassicalState<D>> states;
  std::vector<RMat<D>> hessians;  // grad^2 V(q(t_n)) at each node
  PotentialModel<D> potential;
  RotationAxis omega;

  std::size_t size() const { return states.size(); }
  double final_time() const { return states.empty() ? 0.0 : states.back().t; }

  /// Hessian path linearly interpolated between stored nodes.
  RMat<D> hessian_at(double t) const {
    if (states.size() < 2) return hessians.at(0);
    const double t0 = states.front().t;
    double u = (t - t0) / dt;
    if (u <= 0.0) return hessians.front();
    if (u >= double(states.size() - 1)) return hessians.back();
    const auto i = static_cast<std::size_t>(u);
    const double w = u - double(i);
    return ((1.0 - w) * hessians[i] + w * hessians[i + 1]).eval();
  }

  double max_position_norm() const {
    double m = 0.0;
    for (const auto& s : states) m = std::max(m, s.q.template lpNorm<Eigen::Infinity>());
    return m;
  }
};

/// Fixed-step RK4 on the augmented (q, p, S) system. T/dt is rounded to the
/// nearest step count (with a warning if it is not integral). Aborts on
/// non-finite states or when |q| exceeds the overflow guard.
template <int D>
Trajectory<D> integrate_trajectory(const RVec<D>& q0, const RVec<D>& p0,
                                   const PotentialModel<D>& v, const RotationAxis& omega,
                                   double T, double dt, double overflow_guard = 1e6) {
  if (!(dt > 0.0) || !(T > 0.0))
    throw std::invalid_argument("integrate_trajectory: T and dt must be positive");
  const double raw = T / dt;
  const auto steps = static_cast<std::size_t>(std::llround(raw));
  if (std::abs(raw - double(steps)) > 1e-9 * std::max(1.0, raw))
    std::cerr << "[W] integrate_trajectory: T/dt = " << raw << " not integral, using " << steps
              << " steps\n";
  if (steps == 0) throw std::invalid_argument("integrate_trajectory: T < dt/2");

  Trajectory<D> traj;
  traj.dt = dt;
  traj.potential = v;
  traj.omega = omega;
  traj.states.reserve(steps + 1);
  traj.hessians.reserve(steps + 1);

  ClassicalState<D> s{0.0, q0, p0, 0.0};
  auto rhs = [&](double, const PhasePoint<D>& y) {
    ClassicalState<D> tmp{0.0, y.q, y.p, y.S};
    return flow_rhs(tmp, v, omega);
  };

  for (std::size_t n = 0;; ++n) {
    if (!all_finite<D>(s.q) || !all_finite<D>(s.p) || !std::isfinite(s.S))
      throw std::runtime_error("integrate_trajectory: non-finite state at t = " +
                               std::to_string(s.t));
    if (s.q.template lpNorm<Eigen::Infinity>() > overflow_guard)
      throw std::runtime_error("integrate_trajectory: |q| exceeded overflow guard at t = " +
                               std::to_string(s.t));
    traj.states.push_back(s);
    traj.hessians.push_back(v.hessian(s.q));
    if (n == steps) break;
    PhasePoint<D> y{s.q, s.p, s.S};
    y = rk4_step(rhs, s.t, y, dt);
    s = ClassicalState<D>{double(n + 1) * dt, y.q, y.p, y.S};
  }
  return traj;
}

/// CSV export: t, q..., p..., S, H, H_rot.
template <int D>
void write_trajectory_csv(const Trajectory<D>& traj, const std::filesystem::path& path) {
  std::vector<std::string> cols{"t"};
  for (int i = 0; i < D; ++i) cols.push_back("q" + std::to_string(i + 1));
  for (int i = 0; i < D; ++i) cols.push_back("p" + std::to_string(i + 1));
  cols.insert(cols.end(), {"S", "H", "H_rot"});
  CsvWriter csv(path, cols);
  for (const auto& s : traj.states) {
    std::vector<double> row{s.t};
    for (int i = 0; i < D; ++i) row.push_back(s.q[i]);
    for (int i = 0; i < D; ++i) row.push_back(s.p[i]);
    row.push_back(s.S);
    row.push_back(energy(s, traj.potential, traj.omega));
    row.push_back(rotating_energy(s, traj.potential, traj.omega));
    csv.row(row);
  }
}

}  // namespace rpk
