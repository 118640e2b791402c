// Wave-packet assembly: the unitary change of variables between an amplitude
// v on the y-grid and the physical-scale wave function
//   psi(x) = eps^(-d/4) v((x - q)/sqrt(eps)) exp(i (S + p.(x - q)) / eps)
// on the x-grid, plus wave-packet initial data. Grid-to-grid resampling uses
// trigonometric (Fourier) interpolation so it does not pollute rate
// measurements; mapped points outside the amplitude box evaluate to zero
// (the amplitude must have decayed there).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "rpk/fft.hpp"
#include "rpk/grid.hpp"
#include "rpk/hagedorn.hpp"
#include "rpk/linalg.hpp"

namespace rpk {

struct WavePacketFrame {
  double eps = 1.0;
  RVec<2> q = RVec<2>::Zero();
  RVec<2> p = RVec<2>::Zero();
  double S = 0.0;

  void validate() const {
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("frame: eps must be in (0, 1]");
    if (!q.allFinite() || !p.allFinite() || !std::isfinite(S))
      throw std::invalid_argument("frame: entries must be finite");
  }
};

inline WavePacketFrame frame_from_state(const ClassicalState<2>& s, double eps) {
  WavePacketFrame f{eps, s.q, s.p, s.S};
  f.validate();
  return f;
}

namespace detail {

using EMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

/// Evaluation matrix of the 1-D trigonometric interpolant at the given
/// target coordinates; rows for targets outside [-L, L) are zero. The DFT
/// coefficients are taken relative to the basis exp(i k (y + L)), matching
/// the grid origin at -L.
inline EMat eval_matrix(const Grid& src, const std::vector<double>& targets) {
  EMat e(targets.size(), src.n);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double y = targets[i];
    if (y < -src.half_width || y >= src.half_width) {
      e.row(Eigen::Index(i)).setZero();
      continue;
    }
    for (int m = 0; m < src.n; ++m)
      e(Eigen::Index(i), m) = std::polar(1.0, src.wavenumber(m) * (y + src.half_width));
  }
  return e;
}

/// Sample the trigonometric interpolant of src at the tensor grid
/// (tx[i], ty[j]); out-of-box points give zero.
inline ComplexField resample(const ComplexField& src, const Grid& dst,
                             const std::vector<double>& tx, const std::vector<double>& ty) {
  const int ns = src.grid.n;
  const auto coeffs = fourier_coefficients(src);
  Eigen::Map<const EMat> chat(coeffs.data(), ns, ns);  // column-major: chat(m, l)
  // coeffs[l * ns + m] multiplies exp(i(k_m x + k_l y)); with the column-major
  // map, chat(m, l) is exactly that coefficient.
  const EMat ex = eval_matrix(src.grid, tx);  // (ndst, ns) over x modes
  const EMat ey = eval_matrix(src.grid, ty);  // (ndst, ns) over y modes
  const EMat vals = ey * (ex * chat).transpose();  // (ndst_y, ndst_x)

  ComplexField out(dst);
  for (int iy = 0; iy < dst.n; ++iy)
    for (int ix = 0; ix < dst.n; ++ix) out.at(ix, iy) = vals(iy, ix);
  return out;
}

inline void check_frame_margin(const WavePacketFrame& frame, const Grid& xgrid) {
  const double margin = 0.2 * xgrid.half_width;
  for (int i = 0; i < 2; ++i)
    if (std::abs(frame.q[i]) > xgrid.half_width - margin)
      throw std::invalid_argument("packets: packet center too close to the x-box boundary");
}

}  // namespace detail

/// Map an amplitude field to the physical-scale wave function. The x-grid
/// must sample the mapped amplitude at least as densely as its native grid
/// (h_x <= sqrt(eps) h_y). The map is unitary: the discrete L2 norm is
/// preserved to interpolation accuracy.
inline ComplexField assemble(const ComplexField& amplitude, const WavePacketFrame& frame,
                             const Grid& xgrid) {
  frame.validate();
  detail::check_frame_margin(frame, xgrid);
  const double s = std::sqrt(frame.eps);
  if (xgrid.spacing() > s * amplitude.grid.spacing() * (1.0 + 1e-12))
    throw std::invalid_argument("assemble: x-grid too coarse, need h_x <= sqrt(eps) h_y");

  std::vector<double> tx(xgrid.n), ty(xgrid.n);
  for (int i = 0; i < xgrid.n; ++i) {
    tx[i] = (xgrid.coord(i) - frame.q[0]) / s;
    ty[i] = (xgrid.coord(i) - frame.q[1]) / s;
  }
  ComplexField psi = detail::resample(amplitude, xgrid, tx, ty);

  const double scale = 1.0 / s;  // eps^(-d/4) = eps^(-1/2) for d = 2
  for (int iy = 0; iy < xgrid.n; ++iy) {
    const double dy = xgrid.coord(iy) - frame.q[1];
    for (int ix = 0; ix < xgrid.n; ++ix) {
      const double dx = xgrid.coord(ix) - frame.q[0];
      const double phase = (frame.S + frame.p[0] * dx + frame.p[1] * dy) / frame.eps;
      psi.at(ix, iy) *= scale * std::polar(1.0, phase);
    }
  }
  return psi;
}

/// Inverse of assemble: recover the amplitude on the y-grid. All mapped
/// sample points q + sqrt(eps) y must lie inside the x-box.
inline ComplexField disassemble(const ComplexField& psi, const WavePacketFrame& frame,
                                const Grid& ygrid) {
  frame.validate();
  const double s = std::sqrt(frame.eps);
  const double lim = psi.grid.half_width;
  std::vector<double> tx(ygrid.n), ty(ygrid.n);
  for (int i = 0; i < ygrid.n; ++i) {
    tx[i] = frame.q[0] + s * ygrid.coord(i);
    ty[i] = frame.q[1] + s * ygrid.coord(i);
    if (tx[i] < -lim || tx[i] >= lim || ty[i] < -lim || ty[i] >= lim)
      throw std::invalid_argument("disassemble: mapped y-grid leaves the x-box");
  }
  ComplexField u = detail::resample(psi, ygrid, tx, ty);

  const double scale = s;  // eps^(d/4) = eps^(1/2) for d = 2
  for (int iy = 0; iy < ygrid.n; ++iy) {
    const double dy = s * ygrid.coord(iy);
    for (int ix = 0; ix < ygrid.n; ++ix) {
      const double dx = s * ygrid.coord(ix);
      const double phase = (frame.S + frame.p[0] * dx + frame.p[1] * dy) / frame.eps;
      u.at(ix, iy) *= scale * std::polar(1.0, -phase);
    }
  }
  return u;
}

/// Gaussian amplitude sampled on a grid.
inline ComplexField gaussian_amplitude_field(const PacketMatrices<2>& m, const Grid& ygrid) {
  ComplexField v(ygrid);
  for (int iy = 0; iy < ygrid.n; ++iy)
    for (int ix = 0; ix < ygrid.n; ++ix)
      v.at(ix, iy) = gaussian_eval(m, RVec<2>(ygrid.coord(ix), ygrid.coord(iy)));
  return v;
}

/// Closed-form Gaussian wave packet on the x-grid (no interpolation).
inline ComplexField gaussian_packet_field(const PacketMatrices<2>& m, const WavePacketFrame& frame,
                                          const Grid& xgrid) {
  frame.validate();
  const double s = std::sqrt(frame.eps);
  const double scale = 1.0 / s;
  ComplexField psi(xgrid);
  for (int iy = 0; iy < xgrid.n; ++iy) {
    const double dy = xgrid.coord(iy) - frame.q[1];
    for (int ix = 0; ix < xgrid.n; ++ix) {
      const double dx = xgrid.coord(ix) - frame.q[0];
      const double phase = (frame.S + frame.p[0] * dx + frame.p[1] * dy) / frame.eps;
      psi.at(ix, iy) = scale * gaussian_eval(m, RVec<2>(dx / s, dy / s)) * std::polar(1.0, phase);
    }
  }
  return psi;
}

/// Wave-packet initial data psi0 from a Gaussian amplitude (closed form).
inline ComplexField initial_data(const PacketMatrices<2>& m0, const RVec<2>& q0, const RVec<2>& p0,
                                 double eps, const Grid& xgrid) {
  WavePacketFrame frame{eps, q0, p0, 0.0};
  detail::check_frame_margin(frame, xgrid);
  return gaussian_packet_field(m0, frame, xgrid);
}

/// Wave-packet initial data from a custom amplitude field.
inline ComplexField initial_data(const ComplexField& v0, const RVec<2>& q0, const RVec<2>& p0,
                                 double eps, const Grid& xgrid) {
  WavePacketFrame frame{eps, q0, p0, 0.0};
  return assemble(v0, frame, xgrid);
}

}  // namespace rpk
