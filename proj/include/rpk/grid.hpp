// Uniform periodic 2-D grid on [-L, L)^2 and complex fields sampled on it.
// Fields are stored row-major with the x index fastest: values[iy * n + ix].
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "rpk/linalg.hpp"

namespace rpk {

struct Grid {
  int n = 0;            // points per dimension, power of two
  double half_width = 0.0;

  Grid() = default;
  Grid(int n_, double half_width_) : n(n_), half_width(half_width_) {
    if (n < 8 || (n & (n - 1)) != 0)
      throw std::invalid_argument("grid: N must be a power of two, N >= 8");
    if (!(half_width > 0.0)) throw std::invalid_argument("grid: L must be positive");
  }

  double spacing() const { return 2.0 * half_width / n; }
  double coord(int i) const { return -half_width + i * spacing(); }
  std::size_t points() const { return std::size_t(n) * std::size_t(n); }

  /// Fourier wavenumber of mode index m (standard FFT ordering).
  double wavenumber(int m) const {
    const double dk = M_PI / half_width;
    return (m < n / 2) ? m * dk : (m - n) * dk;
  }

  bool operator==(const Grid& o) const { return n == o.n && half_width == o.half_width; }
};

struct ComplexField {
  Grid grid;
  std::vector<cplx> values;

  ComplexField() = default;
  explicit ComplexField(const Grid& g) : grid(g), values(g.points(), cplx{0.0, 0.0}) {}

  cplx& at(int ix, int iy) { return values[std::size_t(iy) * grid.n + ix]; }
  const cplx& at(int ix, int iy) const { return values[std::size_t(iy) * grid.n + ix]; }

  /// Discrete L2 norm: h^(d/2) * euclidean norm of the value array.
  double l2_norm() const {
    double s = 0.0;
    for (const cplx& v : values) s += std::norm(v);
    return grid.spacing() * std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& v : values) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    for (const cplx& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  /// Max |value| over the outermost frame of the given cell width.
  double boundary_frame_max(int width = 4) const {
    double m = 0.0;
    const int n = grid.n;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        if (ix < width || ix >= n - width || iy < width || iy >= n - width)
          m = std::max(m, std::abs(at(ix, iy)));
    return m;
  }
};

inline double l2_distance(const ComplexField& f, const ComplexField& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("l2_distance: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += std::norm(f.values[i] - g.values[i]);
  return f.grid.spacing() * std::sqrt(s);
}

}  // namespace rpk
