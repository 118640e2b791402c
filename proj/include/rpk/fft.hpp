// FFTW workspace for N x N complex fields: batched 1-D transforms along rows
// (x) and columns (y), unnormalized. Plans are created with FFTW_ESTIMATE so
// repeated runs are bit-reproducible; plan creation is serialized behind a
// mutex (FFTW planning is not thread-safe, execution is).
#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <span>
#include <stdexcept>

#include "rpk/grid.hpp"

namespace rpk {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class Fft2 {
 public:
  explicit Fft2(int n) : n_(n) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * std::size_t(n) * n));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard lock(fftw_planner_mutex());
    const int dims[1] = {n};
    rows_f_ = fftw_plan_many_dft(1, dims, n, buf_, nullptr, 1, n, buf_, nullptr, 1, n,
                                 FFTW_FORWARD, FFTW_ESTIMATE);
    rows_b_ = fftw_plan_many_dft(1, dims, n, buf_, nullptr, 1, n, buf_, nullptr, 1, n,
                                 FFTW_BACKWARD, FFTW_ESTIMATE);
    cols_f_ = fftw_plan_many_dft(1, dims, n, buf_, nullptr, n, 1, buf_, nullptr, n, 1,
                                 FFTW_FORWARD, FFTW_ESTIMATE);
    cols_b_ = fftw_plan_many_dft(1, dims, n, buf_, nullptr, n, 1, buf_, nullptr, n, 1,
                                 FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!rows_f_ || !rows_b_ || !cols_f_ || !cols_b_)
      throw std::runtime_error("fftw plan creation failed");
  }

  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  ~Fft2() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(rows_f_);
    fftw_destroy_plan(rows_b_);
    fftw_destroy_plan(cols_f_);
    fftw_destroy_plan(cols_b_);
    fftw_free(buf_);
  }

  int n() const { return n_; }
  std::span<cplx> data() { return {reinterpret_cast<cplx*>(buf_), std::size_t(n_) * n_}; }

  void load(const ComplexField& f) {
    if (f.grid.n != n_) throw std::invalid_argument("fft workspace size mismatch");
    std::copy(f.values.begin(), f.values.end(), data().begin());
  }
  void store(ComplexField& f) const {
    const cplx* p = reinterpret_cast<const cplx*>(buf_);
    std::copy(p, p + std::size_t(n_) * n_, f.values.begin());
  }

  void rows_forward() { fftw_execute(rows_f_); }
  void rows_backward() { fftw_execute(rows_b_); }
  void cols_forward() { fftw_execute(cols_f_); }
  void cols_backward() { fftw_execute(cols_b_); }

  void forward2() {
    rows_forward();
    cols_forward();
  }
  void backward2() {
    rows_backward();
    cols_backward();
  }

  /// Scale the whole buffer (e.g. 1/N^2 after backward2()).
  void scale(double s) {
    for (cplx& v : data()) v *= s;
  }

 private:
  int n_;
  fftw_complex* buf_;
  fftw_plan rows_f_, rows_b_, cols_f_, cols_b_;
};

/// Normalized 2-D Fourier coefficients of a field (coefficient of
/// exp(i(k_m x + k_l y)) at index [l * n + m]).
inline std::vector<cplx> fourier_coefficients(const ComplexField& f) {
  Fft2 fft(f.grid.n);
  fft.load(f);
  fft.forward2();
  std::vector<cplx> out(f.values.size());
  auto d = fft.data();
  const double s = 1.0 / double(f.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = d[i] * s;
  return out;
}

}  // namespace rpk
