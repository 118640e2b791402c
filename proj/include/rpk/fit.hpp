// Least-squares line fits for convergence rates and exponential envelopes.
#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rpk {

/// Two-sided 95% Student t quantile for the given degrees of freedom.
inline double student_t_975(int df) {
  static const double table[] = {12.7062047364, 4.30265272991, 3.18244630528, 2.77644510520,
                                 2.57058183661, 2.44691184879, 2.36462425101, 2.30600413503,
                                 2.26215716274, 2.22813885196, 2.20098516008, 2.17881282966,
                                 2.16036865646, 2.14478668792, 2.13144954556, 2.11990529922,
                                 2.10981557783, 2.10092204024, 2.09302405441, 2.08596344727,
                                 2.07961384473, 2.07387306790, 2.06865761042, 2.06389856163,
                                 2.05953855275, 2.05552943864, 2.05183051648, 2.04840714180,
                                 2.04522964213, 2.04227245630};
  if (df < 1) throw std::invalid_argument("student_t_975: df must be >= 1");
  if (df <= 30) return table[df - 1];
  return 1.959963985 + 2.5 / df;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r2 = 1.0;
  int n = 0;

  double ci95_halfwidth() const { return n > 2 ? student_t_975(n - 2) * slope_stderr : 0.0; }
};

inline LineFit line_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("line_fit: need at least two points");
  const auto n = double(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("line_fit: degenerate abscissae");

  LineFit fit;
  fit.n = int(xs.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.slope_stderr = fit.n > 2 ? std::sqrt(ss_res / (fit.n - 2) / sxx) : 0.0;
  return fit;
}

/// Log-log rate fit: least squares on (log eps, log e). Expects >= 3 strictly
/// positive samples.
inline LineFit fit_rate(const std::vector<double>& eps, const std::vector<double>& errors) {
  if (eps.size() != errors.size() || eps.size() < 3)
    throw std::invalid_argument("fit_rate: need at least three points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(errors[i] > 0.0))
      throw std::invalid_argument("fit_rate: eps and errors must be positive");
    lx.push_back(std::log(eps[i]));
    ly.push_back(std::log(errors[i]));
  }
  return line_fit(lx, ly);
}

struct EnvelopeFit {
  double rate = 0.0;  // C in e ~ exp(C t)
  double r2 = 1.0;
  int n_used = 0;
  double t_start = 0.0;
};

/// Exponential-envelope fit of an error-vs-time series: slope of log e
/// against t over the monotone tail (from the first global minimum of the
/// series onward), excluding points below a 10x machine-epsilon-scaled floor.
inline std::optional<EnvelopeFit> fit_envelope(const std::vector<double>& times,
                                               const std::vector<double>& errors) {
  if (times.size() != errors.size())
    throw std::invalid_argument("fit_envelope: size mismatch");
  double emax = 0.0;
  for (double e : errors) emax = std::max(emax, e);
  const double floor = 10.0 * DBL_EPSILON * emax;

  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (errors[i] > floor) {
      ts.push_back(times[i]);
      ls.push_back(std::log(errors[i]));
    }
  if (ls.size() < 2) return std::nullopt;

  const auto tail = std::size_t(std::min_element(ls.begin(), ls.end()) - ls.begin());
  if (ls.size() - tail < 2) return std::nullopt;
  std::vector<double> tt(ts.begin() + tail, ts.end()), tl(ls.begin() + tail, ls.end());

  EnvelopeFit out;
  // Constant series: slope 0, perfect fit.
  if (*std::max_element(tl.begin(), tl.end()) - *std::min_element(tl.begin(), tl.end()) == 0.0) {
    out.rate = 0.0;
    out.r2 = 1.0;
    out.n_used = int(tl.size());
    out.t_start = tt.front();
    return out;
  }
  const LineFit fit = line_fit(tt, tl);
  out.rate = fit.slope;
  out.r2 = fit.r2;
  out.n_used = fit.n;
  out.t_start = tt.front();
  return out;
}

}  // namespace rpk
