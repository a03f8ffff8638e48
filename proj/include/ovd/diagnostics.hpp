#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ovd/errors.hpp"
#include "ovd/integrator.hpp"
#include "ovd/matrix.hpp"
#include "ovd/stability.hpp"

namespace ovd {

/// Displacement from the co-moving uniform lattice: y_n(t) = x_n(t) - (n b + c t).
inline Matrix<double> deviations(const TrajectoryRecord& record, const EquilibriumInfo& eq) {
  const std::size_t n = record.positions.cols();
  if (record.positions.rows() != record.samples()) {
    throw ConfigError("deviations: record shape mismatch");
  }
  if (record.meta.n_vehicles != 0 && record.meta.n_vehicles != n) {
    throw ConfigError("deviations: record and equilibrium disagree on vehicle count");
  }
  Matrix<double> y(record.samples(), n);
  for (std::size_t s = 0; s < record.samples(); ++s) {
    const double drift = eq.c * record.times[s];
    for (std::size_t i = 0; i < n; ++i) {
      y(s, i) = record.positions(s, i) - (static_cast<double>(i) * eq.b + drift);
    }
  }
  return y;
}

/// |sum_n y_n exp(-2 pi i k n / N)|. Any integer k is accepted and reduced mod N.
inline double mode_amplitude(std::span<const double> y, std::int64_t k) {
  const auto n = static_cast<std::int64_t>(y.size());
  if (n == 0) return 0.0;
  const std::int64_t kr = ((k % n) + n) % n;
  double re = 0.0;
  double im = 0.0;
  for (std::int64_t j = 0; j < n; ++j) {
    // Reduce the phase index first so equal phases give identical twiddles.
    const double phase = 2.0 * std::numbers::pi * static_cast<double>((kr * j) % n) / static_cast<double>(n);
    re += y[j] * std::cos(phase);
    im -= y[j] * std::sin(phase);
  }
  return std::hypot(re, im);
}

struct FourierSeries {
  std::vector<std::size_t> modes;
  std::vector<double> times;
  Matrix<double> amplitudes;  ///< sample x mode

  /// Column of amplitudes for one mode index.
  std::vector<double> mode(std::size_t k) const {
    const auto it = std::find(modes.begin(), modes.end(), k);
    if (it == modes.end()) throw ConfigError("mode " + std::to_string(k) + " not in series");
    return amplitudes.column(static_cast<std::size_t>(it - modes.begin()));
  }
};

inline FourierSeries fourier_amplitudes(const Matrix<double>& deviations,
                                        std::span<const double> times,
                                        std::span<const std::size_t> modes) {
  const std::size_t n = deviations.cols();
  if (times.size() != deviations.rows()) throw ConfigError("fourier: times/deviations mismatch");
  for (std::size_t k : modes) {
    if (k >= n) throw ConfigError("fourier: mode " + std::to_string(k) + " out of range 0.." +
                                  std::to_string(n == 0 ? 0 : n - 1));
  }
  FourierSeries fs;
  fs.modes.assign(modes.begin(), modes.end());
  fs.times.assign(times.begin(), times.end());
  fs.amplitudes = Matrix<double>(times.size(), modes.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    for (std::size_t j = 0; j < modes.size(); ++j) {
      fs.amplitudes(s, j) = mode_amplitude(deviations.row(s), static_cast<std::int64_t>(modes[j]));
    }
  }
  return fs;
}

inline FourierSeries fourier_amplitudes(const TrajectoryRecord& record, const EquilibriumInfo& eq,
                                        std::span<const std::size_t> modes) {
  return fourier_amplitudes(deviations(record, eq), record.times, modes);
}

/// Least-squares slope of ln A(t) over samples with t0 <= t <= t1.
inline double measure_growth_rate(const FourierSeries& series, std::size_t mode, double t0,
                                  double t1) {
  if (!(t1 > t0)) throw ConfigError("growth window must satisfy t0 < t1");
  if (series.times.empty() || t0 < series.times.front() - 1e-12 ||
      t1 > series.times.back() + 1e-12) {
    throw ConfigError("growth window lies outside the record");
  }
  const auto amp = series.mode(mode);
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t < t0 || t > t1) continue;
    if (!(amp[i] > 0.0)) {
      throw UndefinedGrowth("non-positive amplitude of mode " + std::to_string(mode) +
                            " at t = " + std::to_string(t));
    }
    ts.push_back(t);
    ls.push_back(std::log(amp[i]));
  }
  if (ts.size() < 2) throw UndefinedGrowth("growth window holds fewer than two samples");
  const double m = static_cast<double>(ts.size());
  double t_mean = 0.0, l_mean = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    t_mean += ts[i];
    l_mean += ls[i];
  }
  t_mean /= m;
  l_mean /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxx += (ts[i] - t_mean) * (ts[i] - t_mean);
    sxy += (ts[i] - t_mean) * (ls[i] - l_mean);
  }
  if (!(sxx > 0.0)) throw UndefinedGrowth("degenerate growth window");
  return sxy / sxx;
}

}  // namespace ovd
