#pragma once

// Periodic-grid spectral tools on the uniform grid theta_j = 2*pi*j/N.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "cftqei/errors.hpp"

namespace cftqei::fourier {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::vector<double> theta_grid(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
  return t;
}

/// Signed wavenumber of FFT slot k.
inline long wavenumber(std::size_t k, std::size_t n) {
  return k < (n + 1) / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline std::vector<cplx> run_fft(std::span<const cplx> in, int sign) {
  const int n = static_cast<int>(in.size());
  std::vector<cplx> buf(in.begin(), in.end());
  std::vector<cplx> out(in.size());
  auto* ip = reinterpret_cast<fftw_complex*>(buf.data());
  auto* op = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, ip, op, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace detail

/// c_k = (1/N) sum_j f_j exp(-i k theta_j), FFT slot ordering.
inline std::vector<cplx> forward(std::span<const cplx> samples) {
  auto c = detail::run_fft(samples, FFTW_FORWARD);
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (auto& v : c) v *= inv;
  return c;
}

inline std::vector<cplx> forward(std::span<const double> samples) {
  std::vector<cplx> z(samples.begin(), samples.end());
  return forward(z);
}

/// f_j = sum_k c_k exp(i k theta_j).
inline std::vector<cplx> inverse(std::span<const cplx> coeffs) { return detail::run_fft(coeffs, FFTW_BACKWARD); }

/// d^order/dtheta^order of a periodic sample set, spectrally. The Nyquist
/// mode is dropped for odd orders.
inline std::vector<cplx> derivative(std::span<const cplx> samples, int order) {
  const std::size_t n = samples.size();
  auto c = forward(samples);
  for (std::size_t k = 0; k < n; ++k) {
    const long w = wavenumber(k, n);
    if (n % 2 == 0 && k == n / 2 && order % 2 == 1) {
      c[k] = 0.0;
      continue;
    }
    c[k] *= std::pow(cplx(0.0, static_cast<double>(w)), order);
  }
  return inverse(c);
}

inline std::vector<double> derivative(std::span<const double> samples, int order) {
  std::vector<cplx> z(samples.begin(), samples.end());
  const auto d = derivative(std::span<const cplx>(z), order);
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i].real();
  return out;
}

/// Largest coefficient magnitude in the upper quarter of the spectrum,
/// relative to the largest coefficient overall. Small values mean the
/// samples resolve the underlying periodic function.
inline double spectral_tail_ratio(std::span<const cplx> coeffs) {
  const std::size_t n = coeffs.size();
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::abs(coeffs[k]);
    total = std::max(total, a);
    if (std::abs(wavenumber(k, n)) > static_cast<long>(n / 4)) tail = std::max(tail, a);
  }
  return total > 0.0 ? tail / total : 0.0;
}

/// Trigonometric interpolant of periodic samples. Coefficients at or below
/// drop * (largest coefficient) are discarded, which also fixes the band.
class PeriodicInterpolant {
 public:
  PeriodicInterpolant() = default;

  explicit PeriodicInterpolant(std::span<const cplx> samples, double drop = 1e-18) {
    const std::size_t n = samples.size();
    const auto c = forward(samples);
    double cmax = 0.0;
    for (const auto& v : c) cmax = std::max(cmax, std::abs(v));
    long band = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(c[k]) > drop * cmax) band = std::max(band, std::abs(wavenumber(k, n)));
    }
    n_ = n;
    const bool even = n % 2 == 0;
    band_ = band;
    coeffs_.assign(static_cast<std::size_t>(2 * band + 1), cplx(0.0));
    for (std::size_t k = 0; k < n; ++k) {
      const long w = wavenumber(k, n);
      if (std::abs(w) > band || !(std::abs(c[k]) > drop * cmax)) continue;
      cplx v = c[k];
      // Split the Nyquist coefficient symmetrically so real data stays real.
      if (even && k == n / 2) {
        coeffs_[static_cast<std::size_t>(band + w)] += 0.5 * v;
        coeffs_[static_cast<std::size_t>(band - w)] += 0.5 * v;
        continue;
      }
      coeffs_[static_cast<std::size_t>(band + w)] += v;
    }
  }

  explicit PeriodicInterpolant(std::span<const double> samples, double drop = 1e-18)
      : PeriodicInterpolant(std::vector<cplx>(samples.begin(), samples.end()), drop) {}

  [[nodiscard]] long band() const { return band_; }

  /// Fourier coefficient of e^{ik theta}.
  [[nodiscard]] cplx coefficient(long k) const {
    if (std::abs(k) > band_) return 0.0;
    return coeffs_[static_cast<std::size_t>(band_ + k)];
  }

  /// d^order/dtheta^order of the interpolant at theta.
  [[nodiscard]] cplx evaluate(double theta, int order = 0) const {
    const cplx step = std::polar(1.0, theta);
    cplx e = std::polar(1.0, -static_cast<double>(band_) * theta);
    cplx sum = 0.0;
    for (long k = -band_; k <= band_; ++k) {
      if ((k + band_) % 64 == 0) e = std::polar(1.0, static_cast<double>(k) * theta);
      cplx term = coeffs_[static_cast<std::size_t>(band_ + k)] * e;
      if (order > 0) term *= std::pow(cplx(0.0, static_cast<double>(k)), order);
      sum += term;
      e *= step;
    }
    return sum;
  }

  [[nodiscard]] double real(double theta, int order = 0) const { return evaluate(theta, order).real(); }

  /// d^order/dtheta^order on the n-point grid the interpolant was built from.
  [[nodiscard]] std::vector<cplx> grid_derivative(int order) const {
    std::vector<cplx> slots(n_, 0.0);
    const long nn = static_cast<long>(n_);
    for (long k = -band_; k <= band_; ++k) {
      const cplx c = coeffs_[static_cast<std::size_t>(band_ + k)];
      if (c == cplx(0.0)) continue;
      slots[static_cast<std::size_t>((k % nn + nn) % nn)] += c * std::pow(cplx(0.0, static_cast<double>(k)), order);
    }
    return inverse(slots);
  }

  /// Value and first three derivatives at theta in one pass.
  [[nodiscard]] std::array<cplx, 4> jet(double theta) const {
    const cplx step = std::polar(1.0, theta);
    cplx e = std::polar(1.0, -static_cast<double>(band_) * theta);
    std::array<cplx, 4> out{};
    for (long k = -band_; k <= band_; ++k) {
      if ((k + band_) % 64 == 0) e = std::polar(1.0, static_cast<double>(k) * theta);
      const cplx t = coeffs_[static_cast<std::size_t>(band_ + k)] * e;
      const cplx ik(0.0, static_cast<double>(k));
      out[0] += t;
      out[1] += ik * t;
      out[2] += ik * ik * t;
      out[3] += ik * ik * ik * t;
      e *= step;
    }
    return out;
  }

 private:
  long band_ = 0;
  std::size_t n_ = 0;
  std::vector<cplx> coeffs_;
};

}  // namespace cftqei::fourier
