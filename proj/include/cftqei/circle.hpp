#pragma once

// Lifts of circle diffeomorphisms, the Moebius subgroup, the Cayley picture
// of the light ray, Schwarzian derivatives and the Bott / Virasoro cocycles.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cftqei/errors.hpp"
#include "cftqei/fourier.hpp"
#include "cftqei/numerics.hpp"
#include "cftqei/tolerance.hpp"

namespace cftqei::circle {

using cplx = std::complex<double>;
using numerics::Interval;
using numerics::RealFunction;
using numerics::Tail;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr std::size_t kDefaultNodes = 2048;

// ---------------------------------------------------------------------------
// Cayley map between the light ray and the circle

inline cplx cayley(double v) { return cplx(1.0, v) / cplx(1.0, -v); }

inline double inverse_cayley(cplx z) {
  const cplx den = 1.0 + z;
  if (std::abs(den) < 1e-300) throw InputError("point at infinity");
  return (cplx(0.0, 1.0) * (1.0 - z) / den).real();
}

/// theta(v) = 2 atan v and its inverse v = tan(theta/2).
inline double angle_of(double v) { return 2.0 * std::atan(v); }
inline double ray_of(double theta) { return std::tan(0.5 * theta); }

// ---------------------------------------------------------------------------
// Moebius maps of the light ray, u -> (a u + b)/(c u + d), ad - bc = 1

class MobiusElement {
 public:
  MobiusElement() = default;

  MobiusElement(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
    const double det = a * d - b * c;
    const double scale = std::max({std::abs(a * d), std::abs(b * c), 1.0});
    if (std::abs(det - 1.0) > 1e-14 * scale) throw InputError("mobius: ad - bc must equal 1");
  }

  /// Rescales (a, b, c, d) by 1/sqrt(ad - bc); the determinant must be positive.
  static MobiusElement normalized(double a, double b, double c, double d) {
    const double det = a * d - b * c;
    if (!(det > 0.0)) throw InputError("mobius: determinant must be positive");
    const double s = 1.0 / std::sqrt(det);
    MobiusElement m;
    m.a_ = a * s;
    m.b_ = b * s;
    m.c_ = c * s;
    m.d_ = d * s;
    return m;
  }

  static MobiusElement affine(double slope, double intercept) { return normalized(slope, intercept, 0.0, 1.0); }
  static MobiusElement identity() { return {}; }

  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double b() const { return b_; }
  [[nodiscard]] double c() const { return c_; }
  [[nodiscard]] double d() const { return d_; }
  [[nodiscard]] bool fixes_infinity() const { return c_ == 0.0; }

  [[nodiscard]] double operator()(double u) const { return (a_ * u + b_) / (c_ * u + d_); }
  [[nodiscard]] double derivative(double u) const {
    const double q = c_ * u + d_;
    return 1.0 / (q * q);
  }
  /// Image of the point at infinity (infinite when c = 0).
  [[nodiscard]] double at_infinity() const {
    return c_ == 0.0 ? std::numeric_limits<double>::infinity() : a_ / c_;
  }

  [[nodiscard]] MobiusElement compose(const MobiusElement& o) const {
    return normalized(a_ * o.a_ + b_ * o.c_, a_ * o.b_ + b_ * o.d_, c_ * o.a_ + d_ * o.c_, c_ * o.b_ + d_ * o.d_);
  }
  [[nodiscard]] MobiusElement inverse() const { return normalized(d_, -b_, -c_, a_); }

 private:
  double a_ = 1.0;
  double b_ = 0.0;
  double c_ = 0.0;
  double d_ = 1.0;
};

// ---------------------------------------------------------------------------
// Lifts rho with rho(theta + 2 pi) = rho(theta) + 2 pi

class CircleDiffeo {
 public:
  CircleDiffeo() : CircleDiffeo(std::vector<double>(kDefaultNodes, 0.0), 0) {}

  /// Periodic part rho(theta_j) - theta_j on the uniform grid plus a winding
  /// offset in units of 2 pi. The periodic part is shifted by a multiple of
  /// 2 pi so its mean lies in [-pi, pi); the shift moves into the winding.
  CircleDiffeo(std::vector<double> periodic, long winding, bool check = true,
               const ToleranceSet& tol = kDefaultTolerances)
      : periodic_(std::move(periodic)), winding_(winding) {
    if (periodic_.size() < 16) throw InputError("circle diffeo: need at least 16 nodes");
    double mean = 0.0;
    for (double p : periodic_) mean += p;
    mean /= static_cast<double>(periodic_.size());
    const double turns = std::floor((mean + kPi) / kTwoPi);
    if (turns != 0.0) {
      for (double& p : periodic_) p -= kTwoPi * turns;
      winding_ += static_cast<long>(turns);
    }
    // Drop coefficients at the rounding level of the samples; otherwise
    // third derivatives amplify that noise by k^3.
    double pmax = 0.0;
    double cmax = 0.0;
    for (double p : periodic_) pmax = std::max(pmax, std::abs(p));
    for (const auto& c : fourier::forward(std::span<const double>(periodic_))) cmax = std::max(cmax, std::abs(c));
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * pmax;
    interp_ = fourier::PeriodicInterpolant(std::span<const double>(periodic_), cmax > 0.0 ? floor / cmax : 0.0);
    const auto d1 = derivative_samples(1);
    min_derivative_ = *std::min_element(d1.begin(), d1.end());
    if (check) {
      if (!(min_derivative_ > 0.0)) throw InputError("circle diffeo: rho' must be positive");
      require_resolved(tol);
    }
  }

  static CircleDiffeo identity(std::size_t n = kDefaultNodes) { return {std::vector<double>(n, 0.0), 0}; }

  /// Samples a lift given as a callable on the grid.
  static CircleDiffeo from_lift(const std::function<double(double)>& rho, std::size_t n = kDefaultNodes,
                                bool check = true, const ToleranceSet& tol = kDefaultTolerances) {
    const auto t = fourier::theta_grid(n);
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = rho(t[j]) - t[j];
    return {std::move(p), 0, check, tol};
  }

  [[nodiscard]] std::size_t size() const { return periodic_.size(); }
  [[nodiscard]] const std::vector<double>& periodic() const { return periodic_; }
  [[nodiscard]] long winding() const { return winding_; }
  [[nodiscard]] double min_derivative() const { return min_derivative_; }
  [[nodiscard]] const fourier::PeriodicInterpolant& interpolant() const { return interp_; }

  [[nodiscard]] double operator()(double theta) const {
    return theta + interp_.real(theta) + kTwoPi * static_cast<double>(winding_);
  }
  /// rho^{(order)}(theta) for order 1..3.
  [[nodiscard]] double derivative(double theta, int order) const {
    const double d = interp_.real(theta, order);
    return order == 1 ? 1.0 + d : d;
  }
  /// rho, rho', rho'', rho''' at theta.
  [[nodiscard]] std::array<double, 4> jet(double theta) const {
    const auto j = interp_.jet(theta);
    return {theta + j[0].real() + kTwoPi * static_cast<double>(winding_), 1.0 + j[1].real(), j[2].real(),
            j[3].real()};
  }
  /// Lift values on the grid.
  [[nodiscard]] std::vector<double> lift_samples() const {
    const auto t = fourier::theta_grid(size());
    std::vector<double> r(size());
    for (std::size_t j = 0; j < size(); ++j) r[j] = t[j] + periodic_[j] + kTwoPi * static_cast<double>(winding_);
    return r;
  }
  /// Spectral rho^{(order)} on the grid.
  [[nodiscard]] std::vector<double> derivative_samples(int order) const {
    const auto z = interp_.grid_derivative(order);
    std::vector<double> d(z.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = z[j].real() + (order == 1 ? 1.0 : 0.0);
    return d;
  }

  void require_resolved(const ToleranceSet& tol = kDefaultTolerances) const {
    // Upper-quarter coefficients against max(1, largest oscillating one).
    const auto c = fourier::forward(std::span<const double>(periodic_));
    const std::size_t n = c.size();
    double scale = 1.0;
    double tail = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double a = std::abs(c[k]);
      scale = std::max(scale, a);
      if (std::abs(fourier::wavenumber(k, n)) > static_cast<long>(n / 4)) tail = std::max(tail, a);
    }
    if (tail > tol.spectral_tail * scale) throw NumericalError("resolution too low");
  }

 private:
  std::vector<double> periodic_;
  long winding_ = 0;
  fourier::PeriodicInterpolant interp_;
  double min_derivative_ = 1.0;
};

inline CircleDiffeo compose(const CircleDiffeo& r1, const CircleDiffeo& r2, bool check = true,
                            const ToleranceSet& tol = kDefaultTolerances) {
  if (r1.size() != r2.size()) throw InputError("compose: grids differ");
  const auto t = fourier::theta_grid(r2.size());
  std::vector<double> p(r2.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double inner = t[j] + r2.periodic()[j];
    p[j] = r2.periodic()[j] + r1.interpolant().real(inner);
  }
  return {std::move(p), r1.winding() + r2.winding(), check, tol};
}

inline CircleDiffeo invert(const CircleDiffeo& r, bool check = true, const ToleranceSet& tol = kDefaultTolerances) {
  const auto t = fourier::theta_grid(r.size());
  const auto [lo_it, hi_it] = std::minmax_element(r.periodic().begin(), r.periodic().end());
  const double pmin = *lo_it;
  const double pmax = *hi_it;
  const double shift = kTwoPi * static_cast<double>(r.winding());
  std::vector<double> p(r.size());
  double x = t[0] - r.periodic()[0] - shift;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double target = t[j];
    // x + p(x) + shift = target, with x in [target - shift - pmax, target - shift - pmin].
    double lo = target - shift - pmax - 1e-3;
    double hi = target - shift - pmin + 1e-3;
    auto g = [&](double y) { return r(y) - target; };
    while (g(lo) > 0.0) lo -= 0.1;
    while (g(hi) < 0.0) hi += 0.1;
    if (x < lo || x > hi) x = 0.5 * (lo + hi);
    bool done = false;
    for (int it = 0; it < 100; ++it) {
      const double gx = g(x);
      if (gx > 0.0) hi = x;
      else lo = x;
      const double step = gx / r.derivative(x, 1);
      double next = x - step;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
        x = next;
        done = true;
        break;
      }
      x = next;
    }
    if (!done && std::abs(g(x)) > 1e-12) throw NumericalError("invert: Newton iteration failed");
    p[j] = x - target;
  }
  return {std::move(p), 0, check, tol};
}

// ---------------------------------------------------------------------------
// One-parameter subgroups

enum class Subgroup { rotation, translation, dilation, special_conformal };

namespace detail {

/// Lift of theta -> 2 atan(g(tan(theta/2))) for g fixing infinity, extended
/// by continuity and the 2 pi shift law.
inline double halfangle_lift(const std::function<double(double)>& g, double theta) {
  const double m = std::floor((theta + kPi) / kTwoPi);
  const double t0 = theta - kTwoPi * m;
  if (t0 <= -kPi) return -kPi + kTwoPi * m;
  return 2.0 * std::atan(g(std::tan(0.5 * t0))) + kTwoPi * m;
}

}  // namespace detail

inline CircleDiffeo subgroup_element(Subgroup kind, double param, std::size_t n = kDefaultNodes) {
  switch (kind) {
    case Subgroup::rotation: return {std::vector<double>(n, param), 0};
    case Subgroup::translation:
      return CircleDiffeo::from_lift(
          [param](double t) { return detail::halfangle_lift([param](double v) { return v + param; }, t); }, n);
    case Subgroup::dilation:
      if (!(param > 0.0)) throw InputError("dilation parameter must be positive");
      return CircleDiffeo::from_lift(
          [param](double t) { return detail::halfangle_lift([param](double v) { return param * v; }, t); }, n);
    case Subgroup::special_conformal:
      // R_pi T_s R_pi^{-1}.
      return CircleDiffeo::from_lift(
          [param](double t) {
            return detail::halfangle_lift([param](double v) { return v + param; }, t - kPi) + kPi;
          },
          n);
  }
  throw InputError("unknown subgroup");
}

// ---------------------------------------------------------------------------
// Reparametrisations of the light ray

/// Strictly increasing V on a core interval, equal to a Moebius map outside.
/// V' is carried separately so Schwarzians need only two differentiations.
class LineReparam {
 public:
  LineReparam(RealFunction V, RealFunction Vp, MobiusElement tail) : V_(std::move(V)), Vp_(std::move(Vp)), tail_(tail) {
    if (V_.nodes() != Vp_.nodes()) throw InputError("line reparam: V and V' grids differ");
    for (std::size_t i = 0; i < Vp_.size(); ++i) {
      if (!(Vp_.values()[i] > 0.0)) throw InputError("not a reparametrisation: V' <= 0 at node " + std::to_string(i));
    }
  }

  static LineReparam from_functions(const numerics::Evaluator& V, const numerics::Evaluator& Vp, double lo, double hi,
                                    std::size_t n, MobiusElement tail) {
    return {RealFunction::sample(V, lo, hi, n), RealFunction::sample(Vp, lo, hi, n), tail};
  }

  static LineReparam from_mobius(const MobiusElement& m, double lo, double hi, std::size_t n = 4096) {
    return from_functions([m](double v) { return m(v); }, [m](double v) { return m.derivative(v); }, lo, hi, n, m);
  }

  [[nodiscard]] const RealFunction& V() const { return V_; }
  [[nodiscard]] const RealFunction& Vp() const { return Vp_; }
  [[nodiscard]] const MobiusElement& tail() const { return tail_; }
  [[nodiscard]] Interval core() const { return V_.span(); }

  [[nodiscard]] double operator()(double v) const {
    return core().contains(v) ? V_(v) : tail_(v);
  }
  [[nodiscard]] double derivative(double v) const { return core().contains(v) ? Vp_(v) : tail_.derivative(v); }

  /// Largest relative mismatch between V and its tail map at the core edges.
  [[nodiscard]] double tail_mismatch() const {
    double m = 0.0;
    for (std::size_t i : {std::size_t{0}, V_.size() - 1}) {
      const double v = V_.nodes()[i];
      const double tv = tail_(v);
      const double td = tail_.derivative(v);
      m = std::max(m, std::abs(V_.values()[i] - tv) / std::max(1.0, std::abs(tv)));
      m = std::max(m, std::abs(Vp_.values()[i] - td) / std::max(1e-300, std::abs(td)));
    }
    return m;
  }

 private:
  RealFunction V_;
  RealFunction Vp_;
  MobiusElement tail_;
};

/// rho(theta) = 2 atan(V(tan(theta/2))), unwrapped from theta = 0.
inline CircleDiffeo lift_line_reparam(const LineReparam& V, std::size_t n = kDefaultNodes, bool check = true,
                                      double seam_tol = 1e-6) {
  if (V.tail_mismatch() > seam_tol) throw InputError("line reparam: V does not join its tail map smoothly");
  const auto t = fourier::theta_grid(n);
  std::vector<cplx> z(n);
  for (std::size_t j = 0; j < n; ++j) {
    double w;
    if (j == n / 2 && n % 2 == 0) w = V.tail().at_infinity();
    else w = V(ray_of(t[j]));
    z[j] = std::isinf(w) ? cplx(-1.0, 0.0) : cayley(w);
  }
  const auto ph = numerics::unwrap_phase(z);
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = ph[j] - t[j];
  // Closing step back to theta = 2 pi must also be a small positive turn.
  const double close = ph[0] + kTwoPi - ph[n - 1];
  if (!(close > 0.0 && close < kPi)) throw NumericalError("undersampled phase");
  return {std::move(p), 0, check};
}

inline CircleDiffeo mobius_lift(const MobiusElement& m, std::size_t n = kDefaultNodes) {
  const auto t = fourier::theta_grid(n);
  std::vector<cplx> z(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = (j == n / 2 && n % 2 == 0) ? m.at_infinity() : m(ray_of(t[j]));
    z[j] = std::isinf(w) ? cplx(-1.0, 0.0) : cayley(w);
  }
  const auto ph = numerics::unwrap_phase(z);
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = ph[j] - t[j];
  return {std::move(p), 0};
}

// ---------------------------------------------------------------------------
// Schwarzian derivatives

struct SchwarzianResult {
  RealFunction values;
  // Sup-norm difference between the two algebraic forms.
  double discrepancy = 0.0;
};

/// {V, v} = V'''/V' - (3/2)(V''/V')^2, also as -2 sqrt(V') (1/sqrt V')''.
inline SchwarzianResult schwarzian(const LineReparam& V) {
  const auto& p = V.Vp();
  const auto d1 = numerics::differentiate(p, 1);
  const auto d2 = numerics::differentiate(p, 2);
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = 1.0 / std::sqrt(p.values()[i]);
  const auto q2 = numerics::differentiate(p.with_values(q, Tail::zero(), Tail::zero()), 2);
  std::vector<double> a(p.size());
  double disc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = d1.values()[i] / p.values()[i];
    a[i] = d2.values()[i] / p.values()[i] - 1.5 * r * r;
    const double b = -2.0 * q2.values()[i] / q[i];
    disc = std::max(disc, std::abs(a[i] - b));
  }
  // Outside the core V is Moebius, whose Schwarzian vanishes.
  return {p.with_values(std::move(a), Tail::zero(), Tail::zero()), disc};
}

/// Circle Schwarzian S = {rho, theta} + (rho'^2 - 1)/2 on the theta grid. It
/// vanishes on Moebius maps and pulls back to the light ray as
/// {V, v} = 4 S(2 atan v) / (1 + v^2)^2.
inline SchwarzianResult schwarzian(const CircleDiffeo& r) {
  const auto d1 = r.derivative_samples(1);
  const auto d2 = r.derivative_samples(2);
  const auto d3 = r.derivative_samples(3);
  const std::size_t n = r.size();
  std::vector<double> q(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(d1[j] > 0.0)) throw InputError("schwarzian: rho' must be positive");
    q[j] = 1.0 / std::sqrt(d1[j]);
  }
  const auto q2 = fourier::derivative(std::span<const double>(q), 2);
  std::vector<double> a(n);
  double disc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double rr = d2[j] / d1[j];
    const double extra = 0.5 * (d1[j] * d1[j] - 1.0);
    a[j] = d3[j] / d1[j] - 1.5 * rr * rr + extra;
    const double b = -2.0 * q2[j] / q[j] + extra;
    disc = std::max(disc, std::abs(a[j] - b));
  }
  return {RealFunction(fourier::theta_grid(n), std::move(a)), disc};
}

/// Circle Schwarzian at an arbitrary angle, from the interpolated lift.
inline double circle_schwarzian_at(const CircleDiffeo& r, double theta) {
  const auto j = r.jet(theta);
  const double rr = j[2] / j[1];
  return j[3] / j[1] - 1.5 * rr * rr + 0.5 * (j[1] * j[1] - 1.0);
}

/// {V, v} for the light-ray map V = tan(rho(2 atan v)/2).
inline double line_schwarzian_at(const CircleDiffeo& r, double v) {
  const double s = 1.0 + v * v;
  return 4.0 * circle_schwarzian_at(r, angle_of(v)) / (s * s);
}

// ---------------------------------------------------------------------------
// Functions on the circle and vector fields

class CircleFunction {
 public:
  CircleFunction() = default;
  explicit CircleFunction(std::vector<cplx> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 16) throw InputError("circle function: need at least 16 samples");
  }

  static CircleFunction from(const std::function<cplx(cplx)>& f, std::size_t n = 256) {
    const auto t = fourier::theta_grid(n);
    std::vector<cplx> s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = f(std::polar(1.0, t[j]));
    return CircleFunction(std::move(s));
  }

  /// The field i z a(theta) of a real angular velocity a.
  static CircleFunction from_angular(const std::function<double(double)>& a, std::size_t n = 256) {
    const auto t = fourier::theta_grid(n);
    std::vector<cplx> s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = cplx(0.0, 1.0) * std::polar(1.0, t[j]) * a(t[j]);
    return CircleFunction(std::move(s));
  }

  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] const std::vector<cplx>& samples() const { return samples_; }

  /// Laurent coefficients f_k of f(z) = sum f_k z^k, FFT slot order.
  [[nodiscard]] std::vector<cplx> coefficients() const { return fourier::forward(samples_); }
  [[nodiscard]] cplx coefficient(long k) const {
    const long n = static_cast<long>(size());
    if (std::abs(k) >= n / 2) return 0.0;
    const auto c = coefficients();
    return c[static_cast<std::size_t>((k % n + n) % n)];
  }

  /// d^order f / dz^order sampled on the grid, from the Laurent series.
  [[nodiscard]] std::vector<cplx> z_derivative(int order) const {
    const std::size_t n = size();
    const auto c = coefficients();
    std::vector<cplx> shifted(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const long w = fourier::wavenumber(k, n);
      if (n % 2 == 0 && k == n / 2) continue;
      double fall = 1.0;
      for (int r = 0; r < order; ++r) fall *= static_cast<double>(w - r);
      const long target = w - order;
      const long nn = static_cast<long>(n);
      if (std::abs(target) >= nn / 2) continue;
      shifted[static_cast<std::size_t>((target % nn + nn) % nn)] += fall * c[k];
    }
    return fourier::inverse(shifted);
  }

  /// Angular velocity a(theta) = f / (i z); real for Gamma-real f.
  [[nodiscard]] std::vector<double> angular() const {
    const auto t = fourier::theta_grid(size());
    std::vector<double> a(size());
    for (std::size_t j = 0; j < size(); ++j) a[j] = (samples_[j] / (cplx(0.0, 1.0) * std::polar(1.0, t[j]))).real();
    return a;
  }

  [[nodiscard]] double spectral_tail() const { return fourier::spectral_tail_ratio(coefficients()); }

  friend CircleFunction operator+(const CircleFunction& f, const CircleFunction& g) {
    std::vector<cplx> s(f.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = f.samples_[j] + g.samples_[j];
    return CircleFunction(std::move(s));
  }
  friend CircleFunction operator*(cplx a, const CircleFunction& f) {
    std::vector<cplx> s(f.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = a * f.samples_[j];
    return CircleFunction(std::move(s));
  }

 private:
  std::vector<cplx> samples_;
};

/// (Gamma f)(z) = -z^2 conj(f(z)).
inline CircleFunction gamma_conjugate(const CircleFunction& f) {
  const auto t = fourier::theta_grid(f.size());
  std::vector<cplx> s(f.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    const cplx z = std::polar(1.0, t[j]);
    s[j] = -z * z * std::conj(f.samples()[j]);
  }
  return CircleFunction(std::move(s));
}

/// Contour integral of sampled F(z) over |z| = 1 by the trapezoid rule.
inline cplx contour_integral(std::span<const cplx> F) {
  const std::size_t n = F.size();
  cplx sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    sum += F[j] * cplx(0.0, 1.0) * std::polar(1.0, t);
  }
  return sum * (kTwoPi / static_cast<double>(n));
}

/// omega(f, g) = (1/48 pi) contour integral of (f g''' - f''' g) dz.
inline cplx virasoro_cocycle_complex(const CircleFunction& f, const CircleFunction& g) {
  if (f.size() != g.size()) throw InputError("virasoro_cocycle: grids differ");
  const auto f3 = f.z_derivative(3);
  const auto g3 = g.z_derivative(3);
  std::vector<cplx> F(f.size());
  for (std::size_t j = 0; j < F.size(); ++j) F[j] = f.samples()[j] * g3[j] - f3[j] * g.samples()[j];
  return contour_integral(F) / (48.0 * kPi);
}

inline double virasoro_cocycle(const CircleFunction& f, const CircleFunction& g) {
  return virasoro_cocycle_complex(f, g).real();
}

// ---------------------------------------------------------------------------
// Bott cocycle

namespace detail {

/// log sigma'(z) = log rho'(theta) + i arg, with arg unwrapped from theta = 0.
inline std::vector<cplx> log_derivative(const CircleDiffeo& r) {
  const auto d1 = r.derivative_samples(1);
  const auto& p = r.periodic();
  std::vector<cplx> s(r.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::polar(d1[j], p[j]);
  const auto arg = numerics::unwrap_phase(s);
  std::vector<cplx> L(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) L[j] = cplx(std::log(d1[j]), arg[j]);
  return L;
}

}  // namespace detail

/// B(s1, s2) = -(1/48 pi) Re contour integral of log((s1 s2)'(z)) d log(s2'(z)).
inline double bott_cocycle(const CircleDiffeo& s1, const CircleDiffeo& s2) {
  const auto s12 = compose(s1, s2, false);
  const auto L12 = detail::log_derivative(s12);
  // d/dtheta log s2' = rho''/rho' + i (rho' - 1).
  const auto d1 = s2.derivative_samples(1);
  const auto d2 = s2.derivative_samples(2);
  const std::size_t n = s2.size();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx dL(d2[j] / d1[j], d1[j] - 1.0);
    sum += (L12[j] * dL).real();
  }
  return -sum * (kTwoPi / static_cast<double>(n)) / (48.0 * kPi);
}

// ---------------------------------------------------------------------------
// Random elements for property tests

/// rho~(theta) = c0 + sum_{k<=K} a_k sin(k theta + phi_k), scaled so that
/// max |rho~'| equals a random amplitude in [0.05, 0.75]; min rho' >= 0.25.
inline CircleDiffeo random_diffeo(std::mt19937_64& rng, int K = 5, std::size_t n = kDefaultNodes) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::uniform_real_distribution<double> amp(0.05, 0.75);
  std::vector<double> a(static_cast<std::size_t>(K) + 1);
  std::vector<double> ph(a.size());
  for (int k = 1; k <= K; ++k) {
    a[static_cast<std::size_t>(k)] = u(rng) / (k * k);
    ph[static_cast<std::size_t>(k)] = phase(rng);
  }
  const double c0 = phase(rng);
  const double target = amp(rng);
  const auto t = fourier::theta_grid(n);
  std::vector<double> p(n);
  std::vector<double> dp(n);
  double dmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    double d = 0.0;
    for (int k = 1; k <= K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      s += a[kk] * std::sin(k * t[j] + ph[kk]);
      d += k * a[kk] * std::cos(k * t[j] + ph[kk]);
    }
    p[j] = s;
    dmax = std::max(dmax, std::abs(d));
  }
  const double scale = dmax > 0.0 ? target / dmax : 0.0;
  for (double& v : p) v = c0 + scale * v;
  return {std::move(p), 0};
}

/// Gamma-real field i z a(theta) with a a random real trigonometric
/// polynomial of degree K.
inline CircleFunction random_real_field(std::mt19937_64& rng, int K = 4, std::size_t n = 256) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> ca(static_cast<std::size_t>(K) + 1);
  std::vector<double> sa(ca.size());
  for (auto& v : ca) v = u(rng);
  for (auto& v : sa) v = u(rng);
  return CircleFunction::from_angular(
      [ca, sa, K](double t) {
        double s = 0.0;
        for (int k = 0; k <= K; ++k) {
          const auto kk = static_cast<std::size_t>(k);
          s += ca[kk] * std::cos(k * t) + sa[kk] * std::sin(k * t);
        }
        return s;
      },
      n);
}

/// Curve s -> theta + s a(theta) tangent to the field f at the identity.
inline CircleDiffeo flow_step(const CircleFunction& f, double s, std::size_t n = kDefaultNodes) {
  const fourier::PeriodicInterpolant a(f.angular());
  const auto t = fourier::theta_grid(n);
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = s * a.real(t[j]);
  return {std::move(p), 0};
}

// ---------------------------------------------------------------------------
// Serialization: bit-stable CSV of (theta, rho~)

namespace detail {

inline std::string shortest(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, r.ptr};
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InputError("diffeo csv: bad number '" + std::string(s) + "'");
  return x;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const CircleDiffeo& r) {
  out << "# circle diffeo\n# winding," << r.winding() << "\ntheta,periodic\n";
  const auto t = fourier::theta_grid(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) out << detail::shortest(t[j]) << ',' << detail::shortest(r.periodic()[j]) << '\n';
}

inline CircleDiffeo read_csv(std::istream& in) {
  std::string line;
  long winding = 0;
  std::vector<double> p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# winding,", 0) == 0) {
      winding = std::stol(line.substr(10));
      continue;
    }
    if (line[0] == '#' || line.rfind("theta", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError("diffeo csv: expected two columns");
    p.push_back(detail::parse_double(std::string_view(line).substr(comma + 1)));
  }
  return {std::move(p), winding};
}

inline void save_csv(const std::string& path, const CircleDiffeo& r) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_csv(out, r);
}

inline CircleDiffeo load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_csv(in);
}

}  // namespace cftqei::circle
