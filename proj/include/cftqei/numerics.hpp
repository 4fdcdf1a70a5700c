#pragma once

/**
 * @file numerics.hpp
 * @brief Sampled real functions on the line and the kernels that act on them.
 *
 * A RealFunction is a set of strictly increasing nodes with values, a tail
 * model on each side, and optionally an exact evaluator. Quadrature over
 * infinite intervals never truncates silently: the part of the line beyond
 * the sampled span is integrated in closed form from the declared tail.
 *
 * Derivatives use finite-difference weights from Fornberg's recursion
 * (9-point stencils for first and second derivatives, 11-point for third),
 * shifted to one-sided stencils near the ends of the grid.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "cftqei/errors.hpp"
#include "cftqei/tolerance.hpp"

namespace cftqei::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {
    if (!(lo < hi)) throw InputError("interval requires lo < hi");
  }
  static Interval real_line() { return {}; }
  [[nodiscard]] bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  [[nodiscard]] double length() const { return hi - lo; }
  [[nodiscard]] bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Behaviour of a function beyond the sampled span on one side.
struct Tail {
  enum class Kind { zero, power_decay, affine };
  Kind kind = Kind::zero;
  double exponent = 0.0;  // power_decay: f(x) = f(edge) * |edge/x|^exponent
  double slope = 0.0;     // affine: f(x) = slope*x + intercept
  double intercept = 0.0;

  static Tail zero() { return {}; }
  static Tail power(double p) { return {Kind::power_decay, p, 0.0, 0.0}; }
  static Tail affine(double s, double b) { return {Kind::affine, 0.0, s, b}; }
  static Tail constant(double b) { return affine(0.0, b); }

  [[nodiscard]] bool integrable_to_infinity() const {
    switch (kind) {
      case Kind::zero: return true;
      case Kind::power_decay: return exponent > 1.0;
      case Kind::affine: return slope == 0.0 && intercept == 0.0;
    }
    return false;
  }
};

using Evaluator = std::function<double(double)>;

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGLNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGLWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_legendre(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < kGLNodes.size(); ++k) s += kGLWeights[k] * f(mid + half * kGLNodes[k]);
  return s * half;
}

/// Finite-difference weights (Fornberg 1988). Returns weights for the
/// derivative of order `m` at `z` using nodes x[0..n).
inline std::vector<double> fornberg(double z, std::span<const double> x, int m) {
  const int n = static_cast<int>(x.size());
  std::vector<double> c(static_cast<std::size_t>(n) * (m + 1), 0.0);
  auto at = [&](int i, int k) -> double& { return c[static_cast<std::size_t>(i) * (m + 1) + k]; };
  double c1 = 1.0;
  double c4 = x[0] - z;
  at(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) at(i, k) = c1 * (k * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
        at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) at(j, k) = (c4 * at(j, k) - k * at(j, k - 1)) / c3;
      at(j, 0) = c4 * at(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = at(i, m);
  return out;
}

inline std::size_t stencil_start(std::size_t i, std::size_t width, std::size_t n) {
  const std::size_t half = width / 2;
  if (i < half) return 0;
  if (i + (width - half) > n) return n - width;
  return i - half;
}

}  // namespace detail

/// A real function of one variable: samples on a strictly increasing grid,
/// tail models beyond the grid, and an optional exact evaluator used inside
/// the grid span in preference to interpolation.
class RealFunction {
 public:
  RealFunction() = default;

  RealFunction(std::vector<double> nodes, std::vector<double> values, Tail left = Tail::zero(),
               Tail right = Tail::zero(), Evaluator exact = {})
      : nodes_(std::move(nodes)),
        values_(std::move(values)),
        left_(left),
        right_(right),
        exact_(std::move(exact)) {
    if (nodes_.size() != values_.size()) throw InputError("grid: nodes and values differ in length");
    if (nodes_.size() < 8) throw InputError("grid: at least 8 nodes required");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!(nodes_[i] > nodes_[i - 1])) throw InputError("grid: nodes must be strictly increasing");
    }
    const double h = (nodes_.back() - nodes_.front()) / static_cast<double>(nodes_.size() - 1);
    uniform_ = true;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (std::abs((nodes_[i] - nodes_[i - 1]) - h) > 1e-9 * h) {
        uniform_ = false;
        break;
      }
    }
  }

  /// Samples `f` on a uniform grid of `n` nodes over [lo, hi] and keeps `f`
  /// as the exact evaluator.
  static RealFunction sample(const Evaluator& f, double lo, double hi, std::size_t n,
                             Tail left = Tail::zero(), Tail right = Tail::zero(), bool keep_exact = true) {
    std::vector<double> x = linspace(lo, hi, n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = f(x[i]);
    return {std::move(x), std::move(y), left, right, keep_exact ? f : Evaluator{}};
  }

  /// Samples `f` on the given nodes.
  static RealFunction sample_on(const Evaluator& f, std::vector<double> x, Tail left = Tail::zero(),
                                Tail right = Tail::zero(), bool keep_exact = true) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
    return {std::move(x), std::move(y), left, right, keep_exact ? f : Evaluator{}};
  }

  static std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw InputError("linspace: need at least two nodes");
    std::vector<double> x(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = lo + h * static_cast<double>(i);
    x.back() = hi;
    return x;
  }

  [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] const Tail& left_tail() const { return left_; }
  [[nodiscard]] const Tail& right_tail() const { return right_; }
  [[nodiscard]] bool has_exact() const { return static_cast<bool>(exact_); }
  [[nodiscard]] const Evaluator& exact() const { return exact_; }
  [[nodiscard]] bool is_uniform() const { return uniform_; }
  [[nodiscard]] double lo() const { return nodes_.front(); }
  [[nodiscard]] double hi() const { return nodes_.back(); }
  [[nodiscard]] Interval span() const { return {nodes_.front(), nodes_.back()}; }

  /// Same grid and tails, new values; the exact evaluator is dropped.
  [[nodiscard]] RealFunction with_values(std::vector<double> v, Tail left, Tail right) const {
    return {nodes_, std::move(v), left, right};
  }
  [[nodiscard]] RealFunction with_exact(Evaluator e) const {
    return {nodes_, values_, left_, right_, std::move(e)};
  }
  [[nodiscard]] RealFunction with_tails(Tail left, Tail right) const {
    return {nodes_, values_, left, right, exact_};
  }

  double operator()(double x) const {
    if (x < nodes_.front()) return tail_value(left_, nodes_.front(), values_.front(), x);
    if (x > nodes_.back()) return tail_value(right_, nodes_.back(), values_.back(), x);
    if (exact_) return exact_(x);
    return interpolate(x);
  }

  /// Local 6-point Lagrange interpolation of the samples.
  [[nodiscard]] double interpolate(double x) const {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    if (i >= nodes_.size() - 1) i = nodes_.size() - 2;
    const std::size_t start = std::min(i >= 2 ? i - 2 : 0, nodes_.size() - 6);
    double sum = 0.0;
    for (std::size_t a = start; a < start + 6; ++a) {
      if (x == nodes_[a]) return values_[a];
      double l = 1.0;
      for (std::size_t b = start; b < start + 6; ++b) {
        if (b != a) l *= (x - nodes_[b]) / (nodes_[a] - nodes_[b]);
      }
      sum += l * values_[a];
    }
    return sum;
  }

  static double tail_value(const Tail& t, double edge, double edge_value, double x) {
    switch (t.kind) {
      case Tail::Kind::zero: return 0.0;
      case Tail::Kind::power_decay: return edge_value * std::pow(std::abs(edge / x), t.exponent);
      case Tail::Kind::affine: return t.slope * x + t.intercept;
    }
    return 0.0;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  Tail left_;
  Tail right_;
  Evaluator exact_;
  bool uniform_ = true;
};

namespace detail {

// Integral of the tail model over [a, b], both outside the grid on the side of `edge`.
inline double tail_integral(const Tail& t, double edge, double edge_value, double a, double b) {
  if (!(a < b)) return 0.0;
  const bool infinite = std::isinf(a) || std::isinf(b);
  if (infinite && !t.integrable_to_infinity()) throw NumericalError("divergent tail");
  switch (t.kind) {
    case Tail::Kind::zero: return 0.0;
    case Tail::Kind::affine: return 0.5 * t.slope * (b * b - a * a) + t.intercept * (b - a);
    case Tail::Kind::power_decay: {
      if (edge_value == 0.0) return 0.0;
      if (edge == 0.0) throw NumericalError("power-decay tail anchored at the origin");
      const double p = t.exponent;
      const double c = edge_value * std::pow(std::abs(edge), p);
      // Antiderivative of c*|x|^{-p} on one side of the origin.
      auto prim = [&](double x) {
        if (std::isinf(x)) return 0.0;
        const double ax = std::abs(x);
        const double v = (p == 1.0) ? std::log(ax) : std::pow(ax, 1.0 - p) / (1.0 - p);
        return x > 0 ? c * v : -c * v;
      };
      return prim(b) - prim(a);
    }
  }
  return 0.0;
}

// Integral of the 6-point local interpolant over [a, b] inside interval i.
inline double local_interval_integral(const RealFunction& f, std::size_t i, double a, double b) {
  const auto& x = f.nodes();
  const auto& y = f.values();
  const std::size_t start = std::min(i >= 2 ? i - 2 : 0, x.size() - 6);
  auto interp = [&](double t) {
    double sum = 0.0;
    for (std::size_t p = start; p < start + 6; ++p) {
      double l = 1.0;
      for (std::size_t q = start; q < start + 6; ++q) {
        if (q != p) l *= (t - x[q]) / (x[p] - x[q]);
      }
      sum += l * y[p];
    }
    return sum;
  };
  return gauss_legendre(interp, a, b);
}

inline double simpson_uniform(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  if (n == 3) return h / 3.0 * (y[0] + 4 * y[1] + y[2]);
  std::size_t m = n;  // Simpson over the first m nodes (odd count)
  double tail = 0.0;
  if ((n - 1) % 2 == 1) {
    m = n - 3;
    tail = 3.0 * h / 8.0 * (y[n - 4] + 3 * y[n - 3] + 3 * y[n - 2] + y[n - 1]);
  }
  double s = y[0] + y[m - 1];
  for (std::size_t i = 1; i + 1 < m; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0 + tail;
}

}  // namespace detail

/// Integral of f over iv. Inside the sampled span: Gauss-Legendre panels on
/// the exact evaluator if there is one, composite Simpson on a uniform grid,
/// or panels on the local interpolant otherwise. Beyond the span: closed-form
/// integral of the declared tail models.
inline double integrate(const RealFunction& f, Interval iv = Interval::real_line()) {
  const double x0 = f.lo();
  const double xn = f.hi();
  double total = 0.0;
  total += detail::tail_integral(f.left_tail(), x0, f.values().front(), iv.lo, std::min(iv.hi, x0));
  total += detail::tail_integral(f.right_tail(), xn, f.values().back(), std::max(iv.lo, xn), iv.hi);

  const double a = std::max(iv.lo, x0);
  const double b = std::min(iv.hi, xn);
  if (!(a < b)) return total;
  const auto& x = f.nodes();

  if (!f.has_exact() && f.is_uniform() && a == x0 && b == xn) {
    const double h = (xn - x0) / static_cast<double>(x.size() - 1);
    return total + detail::simpson_uniform(f.values(), h);
  }

  const auto first = std::upper_bound(x.begin(), x.end(), a);
  std::size_t i = first == x.begin() ? 0 : static_cast<std::size_t>(first - x.begin()) - 1;
  for (; i + 1 < x.size() && x[i] < b; ++i) {
    const double l = std::max(a, x[i]);
    const double r = std::min(b, x[i + 1]);
    if (!(l < r)) continue;
    total += f.has_exact() ? detail::gauss_legendre(f.exact(), l, r) : detail::local_interval_integral(f, i, l, r);
  }
  return total;
}

namespace detail {

inline Tail derivative_tail(const Tail& t, int order) {
  switch (t.kind) {
    case Tail::Kind::zero: return Tail::zero();
    case Tail::Kind::power_decay: return Tail::power(t.exponent + order);
    case Tail::Kind::affine: return order == 1 ? Tail::constant(t.slope) : Tail::zero();
  }
  return Tail::zero();
}

inline std::size_t stencil_width(int order) { return order >= 3 ? 11 : 9; }

}  // namespace detail

/// Derivative of order 1, 2 or 3 sampled on the same grid.
inline RealFunction differentiate(const RealFunction& f, int order) {
  if (order < 1 || order > 3) throw InputError("differentiate: order must be 1, 2 or 3");
  const std::size_t width = detail::stencil_width(order);
  const std::size_t n = f.size();
  if (n < width) throw InputError("differentiate: grid too coarse for stencil");
  const auto& x = f.nodes();
  const auto& y = f.values();
  std::vector<double> d(n, 0.0);

  if (f.is_uniform()) {
    // Weights depend only on the offset of the node within its stencil.
    const double h = (x.back() - x.front()) / static_cast<double>(n - 1);
    std::vector<double> local(width);
    for (std::size_t k = 0; k < width; ++k) local[k] = static_cast<double>(k);
    std::vector<std::vector<double>> cache(width);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s = detail::stencil_start(i, width, n);
      const std::size_t off = i - s;
      if (cache[off].empty()) {
        cache[off] = detail::fornberg(static_cast<double>(off), local, order);
        for (double& w : cache[off]) w /= std::pow(h, order);
      }
      double acc = 0.0;
      for (std::size_t k = 0; k < width; ++k) acc += cache[off][k] * y[s + k];
      d[i] = acc;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s = detail::stencil_start(i, width, n);
      const auto w = detail::fornberg(x[i], std::span<const double>(x.data() + s, width), order);
      double acc = 0.0;
      for (std::size_t k = 0; k < width; ++k) acc += w[k] * y[s + k];
      d[i] = acc;
    }
  }
  return f.with_values(std::move(d), detail::derivative_tail(f.left_tail(), order),
                       detail::derivative_tail(f.right_tail(), order));
}

/// F(x) = integral of f from base to x, on f's grid. When f carries an exact
/// evaluator, F carries one too (panel quadrature from the nearest node).
inline RealFunction cumulative_integral(const RealFunction& f, double base) {
  const auto& x = f.nodes();
  if (base < x.front() || base > x.back()) throw InputError("cumulative_integral: base outside grid span");
  const std::size_t n = x.size();
  std::vector<double> F(n, 0.0);
  auto piece = [&](std::size_t i, double l, double r) {
    return f.has_exact() ? detail::gauss_legendre(f.exact(), l, r) : detail::local_interval_integral(f, i, l, r);
  };
  for (std::size_t i = 0; i + 1 < n; ++i) F[i + 1] = F[i] + piece(i, x[i], x[i + 1]);

  auto locate = [&x](double t) {
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    return std::min(i, x.size() - 2);
  };
  const std::size_t ib = locate(base);
  const double shift = F[ib] + piece(ib, x[ib], base);
  for (double& v : F) v -= shift;

  auto integral_tail = [&](const Tail& t, double edge_value) {
    if (t.kind == Tail::Kind::zero) return Tail::constant(edge_value);
    if (t.kind == Tail::Kind::affine && t.slope == 0.0) return t;  // replaced below
    throw NumericalError("cumulative_integral: tail model not closed under integration");
  };
  Tail left = integral_tail(f.left_tail(), F.front());
  Tail right = integral_tail(f.right_tail(), F.back());
  if (f.left_tail().kind == Tail::Kind::affine) {
    const double s = f.left_tail().intercept;
    left = Tail::affine(s, F.front() - s * x.front());
  }
  if (f.right_tail().kind == Tail::Kind::affine) {
    const double s = f.right_tail().intercept;
    right = Tail::affine(s, F.back() - s * x.back());
  }

  Evaluator exact;
  if (f.has_exact()) {
    auto fx = f.exact();
    auto nodes = x;
    auto cum = F;
    exact = [fx, nodes, cum](double t) {
      const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
      std::size_t i = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
      i = std::min(i, nodes.size() - 2);
      return cum[i] + detail::gauss_legendre(fx, nodes[i], t);
    };
  }
  return {x, std::move(F), left, right, std::move(exact)};
}

/// Continuous branch of arg over a sequence of complex samples. The first
/// value is the principal argument; consecutive principal differences of
/// magnitude >= max_step are rejected as undersampled.
inline std::vector<double> unwrap_phase(std::span<const std::complex<double>> z,
                                        double max_step = std::numbers::pi) {
  std::vector<double> out(z.size());
  if (z.empty()) return out;
  out[0] = std::arg(z[0]);
  for (std::size_t i = 1; i < z.size(); ++i) {
    const double step = std::arg(z[i] / z[i - 1]);
    if (std::abs(step) >= max_step) throw NumericalError("undersampled phase");
    out[i] = out[i - 1] + step;
  }
  return out;
}

/// Root of a continuous g with a sign change on the bracket (TOMS 748).
template <class G>
double find_root_monotone(G&& g, Interval bracket, double scale = 1.0) {
  if (!bracket.finite()) throw InputError("find_root_monotone: bracket must be finite");
  double a = bracket.lo;
  double b = bracket.hi;
  const double ga = g(a);
  const double gb = g(b);
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if ((ga < 0) == (gb < 0)) throw InputError("find_root_monotone: no sign change on bracket");
  std::uintmax_t iters = 200;
  const double target = 1e-12 * scale;
  // A midpoint that already meets the target is the answer, not the bracket ends.
  std::optional<double> hit;
  auto tol = [target, &g, &hit](double l, double r) {
    if (std::abs(r - l) <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(l), std::abs(r)))
      return true;
    const double m = 0.5 * (l + r);
    if (std::abs(g(m)) < target * 1e-3) {
      hit = m;
      return true;
    }
    return false;
  };
  const auto [l, r] = boost::math::tools::toms748_solve(g, a, b, ga, gb, tol, iters);
  if (hit) return *hit;
  const double gl = g(l);
  const double gr = g(r);
  return std::abs(gl) <= std::abs(gr) ? l : r;
}

/// Product of two functions on a's grid. Tails: zero if either is zero,
/// exponents add for two power-decay tails, constants scale.
inline RealFunction multiply(const RealFunction& a, const RealFunction& b) {
  auto combine = [](const Tail& s, const Tail& t) -> Tail {
    using K = Tail::Kind;
    if (s.kind == K::zero || t.kind == K::zero) return Tail::zero();
    if (s.kind == K::power_decay && t.kind == K::power_decay) return Tail::power(s.exponent + t.exponent);
    if (s.kind == K::power_decay && t.kind == K::affine && t.slope == 0.0) return s;
    if (t.kind == K::power_decay && s.kind == K::affine && s.slope == 0.0) return t;
    if (s.kind == K::affine && t.kind == K::affine && s.slope == 0.0 && t.slope == 0.0)
      return Tail::constant(s.intercept * t.intercept);
    throw NumericalError("multiply: unsupported tail combination");
  };
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a.values()[i] * b(a.nodes()[i]);
  Evaluator exact;
  if (a.has_exact() && b.has_exact()) {
    auto ea = a.exact();
    auto eb = b;
    exact = [ea, eb](double x) { return ea(x) * eb(x); };
  }
  return {a.nodes(), std::move(v), combine(a.left_tail(), b.left_tail()),
          combine(a.right_tail(), b.right_tail()), std::move(exact)};
}

inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace cftqei::numerics
