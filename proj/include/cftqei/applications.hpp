#pragma once

// Bounds derived from the chiral QEI: worldlines, spacetime volumes, moving
// mirrors, averaged energy conditions and the unweighted half-line average.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cftqei/circle.hpp"
#include "cftqei/errors.hpp"
#include "cftqei/numerics.hpp"
#include "cftqei/qei.hpp"
#include "cftqei/tolerance.hpp"
#include "cftqei/weights.hpp"

namespace cftqei::applications {

using numerics::Interval;
using numerics::RealFunction;
using numerics::Tail;
using weights::DecayClass;
using weights::WeightFunction;

inline constexpr double kPi = std::numbers::pi;

/// A bound together with its pieces and the hypotheses it rests on.
struct BoundRecord {
  double bound = 0.0;
  std::map<std::string, double> components;
  std::map<std::string, bool> flags;
};

// ---------------------------------------------------------------------------
// Worldlines

enum class CurveKind { timelike, spacelike, null_left, null_right, static_line };

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::timelike: return "timelike";
    case CurveKind::spacelike: return "spacelike";
    case CurveKind::null_left: return "null_left";
    case CurveKind::null_right: return "null_right";
    case CurveKind::static_line: return "static";
  }
  return "?";
}

/// gamma(lambda) in null coordinates u = x0 - x1, v = x0 + x1, parametrised
/// by proper time (timelike) or proper distance (spacelike).
struct WorldlineCurve {
  RealFunction u;
  RealFunction v;
  RealFunction udot;
  RealFunction vdot;
  CurveKind kind = CurveKind::static_line;
  double eps_min = 1e-3;

  /// Timelike: (u', v') = (e^-chi, e^chi). Spacelike: (-e^-chi, e^chi).
  /// chi is frozen at its edge values outside [lo, hi], so the curve is
  /// straight there.
  static WorldlineCurve from_rapidity(const std::function<double(double)>& chi, CurveKind kind, double lo, double hi,
                                      std::size_t n = 4097, double x0 = 0.0, double x1 = 0.0,
                                      double eps_min = 1e-3) {
    if (kind != CurveKind::timelike && kind != CurveKind::spacelike && kind != CurveKind::static_line)
      throw InputError("from_rapidity: kind must be timelike, spacelike or static");
    const double su = kind == CurveKind::spacelike ? -1.0 : 1.0;
    auto clamp = [chi, lo, hi](double l) { return chi(std::clamp(l, lo, hi)); };
    auto ud = [clamp, su](double l) { return su * std::exp(-clamp(l)); };
    auto vd = [clamp](double l) { return std::exp(clamp(l)); };
    auto Ud = RealFunction::sample(ud, lo, hi, n, Tail::constant(ud(lo)), Tail::constant(ud(hi)));
    auto Vd = RealFunction::sample(vd, lo, hi, n, Tail::constant(vd(lo)), Tail::constant(vd(hi)));
    const double base = std::clamp(0.0, lo, hi);
    auto shift = [](RealFunction F, double by) {
      std::vector<double> y = F.values();
      for (double& t : y) t += by;
      const auto L = F.left_tail();
      const auto R = F.right_tail();
      auto e = F.exact();
      numerics::Evaluator ex;
      if (e) ex = [e, by](double l) { return e(l) + by; };
      return RealFunction(F.nodes(), std::move(y), Tail::affine(L.slope, L.intercept + by),
                          Tail::affine(R.slope, R.intercept + by), ex);
    };
    // u(base) = x0 - x1, v(base) = x0 + x1.
    auto U = shift(numerics::cumulative_integral(Ud, base), x0 - x1);
    auto V = shift(numerics::cumulative_integral(Vd, base), x0 + x1);
    return {std::move(U), std::move(V), std::move(Ud), std::move(Vd), kind, eps_min};
  }

  static WorldlineCurve static_line(double x1, double lo, double hi, std::size_t n = 4097) {
    return from_rapidity([](double) { return 0.0; }, CurveKind::static_line, lo, hi, n, 0.0, x1);
  }

  static WorldlineCurve boosted(double rapidity, double lo, double hi, std::size_t n = 4097) {
    return from_rapidity([rapidity](double) { return rapidity; }, CurveKind::timelike, lo, hi, n);
  }

  /// u = lambda, v = v0 (null_left) or v = lambda, u = u0 (null_right).
  static WorldlineCurve null_ray(CurveKind kind, double lo, double hi, double other = 0.0, std::size_t n = 257) {
    if (kind != CurveKind::null_left && kind != CurveKind::null_right) throw InputError("null_ray: kind must be null");
    auto line = RealFunction::sample([](double l) { return l; }, lo, hi, n, Tail::affine(1.0, 0.0),
                                     Tail::affine(1.0, 0.0));
    auto flat = RealFunction::sample([other](double) { return other; }, lo, hi, n, Tail::constant(other),
                                     Tail::constant(other));
    auto one = RealFunction::sample([](double) { return 1.0; }, lo, hi, n, Tail::constant(1.0), Tail::constant(1.0));
    auto zero = RealFunction::sample([](double) { return 0.0; }, lo, hi, n, Tail::constant(0.0), Tail::constant(0.0));
    if (kind == CurveKind::null_left) return {line, flat, one, zero, kind, 0.0};
    return {flat, line, zero, one, kind, 0.0};
  }
};

/// Curve from rows (lambda, u, v); u' and v' by differentiation.
inline WorldlineCurve parse_curve_csv(std::istream& in, CurveKind kind, double eps_min = 1e-3) {
  std::vector<double> l, u, v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b, c;
    if (!(row >> a >> b >> c)) {
      if (l.empty()) continue;
      throw InputError("curve csv: malformed row");
    }
    l.push_back(a);
    u.push_back(b);
    v.push_back(c);
  }
  if (l.size() < 16) throw InputError("curve csv: need at least 16 rows");
  RealFunction U(l, u);
  RealFunction V(l, v);
  auto Ud = numerics::differentiate(U, 1);
  auto Vd = numerics::differentiate(V, 1);
  const auto ext = [](const RealFunction& F, const RealFunction& D) {
    return F.with_tails(Tail::affine(D.values().front(), F.values().front() - D.values().front() * F.lo()),
                        Tail::affine(D.values().back(), F.values().back() - D.values().back() * F.hi()));
  };
  U = ext(U, Ud);
  V = ext(V, Vd);
  Ud = Ud.with_tails(Tail::constant(Ud.values().front()), Tail::constant(Ud.values().back()));
  Vd = Vd.with_tails(Tail::constant(Vd.values().front()), Tail::constant(Vd.values().back()));
  return {std::move(U), std::move(V), std::move(Ud), std::move(Vd), kind, eps_min};
}

namespace detail {

/// Resamples G(lambda) |dx/dlambda| on a uniform grid in x = x(lambda), the
/// null coordinate of one chiral half, inverting x(lambda) by TOMS 748.
inline WeightFunction null_projection(const WeightFunction& G, const RealFunction& x, const RealFunction& xdot,
                                      const std::string& name) {
  const double l0 = G.f().lo();
  const double l1 = G.f().hi();
  const double a = x(l0);
  const double b = x(l1);
  const bool increasing = b > a;
  const std::size_t n = G.f().size();
  auto grid = RealFunction::linspace(std::min(a, b), std::max(a, b), n);
  std::vector<double> vals(n);
  const double scale = std::abs(b - a);
  for (std::size_t j = 0; j < n; ++j) {
    double lam;
    if (j == 0) lam = increasing ? l0 : l1;
    else if (j == n - 1) lam = increasing ? l1 : l0;
    else lam = numerics::find_root_monotone([&](double l) { return x(l) - grid[j]; }, Interval(l0, l1), scale);
    vals[j] = G(lam) * std::abs(xdot(lam));
  }
  // Straight tails: |x'| is constant there, so the decay model carries over.
  const Tail left = increasing ? G.f().left_tail() : G.f().right_tail();
  const Tail right = increasing ? G.f().right_tail() : G.f().left_tail();
  std::optional<Interval> support;
  if (G.decay() == DecayClass::compact) {
    const double s0 = x(G.support()->lo);
    const double s1 = x(G.support()->hi);
    support = Interval(std::min(s0, s1), std::max(s0, s1));
  }
  return {RealFunction(std::move(grid), std::move(vals), left, right), G.decay(), support, name};
}

}  // namespace detail

/// inf over states of int <rho_gamma> G dlambda:
/// -(c_R/12 pi) int (d/du sqrt(G_R/|dlambda/du|))^2 du - (c_L/12 pi) (same in v).
inline BoundRecord worldline_bound(const WorldlineCurve& curve, const WeightFunction& G, double cL, double cR) {
  weights::require_central_charge(cL);
  weights::require_central_charge(cR);
  BoundRecord rec;
  rec.flags["weight_within_hypotheses"] = G.within_hypotheses();
  if (curve.kind == CurveKind::null_left) {
    rec.components["right"] = weights::qei_functional(G, cR);
    rec.components["left"] = 0.0;
  } else if (curve.kind == CurveKind::null_right) {
    rec.components["left"] = weights::qei_functional(G, cL);
    rec.components["right"] = 0.0;
  } else {
    auto min_abs = [&](const RealFunction& d) {
      double m = std::min(std::abs(d.left_tail().intercept), std::abs(d.right_tail().intercept));
      for (double t : d.values()) m = std::min(m, std::abs(t));
      return m;
    };
    const double m = std::min(min_abs(curve.udot), min_abs(curve.vdot));
    if (!(m >= curve.eps_min)) throw InputError("asymptotically null curve: |u'| or |v'| falls below eps_min");
    const auto GR = detail::null_projection(G, curve.u, curve.udot, G.name() + "-R");
    const auto GL = detail::null_projection(G, curve.v, curve.vdot, G.name() + "-L");
    rec.components["right"] = weights::qei_functional(GR, cR);
    rec.components["left"] = weights::qei_functional(GL, cL);
  }
  rec.bound = rec.components["left"] + rec.components["right"];
  return rec;
}

// ---------------------------------------------------------------------------
// Tensor weights and null averages

/// f^{mu nu}(x0, x1) on a rectangle, components in the order 00, 01, 10, 11.
struct TensorWeight {
  using Field = std::function<double(double, double)>;
  Interval x0;
  Interval x1;
  std::size_t n0 = 512;
  std::size_t n1 = 512;
  // Row-major samples, index i0 * n1 + i1.
  std::array<std::vector<double>, 4> samples;
  std::array<Field, 4> f;

  static TensorWeight from_functions(std::array<Field, 4> comps, Interval x0, Interval x1, std::size_t n = 512) {
    TensorWeight w{x0, x1, n, n, {}, {}};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!comps[k]) comps[k] = [](double, double) { return 0.0; };
      w.samples[k].resize(n * n);
      const auto g0 = RealFunction::linspace(x0.lo, x0.hi, n);
      const auto g1 = RealFunction::linspace(x1.lo, x1.hi, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w.samples[k][i * n + j] = comps[k](g0[i], g1[j]);
    }
    w.f = std::move(comps);
    return w;
  }

  /// Grid samples only; off-grid values by local 4x4 Lagrange interpolation.
  static TensorWeight from_grid(Interval x0, Interval x1, std::size_t n0, std::size_t n1,
                                std::array<std::vector<double>, 4> samples) {
    if (n0 < 4 || n1 < 4) throw InputError("tensor weight: grid needs at least 4x4 nodes");
    for (const auto& s : samples)
      if (s.size() != n0 * n1) throw InputError("tensor weight: sample count does not match the grid");
    TensorWeight w{x0, x1, n0, n1, std::move(samples), {}};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto data = w.samples[k];
      w.f[k] = [data, x0, x1, n0, n1](double a, double b) {
        if (a < x0.lo || a > x0.hi || b < x1.lo || b > x1.hi) return 0.0;
        const double h0 = x0.length() / static_cast<double>(n0 - 1);
        const double h1 = x1.length() / static_cast<double>(n1 - 1);
        const double s = (a - x0.lo) / h0;
        const double t = (b - x1.lo) / h1;
        const auto i0 = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(s) - 1)), n0 - 4);
        const auto j0 = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(t) - 1)), n1 - 4);
        auto basis = [](double z, std::size_t first, std::size_t k) {
          double l = 1.0;
          for (std::size_t m = first; m < first + 4; ++m)
            if (m != k) l *= (z - static_cast<double>(m)) / static_cast<double>(static_cast<long>(k) - static_cast<long>(m));
          return l;
        };
        double sum = 0.0;
        for (std::size_t i = i0; i < i0 + 4; ++i) {
          const double li = basis(s, i0, i);
          for (std::size_t j = j0; j < j0 + 4; ++j) sum += li * basis(t, j0, j) * data[i * n1 + j];
        }
        return sum;
      };
    }
    return w;
  }

  [[nodiscard]] double fuu(double a, double b) const { return f[0](a, b) + f[3](a, b) - f[1](a, b) - f[2](a, b); }
  [[nodiscard]] double fvv(double a, double b) const { return f[0](a, b) + f[3](a, b) + f[1](a, b) + f[2](a, b); }

  [[nodiscard]] double node0(std::size_t i) const {
    return x0.lo + x0.length() * static_cast<double>(i) / static_cast<double>(n0 - 1);
  }
  [[nodiscard]] double node1(std::size_t j) const {
    return x1.lo + x1.length() * static_cast<double>(j) / static_cast<double>(n1 - 1);
  }
};

/// Rows x0, x1, f00, f01, f10, f11 on a rectangular grid (x0 outer, x1 inner).
inline TensorWeight parse_tensor_csv(std::istream& in) {
  std::vector<std::array<double, 6>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::array<double, 6> r{};
    if (!(row >> r[0] >> r[1] >> r[2] >> r[3] >> r[4] >> r[5])) {
      if (rows.empty()) continue;
      throw InputError("tensor csv: malformed row");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw InputError("tensor csv: no data");
  std::size_t n1 = 1;
  while (n1 < rows.size() && rows[n1][0] == rows[0][0]) ++n1;
  if (rows.size() % n1 != 0) throw InputError("tensor csv: rows do not form a rectangular grid");
  const std::size_t n0 = rows.size() / n1;
  std::array<std::vector<double>, 4> s;
  for (auto& c : s) c.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < 4; ++k) s[k][i] = rows[i][2 + k];
  return TensorWeight::from_grid({rows.front()[0], rows.back()[0]}, {rows.front()[1], rows[n1 - 1][1]}, n0, n1,
                                 std::move(s));
}

struct NullAverages {
  RealFunction FL;  // function of v
  RealFunction FR;  // function of u
  bool FL_nonnegative = true;
  bool FR_nonnegative = true;
};

namespace detail {

inline double line_quadrature(const std::function<double(double)>& g, double a, double b, std::size_t panels) {
  if (!(a < b)) return 0.0;
  const double h = (b - a) / static_cast<double>(panels);
  double s = 0.0;
  for (std::size_t k = 0; k < panels; ++k)
    s += numerics::detail::gauss_legendre(g, a + h * static_cast<double>(k), a + h * static_cast<double>(k + 1));
  return s;
}

/// Nonnegative up to interpolation noise of relative size null_threshold.
inline bool nonnegative(const std::vector<double>& y) {
  double m = 0.0;
  for (double t : y) m = std::max(m, std::abs(t));
  const double floor = -kDefaultTolerances.null_threshold * m;
  return std::all_of(y.begin(), y.end(), [floor](double t) { return t >= floor; });
}

}  // namespace detail

/// F_R(u) = (1/2) int f^{uu} dv and F_L(v) = (1/2) int f^{vv} du, the factor
/// being the Jacobian dx0 dx1 = du dv / 2, so that
/// int T_{mu nu} f^{mu nu} dx0 dx1 = int T_R F_R du + int T_L F_L dv.
/// Each line integral uses `panels` 8-point Gauss-Legendre panels.
inline NullAverages null_averages(const TensorWeight& weight, std::size_t n = 2049, std::size_t panels = 64) {
  const auto fw = std::make_shared<const TensorWeight>(weight);
  const double a0 = fw->x0.lo, b0 = fw->x0.hi, a1 = fw->x1.lo, b1 = fw->x1.hi;
  auto FR = [fw, a0, b0, a1, b1, panels](double u) {
    const double lo = std::max(2 * a0 - u, 2 * a1 + u);
    const double hi = std::min(2 * b0 - u, 2 * b1 + u);
    return 0.5 * detail::line_quadrature([&](double v) { return fw->fuu(0.5 * (u + v), 0.5 * (v - u)); }, lo, hi,
                                         panels);
  };
  auto FL = [fw, a0, b0, a1, b1, panels](double v) {
    const double lo = std::max(2 * a0 - v, v - 2 * b1);
    const double hi = std::min(2 * b0 - v, v - 2 * a1);
    return 0.5 * detail::line_quadrature([&](double u) { return fw->fvv(0.5 * (u + v), 0.5 * (v - u)); }, lo, hi,
                                         panels);
  };
  auto R = RealFunction::sample(FR, a0 - b1, b0 - a1, n);
  auto L = RealFunction::sample(FL, a0 + a1, b0 + b1, n);
  const bool lr = detail::nonnegative(L.values());
  const bool rr = detail::nonnegative(R.values());
  return {std::move(L), std::move(R), lr, rr};
}

namespace detail {

/// Null average as a weight: tiny negative roundoff clipped to zero.
inline WeightFunction as_weight(const RealFunction& F, const std::string& name) {
  std::vector<double> y = F.values();
  for (double& t : y) t = std::max(t, 0.0);
  auto e = F.exact();
  numerics::Evaluator ex;
  if (e) ex = [e](double x) { return std::max(e(x), 0.0); };
  RealFunction g(F.nodes(), std::move(y), Tail::zero(), Tail::zero(), ex);
  if (g.values().front() == 0.0 && g.values().back() == 0.0)
    return {std::move(g), DecayClass::compact, F.span(), name};
  return {std::move(g), DecayClass::schwartz, std::nullopt, name};
}

}  // namespace detail

/// -(c_L/12 pi) int (sqrt F_L)'^2 dv - (c_R/12 pi) int (sqrt F_R)'^2 du.
inline BoundRecord worldvolume_bound(const TensorWeight& fw, double cL, double cR, std::size_t n = 2049) {
  weights::require_central_charge(cL);
  weights::require_central_charge(cR);
  const auto na = null_averages(fw, n);
  if (!na.FL_nonnegative || !na.FR_nonnegative)
    throw InputError("hypothesis violated: null averages must be nonnegative");
  BoundRecord rec;
  rec.components["left"] = weights::qei_functional(detail::as_weight(na.FL, "F_L"), cL);
  rec.components["right"] = weights::qei_functional(detail::as_weight(na.FR, "F_R"), cR);
  rec.bound = rec.components["left"] + rec.components["right"];
  rec.flags["null_averages_nonnegative"] = true;
  return rec;
}

// ---------------------------------------------------------------------------
// Moving mirrors

/// Boundary v = p(u), equal to a Moebius map outside a compact set.
struct MirrorTrajectory {
  circle::LineReparam p;
  // Set by the Moebius factories: {p, u} vanishes identically.
  bool exact_mobius = false;

  static MirrorTrajectory identity(double lo = -10.0, double hi = 10.0, std::size_t n = 4097) {
    return {circle::LineReparam::from_mobius(circle::MobiusElement::identity(), lo, hi, n), true};
  }

  /// p(u) = u + a w bump((u - center)/w); a is limited so that p' > 0.
  static MirrorTrajectory accelerating(double a, double center, double width, std::size_t n = 8001) {
    if (!(width > 0.0)) throw InputError("mirror: width must be positive");
    auto b = [](double x) { return weights::detail::bump(x); };
    auto db = [](double x) {
      const double q = 1.0 - x * x;
      return q > 0.0 ? -2.0 * x / (q * q) * std::exp(-1.0 / q) : 0.0;
    };
    auto p = [=](double u) { return u + a * width * b((u - center) / width); };
    auto dp = [=](double u) { return 1.0 + a * db((u - center) / width); };
    const double pad = 0.25 * width;
    return {circle::LineReparam::from_functions(p, dp, center - width - pad, center + width + pad, n,
                                                circle::MobiusElement::identity())};
  }

  /// Moebius boundary on [lo, hi]; needs the pole of m outside that span.
  static MirrorTrajectory mobius(const circle::MobiusElement& m, double lo, double hi, std::size_t n = 4097) {
    if (!m.fixes_infinity()) {
      const double pole = -m.d() / m.c();
      if (pole >= lo && pole <= hi) throw InputError("mirror: Moebius pole inside the trajectory span");
    }
    return {circle::LineReparam::from_mobius(m, lo, hi, n), true};
  }

  [[nodiscard]] double operator()(double u) const { return p(u); }
  [[nodiscard]] double derivative(double u) const { return p.derivative(u); }
  [[nodiscard]] circle::CircleDiffeo lift(std::size_t n = circle::kDefaultNodes) const {
    return circle::lift_line_reparam(p, n);
  }

  [[nodiscard]] double inverse(double v) const {
    const auto core = p.core();
    const double vlo = p.V().values().front();
    const double vhi = p.V().values().back();
    if (v >= vlo && v <= vhi)
      return numerics::find_root_monotone([&](double u) { return p(u) - v; }, core, core.length());
    // Outside the core p is its Moebius tail, inverted in closed form.
    const auto& m = p.tail();
    return (m.d() * v - m.b()) / (m.a() - m.c() * v);
  }
};

/// <T_00> = -(c/24 pi){p, u} in the in-vacuum; both Schwarzian forms are
/// computed and must agree to 1e-6.
inline RealFunction mirror_vacuum_energy(const MirrorTrajectory& m, double c) {
  weights::require_central_charge(c);
  if (m.exact_mobius) {
    const auto& V = m.p.V();
    return V.with_values(std::vector<double>(V.size(), 0.0), Tail::zero(), Tail::zero());
  }
  const auto S = circle::schwarzian(m.p);
  if (S.discrepancy > 1e-6) throw NumericalError("resolution: mirror Schwarzian forms disagree");
  std::vector<double> y = S.values.values();
  for (double& t : y) t *= -c / (24.0 * kPi);
  return S.values.with_values(std::move(y), Tail::zero(), Tail::zero());
}

/// -(c/12 pi) int (sqrt G)'^2 dv - (c/24 pi) int {p, u} F_R du with
/// G(v) = F_L(v) + p'(p^{-1} v) F_R(p^{-1} v).
inline BoundRecord mirror_bound(const TensorWeight& fw, const MirrorTrajectory& m, double c, std::size_t n = 2049) {
  weights::require_central_charge(c);
  for (std::size_t i = 0; i < fw.n0; ++i) {
    for (std::size_t j = 0; j < fw.n1; ++j) {
      const std::size_t k = i * fw.n1 + j;
      const bool live = fw.samples[0][k] != 0.0 || fw.samples[1][k] != 0.0 || fw.samples[2][k] != 0.0 ||
                        fw.samples[3][k] != 0.0;
      if (!live) continue;
      const double u = fw.node0(i) - fw.node1(j);
      const double v = fw.node0(i) + fw.node1(j);
      if (!(v > m(u))) throw InputError("tensor weight must be supported in v > p(u)");
    }
  }
  const auto na = null_averages(fw, n);
  if (!na.FL_nonnegative || !na.FR_nonnegative)
    throw InputError("hypothesis violated: null averages must be nonnegative");

  const double lo = std::min(na.FL.lo(), m(na.FR.lo()));
  const double hi = std::max(na.FL.hi(), m(na.FR.hi()));
  const auto fl = [&](double v) { return na.FL.interpolate(v); };
  const auto fr = [&](double u) { return na.FR.interpolate(u); };
  auto G = [&](double v) {
    double g = 0.0;
    if (v >= na.FL.lo() && v <= na.FL.hi()) g += std::max(fl(v), 0.0);
    const double u = m.inverse(v);
    if (u >= na.FR.lo() && u <= na.FR.hi()) g += m.derivative(u) * std::max(fr(u), 0.0);
    return g;
  };
  const auto Gs = RealFunction::sample(G, lo, hi, 2 * n - 1, Tail::zero(), Tail::zero(), false);
  const bool compact = Gs.values().front() == 0.0 && Gs.values().back() == 0.0;
  const WeightFunction Gw(Gs, compact ? DecayClass::compact : DecayClass::schwartz,
                          compact ? std::optional<Interval>(Gs.span()) : std::nullopt, "G");

  // Schwarzian term on the mirror's grid, where {p, u} is supported.
  const auto S = circle::schwarzian(m.p);
  if (S.discrepancy > 1e-6) throw NumericalError("resolution: mirror Schwarzian forms disagree");
  std::vector<double> prod(S.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i) {
    const double u = S.values.nodes()[i];
    const double f = (u >= na.FR.lo() && u <= na.FR.hi()) ? std::max(fr(u), 0.0) : 0.0;
    prod[i] = S.values.values()[i] * f;
  }
  const double sterm =
      -c / (24.0 * kPi) * numerics::integrate(S.values.with_values(std::move(prod), Tail::zero(), Tail::zero()));

  BoundRecord rec;
  rec.components["G"] = weights::qei_functional(Gw, c);
  rec.components["schwarzian"] = sterm;
  rec.bound = rec.components["G"] + sterm;
  rec.flags["null_averages_nonnegative"] = true;
  return rec;
}

// ---------------------------------------------------------------------------
// Averaged energy conditions and unweighted averages

/// int <T> dv for a state profile; nonnegative for every genuine state.
inline double anec_check(const qei::EnergyProfile& profile) {
  if (profile.provenance != qei::Provenance::diffeo_vacuum)
    throw InputError("anec_check: profile does not come from a diffeomorphism-transformed vacuum");
  return qei::null_momentum(profile);
}

/// -(c/12 pi) int_0^inf (sqrt G)'^2 dv for G = 1 near the origin: only the
/// right-hand rounding of the half-line average contributes.
inline double smoothed_halfline_bound(const WeightFunction& G, double c) {
  weights::require_central_charge(c);
  if (std::abs(G(0.0) - 1.0) > 1e-12) throw InputError("G must equal unity near origin");
  const auto s = weights::sqrt_weight_derivative(G);
  const auto sq = numerics::multiply(s.phi, s.phi);
  return -c / (12.0 * kPi) * numerics::integrate(sq, Interval(0.0, numerics::kInf));
}

struct DemoParams {
  // Amplitude of the concave dip on (-1, 0); W'' >= -1 needs a <= e.
  double a = 1.0;
  std::size_t n = 8001;
};

/// W = 1 + a q + t r on [-1, 1], with
/// q'' = -K(v + 1/2; 1/2) + 5 K(v - 1/4; 1/4) - 3 K(v - 3/4; 1/4),
/// K(x; s) = bump(x/s), whose zeroth and first moments vanish so q is
/// supported in (-1, 1); r = e bump(2v - 1). t is tuned so int (W^-2 - 1) = 0.
struct DemoProfile {
  RealFunction W;
  RealFunction Wpp;
  double t = 0.0;
  double a = 0.0;
  std::map<std::string, bool> hypotheses;

  /// {V, v} = -2 W''/W, where V' = W^-2.
  [[nodiscard]] std::vector<double> schwarzian() const {
    std::vector<double> s(W.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = -2.0 * Wpp.values()[i] / W.values()[i];
    return s;
  }
};

namespace detail {

inline double K(double x, double s) { return weights::detail::bump(x / s); }

inline double bump_dd(double x) {
  const double q = 1.0 - x * x;
  if (q <= 0.0) return 0.0;
  const double g1 = -2.0 * x / (q * q);
  const double dg1 = -2.0 * (1.0 + 3.0 * x * x) / (q * q * q);
  return std::exp(-1.0 / q) * (g1 * g1 + dg1);
}

inline double qpp(double v) { return -K(v + 0.5, 0.5) + 5.0 * K(v - 0.25, 0.25) - 3.0 * K(v - 0.75, 0.25); }
inline double r(double v) { return std::numbers::e * weights::detail::bump(2.0 * v - 1.0); }
inline double rpp(double v) { return 4.0 * std::numbers::e * bump_dd(2.0 * v - 1.0); }

}  // namespace detail

inline DemoProfile build_demo(const DemoParams& p = {}) {
  if (!(p.a > 0.0)) throw InputError("demo: amplitude must be positive");
  if (p.n < 101) throw InputError("demo: grid too coarse");
  auto q2 = RealFunction::sample(detail::qpp, -1.0, 1.0, p.n);
  const auto q1 = numerics::cumulative_integral(q2, -1.0);
  const auto q0 = numerics::cumulative_integral(q1.with_exact({}), -1.0);
  const auto& x = q0.nodes();
  auto make = [&](double t) {
    std::vector<double> W(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) W[i] = 1.0 + p.a * q0.values()[i] + t * detail::r(x[i]);
    return W;
  };
  auto mean_f = [&](double t) {
    auto W = make(t);
    for (double& w : W) {
      if (!(w > 0.0)) throw InputError("demo: W must stay positive");
      w = 1.0 / (w * w) - 1.0;
    }
    return numerics::integrate(RealFunction(x, std::move(W)));
  };
  double hi = 0.05;
  while (mean_f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e3) throw InputError("demo hypothesis 'int f = 0' cannot be met");
  }
  const double t = numerics::find_root_monotone(mean_f, Interval(0.0, hi), 1.0);

  const auto W = make(t);
  std::vector<double> Wpp(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) Wpp[i] = p.a * q2.values()[i] + t * detail::rpp(x[i]);

  DemoProfile d{RealFunction(x, W, Tail::constant(1.0), Tail::constant(1.0)), RealFunction(x, Wpp), t, p.a, {}};
  double fmin = 0.0;
  double fint = 0.0;
  bool concave = true;
  bool bounded = true;
  bool nonzero = false;
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    f[i] = 1.0 / (W[i] * W[i]) - 1.0;
    fmin = std::min(fmin, f[i]);
    if (x[i] > -1.0 && x[i] < 0.0) {
      concave = concave && Wpp[i] <= 0.0;
      bounded = bounded && Wpp[i] >= -1.0;
      nonzero = nonzero || f[i] != 0.0;
    }
  }
  fint = numerics::integrate(RealFunction(x, f));
  d.hypotheses["f >= -1"] = fmin >= -1.0;
  d.hypotheses["int f = 0"] = std::abs(fint) < 1e-12;
  d.hypotheses["W'' <= 0 on (-1,0)"] = concave;
  d.hypotheses["W'' >= -1 on (-1,0)"] = bounded;
  d.hypotheses["f not identically zero on (-1,0)"] = nonzero;
  d.hypotheses["W = 1 outside (-1,1)"] =
      std::abs(W.front() - 1.0) < 1e-12 && std::abs(W.back() - 1.0) < 1e-12;
  for (const auto& [name, ok] : d.hypotheses)
    if (!ok) throw InputError("demo hypothesis violated: " + name);
  return d;
}

/// State profile of U(D_lambda)^{-1} U(rho)^{-1} Omega for the demo V:
/// <T(v)> = -(c/24 pi) lambda^2 {V, lambda v}.
inline qei::EnergyProfile demo_profile(const DemoProfile& d, double lambda, double c) {
  if (!(lambda > 0.0)) throw InputError("demo: lambda must be positive");
  weights::require_central_charge(c);
  const auto S = d.schwarzian();
  std::vector<double> v(S.size());
  std::vector<double> T(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    v[i] = d.W.nodes()[i] / lambda;
    T[i] = -c / (24.0 * kPi) * lambda * lambda * S[i];
  }
  return {RealFunction(std::move(v), std::move(T)), 0.0, qei::Provenance::diffeo_vacuum, std::nullopt, c, 0.0};
}

struct DemoRow {
  double lambda = 0.0;
  double I = 0.0;          // int_{-inf}^0 <T>
  double full_line = 0.0;  // int <T>
};

struct DemoResult {
  DemoProfile profile;
  std::vector<DemoRow> rows;
  // int {V, v}/sqrt(V') dv, which vanishes identically.
  double identity_integral = 0.0;
};

inline DemoResult unweighted_demo(const DemoParams& params, const std::vector<double>& lambdas, double c) {
  weights::require_central_charge(c);
  if (lambdas.empty()) throw InputError("demo: empty lambda list");
  DemoResult out{build_demo(params), {}, 0.0};
  const auto S = out.profile.schwarzian();
  std::vector<double> id(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) id[i] = S[i] * out.profile.W.values()[i];
  out.identity_integral = numerics::integrate(RealFunction(out.profile.W.nodes(), std::move(id)));
  for (double l : lambdas) {
    const auto prof = demo_profile(out.profile, l, c);
    const double I = numerics::integrate(prof.T, Interval(-numerics::kInf, 0.0));
    out.rows.push_back({l, I, anec_check(prof)});
  }
  return out;
}

}  // namespace cftqei::applications
