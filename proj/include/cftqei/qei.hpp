#pragma once

// Sharp QEI machinery: the regularised weight H = G + eps(1 - eta_n), the
// reparametrisation V = int dv/H, optimal-state stress profiles and the
// (eps, n) sharpness experiment.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "cftqei/circle.hpp"
#include "cftqei/errors.hpp"
#include "cftqei/numerics.hpp"
#include "cftqei/tolerance.hpp"
#include "cftqei/weights.hpp"

namespace cftqei::qei {

using numerics::Interval;
using numerics::RealFunction;
using numerics::Tail;
using weights::DecayClass;
using weights::WeightFunction;

inline constexpr double kPi = std::numbers::pi;

namespace detail {

/// exp(1 - 1/(1-x^2)): the catalog bump rescaled to peak 1.
inline double unit_bump(double x) {
  const double q = 1.0 - x * x;
  return q > 0.0 ? std::exp(1.0 - 1.0 / q) : 0.0;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline double simpson_or_quadrature(std::vector<double> x, std::vector<double> y) {
  return numerics::integrate(RealFunction(std::move(x), std::move(y)));
}

}  // namespace detail

inline Interval compact_support(const WeightFunction& G) {
  if (G.decay() != DecayClass::compact || !G.support()) throw InputError("weight must be compactly supported");
  return *G.support();
}

/// lambda_eps = |supp G|^{-1} int G/(G + eps); increases to 1 as eps -> 0.
inline double lambda_eps(const WeightFunction& G, double eps) {
  if (!(eps > 0.0)) throw InputError("lambda_eps: eps must be positive");
  const Interval s = compact_support(G);
  if (G.trivial()) throw InputError("empty support");
  numerics::Evaluator exact;
  if (G.f().has_exact()) {
    auto g = G.f().exact();
    exact = [g, eps](double v) {
      const double x = g(v);
      return x / (x + eps);
    };
  }
  std::vector<double> y(G.f().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = G.f().values()[i] / (G.f().values()[i] + eps);
  const RealFunction q(G.f().nodes(), std::move(y), Tail::zero(), Tail::zero(), std::move(exact));
  return numerics::integrate(q, s) / s.length();
}

/// Corrector eta = A unit_bump(v/w) with 0 < eta <= 1/2 and
/// int eta/(1-eta) = support_measure.
struct Corrector {
  WeightFunction eta;
  double amplitude = 0.0;
  double width = 0.0;

  [[nodiscard]] double operator()(double v) const { return amplitude * detail::unit_bump(v / width); }
};

inline double corrector_capacity(double amplitude, double width) {
  auto f = [amplitude](double x) {
    const double e = amplitude * detail::unit_bump(x);
    return e / (1.0 - e);
  };
  return width * numerics::integrate(RealFunction::sample(f, -1.0, 1.0, 513));
}

inline Corrector build_eta(double support_measure) {
  if (!(support_measure > 0.0)) throw InputError("build_eta: support measure must be positive");
  double w = 3.0 * support_measure;
  while (corrector_capacity(0.5, w) <= support_measure) w *= 2.0;
  const double A = numerics::find_root_monotone(
      [&](double a) { return corrector_capacity(a, w) - support_measure; }, Interval(0.0, 0.5), support_measure);
  auto e = [A, w](double v) { return A * detail::unit_bump(v / w); };
  WeightFunction eta(RealFunction::sample(e, -w, w, 2049), DecayClass::compact, Interval(-w, w), "corrector");
  return {std::move(eta), A, w};
}

/// V(v) = int_0^v dv'/H on H's grid. H must be positive with equal constant
/// tails eps, so V is v/eps + alpha outside the grid.
struct Reparam {
  circle::LineReparam V;
  double alpha_left = 0.0;
  double alpha_right = 0.0;
};

inline Reparam build_reparam(const RealFunction& H) {
  const auto& h = H.values();
  if (!(*std::min_element(h.begin(), h.end()) > 0.0)) throw InputError("build_reparam: H is not bounded below");
  const auto& L = H.left_tail();
  const auto& R = H.right_tail();
  const bool const_tails = L.kind == Tail::Kind::affine && R.kind == Tail::Kind::affine && L.slope == 0.0 &&
                           R.slope == 0.0 && L.intercept > 0.0 && L.intercept == R.intercept;
  if (!const_tails) throw InputError("build_reparam: H must equal the same positive constant on both tails");
  const double eps = L.intercept;

  std::vector<double> inv(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) inv[i] = 1.0 / h[i];
  numerics::Evaluator exact;
  if (H.has_exact()) {
    auto e = H.exact();
    exact = [e](double v) { return 1.0 / e(v); };
  }
  const RealFunction Vp(H.nodes(), std::move(inv), Tail::constant(1.0 / eps), Tail::constant(1.0 / eps), exact);

  double base = 0.0;
  double offset = 0.0;
  if (0.0 < H.lo()) {
    base = H.lo();
    offset = H.lo() / eps;
  } else if (0.0 > H.hi()) {
    base = H.hi();
    offset = H.hi() / eps;
  }
  auto F = numerics::cumulative_integral(Vp, base);
  std::vector<double> vals = F.values();
  for (double& v : vals) v += offset;
  const double aL = vals.front() - H.lo() / eps;
  const double aR = vals.back() - H.hi() / eps;
  numerics::Evaluator vex;
  if (F.has_exact()) {
    auto fe = F.exact();
    vex = [fe, offset](double v) { return fe(v) + offset; };
  }
  RealFunction V(H.nodes(), std::move(vals), Tail::affine(1.0 / eps, aL), Tail::affine(1.0 / eps, aR), vex);
  return {circle::LineReparam(std::move(V), Vp, circle::MobiusElement::affine(1.0 / eps, aR)), aL, aR};
}

/// Grid resolution for a regularised family.
struct FamilyGrid {
  std::size_t support_nodes = 20001;
  std::size_t corrector_nodes = 4001;
  std::size_t pad_nodes = 16;
  // Coarse spacing in the constant region, in corrector half-widths.
  double gap_step = 0.25;
  // The V grid extends this many corrector half-widths past supp H.
  double margin = 5.0;
};

/// H_{n,eps} = G + eps(1 - eta((v - n)/lambda_eps)) and its reparametrisation.
struct RegularizedFamily {
  WeightFunction G;
  double epsilon = 0.0;
  double n = 0.0;
  double lambda = 0.0;
  Corrector eta;
  RealFunction H;
  circle::LineReparam V;
  double alpha_mismatch = 0.0;
  // Index ranges [first, last] of uniformly refined segments; H is exactly
  // eps between them.
  std::vector<std::pair<std::size_t, std::size_t>> segments;

  [[nodiscard]] Interval corrector_support() const {
    const double r = lambda * eta.width;
    return {n - r, n + r};
  }
};

/// Smallest admissible n: the corrector support touches supp G.
inline double n0(const WeightFunction& G, double eps, const Corrector& eta) {
  return compact_support(G).hi + lambda_eps(G, eps) * eta.width;
}

inline RegularizedFamily build_regularized_weight(const WeightFunction& G, double eps, double n,
                                                  const FamilyGrid& grid = {}) {
  const Interval s = compact_support(G);
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  const double lam = lambda_eps(G, eps);
  Corrector eta = build_eta(s.length());
  const double r = lam * eta.width;
  if (!(n - r > s.hi)) throw InputError("n below n0: corrector overlaps supp G");

  const auto Gw = G;
  const auto et = eta;
  auto Hf = [Gw, et, eps, n, lam](double v) { return Gw(v) + eps * (1.0 - et((v - n) / lam)); };

  // Segment grids: uniform over each support plus pad_nodes of constant H.
  auto segment = [&](double lo, double hi, std::size_t m) {
    const double h = (hi - lo) / static_cast<double>(m - 1);
    const double p = h * static_cast<double>(grid.pad_nodes);
    return std::pair{RealFunction::linspace(lo - p, hi + p, m + 2 * grid.pad_nodes), h};
  };
  auto [xg, hg] = segment(s.lo, s.hi, grid.support_nodes);
  auto [xc, hc] = segment(n - r, n + r, grid.corrector_nodes);
  const double outer_lo = s.lo - grid.margin * r;
  const double outer_hi = n + r + grid.margin * r;
  const double coarse = grid.gap_step * r;

  std::vector<double> x;
  std::vector<std::pair<std::size_t, std::size_t>> segs;
  auto fill = [&](double from, double to) {
    // Coarse nodes strictly between from and to.
    const double len = to - from;
    if (!(len > 0.0)) return;
    const auto k = static_cast<std::size_t>(std::ceil(len / coarse));
    for (std::size_t i = 1; i < k; ++i) x.push_back(from + len * static_cast<double>(i) / static_cast<double>(k));
  };
  auto append = [&](const std::vector<double>& seg) {
    segs.emplace_back(x.size(), x.size() + seg.size() - 1);
    x.insert(x.end(), seg.begin(), seg.end());
  };
  x.push_back(outer_lo);
  if (xg.back() < xc.front()) {
    fill(outer_lo, xg.front());
    append(xg);
    fill(xg.back(), xc.front());
    append(xc);
  } else {
    // Padded segments overlap: one uniform segment at the finer step.
    const double h = std::min(hg, hc);
    const double lo = xg.front();
    const double hi = xc.back();
    fill(outer_lo, lo);
    append(RealFunction::linspace(lo, hi, static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1));
  }
  fill(x.back(), outer_hi);
  x.push_back(outer_hi);

  RealFunction H = RealFunction::sample_on(Hf, std::move(x), Tail::constant(eps), Tail::constant(eps));
  auto rep = build_reparam(H);
  const double mis = std::abs(rep.alpha_left - rep.alpha_right);
  return {G, eps, n, lam, std::move(eta), std::move(H), std::move(rep.V), mis, std::move(segs)};
}

// ---------------------------------------------------------------------------
// Stress-energy profiles

enum class Provenance { diffeo_vacuum, external };

/// <T(v)> on a grid, decaying like v^-4 beyond it.
struct EnergyProfile {
  RealFunction T;
  // |T(v)| <= tail_constant / v^4 beyond the sampled window.
  double tail_constant = 0.0;
  Provenance provenance = Provenance::external;
  std::optional<circle::CircleDiffeo> diffeo;
  double central_charge = 1.0;
  // Sup-norm discrepancy between the two Schwarzian forms.
  double discrepancy = 0.0;
};

inline double declared_tail_constant(const RealFunction& T) {
  auto at = [&](std::size_t i) {
    const double v = T.nodes()[i];
    return std::abs(T.values()[i]) * v * v * v * v;
  };
  return std::max(at(0), at(T.size() - 1));
}

/// External profile from samples; tails are v^-4 anchored at the edges.
inline EnergyProfile external_profile(std::vector<double> v, std::vector<double> T, double c = 1.0) {
  RealFunction f(std::move(v), std::move(T), Tail::power(4.0), Tail::power(4.0));
  const double C = declared_tail_constant(f);
  return {std::move(f), C, Provenance::external, std::nullopt, c, 0.0};
}

/// <T(v)> = -(c/24 pi) {V, v} in the state U(rho)^{-1} Omega, where V is the
/// light-ray map of rho. The circle Schwarzian is computed spectrally and
/// interpolated locally in theta.
inline EnergyProfile diffeo_vacuum_profile(const circle::CircleDiffeo& r, double c) {
  weights::require_central_charge(c);
  const auto S = circle::schwarzian(r);
  const auto& th = S.values.nodes();
  const auto& sv = S.values.values();
  const std::size_t N = th.size();
  const double h = circle::kTwoPi / static_cast<double>(N);
  // Periodic extension of S on [-pi - 8h, pi + 8h].
  const std::size_t ext = 8;
  std::vector<double> tx;
  std::vector<double> ty;
  const auto half = static_cast<long>(N / 2);
  for (long j = -half - static_cast<long>(ext); j <= half + static_cast<long>(ext); ++j) {
    tx.push_back(h * static_cast<double>(j));
    const long m = ((j % static_cast<long>(N)) + static_cast<long>(N)) % static_cast<long>(N);
    ty.push_back(sv[static_cast<std::size_t>(m)]);
  }
  const RealFunction St(std::move(tx), std::move(ty));
  const double k = -c / (24.0 * kPi);
  auto T = [St, k](double v) {
    const double s = 1.0 + v * v;
    return k * 4.0 * St.interpolate(circle::angle_of(v)) / (s * s);
  };
  // v-nodes at the interior theta-grid angles.
  std::vector<double> v;
  for (std::size_t j = 0; j < N; ++j) {
    const double t = th[j] > circle::kPi ? th[j] - circle::kTwoPi : th[j];
    if (std::abs(t) < circle::kPi - 0.5 * h) v.push_back(circle::ray_of(t));
  }
  std::sort(v.begin(), v.end());
  auto f = RealFunction::sample_on(T, std::move(v), Tail::power(4.0), Tail::power(4.0));
  const double C = declared_tail_constant(f);
  return {std::move(f), C, Provenance::diffeo_vacuum, r, c, S.discrepancy};
}

/// Optimal-state profile for the family: -(c/24 pi){V, v} with V' = 1/H,
/// i.e. -(c/24 pi)(H'^2/(2H^2) - H''/H), and equivalently
/// (c/12 pi)(sqrt H)''/sqrt H. Both forms are evaluated on each refined
/// segment by differentiating H - eps and sqrt H - sqrt eps, which vanish
/// exactly where H is constant; between segments the profile is zero.
inline EnergyProfile sharp_state_profile(const RegularizedFamily& fam, double c, std::size_t lift_nodes = 0,
                                         double resolution_tol = 1e-6) {
  weights::require_central_charge(c);
  const auto& x = fam.H.nodes();
  std::vector<double> T(x.size(), 0.0);
  double disc = 0.0;
  const double k = -c / (24.0 * kPi);
  const double eps = fam.epsilon;
  const double se = std::sqrt(eps);
  for (const auto& [a, b] : fam.segments) {
    std::vector<double> xs(x.begin() + static_cast<long>(a), x.begin() + static_cast<long>(b) + 1);
    const std::size_t m = xs.size();
    std::vector<double> dh(m);
    std::vector<double> dq(m);
    std::vector<double> H(m);
    for (std::size_t i = 0; i < m; ++i) {
      dh[i] = fam.G(xs[i]) - eps * fam.eta((xs[i] - fam.n) / fam.lambda);
      H[i] = eps + dh[i];
      dq[i] = dh[i] / (std::sqrt(H[i]) + se);
    }
    const RealFunction fh(xs, std::move(dh));
    const RealFunction fq(xs, std::move(dq));
    const auto h1 = numerics::differentiate(fh, 1);
    const auto h2 = numerics::differentiate(fh, 2);
    const auto q2 = numerics::differentiate(fq, 2);
    for (std::size_t i = 0; i < m; ++i) {
      const double r = h1.values()[i] / H[i];
      const double sA = 0.5 * r * r - h2.values()[i] / H[i];
      const double sB = -2.0 * q2.values()[i] / std::sqrt(H[i]);
      disc = std::max(disc, std::abs(sA - sB));
      T[a + i] = k * sA;
    }
  }
  if (disc > resolution_tol) throw NumericalError("resolution: Schwarzian forms disagree by " + std::to_string(disc));
  std::optional<circle::CircleDiffeo> lifted;
  if (lift_nodes > 0) lifted = circle::lift_line_reparam(fam.V, lift_nodes, false);
  return {RealFunction(x, std::move(T)), 0.0, Provenance::diffeo_vacuum, std::move(lifted), c, disc};
}

/// int <T> dv. For diffeo-vacuum profiles with a stored diffeo this is
/// -(c/24 pi) int S(theta)(1 + cos theta) dtheta on the periodic grid.
inline double null_momentum(const EnergyProfile& p) {
  if (p.diffeo) {
    const auto S = circle::schwarzian(*p.diffeo);
    const auto& th = S.values.nodes();
    double sum = 0.0;
    for (std::size_t j = 0; j < th.size(); ++j) sum += S.values.values()[j] * (1.0 + std::cos(th[j]));
    return -p.central_charge / (24.0 * kPi) * sum * circle::kTwoPi / static_cast<double>(th.size());
  }
  return numerics::integrate(p.T);
}

/// margin = int G <T> - qei_functional(G, c). Nonnegative for every
/// legitimate state, which is the inequality itself.
inline double verify_bound(const EnergyProfile& profile, const WeightFunction& G, double c,
                           const ToleranceSet& tol = kDefaultTolerances) {
  if (profile.provenance != Provenance::diffeo_vacuum)
    throw InputError("verify_bound: profile does not come from a diffeomorphism-transformed vacuum");
  const double lhs = numerics::integrate(numerics::multiply(G.f(), profile.T));
  return lhs - weights::qei_functional(G, c, tol);
}

/// Gap of the sharp family in closed form: int G <T> - bound equals
/// (c/48 pi) int G'^2 eps^2 / (G (G + eps)^2) once supports are disjoint,
/// evaluated as (c/12 pi) int phi^2 eps^2/(G + eps)^2.
inline double sharp_gap_oracle(const WeightFunction& G, double eps, double c) {
  const auto s = weights::sqrt_weight_derivative(G);
  std::vector<double> y(G.f().size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double q = eps / (G.f().values()[i] + eps);
    y[i] = s.phi.values()[i] * s.phi.values()[i] * q * q;
  }
  return c / (12.0 * kPi) * numerics::integrate(G.f().with_values(std::move(y), Tail::zero(), Tail::zero()));
}

// ---------------------------------------------------------------------------
// Sharpness experiment

struct NPolicy {
  // Initial offset of n past the right edge of supp G, in corrector half-widths.
  double initial_widths = 10.0;
  double change_tol = 1e-8;
  int max_doublings = 6;
};

struct SharpnessRow {
  double epsilon = 0.0;
  double n = 0.0;
  double lhs = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double runtime_ms = 0.0;
  double lambda = 0.0;
  double discrepancy = 0.0;
};

struct SharpnessResult {
  std::vector<SharpnessRow> rows;
  WeightFunction weight;  // after windowing, if any
  double window = 0.0;    // m of chi(v/m); 0 for compact input
};

inline std::vector<double> default_eps_list() { return {1e-1, 1e-2, 1e-3, 1e-4}; }

/// chi((v - c)/m) G(v) with chi = 1 on [-1, 1] and 0 outside [-2, 2].
inline WeightFunction window_weight(const WeightFunction& G, double center, double m, std::size_t n = 4096) {
  auto Gf = G;
  auto f = [Gf, center, m](double v) {
    const double chi = weights::detail::smooth_step(2.0 - std::abs(v - center) / m);
    return chi == 0.0 ? 0.0 : chi * Gf(v);
  };
  return {RealFunction::sample(f, center - 2.0 * m, center + 2.0 * m, n), DecayClass::compact,
          Interval(center - 2.0 * m, center + 2.0 * m), G.name() + "-windowed"};
}

/// Windowed G_m with m doubling until the bound moves by less than tol.
inline std::pair<WeightFunction, double> compactify(const WeightFunction& G, double tol = 1e-9) {
  if (G.decay() == DecayClass::compact) return {G, 0.0};
  if (!G.within_hypotheses()) throw InputError("sharpness: power-law weights are outside the hypotheses");
  const double center = 0.5 * (G.f().lo() + G.f().hi());
  double m = 0.25 * (G.f().hi() - G.f().lo());
  WeightFunction cur = window_weight(G, center, m);
  double b = weights::phi_squared_integral(cur);
  for (int k = 0; k < 12; ++k) {
    m *= 2.0;
    WeightFunction next = window_weight(G, center, m, 4096 << std::min(k + 1, 3));
    const double bn = weights::phi_squared_integral(next);
    const bool done = std::abs(bn - b) < tol;
    cur = std::move(next);
    b = bn;
    if (done) return {cur, m};
  }
  throw NumericalError("sharpness: windowed bound did not settle");
}

inline double sharp_lhs(const RegularizedFamily& fam, const EnergyProfile& p) {
  // G vanishes off the first segment, so integrate there only.
  const auto [a, b] = fam.segments.front();
  std::vector<double> x(fam.H.nodes().begin() + static_cast<long>(a), fam.H.nodes().begin() + static_cast<long>(b) + 1);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fam.G(x[i]) * p.T.values()[a + i];
  return detail::simpson_or_quadrature(std::move(x), std::move(y));
}

inline SharpnessResult sharpness_experiment(const WeightFunction& G0, double c, const std::vector<double>& eps_list,
                                            const NPolicy& policy = {}, const FamilyGrid& grid = {}) {
  weights::require_central_charge(c);
  if (eps_list.empty()) throw InputError("sharpness: empty eps list");
  for (double e : eps_list)
    if (!(e > 0.0)) throw InputError("sharpness: eps must be positive");
  auto [G, m] = compactify(G0);
  if (G.trivial()) throw InputError("empty support");
  const double bound = weights::qei_functional(G, c);
  const Corrector eta = build_eta(compact_support(G).length());
  SharpnessResult out{{}, G, m};
  for (double eps : eps_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lam = lambda_eps(G, eps);
    double offset = policy.initial_widths * lam * eta.width;
    const double right = compact_support(G).hi;
    auto run = [&](double n) {
      const auto fam = build_regularized_weight(G, eps, n, grid);
      const auto prof = sharp_state_profile(fam, c);
      return std::tuple{sharp_lhs(fam, prof), prof.discrepancy};
    };
    auto [lhs, disc] = run(right + offset);
    double n = right + offset;
    for (int k = 0; k < policy.max_doublings; ++k) {
      offset *= 2.0;
      auto [l2, d2] = run(right + offset);
      const bool settled = std::abs(l2 - lhs) < policy.change_tol;
      lhs = l2;
      disc = std::max(disc, d2);
      n = right + offset;
      if (settled) break;
      if (k + 1 == policy.max_doublings) throw NumericalError("sharpness: n policy did not settle");
    }
    out.rows.push_back({eps, n, lhs, bound, lhs - bound, detail::elapsed_ms(t0), lam, disc});
  }
  return out;
}

/// Rows as CSV: epsilon, n, lhs, bound, gap, runtime_ms.
inline void write_sharpness_csv(std::ostream& out, const std::vector<SharpnessRow>& rows) {
  out << "epsilon,n,lhs,bound,gap,runtime_ms\n";
  for (const auto& r : rows) {
    out << circle::detail::shortest(r.epsilon) << ',' << circle::detail::shortest(r.n) << ','
        << circle::detail::shortest(r.lhs) << ',' << circle::detail::shortest(r.bound) << ','
        << circle::detail::shortest(r.gap) << ',' << r.runtime_ms << '\n';
  }
}

/// Independent bounds for the two chiral halves. Each is sharp on its own
/// and the two are attained together by independent left/right diffeos.
struct TwoComponentBound {
  double left = 0.0;
  double right = 0.0;
  bool simultaneously_sharp = true;
};

inline TwoComponentBound two_component_bound(const WeightFunction& GL, const WeightFunction& GR, double cL, double cR,
                                             const ToleranceSet& tol = kDefaultTolerances) {
  return {weights::qei_functional(GL, cL, tol), weights::qei_functional(GR, cR, tol), true};
}

}  // namespace cftqei::qei
