#pragma once

// Nonnegative smearing weights G, the square-root derivative phi = (sqrt G)',
// and the QEI functional -(c/12 pi) int phi^2.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cftqei/errors.hpp"
#include "cftqei/numerics.hpp"
#include "cftqei/tolerance.hpp"

namespace cftqei::weights {

using numerics::Interval;
using numerics::RealFunction;
using numerics::Tail;
using Params = std::map<std::string, double>;

enum class DecayClass { compact, schwartz, power_law };

inline const char* to_string(DecayClass d) {
  switch (d) {
    case DecayClass::compact: return "compact";
    case DecayClass::schwartz: return "schwartz";
    case DecayClass::power_law: return "power_law";
  }
  return "?";
}

class WeightFunction {
 public:
  WeightFunction() = default;

  WeightFunction(RealFunction f, DecayClass decay, std::optional<Interval> support = std::nullopt,
                 std::string name = "samples")
      : f_(std::move(f)), decay_(decay), support_(support), name_(std::move(name)) {
    const auto& x = f_.nodes();
    const auto& y = f_.values();
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!(y[i] >= 0.0)) {
        std::ostringstream msg;
        msg << "weight: negative sample " << y[i] << " at node " << i << " (v=" << x[i] << ")";
        throw InputError(msg.str());
      }
    }
    if (decay_ == DecayClass::compact && !support_) throw InputError("weight: compact class needs a support");
  }

  [[nodiscard]] const RealFunction& f() const { return f_; }
  [[nodiscard]] DecayClass decay() const { return decay_; }
  [[nodiscard]] const std::optional<Interval>& support() const { return support_; }
  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] double operator()(double v) const {
    if (support_ && decay_ == DecayClass::compact && !support_->contains(v)) return 0.0;
    return f_(v);
  }

  [[nodiscard]] double max() const { return numerics::sup_norm(f_.values()); }
  [[nodiscard]] bool trivial() const { return max() == 0.0; }

  /// The bound is proved for Schwartz (or compactly supported) weights.
  [[nodiscard]] bool within_hypotheses() const { return decay_ != DecayClass::power_law; }

  [[nodiscard]] double support_measure() const {
    if (!support_) throw InputError("weight: unbounded support");
    return support_->length();
  }

 private:
  RealFunction f_;
  DecayClass decay_ = DecayClass::compact;
  std::optional<Interval> support_;
  std::string name_;
};

struct SqrtDerivative {
  RealFunction phi;
  std::vector<bool> zero_set_mask;
};

/// phi = G'/(2 sqrt G) where G > zero_threshold * max G, zero elsewhere.
inline SqrtDerivative sqrt_weight_derivative(const WeightFunction& G,
                                             double zero_threshold = kDefaultTolerances.zero_threshold) {
  const auto& g = G.f();
  const std::size_t n = g.size();
  SqrtDerivative out{g.with_values(std::vector<double>(n, 0.0), Tail::zero(), Tail::zero()),
                     std::vector<bool>(n, true)};
  const double gmax = G.max();
  if (gmax == 0.0) return out;
  // G'/(2 sqrt G) loses digits where G is tiny; differentiate sqrt G there.
  const auto dg = numerics::differentiate(g, 1);
  std::vector<double> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = std::sqrt(g.values()[i]);
  const auto droot = numerics::differentiate(g.with_values(root, Tail::zero(), Tail::zero()), 1);
  std::vector<double> phi(n, 0.0);
  const double cut = zero_threshold * gmax;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = g.values()[i];
    if (y > cut) {
      phi[i] = y > 1e-6 * gmax ? dg.values()[i] / (2.0 * root[i]) : droot.values()[i];
      out.zero_set_mask[i] = false;
    }
  }
  // sqrt of a power-law tail v^{-p} has derivative ~ v^{-p/2-1}.
  auto tail = [](const Tail& t) {
    return t.kind == Tail::Kind::power_decay ? Tail::power(0.5 * t.exponent + 1.0) : Tail::zero();
  };
  out.phi = g.with_values(std::move(phi), tail(g.left_tail()), tail(g.right_tail()));
  return out;
}

inline double phi_squared_integral(const WeightFunction& G, double zero_threshold = kDefaultTolerances.zero_threshold) {
  const auto s = sqrt_weight_derivative(G, zero_threshold);
  return numerics::integrate(numerics::multiply(s.phi, s.phi));
}

inline void require_central_charge(double c) {
  if (!(c > 0.0)) throw InputError("central charge must be positive");
}

/// -(c/12 pi) int (sqrt G)'^2; the sharp lower bound on int G <T>.
inline double qei_functional(const WeightFunction& G, double c, const ToleranceSet& tol = kDefaultTolerances) {
  require_central_charge(c);
  if (G.trivial()) return 0.0;
  return -c / (12.0 * std::numbers::pi) * phi_squared_integral(G, tol.zero_threshold);
}

/// max over nodes of (1 + v^2) G'^2 / (4G).
inline double lemma_A1_constant(const WeightFunction& G, const ToleranceSet& tol = kDefaultTolerances) {
  if (G.trivial()) return 0.0;
  const auto s = sqrt_weight_derivative(G, tol.zero_threshold);
  double m = 0.0;
  for (std::size_t i = 0; i < s.phi.size(); ++i) {
    const double v = s.phi.nodes()[i];
    const double p = s.phi.values()[i];
    m = std::max(m, (1.0 + v * v) * p * p);
  }
  return m;
}

/// I(eps) = int G'^2 / (4 (G + eps)) for each eps in a descending list.
inline std::vector<double> epsilon_limit_check(const WeightFunction& G, const std::vector<double>& eps) {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw InputError("epsilon_limit_check: epsilon must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw InputError("epsilon_limit_check: list must be descending");
  }
  std::vector<double> out(eps.size(), 0.0);
  if (G.trivial()) return out;
  const auto& g = G.f();
  const auto dg = numerics::differentiate(g, 1);
  for (std::size_t k = 0; k < eps.size(); ++k) {
    std::vector<double> y(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = dg.values()[i];
      y[i] = d * d / (4.0 * (g.values()[i] + eps[k]));
    }
    // Outside the window the integrand decays at least as fast as G'^2.
    auto tail = [](const Tail& t) {
      return t.kind == Tail::Kind::power_decay ? Tail::power(2.0 * t.exponent + 2.0) : Tail::zero();
    };
    out[k] = numerics::integrate(g.with_values(std::move(y), tail(g.left_tail()), tail(g.right_tail())));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

namespace detail {

inline double param(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline void check_keys(const Params& p, std::initializer_list<const char*> allowed, const std::string& name) {
  for (const auto& [k, v] : p) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw InputError("catalog " + name + ": unknown parameter '" + k + "'");
    if (!std::isfinite(v)) throw InputError("catalog " + name + ": parameter '" + k + "' is not finite");
  }
}

/// exp(-1/(1-x^2)) on |x| < 1, zero outside.
inline double bump(double x) {
  const double q = 1.0 - x * x;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
  return {"gaussian", "bump", "plateau", "sech2", "lorentzian-squared", "lorentzian"};
}

/// Closed-form weights. Every entry takes `center`, `width` and `amplitude`;
/// `plateau` also takes `core` (half-length of the flat top, in units of width).
inline WeightFunction catalog(const std::string& name, const Params& p = {}, std::size_t n = 4096) {
  const double c = detail::param(p, "center", 0.0);
  const double w = detail::param(p, "width", 1.0);
  const double a = detail::param(p, "amplitude", 1.0);
  if (!(w > 0.0)) throw InputError("catalog " + name + ": width must be positive");
  if (!(a >= 0.0)) throw InputError("catalog " + name + ": amplitude must be nonnegative");
  if (n < 16) throw InputError("catalog: grid needs at least 16 nodes");

  if (name == "gaussian") {
    detail::check_keys(p, {"center", "width", "amplitude"}, name);
    // e^{-L^2} < 1e-16 at the window edge.
    const double L = 6.1 * w;
    auto g = [=](double v) { return a * std::exp(-((v - c) / w) * ((v - c) / w)); };
    return {RealFunction::sample(g, c - L, c + L, n), DecayClass::schwartz, std::nullopt, name};
  }
  if (name == "sech2") {
    detail::check_keys(p, {"center", "width", "amplitude"}, name);
    const double L = 19.5 * w;
    auto g = [=](double v) {
      const double s = 1.0 / std::cosh((v - c) / w);
      return a * s * s;
    };
    return {RealFunction::sample(g, c - L, c + L, n), DecayClass::schwartz, std::nullopt, name};
  }
  if (name == "bump") {
    detail::check_keys(p, {"center", "width", "amplitude"}, name);
    auto g = [=](double v) { return a * detail::bump((v - c) / w); };
    return {RealFunction::sample(g, c - w, c + w, n), DecayClass::compact, Interval(c - w, c + w), name};
  }
  if (name == "plateau") {
    detail::check_keys(p, {"center", "width", "amplitude", "core"}, name);
    const double core = detail::param(p, "core", 1.0);
    if (!(core >= 0.0)) throw InputError("catalog plateau: core must be nonnegative");
    // Flat on |v-c| <= core*w, rounded off over one width on either side.
    const double half = (core + 1.0) * w;
    auto g = [=](double v) { return a * detail::smooth_step((half - std::abs(v - c)) / w); };
    return {RealFunction::sample(g, c - half, c + half, n), DecayClass::compact, Interval(c - half, c + half), name};
  }
  if (name == "lorentzian" || name == "lorentzian-squared") {
    detail::check_keys(p, {"center", "width", "amplitude"}, name);
    const double power = name == "lorentzian" ? 1.0 : 2.0;
    auto g = [=](double v) {
      const double x = (v - c) / w;
      return a * std::pow(1.0 + x * x, -power);
    };
    // sinh-stretched grid out to |x| = 400: fine near the peak, sparse in the tails.
    const double t = std::asinh(400.0);
    std::vector<double> x = RealFunction::linspace(-t, t, n);
    for (double& v : x) v = c + w * std::sinh(v);
    auto tail = Tail::power(2.0 * power);
    return {RealFunction::sample_on(g, std::move(x), tail, tail), DecayClass::power_law, std::nullopt, name};
  }
  throw InputError("catalog: unknown weight '" + name + "'");
}

/// Weight from (v, G) rows. Blank lines, '#' comments and a non-numeric
/// header line are skipped. Zero end values mark a compact weight; otherwise
/// the samples must have decayed to 1e-12 of the maximum at both ends.
inline WeightFunction parse_csv(std::istream& in, const std::string& name = "csv") {
  std::vector<double> x;
  std::vector<double> y;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double v = 0.0;
    double g = 0.0;
    if (!(row >> v >> g)) {
      if (x.empty()) continue;
      throw InputError("weight csv: malformed row at line " + std::to_string(lineno));
    }
    x.push_back(v);
    y.push_back(g);
  }
  if (x.size() < 16) throw InputError("weight csv: need at least 16 rows");
  RealFunction f(x, y);
  const double gmax = numerics::sup_norm(y);
  if (y.front() == 0.0 && y.back() == 0.0) {
    std::size_t lo = 0;
    std::size_t hi = y.size() - 1;
    while (lo + 1 < y.size() && y[lo + 1] == 0.0) ++lo;
    while (hi > 0 && y[hi - 1] == 0.0) --hi;
    if (gmax == 0.0) return {std::move(f), DecayClass::compact, Interval(x.front(), x.back()), name};
    return {std::move(f), DecayClass::compact, Interval(x[lo], x[hi]), name};
  }
  if (y.front() > 1e-12 * gmax || y.back() > 1e-12 * gmax)
    throw InputError("weight csv: samples have not decayed at the window edges");
  return {std::move(f), DecayClass::schwartz, std::nullopt, name};
}

inline WeightFunction load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("weight csv: cannot open " + path);
  return parse_csv(in, path);
}

}  // namespace cftqei::weights
