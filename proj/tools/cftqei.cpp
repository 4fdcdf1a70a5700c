// cftqei: batch front-end for the QEI library.
//
// Exit codes: 0 success, 2 input validation, 3 scientific-contract failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cftqei/applications.hpp"
#include "cftqei/circle.hpp"
#include "cftqei/errors.hpp"
#include "cftqei/io.hpp"
#include "cftqei/qei.hpp"
#include "cftqei/virasoro.hpp"
#include "cftqei/weights.hpp"

namespace {

using namespace cftqei;
using io::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t grid = 0;  // 0: command default
  double tol = 0.0;      // 0: command default
};

struct WeightInput {
  std::string file;
  std::string catalog;
  std::string params;
};

void add_weight_options(CLI::App* sub, WeightInput& w, const std::string& what) {
  auto* f = sub->add_option("--weight", w.file, "Two-column CSV (v, " + what + ")")->check(CLI::ExistingFile);
  auto* c = sub->add_option("--catalog", w.catalog, "Catalog weight name");
  sub->add_option("--params", w.params, "Catalog parameters k=v,...");
  f->excludes(c);
  c->excludes(f);
}

weights::WeightFunction load_weight(const WeightInput& w, const std::string& fallback, std::size_t grid) {
  if (!w.file.empty()) return weights::load_csv(w.file);
  const std::string name = w.catalog.empty() ? fallback : w.catalog;
  return weights::catalog(name, io::parse_params(w.params), grid ? grid : 4096);
}

std::string describe(const weights::WeightFunction& G, const WeightInput& w) {
  std::string s = G.name();
  if (w.file.empty() && !w.params.empty()) s += "(" + w.params + ")";
  return s + " [" + weights::to_string(G.decay()) + "]";
}

// f00 = f11 = A g((x0 - c0)/w0) g((x1 - c1)/w1), off-diagonal components zero.
applications::TensorWeight load_tensor(const WeightInput& w, const std::string& fallback, std::size_t grid) {
  if (!w.file.empty()) {
    std::ifstream in(w.file);
    if (!in) throw InputError("tensor csv: cannot open " + w.file);
    return applications::parse_tensor_csv(in);
  }
  const std::string name = w.catalog.empty() ? fallback : w.catalog;
  const auto p = io::parse_params(w.params);
  weights::detail::check_keys(p, {"center0", "center1", "width0", "width1", "amplitude"}, "tensor " + name);
  const double c0 = weights::detail::param(p, "center0", 0.0);
  const double c1 = weights::detail::param(p, "center1", 3.0);
  const double w0 = weights::detail::param(p, "width0", 1.0);
  const double w1 = weights::detail::param(p, "width1", 1.0);
  const double A = weights::detail::param(p, "amplitude", 1.0);
  if (!(w0 > 0.0) || !(w1 > 0.0)) throw InputError("tensor " + name + ": widths must be positive");
  if (!(A >= 0.0)) throw InputError("tensor " + name + ": amplitude must be nonnegative");
  std::function<double(double)> g;
  double reach = 1.0;
  if (name == "bump") {
    g = [](double x) { return weights::detail::bump(x); };
  } else if (name == "gaussian") {
    g = [](double x) { return std::exp(-x * x); };
    reach = 6.1;
  } else {
    throw InputError("tensor catalog: unknown weight '" + name + "' (bump, gaussian)");
  }
  auto d = [=](double a, double b) { return A * g((a - c0) / w0) * g((b - c1) / w1); };
  return applications::TensorWeight::from_functions({d, nullptr, nullptr, d}, {c0 - reach * w0, c0 + reach * w0},
                                                   {c1 - reach * w1, c1 + reach * w1}, grid ? grid : 512);
}

applications::MirrorTrajectory load_trajectory(const std::string& file, const std::string& name,
                                               const std::string& params) {
  using applications::MirrorTrajectory;
  if (!file.empty()) {
    // Rows (u, p); outside the sampled span p continues with the affine map
    // matching its left end.
    std::ifstream in(file);
    if (!in) throw InputError("trajectory csv: cannot open " + file);
    std::vector<double> u, v;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      double a = 0.0, b = 0.0;
      if (!(row >> a >> b)) {
        if (u.empty()) continue;
        throw InputError("trajectory csv: malformed row");
      }
      u.push_back(a);
      v.push_back(b);
    }
    if (u.size() < 16) throw InputError("trajectory csv: need at least 16 rows");
    numerics::RealFunction P(u, v);
    auto dP = numerics::differentiate(P, 1);
    const double s = dP.values().front();
    if (!(s > 0.0)) throw InputError("not a reparametrisation: p' <= 0 at node 0");
    return {circle::LineReparam(P, dP, circle::MobiusElement::affine(s, v.front() - s * u.front())), false};
  }
  const auto p = io::parse_params(params);
  if (name == "identity") {
    weights::detail::check_keys(p, {"lo", "hi"}, "identity trajectory");
    return MirrorTrajectory::identity(weights::detail::param(p, "lo", -10.0), weights::detail::param(p, "hi", 10.0));
  }
  if (name == "accelerating") {
    weights::detail::check_keys(p, {"a", "center", "width"}, "accelerating trajectory");
    return MirrorTrajectory::accelerating(weights::detail::param(p, "a", 0.5), weights::detail::param(p, "center", 0.0),
                                          weights::detail::param(p, "width", 1.0));
  }
  if (name == "mobius") {
    weights::detail::check_keys(p, {"a", "b", "c", "d", "lo", "hi"}, "mobius trajectory");
    const auto m = circle::MobiusElement::normalized(
        weights::detail::param(p, "a", 1.0), weights::detail::param(p, "b", 0.0), weights::detail::param(p, "c", 0.0),
        weights::detail::param(p, "d", 1.0));
    return MirrorTrajectory::mobius(m, weights::detail::param(p, "lo", -10.0), weights::detail::param(p, "hi", 10.0));
  }
  throw InputError("mirror: unknown trajectory '" + name + "' (identity, accelerating, mobius)");
}

std::pair<double, double> parse_range(const std::string& s, const std::string& what) {
  const auto v = io::parse_list(s, what);
  if (v.size() != 2 || !(v[0] < v[1])) throw InputError(what + ": expected lo,hi with lo < hi");
  return {v[0], v[1]};
}

void check_c(double c) { weights::require_central_charge(c); }

// ---------------------------------------------------------------------------

struct BoundOpts {
  WeightInput w;
  std::string c = "1";
};

int cmd_bound(const Common& cm, const BoundOpts& o, io::Meta meta) {
  const auto cs = io::parse_list(o.c, "c");
  for (double c : cs) check_c(c);
  const auto G = load_weight(o.w, "gaussian", cm.grid);
  const auto ih = io::fnv1a_hex(meta.config_hash + describe(G, o.w));
  meta.extra.emplace_back("weight", describe(G, o.w));
  io::Table t{{"c", "bound", "phi2_integral", "runtime_ms"}, {}};
  json recs = json::array();
  for (double c : cs) {
    const auto t0 = Clock::now();
    const double b = weights::qei_functional(G, c);
    const double phi2 = weights::phi_squared_integral(G);
    t.rows.push_back({c, b, phi2, ms_since(t0)});
    applications::BoundRecord r{b, {{"c", c}, {"phi2_integral", phi2}}, {{"weight_within_hypotheses", G.within_hypotheses()}}};
    recs.push_back(io::record_json(r, ih));
  }
  io::emit(cm.out, meta, t, json{{"records", recs}}, std::cout);
  return 0;
}

struct SharpOpts {
  WeightInput w;
  double c = 1.0;
  std::string eps = "1e-1,1e-2,1e-3,1e-4";
};

int cmd_sharpness(const Common& cm, const SharpOpts& o, io::Meta meta) {
  check_c(o.c);
  const auto eps = io::parse_list(o.eps, "eps");
  const auto G = load_weight(o.w, "bump", 0);
  qei::NPolicy policy;
  if (cm.tol > 0.0) policy.change_tol = cm.tol;
  qei::FamilyGrid grid;
  if (cm.grid) grid.support_nodes = cm.grid;
  const auto res = qei::sharpness_experiment(G, o.c, eps, policy, grid);
  io::Table t{{"epsilon", "n", "lhs", "bound", "gap", "runtime_ms"}, {}};
  bool ok = true;
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    t.rows.push_back({r.epsilon, r.n, r.lhs, r.bound, r.gap, r.runtime_ms});
    if (!(r.gap > 0.0)) ok = false;
    if (i > 0 && !(r.gap < res.rows[i - 1].gap)) ok = false;
  }
  const auto& last = res.rows.back();
  const double rel = last.gap / std::abs(last.bound);
  meta.extra.emplace_back("weight", describe(G, o.w));
  meta.extra.emplace_back("c", io::fmt(o.c));
  meta.extra.emplace_back("window", io::fmt(res.window));
  meta.extra.emplace_back("final_relative_gap", io::fmt(rel));
  json body;
  body["final_relative_gap"] = rel;
  body["gap_positive_and_decreasing"] = ok;
  io::emit(cm.out, meta, t, body, std::cout);
  if (!ok) throw ContractError("sharpness convergence failure");
  return 0;
}

struct WorldlineOpts {
  WeightInput w;
  std::string curve = "static";
  std::string curve_file;
  double rapidity = 0.0;
  double x1 = 0.0;
  bool spacelike = false;
  double cL = 1.0;
  double cR = 1.0;
};

int cmd_worldline(const Common& cm, const WorldlineOpts& o, io::Meta meta) {
  using applications::CurveKind;
  using applications::WorldlineCurve;
  check_c(o.cL);
  check_c(o.cR);
  const auto G = load_weight(o.w, "gaussian", cm.grid);
  const double lo = G.f().lo() - 1.0;
  const double hi = G.f().hi() + 1.0;
  const auto kind = o.spacelike ? CurveKind::spacelike : CurveKind::timelike;
  WorldlineCurve curve;
  if (!o.curve_file.empty()) {
    std::ifstream in(o.curve_file);
    if (!in) throw InputError("curve csv: cannot open " + o.curve_file);
    curve = applications::parse_curve_csv(in, kind);
  } else if (o.curve == "static") {
    curve = WorldlineCurve::static_line(o.x1, lo, hi);
  } else if (o.curve == "boosted") {
    curve = WorldlineCurve::boosted(o.rapidity, lo, hi);
  } else if (o.curve == "accelerated") {
    const double r = o.rapidity;
    curve = WorldlineCurve::from_rapidity([r](double l) { return r * std::tanh(l); }, kind, lo, hi);
  } else if (o.curve == "null-left") {
    curve = WorldlineCurve::null_ray(CurveKind::null_left, lo, hi);
  } else if (o.curve == "null-right") {
    curve = WorldlineCurve::null_ray(CurveKind::null_right, lo, hi);
  } else {
    throw InputError("worldline: unknown curve '" + o.curve + "'");
  }
  const auto t0 = Clock::now();
  const auto rec = applications::worldline_bound(curve, G, o.cL, o.cR);
  const double ms = ms_since(t0);
  meta.extra.emplace_back("weight", describe(G, o.w));
  meta.extra.emplace_back("curve", o.curve_file.empty() ? o.curve : o.curve_file);
  io::Table t{{"bound", "left", "right", "runtime_ms"},
              {{rec.bound, rec.components.at("left"), rec.components.at("right"), ms}}};
  io::emit(cm.out, meta, t, json{{"records", json::array({io::record_json(rec, meta.config_hash)})}}, std::cout);
  return 0;
}

struct VolumeOpts {
  WeightInput w;
  double cL = 1.0;
  double cR = 1.0;
};

int cmd_volume(const Common& cm, const VolumeOpts& o, io::Meta meta) {
  check_c(o.cL);
  check_c(o.cR);
  const auto fw = load_tensor(o.w, "bump", 0);
  const auto t0 = Clock::now();
  const auto rec = applications::worldvolume_bound(fw, o.cL, o.cR, cm.grid ? cm.grid : 2049);
  const double ms = ms_since(t0);
  meta.extra.emplace_back("tensor", o.w.file.empty() ? (o.w.catalog.empty() ? "bump" : o.w.catalog) + "(" + o.w.params + ")"
                                                      : o.w.file);
  io::Table t{{"bound", "left", "right", "runtime_ms"},
              {{rec.bound, rec.components.at("left"), rec.components.at("right"), ms}}};
  io::emit(cm.out, meta, t, json{{"records", json::array({io::record_json(rec, meta.config_hash)})}}, std::cout);
  return 0;
}

struct MirrorOpts {
  WeightInput w;
  std::string trajectory = "identity";
  std::string trajectory_params;
  std::string trajectory_file;
  double c = 1.0;
  std::string x0 = "-5,5";
  std::string x1 = "-5,5";
};

int cmd_mirror(const Common& cm, const MirrorOpts& o, io::Meta meta) {
  check_c(o.c);
  const auto m = load_trajectory(o.trajectory_file, o.trajectory, o.trajectory_params);
  const auto T = applications::mirror_vacuum_energy(m, o.c);
  const auto [a0, b0] = parse_range(o.x0, "x0 range");
  const auto [a1, b1] = parse_range(o.x1, "x1 range");
  const std::size_t n = cm.grid ? cm.grid : 41;
  if (n < 2) throw InputError("mirror: grid needs at least 2 nodes per axis");
  const auto g0 = numerics::RealFunction::linspace(a0, b0, n);
  const auto g1 = numerics::RealFunction::linspace(a1, b1, n);
  io::Table t{{"x0", "x1", "T00", "physical"}, {}};
  double sup = 0.0;
  for (double s : g0)
    for (double r : g1) {
      const double u = s - r;
      const double v = s + r;
      const double e = T.span().contains(u) ? T(u) : 0.0;
      sup = std::max(sup, std::abs(e));
      t.rows.push_back({s, r, e, v > m(u) ? 1.0 : 0.0});
    }
  meta.extra.emplace_back("trajectory", o.trajectory_file.empty() ? o.trajectory : o.trajectory_file);
  meta.extra.emplace_back("sup_abs_T00", io::fmt(sup));
  json body;
  body["sup_abs_T00"] = sup;
  body["records"] = json::array();
  if (!o.w.file.empty() || !o.w.catalog.empty()) {
    const auto fw = load_tensor(o.w, "bump", 0);
    const auto rec = applications::mirror_bound(fw, m, o.c);
    body["records"].push_back(io::record_json(rec, meta.config_hash));
    meta.extra.emplace_back("mirror_bound", io::fmt(rec.bound));
  }
  io::emit(cm.out, meta, t, body, std::cout);
  return 0;
}

struct DemoOpts {
  std::string lambdas = "1,2,4,8,16";
  double amplitude = 1.0;
  double c = 1.0;
};

int cmd_demo(const Common& cm, const DemoOpts& o, io::Meta meta) {
  check_c(o.c);
  const auto lambdas = io::parse_list(o.lambdas, "lambdas");
  applications::DemoParams p;
  p.a = o.amplitude;
  if (cm.grid) p.n = cm.grid;
  const double tol = cm.tol > 0.0 ? cm.tol : 1e-6;
  applications::DemoResult res;
  try {
    res = applications::unweighted_demo(p, lambdas, o.c);
  } catch (const InputError& e) {
    if (std::string(e.what()).rfind("demo hypothesis", 0) == 0) throw ContractError(e.what());
    throw;
  }
  double num = 0.0, den = 0.0;
  for (const auto& r : res.rows) {
    num += r.lambda * r.I;
    den += r.lambda * r.lambda;
  }
  const double slope = num / den;
  double lin = 0.0;
  bool awec = true;
  io::Table t{{"lambda", "I", "I_over_lambda", "full_line"}, {}};
  for (const auto& r : res.rows) {
    t.rows.push_back({r.lambda, r.I, r.I / r.lambda, r.full_line});
    lin = std::max(lin, std::abs(r.I / r.lambda - slope) / std::abs(slope));
    awec = awec && r.full_line >= -1e-9;
  }
  const bool ok = slope < 0.0 && lin <= tol && awec;
  meta.extra.emplace_back("slope", io::fmt(slope));
  meta.extra.emplace_back("linearity_residual", io::fmt(lin));
  json body;
  body["slope"] = slope;
  body["linearity_residual"] = lin;
  body["hypotheses"] = res.profile.hypotheses;
  body["full_line_nonnegative"] = awec;
  io::emit(cm.out, meta, t, body, std::cout);
  if (!ok) throw ContractError("unweighted demo: expected a negative slope, linearity within " + io::fmt(tol) +
                               " and nonnegative full-line integrals");
  return 0;
}

struct VirOpts {
  std::vector<std::string> points;
  int N = 10;
};

struct VirPoint {
  double c;
  double h;
  bool expect_unitary;
};

VirPoint parse_point(const std::string& s) {
  const auto parts = io::split(s, ':');
  if (parts.size() < 2 || parts.size() > 3) throw InputError("point: expected c:h[:unitary|non-unitary], got '" + s + "'");
  VirPoint p{io::to_double(parts[0], "point c"), io::to_double(parts[1], "point h"), true};
  if (parts.size() == 3) {
    if (parts[2] == "non-unitary") p.expect_unitary = false;
    else if (parts[2] != "unitary") throw InputError("point: expectation must be unitary or non-unitary");
  }
  return p;
}

int cmd_virasoro(const Common& cm, const VirOpts& o, io::Meta meta) {
  std::vector<VirPoint> pts;
  for (const auto& s : o.points) pts.push_back(parse_point(s));
  if (pts.empty()) pts = {{0.5, 0.0, true}, {0.5, 1.0 / 16.0, true}, {0.5, 0.5, true}};
  if (o.N < 4) throw InputError("virasoro-check: N must be at least 4");
  const double tol = cm.tol > 0.0 ? cm.tol : 1e-9;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::mt19937_64 rng(cm.seed);

  io::Table t{{"c", "h", "N", "unitary", "min_gram_eig", "commutator_max_residual", "smeared_max_residual", "pass",
               "runtime_ms"},
              {}};
  json reports = json::array();
  bool all_ok = true;
  for (const auto& p : pts) {
    const auto t0 = Clock::now();
    const virasoro::HighestWeight hw(p.c, p.h);
    const auto scan = virasoro::gram_scan(hw, o.N);
    json r;
    r["c"] = p.c;
    r["h"] = p.h;
    r["N"] = o.N;
    r["expected"] = p.expect_unitary ? "unitary" : "non-unitary";
    r["unitary"] = scan.unitary;
    r["gram_min_eig_per_level"] = scan.min_eig_per_level;
    double comm = nan, smeared = nan;
    r["commutator_max_residual"] = nullptr;
    r["gw_table"] = json::array();
    if (scan.unitary) {
      const virasoro::VermaModule vm(hw, o.N);
      comm = 0.0;
      const int M = std::min(3, o.N / 2);
      for (int m = -M; m <= M; ++m)
        for (int n = -M; n <= M; ++n) comm = std::max(comm, virasoro::commutator_check(vm, m, n));
      r["commutator_max_residual"] = comm;
      // Single-mode norms against 2nh + n(n^2 - 1)c/12.
      double norm_err = 0.0;
      for (int n = 1; n <= o.N; ++n) {
        const auto v = vm.pbw({n});
        const double got = v.dot(vm.gram() * v);
        const double want = 2.0 * n * p.h + n * (n * n - 1.0) * p.c / 12.0;
        norm_err = std::max(norm_err, std::abs(got - want) / std::max(1.0, std::abs(want)));
      }
      r["single_mode_norm_max_error"] = norm_err;
      const auto mg = virasoro::mobius_generators(vm);
      const Eigen::MatrixXcd HPK = mg.H - 0.5 * (mg.P + mg.K);
      r["H_minus_half_P_plus_K"] = HPK.cwiseAbs().maxCoeff();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (mg.P + mg.P.adjoint()));
      r["min_eig_P"] = es.eigenvalues().minCoeff();
      smeared = 0.0;
      for (int k = 0; k < 10; ++k) {
        const auto g = circle::random_real_field(rng, 2, 64);
        const auto f = circle::random_real_field(rng, 2, 64);
        smeared = std::max(smeared, virasoro::smeared_commutator_check(vm, g, f));
      }
      r["smeared_commutator_max_residual"] = smeared;
      for (const auto& row : virasoro::gw_constant_survey(vm))
        r["gw_table"].push_back({{"n", row.n}, {"sup_ratio", row.sup_ratio}});
    }
    const bool pass = p.expect_unitary ? (scan.unitary && comm < tol) : !scan.unitary;
    r["pass"] = pass;
    if (p.expect_unitary && !pass) all_ok = false;
    reports.push_back(r);
    const double min_eig = *std::min_element(scan.min_eig_per_level.begin(), scan.min_eig_per_level.end());
    t.rows.push_back({p.c, p.h, static_cast<double>(o.N), scan.unitary ? 1.0 : 0.0, min_eig, comm, smeared,
                      pass ? 1.0 : 0.0, ms_since(t0)});
  }
  meta.extra.emplace_back("N", std::to_string(o.N));
  meta.extra.emplace_back("seed", std::to_string(cm.seed));
  io::emit(cm.out, meta, t, json{{"points", reports}}, std::cout);
  if (!all_ok) throw ContractError("virasoro-check: a declared-unitary point failed");
  return 0;
}

/// FNV-1a over sorted "scope.name=value" lines of every effective option,
/// excluding help, --config and --out.
std::string config_hash(const CLI::App& app, const CLI::App* sub) {
  std::vector<std::string> lines;
  auto collect = [&lines](const CLI::App* a, const std::string& scope) {
    for (const auto* opt : a->get_options()) {
      const auto name = opt->get_name(false, true);
      if (name.empty() || name == "--help" || name == "--config" || name == "--out") continue;
      std::string val;
      if (opt->count()) {
        for (const auto& r : opt->results()) val += r + ";";
      } else {
        val = opt->get_default_str();
      }
      lines.push_back(scope + "." + name + "=" + val);
    }
  };
  collect(&app, "");
  collect(sub, sub->get_name());
  std::sort(lines.begin(), lines.end());
  std::string all;
  for (const auto& l : lines) all += l + "\n";
  return io::fnv1a_hex(all);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp quantum energy inequalities in two-dimensional CFT"};
  app.require_subcommand(1);
  app.fallthrough();
  Common cm;
  app.set_config("--config", "", "key = value file; [command] sections hold per-command options");
  app.add_option("--out", cm.out, "Output path; writes <out>.csv and <out>.json");
  app.add_option("--seed", cm.seed, "RNG seed")->capture_default_str();
  app.add_option("--grid", cm.grid, "Grid size override (0: command default)")->capture_default_str();
  app.add_option("--tol", cm.tol, "Contract tolerance override (0: command default)")->capture_default_str();

  BoundOpts bo;
  auto* bound = app.add_subcommand("bound", "Sharp QEI bound for a weight");
  add_weight_options(bound, bo.w, "G");
  bound->add_option("--c", bo.c, "Central charge list")->capture_default_str();

  SharpOpts so;
  auto* sharp = app.add_subcommand("sharpness", "Regularised (eps, n) family approaching the bound");
  add_weight_options(sharp, so.w, "G");
  sharp->add_option("--c", so.c, "Central charge")->capture_default_str();
  sharp->add_option("--eps", so.eps, "Descending eps list")->capture_default_str();

  WorldlineOpts wo;
  auto* wl = app.add_subcommand("worldline", "QEI along a worldline");
  add_weight_options(wl, wo.w, "G(lambda)");
  wl->add_option("--curve", wo.curve, "static, boosted, accelerated, null-left or null-right")->capture_default_str();
  wl->add_option("--curve-file", wo.curve_file, "CSV rows (lambda, u, v)")->check(CLI::ExistingFile);
  wl->add_option("--rapidity", wo.rapidity, "Boost rapidity, or amplitude of tanh rapidity")->capture_default_str();
  wl->add_option("--x1", wo.x1, "Position of the static line")->capture_default_str();
  wl->add_flag("--spacelike", wo.spacelike, "Spacelike curve (accelerated or file)");
  wl->add_option("--cL", wo.cL, "Left central charge")->capture_default_str();
  wl->add_option("--cR", wo.cR, "Right central charge")->capture_default_str();

  VolumeOpts vo;
  auto* vol = app.add_subcommand("volume", "Worldvolume QEI for a tensor weight");
  add_weight_options(vol, vo.w, "tensor grid CSV rows x0,x1,f00,f01,f10,f11");
  vol->add_option("--cL", vo.cL, "Left central charge")->capture_default_str();
  vol->add_option("--cR", vo.cR, "Right central charge")->capture_default_str();

  MirrorOpts mo;
  auto* mir = app.add_subcommand("mirror", "Moving-mirror vacuum energy and modified worldvolume bound");
  add_weight_options(mir, mo.w, "tensor grid CSV rows x0,x1,f00,f01,f10,f11");
  mir->add_option("--trajectory", mo.trajectory, "identity, accelerating or mobius")->capture_default_str();
  mir->add_option("--trajectory-params", mo.trajectory_params, "Trajectory parameters k=v,...");
  mir->add_option("--trajectory-file", mo.trajectory_file, "Two-column CSV (u, p)")->check(CLI::ExistingFile);
  mir->add_option("--c", mo.c, "Central charge")->capture_default_str();
  mir->add_option("--x0", mo.x0, "x0 range lo,hi")->capture_default_str();
  mir->add_option("--x1", mo.x1, "x1 range lo,hi")->capture_default_str();

  DemoOpts dopt;
  auto* demo = app.add_subcommand("demo-unweighted", "Unbounded half-line average of a QEI-obeying family");
  demo->add_option("--lambdas", dopt.lambdas, "Dilation list")->capture_default_str();
  demo->add_option("--amplitude", dopt.amplitude, "Amplitude of the concave dip")->capture_default_str();
  demo->add_option("--c", dopt.c, "Central charge")->capture_default_str();

  VirOpts vopt;
  auto* vir = app.add_subcommand("virasoro-check", "Truncated Verma module checks");
  vir->add_option("--point", vopt.points, "c:h[:unitary|non-unitary], repeatable; default the Ising triple");
  vir->add_option("--N", vopt.N, "Truncation level")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    io::Meta meta{sub->get_name(), config_hash(app, sub), {}};
    if (sub == bound) return cmd_bound(cm, bo, meta);
    if (sub == sharp) return cmd_sharpness(cm, so, meta);
    if (sub == wl) return cmd_worldline(cm, wo, meta);
    if (sub == vol) return cmd_volume(cm, vo, meta);
    if (sub == mir) return cmd_mirror(cm, mo, meta);
    if (sub == demo) return cmd_demo(cm, dopt, meta);
    if (sub == vir) return cmd_virasoro(cm, vopt, meta);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "contract failure: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
