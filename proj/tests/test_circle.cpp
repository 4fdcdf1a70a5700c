#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cftqei/circle.hpp"

using namespace cftqei;
using namespace cftqei::circle;

namespace {

double sup_diff(const CircleDiffeo& a, const CircleDiffeo& b) {
  const auto x = a.lift_samples();
  const auto y = b.lift_samples();
  double m = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) m = std::max(m, std::abs(x[j] - y[j]));
  return m;
}

// Residue oracle: omega(f, g) = (i/24) sum_{j+k=2} f_j g_k [k(k-1)(k-2) - j(j-1)(j-2)].
std::complex<double> omega_residue(const CircleFunction& f, const CircleFunction& g) {
  auto fall = [](long k) { return static_cast<double>(k * (k - 1) * (k - 2)); };
  std::complex<double> s = 0.0;
  for (long j = -40; j <= 42; ++j) {
    const long k = 2 - j;
    s += f.coefficient(j) * g.coefficient(k) * (fall(k) - fall(j));
  }
  return std::complex<double>(0.0, 1.0) / 24.0 * s;
}

CircleFunction rotation_field() {
  return CircleFunction::from([](cplx z) { return cplx(0.0, 1.0) * z; });
}
CircleFunction translation_field() {
  return CircleFunction::from([](cplx z) { return cplx(0.0, 0.5) * (1.0 + z) * (1.0 + z); });
}
CircleFunction special_field() {
  return CircleFunction::from([](cplx z) { return cplx(0.0, -0.5) * (1.0 - z) * (1.0 - z); });
}

}  // namespace

TEST(Compose, IdentityIsNeutral) {
  std::mt19937_64 rng(1);
  const auto r = random_diffeo(rng);
  const auto id = CircleDiffeo::identity();
  EXPECT_LT(sup_diff(compose(r, id), r), 1e-13);
  EXPECT_LT(sup_diff(compose(id, r), r), 1e-12);
}

TEST(Compose, RotationsAdd) {
  const auto r = compose(subgroup_element(Subgroup::rotation, 0.7), subgroup_element(Subgroup::rotation, 2.9));
  EXPECT_LT(sup_diff(r, subgroup_element(Subgroup::rotation, 3.6)), 1e-14);
  EXPECT_EQ(r.winding(), 1);
}

TEST(Compose, TranslationsAdd) {
  for (auto [s, t] : {std::pair{0.3, 0.5}, {-1.2, 0.4}, {0.9, 0.9}}) {
    const auto r = compose(subgroup_element(Subgroup::translation, s), subgroup_element(Subgroup::translation, t));
    EXPECT_LT(sup_diff(r, subgroup_element(Subgroup::translation, s + t)), 1e-9) << s << "," << t;
  }
}

TEST(Compose, Associative) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10; ++i) {
    const auto a = random_diffeo(rng);
    const auto b = random_diffeo(rng);
    const auto c = random_diffeo(rng);
    EXPECT_LT(sup_diff(compose(compose(a, b), c), compose(a, compose(b, c))), 1e-9);
  }
}

TEST(Compose, KeepsTwoPiShiftLaw) {
  std::mt19937_64 rng(8);
  const auto r = compose(random_diffeo(rng), random_diffeo(rng));
  for (double t : {0.1, 1.7, 4.0}) EXPECT_NEAR(r(t + 2 * kPi), r(t) + 2 * kPi, 1e-12);
}

TEST(Invert, Identity) { EXPECT_LT(sup_diff(invert(CircleDiffeo::identity()), CircleDiffeo::identity()), 1e-14); }

TEST(Invert, Rotation) {
  EXPECT_LT(sup_diff(invert(subgroup_element(Subgroup::rotation, 1.3)), subgroup_element(Subgroup::rotation, -1.3)),
            1e-14);
}

TEST(Invert, DilationClosedForm) {
  for (double l : {0.5, 1.7, 3.0}) {
    EXPECT_LT(sup_diff(invert(subgroup_element(Subgroup::dilation, l)), subgroup_element(Subgroup::dilation, 1 / l)),
              1e-9);
  }
}

TEST(Invert, TwoSidedInverse) {
  std::mt19937_64 rng(9);
  const auto id = CircleDiffeo::identity();
  for (int i = 0; i < 10; ++i) {
    const auto r = random_diffeo(rng);
    const auto ri = invert(r);
    EXPECT_LT(sup_diff(compose(r, ri), id), 1e-9);
    EXPECT_LT(sup_diff(compose(ri, r), id), 1e-9);
  }
}

TEST(Subgroup, RotationByZeroIsIdentity) {
  EXPECT_EQ(sup_diff(subgroup_element(Subgroup::rotation, 0.0), CircleDiffeo::identity()), 0.0);
}

TEST(Subgroup, TranslationFormula) {
  for (double s : {-2.0, 0.5, 1.0}) {
    const auto T = subgroup_element(Subgroup::translation, s);
    EXPECT_NEAR(T(0.0), 2 * std::atan(s), 1e-13);
    EXPECT_NEAR(T(kPi), kPi, 1e-12);
    EXPECT_NEAR(T(1.0), 2 * std::atan(s + std::tan(0.5)), 1e-12);
  }
}

TEST(Subgroup, SpecialConformalFixesOrigin) {
  // R_pi T_s R_pi^{-1} fixes theta = 0 (v = 0) and sends pi to pi + 2 atan s.
  for (double s : {-0.8, 0.4}) {
    const auto S = subgroup_element(Subgroup::special_conformal, s);
    EXPECT_NEAR(S(0.0), 0.0, 1e-12);
    EXPECT_NEAR(S(kPi), kPi + 2 * std::atan(s), 1e-12);
  }
}

TEST(Subgroup, RejectsNonPositiveDilation) {
  EXPECT_THROW(subgroup_element(Subgroup::dilation, 0.0), InputError);
  EXPECT_THROW(subgroup_element(Subgroup::dilation, -1.0), InputError);
}

TEST(Subgroup, SchwarzianVanishes) {
  for (auto [kind, p] : {std::pair{Subgroup::rotation, 0.9}, {Subgroup::translation, 0.7}, {Subgroup::dilation, 2.5},
                         {Subgroup::special_conformal, -0.6}}) {
    const auto S = schwarzian(subgroup_element(kind, p));
    EXPECT_LT(numerics::sup_norm(S.values.values()), 1e-8);
  }
}

TEST(Cayley, Values) {
  EXPECT_NEAR(std::abs(cayley(0.0) - cplx(1.0, 0.0)), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(cayley(1.0) - cplx(0.0, 1.0)), 0.0, 1e-16);
  EXPECT_THROW(inverse_cayley(cplx(-1.0, 0.0)), InputError);
}

TEST(Cayley, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng);
    err = std::max(err, std::abs(inverse_cayley(cayley(v)) - v));
  }
  EXPECT_LT(err, 1e-12);
}

TEST(LiftLineReparam, IdentityLiftsToIdentity) {
  const auto V = LineReparam::from_mobius(MobiusElement::identity(), -5.0, 5.0);
  EXPECT_LT(sup_diff(lift_line_reparam(V), CircleDiffeo::identity()), 1e-13);
}

TEST(LiftLineReparam, AffineLiftIsMobius) {
  const double eps = 0.5;
  const double alpha = 0.3;
  const auto V = LineReparam::from_mobius(MobiusElement::affine(1 / eps, alpha), -5.0, 5.0);
  const auto r = lift_line_reparam(V);
  EXPECT_LT(numerics::sup_norm(schwarzian(r).values.values()), 1e-8);
  EXPECT_NEAR(r(0.0), 2 * std::atan(alpha), 1e-12);
  EXPECT_NEAR(r(kPi), kPi, 1e-12);
}

TEST(LiftLineReparam, GeneralMobiusTail) {
  const auto m = MobiusElement::normalized(2.0, 1.0, 0.5, 1.0);
  const auto V = LineReparam::from_mobius(m, -1.0, 1.0);
  const auto r = lift_line_reparam(V);
  EXPECT_LT(sup_diff(r, mobius_lift(m)), 1e-12);
  EXPECT_LT(numerics::sup_norm(schwarzian(r).values.values()), 1e-8);
}

TEST(LiftLineReparam, BumpReparam) {
  // V' = 1 + 0.5 e^{-1/(1-v^2)} on (-1, 1), identity tails offset on the right.
  auto vp = [](double v) { return 1.0 + 0.5 * (std::abs(v) < 1 ? std::exp(-1.0 / (1 - v * v)) : 0.0); };
  const auto Vp = numerics::RealFunction::sample(vp, -3.0, 3.0, 4001);
  const auto V = numerics::cumulative_integral(Vp, 0.0);
  const double a = V(3.0) - 3.0;
  const double b = V(-3.0) + 3.0;
  // Left and right tails differ, so this is not Moebius outside the core.
  EXPECT_GT(std::abs(a - b), 1e-3);
  EXPECT_THROW(lift_line_reparam(LineReparam(V, Vp, MobiusElement::affine(1.0, a))), InputError);
}

TEST(LiftLineReparam, RejectsDecreasingMap) {
  EXPECT_THROW(LineReparam::from_functions([](double v) { return -v; }, [](double) { return -1.0; }, -1.0, 1.0, 64,
                                           MobiusElement::identity()),
               InputError);
}

TEST(Schwarzian, MobiusVanishes) {
  const auto m = MobiusElement::normalized(2.0, 1.0, 1.0, 1.0);
  // Pole at u = -1; stay clear of it.
  // Boundary stencils amplify roundoff as h shrinks; 1001 nodes balances that against truncation.
  const auto V = LineReparam::from_mobius(m, 0.0, 3.0, 1001);
  const auto S = schwarzian(V);
  EXPECT_LT(numerics::sup_norm(S.values.values()), 1e-8);
}

TEST(Schwarzian, Exponential) {
  // {e^v, v} = 1 - 3/2 = -1/2.
  auto e = [](double v) { return std::exp(v); };
  const auto V = LineReparam::from_functions(e, e, -2.0, 2.0, 2001, MobiusElement::identity());
  const auto S = schwarzian(V);
  for (double s : S.values.values()) EXPECT_NEAR(s, -0.5, 1e-8);
  EXPECT_LT(S.discrepancy, 1e-6);
}

TEST(Schwarzian, ChainRule) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // y(x) = x + a sin(b x + p), z(y) = y + c tanh(d y), both increasing.
    const double b = 0.5 + std::abs(u(rng));
    const double a = 0.8 * u(rng) / b;
    const double p = 3 * u(rng);
    const double d = 0.5 + std::abs(u(rng));
    const double c = 0.8 * u(rng) / d;
    auto y = [=](double x) { return x + a * std::sin(b * x + p); };
    auto yp = [=](double x) { return 1 + a * b * std::cos(b * x + p); };
    auto z = [=](double t) { return t + c * std::tanh(d * t); };
    auto zp = [=](double t) { return 1 + c * d / (std::cosh(d * t) * std::cosh(d * t)); };
    const std::size_t n = 3001;
    const double lo = -3.0;
    const double hi = 3.0;
    const auto Y = LineReparam::from_functions(y, yp, lo, hi, n, MobiusElement::identity());
    const auto ZY = LineReparam::from_functions([&](double x) { return z(y(x)); },
                                                [&](double x) { return zp(y(x)) * yp(x); }, lo, hi, n,
                                                MobiusElement::identity());
    const double ylo = y(lo) - 1;
    const double yhi = y(hi) + 1;
    const auto Z = LineReparam::from_functions(z, zp, ylo, yhi, 6001, MobiusElement::identity());
    const auto sY = schwarzian(Y).values;
    const auto sZY = schwarzian(ZY).values;
    const auto sZ = schwarzian(Z).values;
    double res = 0.0;
    for (std::size_t i = 20; i + 20 < n; ++i) {
      const double x = sY.nodes()[i];
      const double yy = yp(x);
      res = std::max(res, std::abs(sZY.values()[i] - (sZ.interpolate(y(x)) * yy * yy + sY.values()[i])));
    }
    EXPECT_LT(res, 1e-7) << trial;
  }
}

TEST(Schwarzian, TwoFormsAgreeOnRandomDiffeos) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) EXPECT_LT(schwarzian(random_diffeo(rng)).discrepancy, 1e-6);
}

TEST(Schwarzian, PullbackToLine) {
  // For a random diffeo, {V, v} from the circle matches a direct line computation.
  std::mt19937_64 rng(33);
  const auto r = random_diffeo(rng);
  auto V = [&](double v) { return std::tan(0.5 * r(angle_of(v))); };
  auto Vp = [&](double v) {
    const double w = V(v);
    return r.derivative(angle_of(v), 1) * (1 + w * w) / (1 + v * v);
  };
  // Stay away from points where V passes through infinity.
  double lo = -0.5;
  double hi = 0.5;
  const auto L = LineReparam::from_functions(V, Vp, lo, hi, 4001, MobiusElement::identity());
  const auto S = schwarzian(L).values;
  for (std::size_t i = 0; i < S.size(); i += 200) {
    const double v = S.nodes()[i];
    if (std::abs(std::cos(0.5 * r(angle_of(v)))) < 0.2) continue;
    EXPECT_NEAR(S.values()[i], line_schwarzian_at(r, v), 1e-7 * (1 + std::abs(line_schwarzian_at(r, v))));
  }
}

TEST(Gamma, BasicFieldsAreReal) {
  for (const auto& f : {rotation_field(), translation_field(), special_field()}) {
    const auto g = gamma_conjugate(f);
    for (std::size_t j = 0; j < f.size(); ++j) EXPECT_LT(std::abs(g.samples()[j] - f.samples()[j]), 1e-15);
  }
}

TEST(Gamma, Involution) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::vector<cplx> s(256);
  for (auto& v : s) v = {n(rng), n(rng)};
  const CircleFunction f(s);
  const auto g = gamma_conjugate(gamma_conjugate(f));
  for (std::size_t j = 0; j < s.size(); ++j) EXPECT_LT(std::abs(g.samples()[j] - s[j]), 1e-13);
}

TEST(VirasoroCocycle, AntisymmetricAndVanishingOnDiagonal) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const auto f = random_real_field(rng);
    const auto g = random_real_field(rng);
    EXPECT_NEAR(virasoro_cocycle(f, f), 0.0, 1e-12);
    EXPECT_NEAR(virasoro_cocycle(f, g), -virasoro_cocycle(g, f), 1e-12);
    EXPECT_NEAR(virasoro_cocycle_complex(f, g).imag(), 0.0, 1e-12);
  }
}

TEST(VirasoroCocycle, RotationAndTranslation) {
  EXPECT_NEAR(virasoro_cocycle(rotation_field(), translation_field()), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(omega_residue(rotation_field(), translation_field())), 0.0, 1e-14);
}

TEST(VirasoroCocycle, MatchesResidueOracle) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10; ++i) {
    const auto f = random_real_field(rng, 6);
    const auto g = random_real_field(rng, 6);
    const auto w = virasoro_cocycle_complex(f, g);
    const auto o = omega_residue(f, g);
    EXPECT_LT(std::abs(w - o), 1e-12 * (1 + std::abs(o)));
  }
}

TEST(VirasoroCocycle, Bilinear) {
  std::mt19937_64 rng(13);
  const auto f = random_real_field(rng);
  const auto g = random_real_field(rng);
  const auto h = random_real_field(rng);
  const double a = 0.7;
  const double b = -1.9;
  const auto fg = a * f + b * g;
  EXPECT_NEAR(virasoro_cocycle(fg, h), a * virasoro_cocycle(f, h) + b * virasoro_cocycle(g, h), 1e-12);
}

TEST(Bott, IdentityArguments) {
  std::mt19937_64 rng(14);
  const auto id = CircleDiffeo::identity();
  for (int i = 0; i < 5; ++i) {
    const auto s = random_diffeo(rng);
    EXPECT_NEAR(bott_cocycle(id, s), 0.0, 1e-9);
    EXPECT_NEAR(bott_cocycle(s, id), 0.0, 1e-9);
    EXPECT_NEAR(bott_cocycle(s, invert(s)), 0.0, 1e-9);
  }
}

TEST(Bott, VanishesOnMobiusPairs) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto mob = [&] {
    auto r = subgroup_element(Subgroup::rotation, 3 * u(rng));
    r = compose(r, subgroup_element(Subgroup::translation, u(rng)));
    r = compose(r, subgroup_element(Subgroup::dilation, std::exp(0.7 * u(rng))));
    return compose(r, subgroup_element(Subgroup::special_conformal, u(rng)));
  };
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(bott_cocycle(mob(), mob()), 0.0, 1e-10);
}

TEST(Bott, CocycleIdentity) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 5; ++i) {
    const auto a = random_diffeo(rng);
    const auto b = random_diffeo(rng);
    const auto c = random_diffeo(rng);
    const double lhs = bott_cocycle(a, b) + bott_cocycle(compose(a, b), c);
    const double rhs = bott_cocycle(b, c) + bott_cocycle(a, compose(b, c));
    EXPECT_NEAR(lhs, rhs, 1e-8);
  }
}

TEST(Bott, MixedSecondDerivativeIsHalfOmega) {
  std::mt19937_64 rng(17);
  const double h = 1e-3;
  for (int i = 0; i < 3; ++i) {
    const auto f = random_real_field(rng, 3);
    const auto g = random_real_field(rng, 3);
    auto B = [&](double s, double t) { return bott_cocycle(flow_step(f, s), flow_step(g, t)); };
    const double d12 = (B(h, h) - B(h, -h) - B(-h, h) + B(-h, -h)) / (4 * h * h);
    EXPECT_NEAR(d12, 0.5 * virasoro_cocycle(f, g), 1e-4);
  }
}

TEST(Serialization, BitStableRoundTrip) {
  std::mt19937_64 rng(18);
  const auto r = compose(random_diffeo(rng), subgroup_element(Subgroup::rotation, 5.0));
  std::stringstream io;
  write_csv(io, r);
  const auto back = read_csv(io);
  EXPECT_EQ(back.winding(), r.winding());
  ASSERT_EQ(back.size(), r.size());
  for (std::size_t j = 0; j < r.size(); ++j) EXPECT_EQ(back.periodic()[j], r.periodic()[j]);
}

TEST(CircleDiffeo, RejectsFoldedMap) {
  std::vector<double> p(256);
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = 1.5 * std::sin(2 * kPi * static_cast<double>(j) / 256.0);
  EXPECT_THROW(CircleDiffeo(p, 0), InputError);
}
