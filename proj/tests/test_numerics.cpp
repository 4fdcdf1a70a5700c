#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cftqei/numerics.hpp"

using namespace cftqei;
using namespace cftqei::numerics;

namespace {

constexpr double kPi = std::numbers::pi;

RealFunction gaussian_window(std::size_t n = 4097, bool exact = true) {
  return RealFunction::sample([](double v) { return std::exp(-v * v); }, -8.0, 8.0, n, Tail::zero(), Tail::zero(),
                              exact);
}

}  // namespace

TEST(Integrate, PolynomialOnUnitInterval) {
  const auto f = RealFunction::sample([](double v) { return v * v; }, 0.0, 1.0, 65);
  EXPECT_NEAR(integrate(f, {0.0, 1.0}), 1.0 / 3.0, 1e-14);
  const auto g = RealFunction::sample([](double v) { return v * v; }, 0.0, 1.0, 65, Tail::zero(), Tail::zero(), false);
  EXPECT_NEAR(integrate(g, {0.0, 1.0}), 1.0 / 3.0, 1e-14);
  // Sub-interval that does not fall on nodes.
  EXPECT_NEAR(integrate(g, {0.1234, 0.8765}), (std::pow(0.8765, 3) - std::pow(0.1234, 3)) / 3.0, 1e-13);
}

TEST(Integrate, GaussianOverRealLine) {
  EXPECT_NEAR(integrate(gaussian_window()), std::sqrt(kPi), 1e-12);
  EXPECT_NEAR(integrate(gaussian_window(4097, false)), std::sqrt(kPi), 1e-12);
}

TEST(Integrate, SecondMomentAgainstAntiderivative) {
  // d/dv [ -v e^{-v^2}/2 + sqrt(pi)/4 erf(v) ] = v^2 e^{-v^2}
  auto prim = [](double v) { return -0.5 * v * std::exp(-v * v) + 0.25 * std::sqrt(kPi) * std::erf(v); };
  const auto f = RealFunction::sample([](double v) { return v * v * std::exp(-v * v); }, -8.0, 8.0, 2049,
                                      Tail::zero(), Tail::zero(), false);
  EXPECT_NEAR(integrate(f), prim(8.0) - prim(-8.0), 1e-11);
  EXPECT_NEAR(integrate(f), std::sqrt(kPi) / 2.0, 1e-11);
  EXPECT_NEAR(integrate(f, {-1.3, 0.7}), prim(0.7) - prim(-1.3), 1e-11);
}

TEST(Integrate, PowerDecayTailIsIntegratedInClosedForm) {
  // 1/(1+v^2) on [-50, 50] with v^{-2} tails; exact answer pi.
  const auto f = RealFunction::sample([](double v) { return 1.0 / (1.0 + v * v); }, -50.0, 50.0, 20001,
                                      Tail::power(2.0), Tail::power(2.0));
  // Tail model is asymptotic, so the residual is the O(L^{-3}) model error.
  EXPECT_NEAR(integrate(f), kPi, 2e-5);
  const auto g = RealFunction::sample([](double v) { return std::pow(v * v, -2.0); }, 1.0, 10.0, 2001,
                                      Tail::zero(), Tail::power(4.0));
  EXPECT_NEAR(integrate(g, {1.0, kInf}), 1.0 / 3.0, 1e-12);
}

TEST(Integrate, DivergentTailIsAnError) {
  const auto f = RealFunction::sample([](double) { return 1.0; }, -1.0, 1.0, 16, Tail::constant(1.0),
                                      Tail::constant(1.0));
  EXPECT_THROW(integrate(f), NumericalError);
  EXPECT_NEAR(integrate(f, {-3.0, 3.0}), 6.0, 1e-13);
  const auto g = RealFunction::sample([](double v) { return 1.0 / (1.0 + std::abs(v)); }, -1.0, 1.0, 16,
                                      Tail::power(1.0), Tail::power(1.0));
  EXPECT_THROW(integrate(g), NumericalError);
}

TEST(Integrate, IsLinear) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto f = gaussian_window(2049, false);
  const auto g = RealFunction::sample([](double v) { return std::cos(v) * std::exp(-0.5 * v * v); }, -8.0, 8.0, 2049,
                                      Tail::zero(), Tail::zero(), false);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng);
    const double b = u(rng);
    std::vector<double> h(f.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = a * f.values()[i] + b * g.values()[i];
    const auto comb = f.with_values(h, Tail::zero(), Tail::zero());
    const double scale = std::abs(a) + std::abs(b);
    EXPECT_NEAR(integrate(comb), a * integrate(f) + b * integrate(g), 1e-12 * scale);
  }
}

TEST(Differentiate, SineOnPeriod) {
  const auto f = RealFunction::sample([](double v) { return std::sin(v); }, 0.0, 2 * kPi, 1024);
  const auto d = differentiate(f, 1);
  double err = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) err = std::max(err, std::abs(d.values()[i] - std::cos(f.nodes()[i])));
  EXPECT_LT(err, 1e-8);
}

TEST(Differentiate, CubicThirdDerivative) {
  const auto f = RealFunction::sample([](double v) { return v * v * v; }, -1.0, 2.0, 64);
  const auto d = differentiate(f, 3);
  for (double v : d.values()) EXPECT_NEAR(v, 6.0, 1e-7);
}

TEST(Differentiate, GaussianCurvatureAtOrigin) {
  // Symbolic oracle: (e^{-v^2})'' = (4v^2 - 2) e^{-v^2}.
  const auto f = gaussian_window(4097);
  const auto d = differentiate(f, 2);
  double err = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = f.nodes()[i];
    err = std::max(err, std::abs(d.values()[i] - (4 * v * v - 2) * std::exp(-v * v)));
  }
  EXPECT_LT(err, 1e-8);
  EXPECT_NEAR(d.values()[2048], -2.0, 1e-8);
}

TEST(Differentiate, NonUniformGrid) {
  std::vector<double> x;
  for (int i = 0; i <= 400; ++i) {
    const double s = -1.0 + 2.0 * i / 400.0;
    x.push_back(3.0 * std::sinh(1.5 * s) / std::sinh(1.5));
  }
  const auto f = RealFunction::sample_on([](double v) { return std::sin(v); }, x);
  const auto d1 = differentiate(f, 1);
  const auto d3 = differentiate(f, 3);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(d1.values()[i], std::cos(x[i]), 1e-9);
    EXPECT_NEAR(d3.values()[i], -std::cos(x[i]), 1e-5);
  }
}

TEST(Differentiate, GridTooCoarse) {
  const auto f = RealFunction::sample([](double v) { return v; }, 0.0, 1.0, 10);
  EXPECT_NO_THROW(differentiate(f, 1));
  EXPECT_THROW(differentiate(f, 3), InputError);
  EXPECT_THROW(differentiate(f, 4), InputError);
}

TEST(CumulativeIntegral, Constant) {
  const auto f = RealFunction::sample([](double) { return 1.0; }, -2.0, 3.0, 51);
  const auto F = cumulative_integral(f, 0.0);
  for (std::size_t i = 0; i < F.size(); ++i) EXPECT_NEAR(F.values()[i], F.nodes()[i], 1e-14);
  EXPECT_NEAR(F(1.2345), 1.2345, 1e-14);
}

TEST(CumulativeIntegral, CosineGivesSine) {
  const auto f = RealFunction::sample([](double v) { return std::cos(v); }, -4.0, 4.0, 801);
  const auto F = cumulative_integral(f, 0.0);
  for (std::size_t i = 0; i < F.size(); ++i) EXPECT_NEAR(F.values()[i], std::sin(F.nodes()[i]), 1e-10);
  const auto g = f.with_values(f.values(), Tail::zero(), Tail::zero());
  const auto G = cumulative_integral(g, 0.0);
  for (std::size_t i = 0; i < G.size(); ++i) EXPECT_NEAR(G.values()[i], std::sin(G.nodes()[i]), 1e-10);
}

TEST(CumulativeIntegral, ArctanOracle) {
  const auto f = RealFunction::sample([](double v) { return 1.0 / (1.0 + v * v); }, -3.0, 3.0, 601);
  const auto F = cumulative_integral(f, 0.0);
  EXPECT_NEAR(F(1.0), std::atan(1.0), 1e-13);
  EXPECT_NEAR(F(1.0), kPi / 4.0, 1e-13);
  const auto g = f.with_values(f.values(), Tail::zero(), Tail::zero());
  EXPECT_NEAR(cumulative_integral(g, 0.0)(1.0), kPi / 4.0, 1e-10);
}

TEST(CumulativeIntegral, DifferentiateThenIntegrateRecovers) {
  const auto f = RealFunction::sample([](double v) { return std::exp(-v * v) * std::cos(3 * v); }, -5.0, 5.0, 2001,
                                      Tail::zero(), Tail::zero(), false);
  const auto F = cumulative_integral(differentiate(f, 1), f.lo());
  double err = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) err = std::max(err, std::abs(F.values()[i] + f.values()[0] - f.values()[i]));
  EXPECT_LT(err, 1e-8);
}

TEST(CumulativeIntegral, ConstantTailsBecomeAffine) {
  const auto f = RealFunction::sample([](double v) { return 2.0 + std::exp(-v * v); }, -6.0, 6.0, 601,
                                      Tail::constant(2.0), Tail::constant(2.0));
  const auto F = cumulative_integral(f, 0.0);
  EXPECT_EQ(F.right_tail().kind, Tail::Kind::affine);
  EXPECT_NEAR(F(10.0), 20.0 + std::sqrt(kPi) / 2.0, 1e-10);
  EXPECT_NEAR(F(-10.0), -20.0 - std::sqrt(kPi) / 2.0, 1e-10);
}

TEST(UnwrapPhase, ConstantSequence) {
  std::vector<std::complex<double>> z(32, {1.0, 0.0});
  for (double v : unwrap_phase(z)) EXPECT_EQ(v, 0.0);
}

TEST(UnwrapPhase, TwoTurns) {
  std::vector<std::complex<double>> z;
  for (int k = 0; k <= 400; ++k) z.push_back(std::polar(1.0, 4 * kPi * k / 400.0));
  const auto ph = unwrap_phase(z);
  EXPECT_NEAR(ph.back(), 4 * kPi, 1e-12);
  EXPECT_GT(ph.front(), -kPi);
  EXPECT_LE(ph.front(), kPi);
}

TEST(UnwrapPhase, MobiusDerivativeHasZeroWinding) {
  // sigma(z) = (a z + b)/(conj(b) z + conj(a)), |a|^2 - |b|^2 = 1: sigma'(z) = (conj(b) z + conj(a))^{-2}.
  const std::complex<double> b(0.4, -0.3);
  const std::complex<double> a = std::polar(std::sqrt(1.0 + std::norm(b)), 0.7);
  std::vector<std::complex<double>> s;
  for (int j = 0; j <= 1024; ++j) {
    const auto z = std::polar(1.0, 2 * kPi * j / 1024.0);
    const auto den = std::conj(b) * z + std::conj(a);
    s.push_back(1.0 / (den * den));
  }
  const auto ph = unwrap_phase(s);
  EXPECT_LT(std::abs(ph.back() - ph.front()), 1e-8);
}

TEST(UnwrapPhase, DifferencesMatchPrincipalSteps) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> step(-2.5, 2.5);
  std::vector<std::complex<double>> z{std::polar(1.3, 2.0)};
  for (int i = 0; i < 200; ++i) z.push_back(z.back() * std::polar(1.0 + 0.01 * i, step(rng)));
  const auto ph = unwrap_phase(z);
  for (std::size_t i = 1; i < z.size(); ++i) EXPECT_NEAR(ph[i] - ph[i - 1], std::arg(z[i] / z[i - 1]), 1e-14);
}

TEST(UnwrapPhase, UndersampledIsRejected) {
  std::vector<std::complex<double>> z{{1.0, 0.0}, {-1.0, 0.0}};
  EXPECT_THROW(unwrap_phase(z), NumericalError);
  std::vector<std::complex<double>> w{{1.0, 0.0}, std::polar(1.0, 2.0)};
  EXPECT_THROW(unwrap_phase(w, 1.5), NumericalError);
}

TEST(FindRoot, Linear) { EXPECT_NEAR(find_root_monotone([](double x) { return x - 2.0; }, {0.0, 5.0}), 2.0, 1e-14); }

TEST(FindRoot, HalfAngleTangent) {
  EXPECT_NEAR(find_root_monotone([](double x) { return std::tan(x / 2) - 1.0; }, {0.0, 3.0}), kPi / 2, 1e-14);
}

TEST(FindRoot, InvertsReparametrisation) {
  auto V = [](double v) { return v + 0.3 * std::exp(-v * v) * v; };
  const double x = find_root_monotone([&](double v) { return V(v) - 1.0; }, {-5.0, 5.0});
  EXPECT_LT(std::abs(V(x) - 1.0), 1e-12);
}

TEST(FindRoot, NoSignChange) {
  EXPECT_THROW(find_root_monotone([](double x) { return x * x + 1.0; }, {-1.0, 1.0}), InputError);
}

TEST(RealFunction, RejectsBadGrids) {
  EXPECT_THROW(RealFunction({0, 1, 2}, {0, 1, 2}), InputError);
  EXPECT_THROW(RealFunction({0, 1, 2, 3, 4, 5, 6, 6}, {0, 0, 0, 0, 0, 0, 0, 0}), InputError);
  EXPECT_THROW(Interval(1.0, 1.0), InputError);
}
