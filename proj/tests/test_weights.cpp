#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "cftqei/weights.hpp"

using namespace cftqei;
using namespace cftqei::weights;

namespace {

constexpr double kPi = std::numbers::pi;
// -(1/12 pi) * sqrt(pi)/2, from int v^2 e^{-v^2} = sqrt(pi)/2.
const double kGaussianBound = -std::sqrt(kPi) / (24.0 * kPi);

WeightFunction zero_weight() {
  return {numerics::RealFunction::sample([](double) { return 0.0; }, -1.0, 1.0, 64), DecayClass::compact,
          numerics::Interval(-1.0, 1.0), "zero"};
}

}  // namespace

TEST(SqrtDerivative, GaussianMatchesSymbolicRoot) {
  const auto G = catalog("gaussian");
  const auto s = sqrt_weight_derivative(G);
  double err = 0.0;
  for (std::size_t i = 0; i < s.phi.size(); ++i) {
    const double v = s.phi.nodes()[i];
    // Masked nodes (G below 1e-14 max) are zero by rule.
    const double expect = s.zero_set_mask[i] ? 0.0 : -v * std::exp(-0.5 * v * v);
    err = std::max(err, std::abs(s.phi.values()[i] - expect));
  }
  EXPECT_LT(err, 1e-8);
}

TEST(SqrtDerivative, ZeroWeight) {
  const auto s = sqrt_weight_derivative(zero_weight());
  for (double v : s.phi.values()) EXPECT_EQ(v, 0.0);
}

TEST(SqrtDerivative, BumpVanishesOffSupport) {
  const auto G = catalog("bump");
  const auto s = sqrt_weight_derivative(G);
  EXPECT_EQ(s.phi.values().front(), 0.0);
  EXPECT_EQ(s.phi.values().back(), 0.0);
  EXPECT_TRUE(s.zero_set_mask.front());
  for (double v : s.phi.values()) EXPECT_TRUE(std::isfinite(v));
  // sqrt(bump)' = -x/(1-x^2)^2 * exp(-1/(2(1-x^2))).
  for (std::size_t i = 0; i < s.phi.size(); i += 97) {
    const double x = s.phi.nodes()[i];
    const double q = 1 - x * x;
    if (q <= 0.05) continue;
    EXPECT_NEAR(s.phi.values()[i], -x / (q * q) * std::exp(-0.5 / q), 1e-7);
  }
}

TEST(QeiFunctional, GaussianClosedForm) {
  const double b = qei_functional(catalog("gaussian"), 1.0);
  EXPECT_NEAR(b, kGaussianBound, 1e-10 * std::abs(kGaussianBound));
  // The quoted six-digit value rounds the last digit down.
  EXPECT_NEAR(b, -0.0235077, 5e-7);
}

TEST(QeiFunctional, ZeroWeightGivesZero) { EXPECT_EQ(qei_functional(zero_weight(), 1.0), 0.0); }

TEST(QeiFunctional, TranslationInvariant) {
  const double b0 = qei_functional(catalog("bump"), 1.0);
  for (double shift : {-3.7, 0.25, 11.0}) {
    EXPECT_NEAR(qei_functional(catalog("bump", {{"center", shift}}), 1.0), b0, 1e-12 * std::abs(b0));
  }
}

TEST(QeiFunctional, RejectsNonPositiveCentralCharge) {
  EXPECT_THROW(qei_functional(catalog("gaussian"), 0.0), InputError);
  EXPECT_THROW(qei_functional(catalog("gaussian"), -1.0), InputError);
}

TEST(QeiFunctional, LinearInCentralCharge) {
  for (const auto& name : catalog_names()) {
    const auto G = catalog(name);
    const double b1 = qei_functional(G, 1.0);
    EXPECT_LE(b1, 0.0) << name;
    EXPECT_DOUBLE_EQ(qei_functional(G, 2.5), 2.5 * b1) << name;
  }
}

TEST(QeiFunctional, ScalingLaw) {
  // G_l(v) = G(l v) has int phi_l^2 = l int phi^2.
  for (const char* name : {"gaussian", "bump", "plateau", "sech2"}) {
    const double base = phi_squared_integral(catalog(name));
    for (double l : {0.5, 2.0, 5.0}) {
      const double scaled = phi_squared_integral(catalog(name, {{"width", 1.0 / l}}));
      EXPECT_NEAR(scaled, l * base, 1e-6 * l * base) << name << " l=" << l;
    }
  }
}

TEST(QeiFunctional, LorentzianIsFlaggedButComputed) {
  const auto G = catalog("lorentzian");
  EXPECT_FALSE(G.within_hypotheses());
  EXPECT_TRUE(catalog("gaussian").within_hypotheses());
  // (sqrt G)' = -v (1+v^2)^{-3/2}; int v^2 (1+v^2)^{-3} = pi/8.
  EXPECT_NEAR(phi_squared_integral(G), kPi / 8.0, 1e-6);
  // For (1+v^2)^{-2}: (sqrt G)' = -2v/(1+v^2)^2, int 4v^2 (1+v^2)^{-4} = pi/4.
  EXPECT_NEAR(phi_squared_integral(catalog("lorentzian-squared")), kPi / 4.0, 1e-6);
}

TEST(LemmaA1, GaussianStationaryPoint) {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const double oracle = golden * (1.0 + golden) * std::exp(-golden);
  const double m = lemma_A1_constant(catalog("gaussian"));
  EXPECT_NEAR(m, oracle, 1e-5);
  EXPECT_GE(m, 0.83);
  EXPECT_LE(m, 0.85);
}

TEST(LemmaA1, ZeroWeight) { EXPECT_EQ(lemma_A1_constant(zero_weight()), 0.0); }

TEST(LemmaA1, BumpStaysBoundedAsThresholdShrinks) {
  const auto G = catalog("bump");
  double prev = 0.0;
  for (double thr : {1e-6, 1e-10, 1e-14, 1e-18}) {
    ToleranceSet tol;
    tol.zero_threshold = thr;
    const double m = lemma_A1_constant(G, tol);
    EXPECT_TRUE(std::isfinite(m));
    EXPECT_GE(m, prev - 1e-12);
    // Closed-form maximum of (1+x^2) x^2 (1-x^2)^{-4} e^{-1/(1-x^2)}.
    EXPECT_NEAR(m, 6.3038387792, 1e-4);
    prev = m;
  }
}

TEST(LemmaA1, CertifiesPointwiseBound) {
  for (const auto& name : catalog_names()) {
    const auto G = catalog(name);
    const double m = lemma_A1_constant(G);
    const auto s = sqrt_weight_derivative(G);
    for (std::size_t i = 0; i < s.phi.size(); ++i) {
      const double v = s.phi.nodes()[i];
      EXPECT_LE(s.phi.values()[i] * s.phi.values()[i], m / (1 + v * v) * (1 + 1e-12)) << name;
    }
  }
}

TEST(EpsilonLimit, GaussianConvergesMonotonically) {
  const auto G = catalog("gaussian");
  const std::vector<double> eps{1e-1, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10};
  const auto I = epsilon_limit_check(G, eps);
  for (std::size_t k = 1; k < I.size(); ++k) EXPECT_GE(I[k], I[k - 1]);
  const double limit = phi_squared_integral(G);
  EXPECT_NEAR(limit, std::sqrt(kPi) / 2, 1e-10);
  EXPECT_NEAR(I.back(), limit, 1e-6 * limit);
}

TEST(EpsilonLimit, ZeroWeight) {
  for (double v : epsilon_limit_check(zero_weight(), {1.0, 0.5})) EXPECT_EQ(v, 0.0);
}

TEST(EpsilonLimit, RejectsAscendingList) {
  EXPECT_THROW(epsilon_limit_check(catalog("bump"), {1e-3, 1e-2}), InputError);
}

TEST(EpsilonLimit, BumpConverges) {
  const auto G = catalog("bump");
  const auto I = epsilon_limit_check(G, {1e-2, 1e-4, 1e-8, 1e-12});
  for (std::size_t k = 1; k < I.size(); ++k) EXPECT_GE(I[k], I[k - 1]);
  const double limit = phi_squared_integral(G);
  EXPECT_NEAR(I.back(), limit, 1e-6 * limit);
}

TEST(WeightFunction, NegativeSampleNamesNode) {
  auto f = numerics::RealFunction::sample([](double v) { return v; }, -1.0, 1.0, 16);
  try {
    WeightFunction w(f, DecayClass::compact, numerics::Interval(-1.0, 1.0));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("node 0"), std::string::npos);
  }
}

TEST(WeightFunction, CsvRoundTrip) {
  std::ostringstream out;
  out << "# bump\nv,G\n";
  const auto G = catalog("bump", {}, 801);
  for (std::size_t i = 0; i < G.f().size(); ++i) out << G.f().nodes()[i] << "," << G.f().values()[i] << "\n";
  std::istringstream in(out.str());
  const auto H = parse_csv(in);
  EXPECT_EQ(H.decay(), DecayClass::compact);
  EXPECT_NEAR(H.support_measure(), 2.0, 1e-12);
  EXPECT_NEAR(qei_functional(H, 1.0), qei_functional(G, 1.0), 1e-6 * std::abs(qei_functional(G, 1.0)));
}

TEST(WeightFunction, CatalogRejectsUnknown) {
  EXPECT_THROW(catalog("cauchy"), InputError);
  EXPECT_THROW(catalog("gaussian", {{"sigma", 1.0}}), InputError);
  EXPECT_THROW(catalog("gaussian", {{"width", -1.0}}), InputError);
}
