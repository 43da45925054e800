#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <numbers>

#include "invsub/oracles.hpp"
#include "invsub/postwidder.hpp"

using namespace invsub;

namespace {

constexpr double kEuler = 0.57721566490153286;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double engine(const SubordinatorSpec& s, double t) {
  const auto r = invert_postwidder(s, t, 1e-8);
  return r.U;
}

} // namespace

TEST(ExactU, SpecExamples) {
  EXPECT_DOUBLE_EQ(exact_U(SubordinatorSpec(PoissonDrift{0.0, 2.0}), 10.1), 5.5);
  EXPECT_NEAR(exact_U(SubordinatorSpec(Stable{0.5}), 4.0), 4.0 / std::sqrt(std::numbers::pi), 1e-14);
  EXPECT_NEAR(exact_U(SubordinatorSpec(UniformStableMix{}), 1.0), kEuler + std::exp(1.0) * boost::math::expint(1, 1.0),
              1e-14);
  EXPECT_NEAR(exact_U(SubordinatorSpec(UniformStableMix{}), 1.0), 1.1735631, 1e-7);
}

TEST(ExactU, AgreesWithIndependentForms) {
  for (double t : {0.01, 0.3, 1.0, 7.0, 50.0, 700.0}) {
    const double um = kEuler + std::exp(t) * boost::math::expint(1, t) + std::log(t);
    EXPECT_LE(rel(exact_U(SubordinatorSpec(UniformStableMix{}), t), um), 1e-13) << t;
    EXPECT_LE(rel(exact_dU(SubordinatorSpec(UniformStableMix{}), t), std::exp(t) * boost::math::expint(1, t)), 1e-13)
        << t;
    for (double a : {0.2, 0.5, 0.9}) {
      EXPECT_LE(rel(exact_U(SubordinatorSpec(Stable{a}), t), std::pow(t, a) / std::tgamma(1 + a)), 1e-13);
      EXPECT_LE(rel(exact_dU(SubordinatorSpec(Stable{a}), t), std::pow(t, a - 1) / std::tgamma(a)), 1e-13);
    }
  }
  EXPECT_EQ(exact_U(SubordinatorSpec(PoissonDrift{0.0, 1.0}), 0.0), 1.0);
  EXPECT_EQ(exact_U(SubordinatorSpec(PoissonDrift{0.0, 1.0}), 0.999), 1.0);
  EXPECT_EQ(exact_U(SubordinatorSpec(PoissonDrift{0.0, 1.0}), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(exact_U(SubordinatorSpec(PureDrift{4.0}), 2.0), 0.5);
  EXPECT_EQ(exact_dU(SubordinatorSpec(PoissonDrift{0.0, 1.0}), 2.5), 0.0);
}

TEST(ExactU, Unsupported) {
  EXPECT_FALSE(has_exact_U(SubordinatorSpec(ParetoCP{1.0})));
  EXPECT_FALSE(has_exact_U(SubordinatorSpec(PoissonDrift{0.5, 1.0})));
  EXPECT_THROW(exact_U(SubordinatorSpec(GIG{1.0, 1.0, -0.5}), 1.0), UnsupportedError);
  EXPECT_THROW(exact_dU(SubordinatorSpec(ParetoCP{2.0}), 1.0), UnsupportedError);
  EXPECT_THROW(exact_U(SubordinatorSpec(Stable{0.5}), -1.0), DomainError);
}

TEST(ExactVarStable, ValuesAndScaling) {
  EXPECT_NEAR(exact_var_stable(0.5, 1.0), 2.0 - 4.0 / std::numbers::pi, 1e-14);
  EXPECT_NEAR(exact_var_stable(0.5, 1.0), 0.7267605, 1e-7);
  for (double a = 0.1; a < 0.95; a += 0.1) {
    const double v1 = exact_var_stable(a, 1.0);
    EXPECT_GE(v1, 0.0) << a;
    for (double t : {0.01, 3.0, 100.0}) EXPECT_LE(rel(exact_var_stable(a, t), std::pow(t, 2 * a) * v1), 1e-12);
  }
  EXPECT_EQ(exact_var_stable(0.5, 0.0), 0.0);
  EXPECT_THROW(exact_var_stable(1.0, 1.0), DomainError);
}

TEST(Asymptotics, SpecExamples) {
  const auto inf = AsymptoticRegime::t_to_infinity, zero = AsymptoticRegime::t_to_zero;
  EXPECT_DOUBLE_EQ(asymptotic_U(SubordinatorSpec(ParetoCP{2.0}), 1e3, inf), 500.0);
  const TwoStableMix m{0.75, 0.25, 0.5, 0.5};
  const double t = 1e-3;
  EXPECT_LE(rel(asymptotic_U(SubordinatorSpec(m), t, zero), std::pow(t, 0.75) / (0.5 * std::tgamma(1.75))), 1e-13);
  EXPECT_LE(rel(asymptotic_U(SubordinatorSpec(GIG{2.0, 0.0, -3.0}), 10.0, inf), 2.0 * 2.0 * 10.0 / 4.0), 1e-15);
}

TEST(Asymptotics, FormulaSelection) {
  const auto inf = AsymptoticRegime::t_to_infinity, zero = AsymptoticRegime::t_to_zero;
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(ParetoCP{0.5}), inf), "pareto_power");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(ParetoCP{1.0}), inf), "pareto_log");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(ParetoCP{2.0}), inf), "pareto_linear");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(GIG{0.0, 1.0, 1.0}), zero), "gig_log");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(GIG{1.0, 1.0, -0.5}), zero), "gig_sqrt");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(GIG{1.0, 1.0, -0.5}), inf), "renewal_slope");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(GIG{1.0, 0.0, -0.5}), inf), "gig_power");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(GIG{1.0, 0.0, -1.0}), inf), "gig_log_linear");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(GIG{1.0, 0.0, -1.5}), inf), "gig_linear");
  EXPECT_EQ(asymptotic_formula(SubordinatorSpec(Stable{0.5}), inf), "");
  EXPECT_THROW(asymptotic_U(SubordinatorSpec(ParetoCP{2.0}), 1e-3, zero), UnsupportedError);
  EXPECT_THROW(asymptotic_U(SubordinatorSpec(PureDrift{1.0}), 1.0, inf), UnsupportedError);
  EXPECT_THROW(asymptotic_U(SubordinatorSpec(ParetoCP{2.0}), 0.0, inf), DomainError);
}

TEST(Asymptotics, RenewalSlopeUsesBesselMean) {
  const double d = 1.0, g = 2.0, k = 0.3, t = 50.0;
  const double slope = g * boost::math::cyl_bessel_k(k, g * d) / (d * boost::math::cyl_bessel_k(1 + k, g * d));
  EXPECT_LE(rel(asymptotic_U(SubordinatorSpec(GIG{d, g, k}), t, AsymptoticRegime::t_to_infinity), slope * t), 1e-12);
}

TEST(Asymptotics, EngineRatioWithinFivePercent) {
  const auto inf = AsymptoticRegime::t_to_infinity, zero = AsymptoticRegime::t_to_zero;
  for (const auto& s : {SubordinatorSpec(ParetoCP{0.5}), SubordinatorSpec(ParetoCP{1.0}), SubordinatorSpec(ParetoCP{2.0}),
                        SubordinatorSpec(TwoStableMix{0.75, 0.25, 0.5, 0.5}), SubordinatorSpec(GIG{1.0, 0.0, -1.5}),
                        SubordinatorSpec(GIG{1.0, 0.0, -1.0}), SubordinatorSpec(GIG{1.0, 0.0, -0.5})})
    EXPECT_NEAR(engine(s, 1e3) / asymptotic_U(s, 1e3, inf), 1.0, 0.05) << s.name();
  for (const auto& s : {SubordinatorSpec(TwoStableMix{0.75, 0.25, 0.5, 0.5}), SubordinatorSpec(GIG{1.0, 1.0, -0.5})})
    EXPECT_NEAR(engine(s, 1e-3) / asymptotic_U(s, 1e-3, zero), 1.0, 0.05) << s.name();
}

TEST(Asymptotics, SqrtBranchWithPositiveKappaApproachesSlowly) {
  // kappa > 0 adds (kappa/2) log(lambda) to phi, so the ratio creeps up to 1.
  const SubordinatorSpec s(GIG{1.0, 1.0, 0.5});
  double prev = 0.0;
  for (double t : {1e-3, 1e-4, 1e-5, 1e-6}) {
    const double r = engine(s, t) / asymptotic_U(s, t, AsymptoticRegime::t_to_zero);
    EXPECT_GT(r, prev) << t;
    prev = r;
  }
  EXPECT_NEAR(prev, 1.0, 0.01);
}
