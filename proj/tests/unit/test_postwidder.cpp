#include <gtest/gtest.h>

#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <numbers>

#include "invsub/oracles.hpp"
#include "invsub/postwidder.hpp"

using namespace invsub;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Lagrange basis through h_i = 2^{-(i-1)}, evaluated at h = 0.
std::vector<double> lagrange_at_zero(int n) {
  std::vector<long double> h(n);
  for (int i = 0; i < n; ++i) h[i] = std::ldexp(1.0L, -i);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    long double p = 1.0L;
    for (int j = 0; j < n; ++j)
      if (j != i) p *= (0.0L - h[j]) / (h[i] - h[j]);
    w[i] = static_cast<double>(p);
  }
  return w;
}

// Post-Widder terms of the alpha-stable renewal function in closed form.
double stable_uk(double a, double t, int k) {
  return std::exp(a * std::log(t) + std::lgamma(k + a) - a * std::log(k) - std::lgamma(k) - std::lgamma(1.0 + a));
}
double stable_duk(double a, double t, int k) {
  return std::exp(std::lgamma(k - 1.0 + a) - std::lgamma(a) - std::lgamma(k) + (1.0 - a) * std::log(k / t));
}

} // namespace

TEST(ExtrapolationWeights, SpecExamples) {
  EXPECT_EQ(extrapolation_weights(1), std::vector<double>{1.0});
  const auto w2 = extrapolation_weights(2);
  EXPECT_DOUBLE_EQ(w2[0], -1.0);
  EXPECT_DOUBLE_EQ(w2[1], 2.0);
}

TEST(ExtrapolationWeights, MatchLagrangeBasisAndSumToOne) {
  for (int n = 1; n <= 10; ++n) {
    const auto w = extrapolation_weights(n);
    const auto ref = lagrange_at_zero(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      EXPECT_LE(rel(w[i], ref[i]), 1e-12) << n << " " << i;
      sum += w[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12) << n;
  }
  EXPECT_THROW(extrapolation_weights(0), DomainError);
  EXPECT_THROW(extrapolation_weights(11), DomainError);
}

TEST(ExtrapolationWeights, ConstantReproductionAndPolynomialExactness) {
  for (int n = 1; n <= 10; ++n) {
    EXPECT_NEAR(extrapolate(std::vector<double>(n, 3.25)), 3.25, 4e-15 * (1 << n)) << n;
    // q(h) = sum_{d<n} (d+1)(-1)^d h^d, q(0) = 1
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
      const double h = std::ldexp(1.0, -i);
      double q = 0.0, hp = 1.0;
      for (int d = 0; d < n; ++d, hp *= h) q += (d + 1) * (d % 2 ? -1.0 : 1.0) * hp;
      v[i] = q;
    }
    EXPECT_LE(std::abs(extrapolate(v) - 1.0), 1e-9) << n;
  }
}

TEST(PostWidderTerm, PureDriftIsExactForEveryK) {
  for (double mu : {0.5, 2.0})
    for (double t : {0.01, 1.0, 100.0})
      for (int k : {1, 2, 3, 16, 128, 512}) {
        const auto r = u_k(SubordinatorSpec(PureDrift{mu}), t, k, 1.0 / t);
        EXPECT_LE(rel(r.U, t / mu), 1e-12) << mu << " " << t << " " << k;
        EXPECT_LE(rel(r.dU, 1.0 / mu), 1e-12) << mu << " " << t << " " << k;
      }
}

TEST(PostWidderTerm, StableClosedForm) {
  const SubordinatorSpec s(Stable{0.5});
  EXPECT_NEAR(u_k(s, 1.0, 1, 1.0).U, 1.0, 1e-15);
  for (double a : {0.3, 0.5, 0.8}) {
    const SubordinatorSpec sa(Stable{a});
    for (double t : {0.1, 1.0, 30.0})
      for (int k : {1, 2, 3, 8, 64, 512}) {
        const auto r = u_k(sa, t, k, 1.0 / t);
        EXPECT_LE(rel(r.U, stable_uk(a, t, k)), 1e-11) << a << " " << t << " " << k;
        if (k > 1) EXPECT_LE(rel(r.dU, stable_duk(a, t, k)), 1e-11) << a << " " << t << " " << k;
      }
  }
}

TEST(PostWidderTerm, RejectsBadArguments) {
  const SubordinatorSpec s(Stable{0.5});
  EXPECT_THROW(u_k(s, 0.0, 1, 1.0), DomainError);
  EXPECT_THROW(u_k(s, 1.0, 0, 1.0), DomainError);
  EXPECT_THROW(u_k(s, 1.0, 513, 1.0), DomainError);
  EXPECT_THROW(u_k(s, 1.0, 4, 0.0), DomainError);
}

TEST(LeibnizSolve, ResidualAtLargeK) {
  const SubordinatorSpec s(PoissonDrift{1.0, 1.0});
  for (int k : {16, 512}) {
    const double t = 1.0, lambda = k / t, sigma = k * (1.0 / t);
    const auto a = phi_taylor(s, lambda, sigma, static_cast<std::size_t>(k));
    const auto d = solve_leibniz(a, lambda, 1.0 / t);
    ASSERT_EQ(d.values.size(), static_cast<std::size_t>(k));
    long double worst = 0.0L;
    for (int j = 0; j < k; ++j) {
      long double row = j == 0 ? -1.0L : 0.0L;
      for (int i = 0; i <= j; ++i) row += static_cast<long double>(a[j - i]) * d.values[i];
      worst = std::max(worst, std::fabs(row));
    }
    EXPECT_LE(static_cast<double>(worst), 1e-12 * std::abs(a[0] * d.values[0])) << k;
    EXPECT_LE(d.residual, 1e-12) << k;
  }
  EXPECT_THROW(solve_leibniz({0.0, 1.0}, 1.0, 1.0), AccuracyError);
}

TEST(LeibnizSolve, LogSpaceCoefficients) {
  // For driftless Poisson the normalised coefficients are
  // (-1)^{m+1} e^{-lambda} sigma^m / m!, so they expose k^m/m! at sigma = k.
  const SubordinatorSpec s(PoissonDrift{0.0, 1.0});
  for (int k = 1; k <= 32; ++k) {
    const auto a = phi_taylor(s, k, k, 33);
    long double exact = 1.0L;
    for (int m = 1; m <= 32; ++m) {
      exact *= static_cast<long double>(k) / m;
      const double got = (m % 2 ? 1.0 : -1.0) * a[m] * std::exp(static_cast<double>(k));
      EXPECT_LE(rel(got, static_cast<double>(exact)), 1e-12) << k << " " << m;
    }
  }
}

TEST(PostWidder, SpecExamples) {
  const auto st = invert_postwidder(SubordinatorSpec(Stable{0.5}), 1.0, 1e-8);
  EXPECT_NEAR(st.U, 2.0 / std::sqrt(std::numbers::pi), 1e-8);
  EXPECT_TRUE(st.converged);
  EXPECT_TRUE(st.diagnostic.empty());

  const double t = 10.0;
  const double ref = 0.57721566490153286 + std::exp(t) * boost::math::expint(1, t) + std::log(t);
  EXPECT_NEAR(invert_postwidder(SubordinatorSpec(UniformStableMix{}), t, 1e-8).U, ref, 1e-7);

  const auto po = invert_postwidder(SubordinatorSpec(PoissonDrift{0.0, 1.0}), 10.1, 1e-6);
  EXPECT_GE(std::abs(po.U - 11.0), 0.1);
  EXPECT_FALSE(po.diagnostic.empty());
}

TEST(PostWidder, PureDriftEndToEnd) {
  for (double t : {0.01, 1.0, 100.0}) {
    const auto r = invert_postwidder(SubordinatorSpec(PureDrift{1.5}), t, 1e-10);
    EXPECT_NEAR(r.U, t / 1.5, 1e-10 * std::max(1.0, t / 1.5)) << t;
    EXPECT_TRUE(r.converged);
  }
}

TEST(PostWidder, ScalingInvariance) {
  const SubordinatorSpec s(Stable{0.5});
  const double eps = 1e-8;
  for (double t : {0.01, 0.5, 1.0, 10.0, 100.0}) {
    PostWidderOptions a, b;
    a.eps = b.eps = eps;
    b.c_factor = 2.0;
    const auto ra = invert_postwidder(s, t, a), rb = invert_postwidder(s, t, b);
    EXPECT_NEAR(ra.U, rb.U, 10 * eps) << t;
  }
}

TEST(PostWidder, DensityMatchesClosedForm) {
  for (double t : {0.1, 1.0, 10.0}) {
    const auto r = invert_postwidder(SubordinatorSpec(Stable{0.5}), t, 1e-8);
    ASSERT_TRUE(r.dU.has_value());
    EXPECT_LE(rel(*r.dU, exact_dU(SubordinatorSpec(Stable{0.5}), t)), 1e-6) << t;
  }
}

TEST(PostWidder, AtomAtZero) {
  EXPECT_EQ(invert_postwidder(SubordinatorSpec(Stable{0.5}), 0.0, 1e-6).U, 0.0);
  EXPECT_DOUBLE_EQ(invert_postwidder(SubordinatorSpec(ParetoCP{1.5}), 0.0, 1e-6).U, 1.0);
  EXPECT_DOUBLE_EQ(invert_postwidder(SubordinatorSpec(PoissonDrift{0.0, 2.0}), 0.0, 1e-6).U, 0.5);
  EXPECT_EQ(invert_postwidder(SubordinatorSpec(PoissonDrift{0.3, 2.0}), 0.0, 1e-6).U, 0.0);
}

TEST(PostWidder, NonConvergenceIsFlaggedNotThrown) {
  PostWidderOptions opt;
  opt.eps = 1e-15;
  opt.max_rows = 3;
  const auto r = invert_postwidder(SubordinatorSpec(ParetoCP{0.5}), 2.0, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.diagnostic.empty());
  EXPECT_EQ(r.n_used, 3);
  EXPECT_GT(r.est_error, 0.0);
  EXPECT_THROW(invert_postwidder(SubordinatorSpec(Stable{0.5}), -1.0, 1e-6), DomainError);
  EXPECT_THROW(invert_postwidder(SubordinatorSpec(Stable{0.5}), 1.0, 0.0), DomainError);
}

TEST(PostWidder, TableShape) {
  PostWidderOptions opt;
  opt.eps = 1e-14;
  const auto tab = postwidder_table(SubordinatorSpec(GIG{1.0, 1.0, -0.5}), 1.0, opt);
  ASSERT_LE(tab.n_used, 9);
  for (int i = 0; i < tab.n_used; ++i) {
    EXPECT_EQ(tab.k_list[i], 1 << i);
    EXPECT_DOUBLE_EQ(tab.h_list[i], 1.0 / tab.k_list[i]);
  }
}
