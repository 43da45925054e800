#pragma once

// Real special functions used by the subordinator families and the oracles:
// log-gamma, modified Bessel K, Bessel J/Y, the generalized exponential
// integral on [1, inf) and the scaled incomplete gamma e^t Gamma(0, t).

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "invsub/errors.hpp"
#include "invsub/quadrature.hpp"

namespace invsub::special {

struct SpecialFnResult {
  double value = 0.0;
  double est_abs_error = 0.0;
};

inline constexpr double kEulerGamma = std::numbers::egamma;

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = 1e-300;

// Taylor coefficients of 1/Gamma(z) = sum_{k>=1} c_k z^k.
inline constexpr std::array<double, 30> kRecipGammaCoeffs = {
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.04200263503409523553,
    0.16653861138229148950,
    -0.04219773455554433675,
    -0.00962197152787697356,
    0.00721894324666309954,
    -0.00116516759185906511,
    -0.00021524167411495097,
    0.00012805028238811619,
    -0.00002013485478078824,
    -0.00000125049348214267,
    0.00000113302723198170,
    -0.00000020563384169776,
    0.00000000611609510448,
    0.00000000500200764447,
    -0.00000000118127457049,
    0.00000000010434267117,
    0.00000000000778226344,
    -0.00000000000369680562,
    0.00000000000051003703,
    -0.00000000000002058326,
    -0.00000000000000534812,
    0.00000000000000122678,
    -0.00000000000000011813,
    0.00000000000000000119,
    0.00000000000000000141,
    -0.00000000000000000023,
    0.00000000000000000002};

/// 1/Gamma(1+a) for |a| <= 1/2.
inline double recip_gamma_1p(double a) {
  double s = 0.0;
  for (int k = static_cast<int>(kRecipGammaCoeffs.size()) - 1; k >= 0; --k)
    s = s * a + kRecipGammaCoeffs[k];
  return s;
}

/// (Gamma(1+a) - 1)/a for |a| <= 1/2, without cancellation.
inline double gamma1pm1_over_a(double a) {
  double tail = 0.0;
  for (int k = static_cast<int>(kRecipGammaCoeffs.size()) - 1; k >= 1; --k)
    tail = tail * a + kRecipGammaCoeffs[k];
  return -tail / recip_gamma_1p(a);
}

/// (x^a - 1)/a with the a -> 0 limit log(x).
inline double powm1_over_a(double x, double a) {
  const double l = std::log(x);
  if (a == 0.0) return l;
  return std::expm1(a * l) / a;
}

} // namespace detail

/// log Gamma(x) for x > 0 (Lanczos below 10, Stirling series above).
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0");
  if (x >= 10.0) {
    const double inv = 1.0 / x, inv2 = inv * inv;
    const double series =
        inv * (1.0 / 12 + inv2 * (-1.0 / 360 + inv2 * (1.0 / 1260 + inv2 * (-1.0 / 1680 +
               inv2 * (1.0 / 1188 + inv2 * (-691.0 / 360360 + inv2 * (1.0 / 156 +
               inv2 * (-3617.0 / 122400))))))));
    return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
  }
  if (x < 0.5) {
    // Reflection keeps the Lanczos sum in its accurate range.
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  static constexpr std::array<double, 9> p = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double z = x - 1.0;
  double a = p[0];
  for (int i = 1; i < 9; ++i) a += p[i] / (z + i);
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

/// log(x^j / j!) with the factorial accumulated as a log sum.
inline double log_power_over_factorial(double x, int j) {
  if (j == 0) return 0.0;
  double log_fact = 0.0;
  for (int i = 2; i <= j; ++i) log_fact += std::log(static_cast<double>(i));
  return j * std::log(x) - log_fact;
}

// ---------------------------------------------------------------------------
// Modified Bessel function of the second kind.
// ---------------------------------------------------------------------------

namespace detail {

/// log of int_0^inf exp(-x (cosh u - 1)) cosh(nu u) du, i.e. log(e^x K_nu(x)),
/// together with its absolute error relative to the returned scale.
inline std::pair<double, double> log_scaled_bessel_k(double nu, double x) {
  nu = std::abs(nu);
  const double u_peak = std::asinh(nu / x);
  const double g_peak = -x * (std::cosh(u_peak) - 1.0) + nu * u_peak;
  auto g = [&](double u) { return -x * (std::cosh(u) - 1.0) + nu * u; };
  // Past the peak g decreases monotonically; find where it drops by 45.
  double hi = u_peak + 1.0;
  while (g(hi) - g_peak > -45.0) hi = u_peak + 2.0 * (hi - u_peak);
  double lo = u_peak;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) - g_peak > -45.0 ? lo : hi) = mid;
  }
  auto integrand = [&](double u) {
    const double damp = (nu > 0.0) ? 0.5 * (1.0 + std::exp(-2.0 * nu * u)) : 1.0;
    return std::exp(g(u) - g_peak) * damp;
  };
  quad::Options opt;
  opt.rel_tol = 1e-14;
  opt.abs_tol = 0.0;
  auto left = quad::integrate(integrand, 0.0, u_peak, opt);
  auto right = quad::integrate(integrand, u_peak, hi, opt);
  const double total = left.value + right.value;
  const double err = left.abs_error + right.abs_error + 1e-19 * total;
  return {g_peak + std::log(total), err / total};
}

} // namespace detail

/// log K_nu(x) for x > 0; never overflows.
inline double log_bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k requires x > 0");
  return detail::log_scaled_bessel_k(nu, x).first - x;
}

/// e^x K_nu(x).
inline double bessel_k_scaled(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k requires x > 0");
  const double l = detail::log_scaled_bessel_k(nu, x).first;
  if (l > 709.0) throw OverflowError("bessel_k_scaled overflows", l);
  return std::exp(l);
}

/// K_nu(x) with an absolute error estimate.
inline SpecialFnResult bessel_k_result(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k requires x > 0");
  const auto [l, rel] = detail::log_scaled_bessel_k(nu, x);
  const double lk = l - x;
  if (lk > 709.0) throw OverflowError("bessel_k overflows for small x and large |nu|", lk);
  const double v = std::exp(lk);
  return {v, rel * v + detail::kEps * v};
}

inline double bessel_k(double nu, double x) { return bessel_k_result(nu, x).value; }

// ---------------------------------------------------------------------------
// Bessel functions of the first and second kind, real order nu >= 0.
// ---------------------------------------------------------------------------

struct BesselJY {
  double j = 0.0;
  double y = 0.0;
};

namespace detail {

/// Hankel asymptotic expansion, adequate once x >> nu^2.
inline BesselJY bessel_jy_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0, term = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) > std::abs(term) && k > 2) break;
    term = next;
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      case 0: p += term; break;
    }
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
  const double amp = std::sqrt(2.0 / (std::numbers::pi * x));
  return {amp * (p * std::cos(chi) - q * std::sin(chi)),
          amp * (p * std::sin(chi) + q * std::cos(chi))};
}

/// Temme series (x < 2) or Steed's continued fractions, followed by
/// recurrence in the order.
inline BesselJY bessel_jy_steed(double nu, double x) {
  constexpr int kMaxIt = 100000;
  constexpr double kFpMin = 1e-290;
  const double pi = std::numbers::pi;
  const int nl = (x < 2.0) ? static_cast<int>(nu + 0.5) : std::max(0, static_cast<int>(nu - x + 1.5));
  const double xmu = nu - nl;
  const double xmu2 = xmu * xmu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double w = xi2 / pi;

  // CF1: J'_nu / J_nu.
  int isign = 1;
  double h = nu * xi;
  if (h < kFpMin) h = kFpMin;
  double b = xi2 * nu, d = 0.0, c = h;
  int it = 0;
  for (; it < kMaxIt; ++it) {
    b += xi2;
    d = b - d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b - 1.0 / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (d < 0.0) isign = -isign;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  if (it == kMaxIt) throw AccuracyError("bessel_jy: continued fraction CF1 failed", std::abs(h));

  double rjl = isign * 1e-30;
  double rjpl = h * rjl;
  const double rjl1 = rjl;
  double fact = nu * xi;
  for (int l = nl - 1; l >= 0; --l) {
    const double rjtemp = fact * rjl + rjpl;
    fact -= xi;
    rjpl = fact * rjtemp - rjl;
    rjl = rjtemp;
  }
  if (rjl == 0.0) rjl = kEps;
  const double f = rjpl / rjl;

  double rjmu, rymu, ry1;
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = pi * xmu;
    const double fct = (std::abs(pimu) < kEps) ? 1.0 : pimu / std::sin(pimu);
    double dd = -std::log(x2);
    double e = xmu * dd;
    const double fact2 = (std::abs(e) < kEps) ? 1.0 : std::sinh(e) / e;
    const double gampl = recip_gamma_1p(xmu);
    const double gammi = recip_gamma_1p(-xmu);
    // gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), evaluated from the series.
    double gam1 = 0.0;
    for (int k = static_cast<int>(kRecipGammaCoeffs.size()) - 1; k >= 1; k -= 2)
      gam1 = gam1 * xmu2 + kRecipGammaCoeffs[k];
    gam1 = -gam1;
    const double gam2 = 0.5 * (gammi + gampl);
    double ff = 2.0 / pi * fct * (gam1 * std::cosh(e) + gam2 * fact2 * dd);
    e = std::exp(e);
    double p = e / (gampl * pi);
    double q = 1.0 / (e * pi * gammi);
    const double pimu2 = 0.5 * pimu;
    const double fact3 = (std::abs(pimu2) < kEps) ? 1.0 : std::sin(pimu2) / pimu2;
    const double r = pi * pimu2 * fact3 * fact3;
    double cc = 1.0;
    dd = -x2 * x2;
    double sum = ff + r * q;
    double sum1 = p;
    int i = 1;
    for (; i < kMaxIt; ++i) {
      ff = (i * ff + p + q) / (i * i - xmu2);
      cc *= dd / i;
      p /= (i - xmu);
      q /= (i + xmu);
      const double del = cc * (ff + r * q);
      sum += del;
      const double del1 = cc * p - i * del;
      sum1 += del1;
      if (std::abs(del) < (1.0 + std::abs(sum)) * kEps) break;
    }
    if (i == kMaxIt) throw AccuracyError("bessel_jy: Temme series failed", std::abs(sum));
    rymu = -sum;
    ry1 = -sum1 * xi2;
    const double rymup = xmu * xi * rymu - ry1;
    rjmu = w / (rymup - f * rymu);
  } else {
    double a = 0.25 - xmu2;
    double p = -0.5 * xi;
    double q = 1.0;
    const double br = 2.0 * x;
    double bi = 2.0;
    double fct = a * xi / (p * p + q * q);
    double cr = br + q * fct;
    double ci = bi + p * fct;
    double den = br * br + bi * bi;
    double dr = br / den;
    double di = -bi / den;
    double dlr = cr * dr - ci * di;
    double dli = cr * di + ci * dr;
    double temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    int i = 1;
    for (; i < kMaxIt; ++i) {
      a += 2 * i;
      bi += 2.0;
      dr = a * dr + br;
      di = a * di + bi;
      if (std::abs(dr) + std::abs(di) < kFpMin) dr = kFpMin;
      fct = a / (cr * cr + ci * ci);
      cr = br + cr * fct;
      ci = bi - ci * fct;
      if (std::abs(cr) + std::abs(ci) < kFpMin) cr = kFpMin;
      den = dr * dr + di * di;
      dr /= den;
      di /= -den;
      dlr = cr * dr - ci * di;
      dli = cr * di + ci * dr;
      temp = p * dlr - q * dli;
      q = p * dli + q * dlr;
      p = temp;
      if (std::abs(dlr - 1.0) + std::abs(dli) <= kEps) break;
    }
    if (i == kMaxIt) throw AccuracyError("bessel_jy: continued fraction CF2 failed", std::abs(p));
    const double gam = (p - f) / q;
    rjmu = std::sqrt(w / ((p - f) * gam + q));
    rjmu = std::copysign(rjmu, rjl);
    rymu = rjmu * gam;
    const double rymup = rymu * (p + q / gam);
    ry1 = xmu * xi * rymu - rymup;
  }
  const double scale = rjmu / rjl;
  const double rj = rjl1 * scale;
  for (int i = 1; i <= nl; ++i) {
    const double rytemp = (xmu + i) * xi2 * ry1 - rymu;
    rymu = ry1;
    ry1 = rytemp;
  }
  return {rj, rymu};
}

inline bool use_hankel(double nu, double x) { return x > std::max(35.0, 2.0 * nu * nu); }

} // namespace detail

/// J_nu(x) and Y_nu(x) for nu >= 0, x > 0.
inline BesselJY bessel_jy(double nu, double x) {
  if (nu < 0.0) throw DomainError("bessel_jy requires nu >= 0");
  if (!(x > 0.0)) throw DomainError("bessel_jy requires x > 0");
  if (x > 1e5 * (1.0 + nu)) {
    // Phase x - (nu/2 + 1/4) pi cannot be resolved to full precision this far out.
    if (x > 1e15) throw AccuracyError("bessel_jy: argument too large for a meaningful phase", x);
  }
  if (detail::use_hankel(nu, x)) return detail::bessel_jy_asymptotic(nu, x);
  if (nu > 1e4 * (x + 1.0)) throw AccuracyError("bessel_jy: order far exceeds argument", nu / x);
  return detail::bessel_jy_steed(nu, x);
}

/// J_nu(x)^2 + Y_nu(x)^2, using the non-oscillatory modulus expansion for large x.
inline double bessel_modulus_squared(double nu, double x) {
  if (detail::use_hankel(nu, x)) {
    const double mu = 4.0 * nu * nu;
    const double z2 = 4.0 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double next = term * (odd / (2.0 * k)) * (mu - odd * odd) / z2;
      if (std::abs(next) > std::abs(term)) break;
      term = next;
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return 2.0 / (std::numbers::pi * x) * sum;
  }
  const auto jy = detail::bessel_jy_steed(nu, x);
  return jy.j * jy.j + jy.y * jy.y;
}

// ---------------------------------------------------------------------------
// Incomplete gamma and exponential integrals.
// ---------------------------------------------------------------------------

namespace detail {

/// Continued fraction for Gamma(a, x) e^x x^{-a}; converges for x > a + 1.
inline double upper_gamma_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw AccuracyError("incomplete gamma continued fraction did not converge", h);
}

/// Gamma(a, x) for |a| < 1/2 and moderate x.
inline double upper_gamma_small_a(double a, double x) {
  // Gamma(a,x) = [Gamma(1+a) - 1]/a - (x^a - 1)/a - x^a sum_{n>=1} (-x)^n / (n! (a+n))
  double s = 0.0, term = 1.0;
  for (int n = 1; n < 500; ++n) {
    term *= -x / n;
    const double add = term / (a + n);
    s += add;
    if (std::abs(add) < kEps * std::abs(s)) break;
  }
  return gamma1pm1_over_a(a) - powm1_over_a(x, a) - std::pow(x, a) * s;
}

/// Regularised lower incomplete gamma P(a, x) by its power series (a > 0).
inline double lower_gamma_p_series(double a, double x) {
  double ap = a, del = 1.0 / a, sum = del;
  for (int n = 0; n < 100000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

} // namespace detail

/// log Gamma(a, x) for real a and x > 0 (upper incomplete gamma, unregularised).
inline double log_upper_gamma(double a, double x) {
  if (!(x > 0.0)) throw DomainError("log_upper_gamma requires x > 0");
  if (std::abs(a) < 0.5 && x < 1.5) return std::log(detail::upper_gamma_small_a(a, x));
  if (x > a + 1.0 && x >= 1.0) return -x + a * std::log(x) + std::log(detail::upper_gamma_cf(a, x));
  if (a >= 0.5) return log_gamma(a) + std::log1p(-detail::lower_gamma_p_series(a, x));
  // a <= -1/2 and x < 1: Gamma(a,x) = (Gamma(a+1,x) - x^a e^{-x}) / a, climbing to |a| < 1/2.
  const int steps = static_cast<int>(std::ceil(-a - 0.5));
  double top = a + steps;
  double g = detail::upper_gamma_small_a(top, x);
  for (int i = 0; i < steps; ++i) {
    const double lower = top - 1.0;
    g = (g - std::exp(lower * std::log(x) - x)) / lower;
    top = lower;
  }
  return std::log(g);
}

/// log of E_nu(lambda) = int_1^inf exp(-lambda x) x^{-nu} dx.
inline double log_gen_exp_integral(double nu, double lambda) {
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("gen_exp_integral requires lambda >= 0");
  if (lambda == 0.0) {
    if (nu > 1.0) return -std::log(nu - 1.0);
    throw DomainError("gen_exp_integral diverges for nu <= 1 at lambda = 0");
  }
  if (nu > 1.0 && lambda < 1.0) {
    // Upward recurrence E_{v+1} = (e^{-x} - x E_v)/v is stable for x < 1.
    const int steps = static_cast<int>(std::ceil(nu - 1.0));
    double v = nu - steps;  // in (0, 1]
    double e = std::exp((v - 1.0) * std::log(lambda) + log_upper_gamma(1.0 - v, lambda));
    const double ex = std::exp(-lambda);
    for (int i = 0; i < steps; ++i) {
      e = (ex - lambda * e) / v;
      v += 1.0;
    }
    return std::log(e);
  }
  return (nu - 1.0) * std::log(lambda) + log_upper_gamma(1.0 - nu, lambda);
}

/// E_nu(lambda) = int_1^inf exp(-lambda x) x^{-nu} dx.
inline double gen_exp_integral(double nu, double lambda) {
  const double l = log_gen_exp_integral(nu, lambda);
  if (l > 709.78) throw OverflowError("gen_exp_integral overflows", l);
  return std::exp(l);
}

inline SpecialFnResult gen_exp_integral_result(double nu, double lambda) {
  const double v = gen_exp_integral(nu, lambda);
  return {v, 64.0 * detail::kEps * v};
}

/// e^t Gamma(0, t) = e^t E_1(t) for t > 0, evaluated without forming e^t.
inline double exp_scaled_gamma0(double t) {
  if (!(t > 0.0)) throw DomainError("exp_scaled_gamma0 requires t > 0");
  if (t >= 1.0) return detail::upper_gamma_cf(0.0, t);
  return std::exp(t) * detail::upper_gamma_small_a(0.0, t);
}

} // namespace invsub::special
