#pragma once

// The Lévy exponent phi: real values, complex values on Re z > 0, scaled
// Taylor coefficients and raw derivatives.

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "invsub/errors.hpp"
#include "invsub/levy.hpp"
#include "invsub/quadrature.hpp"
#include "invsub/special_functions.hpp"
#include "invsub/taylor_series.hpp"

namespace invsub {

using cplx = std::complex<double>;

namespace detail {

/// e^z - 1 without cancellation near z = 0.
inline cplx cexpm1(cplx z) {
  const double x = z.real(), y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

/// log(1 + w) without cancellation near w = 0.
inline cplx clog1p(cplx w) {
  const double x = w.real(), y = w.imag();
  return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}

/// (1 - e^{-p L}) / p, with the p -> 0 limit L.
inline cplx one_minus_exp_over_p(cplx L, double p) {
  const cplx pl = p * L;
  if (std::abs(pl) < 1e-4) return L * (1.0 - 0.5 * pl + pl * pl / 6.0 - pl * pl * pl / 24.0);
  return -cexpm1(-pl) / p;
}

/// log(1 + d) / d, expanded near d = 0.
template <typename T>
T log1p_over(T d) {
  if (std::abs(d) < 1e-3) {
    T s(0.0), p(1.0);
    for (int k = 1; k <= 8; ++k) {
      s += p / static_cast<double>(k);
      p *= -d;
    }
    return s;
  }
  return std::log(T(1.0) + d) / d;
}

/// E_nu(z) for Re z > 0 along the ray on which e^{-z x} decays monotonically.
inline cplx gen_exp_integral_complex(double nu, cplx z) {
  const double r = std::abs(z);
  const cplx dir = r / z;  // x = 1 + dir * s
  auto f = [&](double s) { return std::exp(-r * s) * std::pow(1.0 + dir * s, -nu); };
  quad::Options opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 0.0;
  const auto res = quad::integrate_to_infinity(f, 0.0, 1.0 / r, opt);
  if (!res.converged) throw AccuracyError("complex exponential integral did not converge", res.abs_error);
  return std::exp(-z) * dir * res.value;
}

/// phi for the rate-1 Pareto(alpha) compound Poisson at complex z:
/// (1 - e^{-z}) + z E_alpha(z), which is alpha int_1^inf (1 - e^{-zx}) x^{-alpha-1} dx.
inline cplx pareto_phi_complex(double alpha, cplx z) {
  return -cexpm1(-z) + z * gen_exp_integral_complex(alpha, z);
}

inline double pareto_phi(double alpha, double lambda) {
  return -std::expm1(-lambda) + lambda * special::gen_exp_integral(alpha, lambda);
}

inline double uniform_mix_phi(double lambda) {
  if (lambda == 0.0) return 0.0;
  return 1.0 / log1p_over(lambda - 1.0);
}

inline double gig_phi_closed(const GIG& g, double lambda) {
  if (lambda == 0.0) return 0.0;
  const double k = g.kappa, d = g.delta, gm = g.gamma;
  if (d == 0.0) return k * std::log1p(2.0 * lambda / (gm * gm));
  if (k == -0.5) {
    const double s = std::sqrt(gm * gm + 2.0 * lambda);
    return d * 2.0 * lambda / (s + gm);
  }
  if (gm == 0.0) {
    // -log[2 (z/2)^nu K_nu(z) / Gamma(nu)], z = delta sqrt(2 lambda), nu = -kappa.
    const double nu = -k, z = d * std::sqrt(2.0 * lambda);
    return -(std::log(2.0) + nu * std::log(0.5 * z) + special::log_bessel_k(nu, z) - special::log_gamma(nu));
  }
  const double s = std::sqrt(gm * gm + 2.0 * lambda);
  if (k == 0.5) return std::log1p(2.0 * lambda / (gm * (s + gm))) + d * 2.0 * lambda / (s + gm);
  return 0.5 * k * std::log1p(2.0 * lambda / (gm * gm)) - special::log_bessel_k(k, d * s) +
         special::log_bessel_k(k, d * gm);
}

inline cplx gig_phi_complex(const GIG& g, const GigWeights* w, cplx z) {
  const double k = g.kappa, d = g.delta, gm = g.gamma;
  if (d == 0.0) return k * clog1p(2.0 * z / (gm * gm));
  if (k == -0.5) {
    const cplx s = std::sqrt(gm * gm + 2.0 * z);
    return d * 2.0 * z / (s + gm);
  }
  if (k == 0.5 && gm > 0.0) {
    const cplx s = std::sqrt(gm * gm + 2.0 * z);
    return std::log(s / gm) + d * 2.0 * z / (s + gm);
  }
  // Frullani form: kappa+ log(1 + z/q) + int w(y) log(1 + z/(q + y)) dy.
  cplx s(0.0);
  for (std::size_t j = 0; j < w->y.size(); ++j) s += w->wdy[j] * clog1p(z / (w->q + w->y[j]));
  if (w->q > 0.0) {
    s += (w->kappa_plus + w->tail_mass) * clog1p(z / w->q);
  } else {
    s += w->tail_coef * std::pow(w->y_min, w->nu) / w->nu * (std::log(z / w->y_min) + 1.0 / w->nu);
  }
  return s;
}

inline double gig_phi_grid(const GigWeights& w, double lambda) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.y.size(); ++j) s += w.wdy[j] * std::log1p(lambda / (w.q + w.y[j]));
  if (w.q > 0.0) {
    s += (w.kappa_plus + w.tail_mass) * std::log1p(lambda / w.q);
  } else {
    s += w.tail_coef * std::pow(w.y_min, w.nu) / w.nu * (std::log(lambda / w.y_min) + 1.0 / w.nu);
  }
  return s;
}

// --- measure-defined quadrature (Custom) -----------------------------------

inline quad::Options measure_quad_options() {
  quad::Options opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 0.0;
  return opt;
}

/// int_{lower}^inf f(x) g(x) dx on the log axis, split at x = center.
template <typename F>
quad::Result<double> log_axis_integral(F&& fg, double lower, double center) {
  auto h = [&](double u) {
    const double x = std::exp(u);
    if (x == 0.0 || !std::isfinite(x)) return 0.0;
    const double v = fg(x) * x;
    return std::isfinite(v) ? v : 0.0;
  };
  const auto opt = measure_quad_options();
  const double u_low = lower > 0.0 ? std::log(lower) : -std::numeric_limits<double>::infinity();
  const double u0 = std::max(std::log(center), u_low);
  auto right = quad::integrate_to_infinity(h, u0, 1.0, opt, 80);
  if (u_low == u0) return right;
  quad::Result<double> left;
  if (std::isfinite(u_low)) {
    left = quad::integrate(h, u_low, u0, opt);
  } else {
    auto mirrored = [&](double v) { return h(u0 - v); };
    left = quad::integrate_to_infinity(mirrored, 0.0, 1.0, opt, 80);
  }
  right.value += left.value;
  right.abs_error += left.abs_error;
  right.converged = right.converged && left.converged;
  right.evaluations += left.evaluations;
  return right;
}

inline double kernel_lower(const MeasureKernel& k) {
  return std::holds_alternative<ParetoKernel>(k) ? 1.0 : 0.0;
}

inline void check_quad(const quad::Result<double>& r, const char* what) {
  if (!r.converged || !(r.abs_error <= 1e-8 * std::abs(r.value) + 1e-300))
    throw AccuracyError(what, r.abs_error);
}

inline double custom_phi(const Custom& c, double lambda) {
  double s = c.drift * lambda;
  for (const auto& k : c.kernels) {
    if (const auto* at = std::get_if<AtomKernel>(&k)) {
      s -= at->w * std::expm1(-lambda * at->x);
      continue;
    }
    auto fg = [&](double x) { return -std::expm1(-lambda * x) * kernel_density(k, x); };
    const auto r = log_axis_integral(fg, kernel_lower(k), 1.0 / lambda);
    check_quad(r, "Lévy exponent quadrature did not converge");
    s += r.value;
  }
  return s;
}

inline cplx custom_phi_complex(const Custom& c, cplx z) {
  cplx s = c.drift * z;
  for (const auto& k : c.kernels) {
    s += std::visit(
        [z](const auto& v) -> cplx {
          using K = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<K, AtomKernel>) {
            return -v.w * cexpm1(-z * v.x);
          } else if constexpr (std::is_same_v<K, ParetoKernel>) {
            return pareto_phi_complex(v.alpha, z);
          } else if constexpr (std::is_same_v<K, StableKernel>) {
            return v.weight * std::pow(z, v.alpha);
          } else {
            // Gamma(p+1) b^{-p} (1 - (1 + z/b)^{-p}) / p with p = a + 1.
            const double p = v.a + 1.0;
            const cplx L = clog1p(z / v.b);
            return std::tgamma(p + 1.0) * std::pow(v.b, -p) * one_minus_exp_over_p(L, p);
          }
        },
        k);
  }
  return s;
}

/// Adds w * (scaled Taylor coefficients of 1 - e^{-x (lambda + sigma s)}).
inline void add_atom_taylor(std::vector<double>& a, double x, double w, double lambda, double sigma) {
  a[0] -= w * std::expm1(-lambda * x);
  const double lxs = std::log(x * sigma);
  double log_fact = 0.0;
  for (std::size_t m = 1; m < a.size(); ++m) {
    log_fact += std::log(static_cast<double>(m));
    const double sign = (m % 2 == 1) ? 1.0 : -1.0;
    const double l = std::log(w) - lambda * x + m * lxs - log_fact;
    if (l < -745.0) break;
    a[m] += sign * std::exp(l);
  }
}

inline TruncatedSeries stable_series(double alpha, double lambda, double sigma, std::size_t n) {
  return pow(TruncatedSeries::variable(n, lambda, sigma), alpha);
}

inline std::vector<double> uniform_mix_taylor(double lambda, double sigma, std::size_t n) {
  // a_m = int_0^1 C(beta, m) (sigma/lambda)^m lambda^beta d beta for m >= 1.
  std::vector<double> a(n, 0.0);
  a[0] = uniform_mix_phi(lambda);
  if (n == 1) return a;
  const auto& gl = quad::gauss_legendre_64();
  const double r = sigma / lambda, lr = std::log(r);
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double beta = 0.5 * (1.0 + gl.nodes[i]);
    const double wt = 0.5 * gl.weights[i] * std::pow(lambda, beta);
    double c = 1.0;  // C(beta, m), |C| <= 1
    for (std::size_t m = 1; m < n; ++m) {
      c *= (beta - static_cast<double>(m) + 1.0) / static_cast<double>(m);
      const double term = wt * c * std::exp(static_cast<double>(m) * lr);
      a[m] += term;
    }
  }
  return a;
}

inline std::vector<double> pareto_taylor(double alpha, double lambda, double sigma, std::size_t n) {
  std::vector<double> a(n, 0.0);
  a[0] = pareto_phi(alpha, lambda);
  const double la = std::log(alpha), ls = std::log(sigma);
  double log_fact = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    log_fact += std::log(static_cast<double>(m));
    const double l = la + m * ls - log_fact + special::log_gen_exp_integral(1.0 + alpha - m, lambda);
    if (l > 709.0) throw OverflowError("Pareto Taylor coefficient overflows at order " + std::to_string(m), l);
    a[m] = ((m % 2 == 1) ? 1.0 : -1.0) * std::exp(l);
  }
  return a;
}

inline std::vector<double> gig_taylor(const GIG& g, const GigWeights* w, double lambda, double sigma,
                                      std::size_t n) {
  std::vector<double> a(n, 0.0);
  a[0] = gig_phi_closed(g, lambda);
  if (n == 1) return a;
  if (g.delta == 0.0) {
    // kappa log(1 + 2(lambda + sigma s)/gamma^2): a_m = kappa (-1)^{m+1} rho^m / m.
    const double rho = sigma / (lambda + 0.5 * g.gamma * g.gamma);
    double p = 1.0;
    for (std::size_t m = 1; m < n; ++m) {
      p *= rho;
      a[m] = ((m % 2 == 1) ? 1.0 : -1.0) * g.kappa * p / static_cast<double>(m);
    }
    return a;
  }
  // a_m = (-1)^{m+1}/m [ (kappa+ + tail) rho^m + int w(y) (sigma/(lambda + q + y))^m dy ]
  std::vector<double> acc(n, 0.0);
  for (std::size_t j = 0; j < w->y.size(); ++j) {
    const double r = sigma / (lambda + w->q + w->y[j]);
    double p = w->wdy[j];
    for (std::size_t m = 1; m < n; ++m) {
      p *= r;
      if (p < 1e-300) break;
      acc[m] += p;
    }
  }
  const double rho = sigma / (lambda + w->q);
  double p = w->kappa_plus + w->tail_mass;
  for (std::size_t m = 1; m < n; ++m) {
    p *= rho;
    a[m] = ((m % 2 == 1) ? 1.0 : -1.0) * (acc[m] + p) / static_cast<double>(m);
  }
  return a;
}

inline std::vector<double> custom_taylor(const Custom& c, double lambda, double sigma, std::size_t n) {
  std::vector<double> a(n, 0.0);
  a[0] = custom_phi(c, lambda);
  if (n > 1) a[1] += c.drift * sigma;
  for (const auto& k : c.kernels) {
    if (const auto* at = std::get_if<AtomKernel>(&k)) {
      std::vector<double> tmp(n, 0.0);
      add_atom_taylor(tmp, at->x, at->w, lambda, sigma);
      for (std::size_t m = 1; m < n; ++m) a[m] += tmp[m];
      continue;
    }
    double log_fact = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
      log_fact += std::log(static_cast<double>(m));
      // sigma^m / m! int x^m e^{-lambda x} g(x) dx
      auto fg = [&](double x) {
        return std::exp(m * std::log(sigma * x) - log_fact - lambda * x) * kernel_density(k, x);
      };
      const auto r = log_axis_integral(fg, kernel_lower(k), static_cast<double>(m) / lambda);
      check_quad(r, "Lévy exponent derivative quadrature did not converge");
      a[m] += ((m % 2 == 1) ? 1.0 : -1.0) * r.value;
    }
  }
  return a;
}

} // namespace detail

/// phi(lambda) for lambda >= 0.
inline double phi_eval(const SubordinatorSpec& spec, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("phi_eval requires lambda >= 0");
  if (lambda == 0.0) return 0.0;
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PoissonDrift>) {
          return f.mu * lambda - f.r * std::expm1(-lambda);
        } else if constexpr (std::is_same_v<F, ParetoCP>) {
          return detail::pareto_phi(f.alpha, lambda);
        } else if constexpr (std::is_same_v<F, Stable>) {
          return std::pow(lambda, f.alpha);
        } else if constexpr (std::is_same_v<F, TwoStableMix>) {
          return f.c1 * std::pow(lambda, f.alpha1) + f.c2 * std::pow(lambda, f.alpha2);
        } else if constexpr (std::is_same_v<F, UniformStableMix>) {
          return detail::uniform_mix_phi(lambda);
        } else if constexpr (std::is_same_v<F, GIG>) {
          return detail::gig_phi_closed(f, lambda);
        } else if constexpr (std::is_same_v<F, PureDrift>) {
          return f.mu * lambda;
        } else {
          return detail::custom_phi(f, lambda);
        }
      },
      spec.family());
}

/// phi(z) for Re z > 0 (principal branches).
inline cplx phi_complex(const SubordinatorSpec& spec, cplx z) {
  if (!(z.real() > 0.0)) throw DomainError("phi_complex requires Re z > 0");
  return std::visit(
      [&](const auto& f) -> cplx {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PoissonDrift>) {
          return f.mu * z - f.r * detail::cexpm1(-z);
        } else if constexpr (std::is_same_v<F, ParetoCP>) {
          return detail::pareto_phi_complex(f.alpha, z);
        } else if constexpr (std::is_same_v<F, Stable>) {
          return std::pow(z, f.alpha);
        } else if constexpr (std::is_same_v<F, TwoStableMix>) {
          return f.c1 * std::pow(z, f.alpha1) + f.c2 * std::pow(z, f.alpha2);
        } else if constexpr (std::is_same_v<F, UniformStableMix>) {
          return 1.0 / detail::log1p_over(z - 1.0);
        } else if constexpr (std::is_same_v<F, GIG>) {
          return detail::gig_phi_complex(f, spec.gig_weights(), z);
        } else if constexpr (std::is_same_v<F, PureDrift>) {
          return f.mu * z;
        } else {
          return detail::custom_phi_complex(f, z);
        }
      },
      spec.family());
}

/// (phi_r, phi_i) with phi(b + iu) = phi_r + i phi_i.
inline std::pair<double, double> phi_real_imag(const SubordinatorSpec& spec, double b, double u) {
  if (!(b > 0.0)) throw DomainError("phi_real_imag requires b > 0");
  if (u == 0.0) return {phi_eval(spec, b), 0.0};
  const cplx v = phi_complex(spec, cplx(b, u));
  return {v.real(), v.imag()};
}

/// Scaled Taylor coefficients a_m = phi^{(m)}(lambda) sigma^m / m!, m < n.
inline std::vector<double> phi_taylor(const SubordinatorSpec& spec, double lambda, double sigma, std::size_t n) {
  if (!(lambda > 0.0)) throw DomainError("phi_taylor requires lambda > 0");
  if (!(sigma > 0.0)) throw DomainError("phi_taylor requires sigma > 0");
  if (n == 0) return {};
  return std::visit(
      [&](const auto& f) -> std::vector<double> {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PoissonDrift>) {
          // mu x + r (1 - exp(-x)), x = lambda + sigma s.
          const auto x = TruncatedSeries::variable(n, lambda, sigma);
          auto e = exp(TruncatedSeries::variable(n, 0.0, -sigma)) * (-f.r * std::exp(-lambda));
          auto s = x * f.mu + e;
          s[0] = phi_eval(spec, lambda);
          return s.coeffs();
        } else if constexpr (std::is_same_v<F, ParetoCP>) {
          return detail::pareto_taylor(f.alpha, lambda, sigma, n);
        } else if constexpr (std::is_same_v<F, Stable>) {
          return detail::stable_series(f.alpha, lambda, sigma, n).coeffs();
        } else if constexpr (std::is_same_v<F, TwoStableMix>) {
          auto s = detail::stable_series(f.alpha1, lambda, sigma, n) * f.c1 +
                   detail::stable_series(f.alpha2, lambda, sigma, n) * f.c2;
          return s.coeffs();
        } else if constexpr (std::is_same_v<F, UniformStableMix>) {
          return detail::uniform_mix_taylor(lambda, sigma, n);
        } else if constexpr (std::is_same_v<F, GIG>) {
          return detail::gig_taylor(f, spec.gig_weights(), lambda, sigma, n);
        } else if constexpr (std::is_same_v<F, PureDrift>) {
          return TruncatedSeries::variable(n, f.mu * lambda, f.mu * sigma).coeffs();
        } else {
          return detail::custom_taylor(f, lambda, sigma, n);
        }
      },
      spec.family());
}

/// [phi(lambda), phi'(lambda), ..., phi^{(k-1)}(lambda)].
inline std::vector<double> phi_derivs(const SubordinatorSpec& spec, double lambda, int k) {
  if (k < 1 || k > 513) throw DomainError("phi_derivs requires 1 <= k <= 513");
  const auto a = phi_taylor(spec, lambda, lambda, static_cast<std::size_t>(k));
  std::vector<double> d(a.size());
  double log_fact = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (m > 0) log_fact += std::log(static_cast<double>(m));
    if (a[m] == 0.0) {
      d[m] = 0.0;
      continue;
    }
    const double l = std::log(std::abs(a[m])) + log_fact - static_cast<double>(m) * std::log(lambda);
    if (l > 709.78) throw OverflowError("phi derivative of order " + std::to_string(m) + " overflows", l);
    d[m] = std::copysign(std::exp(l), a[m]);
  }
  return d;
}

} // namespace invsub
