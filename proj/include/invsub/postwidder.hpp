#pragma once

// Post-Widder inversion of 1/(lambda phi(lambda)) with Richardson extrapolation
// in h = 1/k over k_i = 2^{i-1}.
//
// With lambda = k/t, sigma = k c and b = scaled Taylor coefficients of
// psi = 1/phi at lambda (b_j = psi^{(j)} sigma^j / j!), the k-th term is
//   U_k  = sum_{j<k} (-1)^j (1/(t c))^j b_j
//   dU_k = (-1)^{k-1} (k/t) (1/(t c))^{k-1} b_{k-1}.
// The coefficients b solve the lower-triangular Leibniz system a * b = e_0,
// where a holds the scaled Taylor coefficients of phi.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "invsub/errors.hpp"
#include "invsub/estimate.hpp"
#include "invsub/exponent.hpp"
#include "invsub/levy.hpp"

namespace invsub {

inline constexpr int kMaxPostWidderK = 512;
inline constexpr int kMaxExtrapolationRows = 9;

/// Scaled derivatives of psi = 1/phi at lambda: values[j] = psi^{(j)} sigma^j / j!.
struct DerivVector {
  double lambda = 0.0;
  int k = 0;
  std::vector<double> values;
  double scale_c = 0.0;
  double residual = 0.0;  ///< max_j |sum_i a_{j-i} b_i - [j = 0]|
};

struct UkTerm {
  double U = 0.0;
  double dU = 0.0;
  double residual = 0.0;
};

struct ExtrapolationTable {
  double t = 0.0;
  std::vector<int> k_list;
  std::vector<double> h_list;
  std::vector<double> u_list;
  std::vector<double> du_list;
  std::vector<double> p_list;
  std::vector<double> dp_list;
  bool converged = false;
  int n_used = 0;
  double est_error = 0.0;
  double du_est_error = 0.0;
  double residual = 0.0;
};

/// Weight of the renewal-measure atom at 0: 1/Pi(0, inf) for driftless compound Poisson.
inline double atom_at_zero_exact(const SubordinatorSpec& spec) {
  if (spec.drift() > 0.0) return 0.0;
  const double m = spec.total_mass();
  return std::isfinite(m) && m > 0.0 ? 1.0 / m : 0.0;
}

/// Forward substitution for b in a * b = e_0 (Cauchy product), with residual.
inline DerivVector solve_leibniz(const std::vector<double>& a, double lambda, double c) {
  DerivVector d;
  d.lambda = lambda;
  d.k = static_cast<int>(a.size());
  d.scale_c = c;
  if (a.empty()) return d;
  if (!(a[0] > 0.0))
    throw AccuracyError("triangular solve: non-positive diagonal phi(lambda); upstream quadrature failed", a[0]);
  const std::size_t n = a.size();
  d.values.assign(n, 0.0);
  d.values[0] = 1.0 / a[0];
  for (std::size_t j = 1; j < n; ++j) {
    double s = 0.0;
    for (std::size_t m = 1; m <= j; ++m) s += a[m] * d.values[j - m];
    d.values[j] = -s / a[0];
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    long double row = 0.0L;
    for (std::size_t i = 0; i <= j; ++i) row += static_cast<long double>(a[j - i]) * d.values[i];
    if (j == 0) row -= 1.0L;
    worst = std::max(worst, static_cast<double>(std::fabs(row)));
  }
  d.residual = worst;
  return d;
}

/// Scaled psi-derivatives at lambda = k/t with sigma = k c.
inline DerivVector psi_derivs(const SubordinatorSpec& spec, double t, int k, double c) {
  const double lambda = k / t;
  const auto a = phi_taylor(spec, lambda, k * c, static_cast<std::size_t>(k));
  return solve_leibniz(a, lambda, c);
}

/// The k-th Post-Widder terms for U and U'.
inline UkTerm u_k(const SubordinatorSpec& spec, double t, int k, double c) {
  if (!(t > 0.0)) throw DomainError("u_k requires t > 0");
  if (k < 1 || k > kMaxPostWidderK) throw DomainError("u_k requires 1 <= k <= 512");
  if (!(c > 0.0)) throw DomainError("u_k requires c > 0");
  const auto d = psi_derivs(spec, t, k, c);
  const double log_ratio = -std::log(t * c);
  UkTerm r;
  r.residual = d.residual;
  double sum = 0.0;
  for (int j = 0; j < k; ++j) {
    const double b = d.values[j];
    if (b == 0.0) continue;
    const double l = std::log(std::abs(b)) + j * log_ratio;
    if (l > 709.0) throw OverflowError("Post-Widder term overflows at k = " + std::to_string(k), l);
    const double sign = ((j % 2 == 0) ? 1.0 : -1.0) * (b > 0.0 ? 1.0 : -1.0);
    sum += sign * std::exp(l);
  }
  r.U = sum;
  double b_last = d.values[k - 1];
  if (k == 1) b_last -= atom_at_zero_exact(spec);  // the atom at 0 is not part of the density
  if (b_last != 0.0) {
    const double l = std::log(k / t) + (k - 1) * log_ratio + std::log(std::abs(b_last));
    if (l > 709.0) throw OverflowError("Post-Widder density term overflows at k = " + std::to_string(k), l);
    const double sign = (((k - 1) % 2 == 0) ? 1.0 : -1.0) * (b_last > 0.0 ? 1.0 : -1.0);
    r.dU = sign * std::exp(l);
  }
  return r;
}

/// c_i^{(n)} = (-1)^{n-i} 2^{i(i-1)/2} / (prod_{j<i}(2^j - 1) prod_{j<=n-i}(2^j - 1)).
inline std::vector<double> extrapolation_weights(int n) {
  if (n < 1 || n > 10) throw DomainError("extrapolation_weights requires 1 <= n <= 10");
  std::vector<double> c(n);
  for (int i = 1; i <= n; ++i) {
    double den = 1.0;
    for (int j = 1; j <= i - 1; ++j) den *= std::ldexp(1.0, j) - 1.0;
    for (int j = 1; j <= n - i; ++j) den *= std::ldexp(1.0, j) - 1.0;
    const double sign = ((n - i) % 2 == 0) ? 1.0 : -1.0;
    c[i - 1] = sign * std::ldexp(1.0, i * (i - 1) / 2) / den;
  }
  return c;
}

/// P_n(0) from values sampled at h_i = 2^{-(i-1)}, n = values.size().
inline double extrapolate(const std::vector<double>& values) {
  const auto w = extrapolation_weights(static_cast<int>(values.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
  return s;
}

struct PostWidderOptions {
  double eps = 1e-6;
  double c_factor = 1.0;  ///< c = c_factor / t
  int max_rows = kMaxExtrapolationRows;
};

/// Builds the extrapolation table until |P_n - P_{n-1}| < eps or n = max_rows.
inline ExtrapolationTable postwidder_table(const SubordinatorSpec& spec, double t, const PostWidderOptions& opt) {
  if (!(t > 0.0)) throw DomainError("Post-Widder requires t > 0");
  if (!(opt.eps > 0.0)) throw DomainError("Post-Widder requires eps > 0");
  if (opt.max_rows < 1 || opt.max_rows > 10) throw DomainError("Post-Widder rows must lie in 1..10");
  ExtrapolationTable tab;
  tab.t = t;
  const double c = opt.c_factor / t;
  for (int n = 1; n <= opt.max_rows; ++n) {
    const int k = 1 << (n - 1);
    const auto term = u_k(spec, t, k, c);
    tab.k_list.push_back(k);
    tab.h_list.push_back(1.0 / k);
    tab.u_list.push_back(term.U);
    tab.du_list.push_back(term.dU);
    tab.residual = std::max(tab.residual, term.residual);
    tab.p_list.push_back(extrapolate(tab.u_list));
    tab.dp_list.push_back(extrapolate(tab.du_list));
    tab.n_used = n;
    if (n >= 2) {
      tab.est_error = std::abs(tab.p_list[n - 1] - tab.p_list[n - 2]);
      tab.du_est_error = std::abs(tab.dp_list[n - 1] - tab.dp_list[n - 2]);
      if (tab.est_error < opt.eps) {
        tab.converged = true;
        break;
      }
    }
  }
  // The solve is backward stable; its residual enters the error budget in units of U.
  tab.est_error += tab.residual * std::abs(tab.p_list.back());
  if (tab.residual > opt.eps) tab.converged = false;
  return tab;
}

/// U(t) and U'(t) by Post-Widder inversion.
inline RenewalEstimate invert_postwidder(const SubordinatorSpec& spec, double t, const PostWidderOptions& opt) {
  RenewalEstimate r;
  r.t = t;
  r.method = Method::postwidder;
  if (t == 0.0) {
    r.U = atom_at_zero_exact(spec);
    r.converged = true;
    return r;
  }
  const auto tab = postwidder_table(spec, t, opt);
  r.U = tab.p_list.back();
  r.dU = tab.dp_list.back();
  r.est_error = tab.est_error;
  r.dU_error = tab.du_est_error;
  r.converged = tab.converged;
  r.n_used = tab.n_used;
  if (spec.postwidder_hostile())
    r.diagnostic = "U has jumps for this measure; Post-Widder may settle on a wrong value";
  else if (!tab.converged)
    r.diagnostic = "extrapolation did not settle; value is the last table entry";
  return r;
}

inline RenewalEstimate invert_postwidder(const SubordinatorSpec& spec, double t, double eps) {
  PostWidderOptions opt;
  opt.eps = eps;
  return invert_postwidder(spec, t, opt);
}

} // namespace invsub
