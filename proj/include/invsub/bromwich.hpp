#pragma once

// Bromwich inversion of U~(z) = 1/(z phi(z)) on the line Re z = b:
//   U(t) =  (2 e^{bt}/pi) int_0^inf Re U~(b+iu) cos(ut) du
//        = -(2 e^{bt}/pi) int_0^inf Im U~(b+iu) sin(ut) du.
// The u-axis is cut at the zeros of the cosine: I_0 = (0, pi/2t) and
// I_k = [k pi/2t, (k+2) pi/2t] for odd k, each integrated adaptively.

#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "invsub/errors.hpp"
#include "invsub/estimate.hpp"
#include "invsub/exponent.hpp"
#include "invsub/levy.hpp"
#include "invsub/quadrature.hpp"

namespace invsub {

enum class BromwichForm { cosine, sine };

struct BromwichConfig {
  double b = 0.0;  ///< contour abscissa; 0 selects 1/t
  double eps = 1e-6;
  long max_intervals = 5'000'000;
  BromwichForm form = BromwichForm::cosine;
  /// Consecutive sub-eps contributions required before stopping. The estimate
  /// is the mean of the partial sums over that window, which damps the
  /// alternating tail of the oscillatory series.
  int patience = 16;
};

inline void validate(const BromwichConfig& cfg) {
  if (cfg.b < 0.0 || !std::isfinite(cfg.b)) throw DomainError("Bromwich abscissa b must be > 0");
  if (!(cfg.eps > 0.0)) throw DomainError("Bromwich eps must be > 0");
  if (cfg.max_intervals < 1) throw DomainError("Bromwich max_intervals must be >= 1");
  if (cfg.patience < 1) throw DomainError("Bromwich patience must be >= 1");
}

/// Re and Im of U~(b + iu) from the split phi(b+iu) = phi_r + i phi_i.
inline std::pair<double, double> laplace_U(const SubordinatorSpec& spec, double b, double u) {
  const auto [pr, pi] = phi_real_imag(spec, b, u);
  const double re = b * pr - u * pi;
  const double im = b * pi + u * pr;
  const double den = re * re + im * im;
  return {re / den, -im / den};
}

inline RenewalEstimate invert_bromwich(const SubordinatorSpec& spec, double t, const BromwichConfig& cfg = {}) {
  validate(cfg);
  if (!(t > 0.0)) throw DomainError("Bromwich inversion requires t > 0");
  const double b = cfg.b > 0.0 ? cfg.b : 1.0 / t;
  const double scale = 2.0 * std::exp(b * t) / std::numbers::pi;
  const bool cosine = cfg.form == BromwichForm::cosine;

  auto integrand = [&](double u) {
    const auto [re, im] = laplace_U(spec, b, u);
    return cosine ? re * std::cos(u * t) : -im * std::sin(u * t);
  };

  quad::Options opt;
  opt.rel_tol = cfg.eps / 10.0;
  opt.abs_tol = cfg.eps * 1e-4 / scale;
  opt.max_intervals = 200;

  const double step = std::numbers::pi / (2.0 * t);
  RenewalEstimate r;
  r.t = t;
  r.method = Method::bromwich;

  double sum = 0.0;
  double quad_err = 0.0;
  bool quad_ok = true;
  std::deque<double> window;  // trailing partial sums
  double window_sum = 0.0;
  int quiet = 0;
  double last = 0.0;
  long used = 0;

  auto add = [&](double lo, double hi) {
    auto piece = quad::integrate(integrand, lo, hi, opt);
    const double contribution = scale * piece.value;
    quad_err += scale * piece.abs_error;
    quad_ok = quad_ok && piece.converged;
    sum += contribution;
    last = contribution;
    ++used;
    window.push_back(sum);
    window_sum += sum;
    if (static_cast<int>(window.size()) > cfg.patience) {
      window_sum -= window.front();
      window.pop_front();
    }
    quiet = std::abs(contribution) < cfg.eps ? quiet + 1 : 0;
  };

  add(0.0, step);
  for (long k = 1; used < cfg.max_intervals; k += 2) {
    add(k * step, (k + 2) * step);
    if (quiet >= cfg.patience) {
      r.converged = quad_ok;
      break;
    }
  }
  r.U = window_sum / static_cast<double>(window.size());
  double spread = 0.0;
  for (double s : window) spread = std::max(spread, std::abs(s - r.U));
  r.est_error = std::abs(last) + spread + quad_err;
  r.n_used = static_cast<int>(std::min<long>(used, std::numeric_limits<int>::max()));
  if (!r.converged)
    r.diagnostic = quad_ok ? "interval limit reached before contributions fell below eps"
                           : "an interval quadrature hit its subdivision limit";
  return r;
}

} // namespace invsub
