#pragma once

// Renewal measure, second moments and two-time covariance of E:
//   Cov(E(s), E(t)) = int_[0, s^t] (U(s - tau) + U(t - tau)) dU(tau) - U(s) U(t).
// dU splits into an atom at 0, optional lattice atoms, and a density; the
// atoms are summed exactly and only the density is integrated.

#include <algorithm>
#include <complex>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "invsub/errors.hpp"
#include "invsub/exponent.hpp"
#include "invsub/levy.hpp"
#include "invsub/postwidder.hpp"
#include "invsub/quadrature.hpp"

namespace invsub {

struct Lattice {
  double spacing = 1.0;
  double weight = 1.0;  ///< mass of each atom at k * spacing, k >= 1
};

struct RenewalMeasure {
  double atom_at_zero = 0.0;
  std::function<double(double)> density;
  std::optional<Lattice> lattice;
};

struct CovarianceResult {
  double s = 0.0;
  double t = 0.0;
  double cov = 0.0;
  double var_s = 0.0;
  double var_t = 0.0;
  double corr = 0.0;
  double est_error = 0.0;
};

/// lim 1/phi(lambda): 1/phi at 1e8, accepted only when 1e9 agrees.
inline double atom_at_zero_numeric(const SubordinatorSpec& spec) {
  const double a8 = 1.0 / phi_eval(spec, 1e8);
  const double a9 = 1.0 / phi_eval(spec, 1e9);
  return std::abs(a9 - a8) <= 1e-6 * a9 ? a9 : 0.0;
}

/// Thread-safe memo of Post-Widder (U, U') values for one spec.
class RenewalEvaluator {
public:
  struct Value {
    double U = 0.0;
    double dU = 0.0;
    double U_err = 0.0;
    double dU_err = 0.0;
    bool converged = true;
  };

  /// eps governs the convolution quadrature; engine_eps (default eps) the
  /// Post-Widder calls feeding it.
  RenewalEvaluator(const SubordinatorSpec& spec, double eps, double engine_eps = 0.0)
      : spec_(spec), eps_(eps), engine_eps_(engine_eps > 0.0 ? engine_eps : eps) {
    if (!(eps > 0.0)) throw DomainError("moments require eps > 0");
    if (spec_.lattice()) {
      lattice_ = Lattice{1.0, 1.0 / spec_.as<PoissonDrift>().r};
      atom_ = lattice_->weight;
    } else {
      if (spec_.pure_atomic())
        throw UnsupportedError("renewal measure of a non-lattice purely atomic spec is not supported");
      atom_ = atom_at_zero_numeric(spec_);
    }
  }

  const SubordinatorSpec& spec() const { return spec_; }
  double eps() const { return eps_; }
  double atom() const { return atom_; }
  const std::optional<Lattice>& lattice() const { return lattice_; }

  Value at(double t) const {
    if (t <= 0.0) return {t == 0.0 ? atom_ : 0.0, 0.0, 0.0, 0.0, true};
    if (lattice_) return {std::floor(t / lattice_->spacing + 1.0) * lattice_->weight, 0.0, 0.0, 0.0, true};
    {
      std::shared_lock lock(mutex_);
      if (auto it = memo_.find(t); it != memo_.end()) return it->second;
    }
    const auto r = invert_postwidder(spec_, t, engine_eps_);
    Value v{r.U, r.dU.value_or(0.0), r.est_error, r.dU_error.value_or(0.0), r.converged};
    std::unique_lock lock(mutex_);
    memo_.emplace(t, v);
    return v;
  }

  RenewalMeasure measure() const {
    RenewalMeasure m;
    m.atom_at_zero = atom_;
    m.lattice = lattice_;
    if (lattice_) {
      m.density = [](double) { return 0.0; };
    } else {
      m.density = [this](double t) { return at(t).dU; };
    }
    return m;
  }

private:
  SubordinatorSpec spec_;
  double eps_;
  double engine_eps_;
  double atom_ = 0.0;
  std::optional<Lattice> lattice_;
  mutable std::shared_mutex mutex_;
  mutable std::map<double, Value> memo_;
};

/// Renewal measure whose density is evaluated lazily by Post-Widder. The
/// evaluator must outlive the returned callable.
inline RenewalMeasure renewal_measure(const RenewalEvaluator& ev) { return ev.measure(); }

namespace detail {

/// Power p of the map tau = a + h sigma^p near each end of a piece. Cubic
/// suits the tau^alpha and logarithmic behaviour of U_c near 0; the square
/// root behaviour of GIG with delta > 0 needs only a square.
inline double substitution_power(const SubordinatorSpec& spec) {
  if (spec.is<Stable>() || spec.is<TwoStableMix>() || spec.is<UniformStableMix>()) return 3.0;
  if (spec.is<GIG>() && spec.as<GIG>().delta == 0.0) return 3.0;
  return 2.0;
}

/// Break points of the convolution range [0, m]: the midpoint, plus the
/// points where U(s - tau), U(t - tau) or dU(tau) lose smoothness for jump
/// measures bounded away from 0.
inline std::vector<double> breakpoints(const SubordinatorSpec& spec, double m, double s, double t) {
  std::vector<double> b = {0.0, 0.5 * m, m};
  const double l = spec.measure().support_lower;
  if (l > 0.0 && m / l <= 64.0) {
    for (double x = l; x < m; x += l) b.push_back(x);
    for (double x = s - l; x > 0.0; x -= l) b.push_back(x);
    for (double x = t - l; x > 0.0; x -= l) b.push_back(x);
  }
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b) {
    if (x < 0.0 || x > m) continue;
    if (out.empty() || x - out.back() > 1e-12 * std::max(1.0, m)) out.push_back(x);
  }
  if (out.back() != m) out.back() = m;
  return out;
}

struct ConvolutionResult {
  double value = 0.0;
  double quad_error = 0.0;    ///< change on the last panel doubling
  double engine_error = 0.0;  ///< Post-Widder errors integrated against the weights
  double est_error() const { return quad_error + engine_error; }
};

/// Integral of h over the pieces between consecutive points, by composite
/// Gauss-Legendre in power-mapped coordinates with doubling panel counts.
/// h returns (value, abs error of the value); the errors are integrated too.
template <typename H>
ConvolutionResult mapped_integral(const RenewalEvaluator& ev, const std::vector<double>& pts, H&& h) {
  ConvolutionResult out;
  const double p = substitution_power(ev.spec());
  const auto& gl = quad::gauss_legendre_20();

  // One half-piece: tau = a + dir * w * sigma^p for sigma in [0, 1].
  auto half = [&](double a, double w, double dir, int panels) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < panels; ++j) {
      const double lo = static_cast<double>(j) / panels, hi = static_cast<double>(j + 1) / panels;
      acc += gl.apply(
          [&](double sig) {
            const double jac = w * p * std::pow(sig, p - 1.0);
            const auto [v, e] = h(a + dir * w * std::pow(sig, p));
            return std::complex<double>(v * jac, e * jac);
          },
          lo, hi);
    }
    return acc;
  };

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1], w = 0.5 * (b - a);
    std::complex<double> cur = 0.0, prev = 0.0;
    double diff = std::numeric_limits<double>::infinity();
    for (int panels = 1; panels <= 64; panels *= 2) {
      cur = half(a, w, 1.0, panels) + half(b, w, -1.0, panels);
      if (panels > 1) {
        diff = std::abs(cur.real() - prev.real());
        if (diff < ev.eps() * std::max(1.0, std::abs(cur.real()))) break;
      }
      prev = cur;
    }
    out.value += cur.real();
    out.quad_error += diff;
    out.engine_error += cur.imag();
  }
  return out;
}

/// int_(0, m] (U(s - tau) + U(t - tau)) u(tau) dtau for the density u of dU.
/// On [0, m/2] the integral is taken by parts against U_c = U - atom, so
/// Post-Widder densities are only ever requested at arguments >= m/2.
inline ConvolutionResult density_convolution(const RenewalEvaluator& ev, double m, double s, double t) {
  ConvolutionResult out;
  if (ev.lattice() || m <= 0.0) return out;
  const auto pts = breakpoints(ev.spec(), m, s, t);
  const double mid = 0.5 * m;
  std::vector<double> lo_pts, hi_pts;
  for (double x : pts) {
    if (x <= mid) lo_pts.push_back(x);
    if (x >= mid) hi_pts.push_back(x);
  }
  const double atom = ev.atom();

  // U_c(tau) (u(s - tau) + u(t - tau)).
  auto by_parts = [&](double tau) {
    const auto c = ev.at(tau), a = ev.at(s - tau), b = ev.at(t - tau);
    const double uc = c.U - atom, g = a.dU + b.dU;
    return std::pair<double, double>{uc * g, c.U_err * std::abs(g) + std::abs(uc) * (a.dU_err + b.dU_err)};
  };
  // (U(s - tau) + U(t - tau)) u(tau).
  auto direct = [&](double tau) {
    const auto c = ev.at(tau), a = ev.at(s - tau), b = ev.at(t - tau);
    const double f = a.U + b.U;
    return std::pair<double, double>{f * c.dU, std::abs(f) * c.dU_err + (a.U_err + b.U_err) * std::abs(c.dU)};
  };

  const auto lo = mapped_integral(ev, lo_pts, by_parts);
  const auto hi = mapped_integral(ev, hi_pts, direct);
  const auto c = ev.at(mid), a = ev.at(s - mid), b = ev.at(t - mid);
  const double uc = c.U - atom, f = a.U + b.U;
  out.value = f * uc + lo.value + hi.value;
  out.quad_error = lo.quad_error + hi.quad_error;
  out.engine_error = lo.engine_error + hi.engine_error + std::abs(f) * c.U_err + std::abs(uc) * (a.U_err + b.U_err);
  return out;
}

/// Sum of f over the lattice atoms k * spacing in (0, m].
template <typename F>
double lattice_sum(const RenewalEvaluator& ev, F&& f, double m) {
  if (!ev.lattice()) return 0.0;
  const auto& l = *ev.lattice();
  double s = 0.0;
  for (long k = 1; k * l.spacing <= m; ++k) s += l.weight * f(k * l.spacing);
  return s;
}

/// E E(s) E(t) = int_[0, s^t] (U(s - tau) + U(t - tau)) dU(tau), with the
/// error estimate of the density part.
inline ConvolutionResult cross_moment(const RenewalEvaluator& ev, double s, double t) {
  const double m = std::min(s, t);
  auto dens = density_convolution(ev, m, s, t);
  ConvolutionResult r;
  const auto vs = ev.at(s), vt = ev.at(t);
  r.value = ev.atom() * (vs.U + vt.U) + lattice_sum(ev, [&](double x) { return ev.at(s - x).U + ev.at(t - x).U; }, m) + dens.value;
  r.quad_error = dens.quad_error;
  r.engine_error = dens.engine_error + ev.atom() * (vs.U_err + vt.U_err);
  return r;
}

} // namespace detail

/// Cov(E(s), E(t)) for driftless Poisson of rate r, summed over the lattice.
inline double covariance_poisson_nodrift(double s, double t, double r) {
  if (!(s >= 0.0 && t >= 0.0)) throw DomainError("covariance_poisson_nodrift requires s, t >= 0");
  if (!(r > 0.0)) throw DomainError("covariance_poisson_nodrift requires r > 0");
  auto U = [r](double x) { return std::floor(x + 1.0) / r; };
  const double m = std::min(s, t);
  double sum = 0.0;
  for (long k = 0; k <= static_cast<long>(std::floor(m)); ++k) sum += (U(s - k) + U(t - k)) / r;
  return sum - U(s) * U(t);
}

/// E E(t)^2.
inline double second_moment(const RenewalEvaluator& ev, double t) {
  if (!(t > 0.0)) throw DomainError("second_moment requires t > 0");
  const auto r = detail::cross_moment(ev, t, t);
  if (r.quad_error > ev.eps() * std::max(1.0, std::abs(r.value)))
    throw AccuracyError("second-moment convolution did not reach eps", r.quad_error);
  return r.value;
}

inline double second_moment(const SubordinatorSpec& spec, double t, double eps) {
  RenewalEvaluator ev(spec, eps);
  return second_moment(ev, t);
}

struct MomentOptions {
  /// Throw AccuracyError when the panel doubling misses eps; otherwise the
  /// shortfall is reported through est_error only. Engine errors never throw.
  bool strict = true;
};

inline CovarianceResult covariance(const RenewalEvaluator& ev, double s, double t, const MomentOptions& opt = {}) {
  if (!(s > 0.0 && t > 0.0)) throw DomainError("covariance requires s, t > 0");
  const double eps = ev.eps();
  const double us = ev.at(s).U, ut = ev.at(t).U;
  const auto xs = detail::cross_moment(ev, s, s);
  const auto xt = s == t ? xs : detail::cross_moment(ev, t, t);
  const auto xst = s == t ? xs : detail::cross_moment(ev, s, t);
  // Each product U U carries the engine error of both factors.
  const double es = ev.at(s).U_err, et = ev.at(t).U_err;
  const double eng = 2.0 * std::max(es * us, et * ut) + es * ut + et * us;

  CovarianceResult r;
  r.s = s;
  r.t = t;
  r.var_s = xs.value - us * us;
  r.var_t = xt.value - ut * ut;
  r.cov = xst.value - us * ut;
  const double quad_err = std::max({xs.quad_error, xt.quad_error, xst.quad_error});
  r.est_error = quad_err + std::max({xs.engine_error, xt.engine_error, xst.engine_error}) + eng;
  const double scale = std::max(1.0, std::max(xs.value, xt.value));
  if (opt.strict && quad_err > eps * scale)
    throw AccuracyError("covariance convolution did not reach eps", quad_err);
  const double slack = eps * scale + r.est_error;
  if (r.var_s < -slack || r.var_t < -slack)
    throw AccuracyError("negative variance beyond tolerance", std::min(r.var_s, r.var_t));
  r.var_s = std::max(r.var_s, 0.0);
  r.var_t = std::max(r.var_t, 0.0);

  const double denom = std::sqrt(r.var_s * r.var_t);
  if (denom > 0.0) {
    const double raw = r.cov / denom;
    r.corr = std::clamp(raw, -1.0, 1.0);
    r.est_error += std::abs(raw - r.corr);
  } else {
    r.corr = 0.0;
  }
  return r;
}

inline CovarianceResult covariance(const SubordinatorSpec& spec, double s, double t, double eps) {
  RenewalEvaluator ev(spec, eps);
  return covariance(ev, s, t);
}

inline double correlation(const SubordinatorSpec& spec, double s, double t, double eps) {
  return covariance(spec, s, t, eps).corr;
}

} // namespace invsub
