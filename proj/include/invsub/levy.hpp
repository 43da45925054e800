#pragma once

// Subordinator families, their Lévy measures and the validated spec record
// consumed by every engine.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "invsub/errors.hpp"
#include "invsub/quadrature.hpp"
#include "invsub/special_functions.hpp"

namespace invsub {

// ---------------------------------------------------------------------------
// Family parameters.
// ---------------------------------------------------------------------------

/// Unit-jump Poisson process of rate r plus drift mu.
struct PoissonDrift {
  double mu = 0.0;
  double r = 1.0;
};

/// Rate-1 compound Poisson with Pareto(alpha) jumps on [1, inf).
struct ParetoCP {
  double alpha = 1.0;
};

/// phi(lambda) = lambda^alpha.
struct Stable {
  double alpha = 0.5;
};

/// phi(lambda) = c1 lambda^alpha1 + c2 lambda^alpha2.
struct TwoStableMix {
  double alpha1 = 0.75;
  double alpha2 = 0.25;
  double c1 = 0.5;
  double c2 = 0.5;
};

/// phi(lambda) = int_0^1 lambda^beta d beta = (lambda - 1) / log(lambda).
struct UniformStableMix {};

/// Generalised inverse Gaussian subordinator.
struct GIG {
  double delta = 1.0;
  double gamma = 1.0;
  double kappa = -0.5;
};

struct PureDrift {
  double mu = 1.0;
};

/// Point mass w at x.
struct AtomKernel {
  double x = 1.0;
  double w = 1.0;
};
/// Density alpha x^{-alpha-1} on [1, inf).
struct ParetoKernel {
  double alpha = 1.0;
};
/// Density weight alpha / Gamma(1-alpha) x^{-1-alpha}, so phi = weight lambda^alpha.
struct StableKernel {
  double alpha = 0.5;
  double weight = 1.0;
};
/// Density x^a e^{-b x}.
struct ExpTiltedPowerKernel {
  double a = 0.0;
  double b = 1.0;
};

using MeasureKernel = std::variant<AtomKernel, ParetoKernel, StableKernel, ExpTiltedPowerKernel>;

/// Drift plus a list of measure kernels; the exponent is obtained by quadrature.
struct Custom {
  double drift = 0.0;
  std::vector<MeasureKernel> kernels;
};

using FamilyParams =
    std::variant<PoissonDrift, ParetoCP, Stable, TwoStableMix, UniformStableMix, GIG, PureDrift, Custom>;

enum class ExponentForm { closed_form, measure_defined };

struct Atom {
  double x = 0.0;
  double w = 0.0;
};

/// Absolutely continuous part (density), atoms, and the lower end of the support.
struct LevyMeasure {
  std::function<double(double)> density;
  std::vector<Atom> atoms;
  double support_lower = 0.0;
};

// ---------------------------------------------------------------------------
// GIG spectral weights.
// ---------------------------------------------------------------------------

namespace detail {

/// w(y) = 1 / (pi^2 y (J^2 + Y^2)(delta sqrt(2y))), order |kappa|.
inline double gig_w(double delta, double nu, double y) {
  const double z = delta * std::sqrt(2.0 * y);
  const double m2 = special::bessel_modulus_squared(nu, z);
  if (!std::isfinite(m2)) return 0.0;
  return 1.0 / (std::numbers::pi * std::numbers::pi * y * m2);
}

/// Quadrature nodes for integrals of w(y) h(y) dy over (0, inf), on the log
/// axis y = e^u with u in [u_min, u_max]; below y_min an analytic tail is used.
struct GigWeights {
  double delta = 0.0;
  double nu = 0.0;
  double q = 0.0;
  double kappa_plus = 0.0;
  double y_min = 0.0;
  double tail_mass = 0.0;  ///< int_0^{y_min} w(y) dy
  double tail_coef = 0.0;  ///< C in w ~ C y^{nu-1} as y -> 0 (nu > 0)
  std::vector<double> y;
  std::vector<double> wdy;

  static constexpr double kUMin = -80.0;
  static constexpr double kUMax = 80.0;
  static constexpr double kPanel = 0.5;

  GigWeights(double delta_, double gamma_, double kappa_)
      : delta(delta_), nu(std::abs(kappa_)), q(0.5 * gamma_ * gamma_), kappa_plus(std::max(0.0, kappa_)) {
    const auto& gl = quad::gauss_legendre_20();
    const int panels = static_cast<int>((kUMax - kUMin) / kPanel);
    y.reserve(static_cast<std::size_t>(panels) * gl.nodes.size());
    wdy.reserve(y.capacity());
    for (int p = 0; p < panels; ++p) {
      const double a = kUMin + p * kPanel;
      const double c = a + 0.5 * kPanel, h = 0.5 * kPanel;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double u = c + h * gl.nodes[i];
        const double yy = std::exp(u);
        const double wv = gig_w(delta, nu, yy) * yy * gl.weights[i] * h;
        y.push_back(yy);
        wdy.push_back(wv);
      }
    }
    y_min = std::exp(kUMin);
    if (nu > 0.0) {
      tail_coef = std::exp(nu * std::log(0.5 * delta * delta) - 2.0 * special::log_gamma(nu));
      tail_mass = tail_coef * std::pow(y_min, nu) / nu;
    } else {
      const double l0 = 0.5 * std::log(y_min) + std::log(delta / std::numbers::sqrt2) + special::kEulerGamma;
      tail_mass = (std::atan(2.0 * l0 / std::numbers::pi) + 0.5 * std::numbers::pi) / std::numbers::pi;
    }
  }
};

} // namespace detail

// ---------------------------------------------------------------------------
// Validation helpers.
// ---------------------------------------------------------------------------

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

inline bool finite_all(std::initializer_list<double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline void validate(const PoissonDrift& p) {
  require(finite_all({p.mu, p.r}), "poisson: parameters must be finite");
  require(p.mu >= 0.0, "poisson: drift mu must be >= 0");
  require(p.r > 0.0, "poisson: rate r must be > 0");
}
inline void validate(const ParetoCP& p) {
  require(std::isfinite(p.alpha) && p.alpha > 0.0, "pareto: alpha must be > 0");
}
inline void validate(const Stable& p) {
  require(p.alpha > 0.0 && p.alpha < 1.0, "stable: alpha must lie in (0, 1)");
}
inline void validate(const TwoStableMix& p) {
  require(finite_all({p.alpha1, p.alpha2, p.c1, p.c2}), "two-stable mix: parameters must be finite");
  require(p.alpha2 > 0.0 && p.alpha2 < p.alpha1 && p.alpha1 < 1.0, "two-stable mix: need 0 < alpha2 < alpha1 < 1");
  require(p.c1 > 0.0 && p.c2 > 0.0, "two-stable mix: need c1 > 0 and c2 > 0");
  require(std::abs(p.c1 + p.c2 - 1.0) <= 1e-12, "two-stable mix: need c1 + c2 = 1");
}
inline void validate(const UniformStableMix&) {}
inline void validate(const GIG& p) {
  require(finite_all({p.delta, p.gamma, p.kappa}), "gig: parameters must be finite");
  if (p.kappa > 0.0) {
    require(p.delta >= 0.0 && p.gamma > 0.0, "gig: kappa > 0 needs delta >= 0 and gamma > 0");
  } else if (p.kappa == 0.0) {
    require(p.delta > 0.0 && p.gamma > 0.0, "gig: kappa = 0 needs delta > 0 and gamma > 0");
  } else {
    require(p.delta > 0.0 && p.gamma >= 0.0, "gig: kappa < 0 needs delta > 0 and gamma >= 0");
  }
}
inline void validate(const PureDrift& p) {
  require(std::isfinite(p.mu) && p.mu > 0.0, "pure drift: mu must be > 0");
}
inline void validate_kernel(const AtomKernel& k) {
  require(std::isfinite(k.x) && k.x > 0.0, "atom: location must be > 0");
  require(std::isfinite(k.w) && k.w > 0.0, "atom: weight must be > 0");
}
inline void validate_kernel(const ParetoKernel& k) {
  require(std::isfinite(k.alpha) && k.alpha > 0.0, "pareto kernel: alpha must be > 0");
}
inline void validate_kernel(const StableKernel& k) {
  require(k.alpha > 0.0 && k.alpha < 1.0, "stable kernel: alpha must lie in (0, 1)");
  require(std::isfinite(k.weight) && k.weight > 0.0, "stable kernel: weight must be > 0");
}
inline void validate_kernel(const ExpTiltedPowerKernel& k) {
  require(std::isfinite(k.a) && k.a > -2.0, "exp_tilted_power: need a > -2 for a finite int (1 ^ x) Pi(dx)");
  require(std::isfinite(k.b) && k.b > 0.0, "exp_tilted_power: need b > 0");
}
inline void validate(const Custom& c) {
  require(std::isfinite(c.drift) && c.drift >= 0.0, "custom: drift must be >= 0");
  require(c.drift > 0.0 || !c.kernels.empty(), "custom: need a positive drift or at least one kernel");
  for (const auto& k : c.kernels) std::visit([](const auto& v) { validate_kernel(v); }, k);
}

inline double kernel_density(const MeasureKernel& k, double x) {
  return std::visit(
      [x](const auto& v) -> double {
        using K = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<K, AtomKernel>) {
          return 0.0;
        } else if constexpr (std::is_same_v<K, ParetoKernel>) {
          return x >= 1.0 ? v.alpha * std::exp(-(v.alpha + 1.0) * std::log(x)) : 0.0;
        } else if constexpr (std::is_same_v<K, StableKernel>) {
          return v.weight * v.alpha / std::tgamma(1.0 - v.alpha) * std::exp(-(1.0 + v.alpha) * std::log(x));
        } else {
          return std::exp(v.a * std::log(x) - v.b * x);
        }
      },
      k);
}

inline double uniform_mix_density(double x) {
  // int_0^1 beta / Gamma(1 - beta) x^{-1-beta} d beta
  auto f = [x](double beta) {
    return beta / std::tgamma(1.0 - beta) * std::exp(-(1.0 + beta) * std::log(x));
  };
  quad::Options opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 0.0;
  const auto r = quad::integrate(f, 0.0, 1.0, opt);
  if (!r.converged) throw AccuracyError("uniform-mix Lévy density quadrature failed", r.abs_error);
  return r.value;
}

/// int_0^inf e^{-x y} w(y) dy for the GIG spectral weight.
inline double gig_inner(const GigWeights& g, double x) {
  auto f = [&](double u) {
    const double yy = std::exp(u);
    return std::exp(-x * yy) * detail::gig_w(g.delta, g.nu, yy) * yy;
  };
  quad::Options opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 0.0;
  double total = g.tail_mass;
  double err = 0.0;
  bool ok = true;
  const double cutoff = std::log(50.0 / x);  // e^{-x y} < e^{-50} beyond
  for (double a = GigWeights::kUMin; a < std::min(GigWeights::kUMax, cutoff); a += 4.0) {
    const auto r = quad::integrate(f, a, std::min({a + 4.0, GigWeights::kUMax, cutoff}), opt);
    total += r.value;
    err += r.abs_error;
    ok = ok && r.converged;
  }
  if (!ok || err > 1e-9 * total) throw AccuracyError("GIG Lévy density inner integral did not converge", err);
  return total;
}

} // namespace detail

// ---------------------------------------------------------------------------
// The validated spec.
// ---------------------------------------------------------------------------

class SubordinatorSpec {
public:
  explicit SubordinatorSpec(FamilyParams family) : family_(std::move(family)) {
    std::visit([](const auto& f) { detail::validate(f); }, family_);
    build();
  }

  const FamilyParams& family() const { return family_; }
  double drift() const { return drift_; }
  const LevyMeasure& measure() const { return measure_; }
  ExponentForm exponent_form() const { return form_; }

  template <typename F>
  bool is() const {
    return std::holds_alternative<F>(family_);
  }
  template <typename F>
  const F& as() const {
    return std::get<F>(family_);
  }

  /// Total mass of the Lévy measure; infinity for infinite-activity families.
  double total_mass() const { return total_mass_; }

  /// Drift zero and only atoms: U is a step function on a lattice-like set.
  bool pure_atomic() const { return drift_ == 0.0 && measure_.density == nullptr; }

  /// Driftless Poisson: the renewal measure is a lattice of atoms.
  bool lattice() const { return is<PoissonDrift>() && as<PoissonDrift>().mu == 0.0; }

  /// Families where Post-Widder is known to mis-converge (U not continuous).
  bool postwidder_hostile() const { return pure_atomic(); }

  const detail::GigWeights* gig_weights() const { return gig_.get(); }

  std::string name() const {
    static constexpr const char* names[] = {"poisson", "pareto",     "stable", "two_stable_mix",
                                            "uniform_stable_mix", "gig", "pure_drift", "custom"};
    return names[family_.index()];
  }

private:
  void build() {
    form_ = ExponentForm::closed_form;
    total_mass_ = std::numeric_limits<double>::infinity();
    std::visit(
        [this](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, PoissonDrift>) {
            drift_ = f.mu;
            measure_.atoms = {{1.0, f.r}};
            measure_.support_lower = 1.0;
            total_mass_ = f.r;
          } else if constexpr (std::is_same_v<F, ParetoCP>) {
            const double a = f.alpha;
            measure_.density = [a](double x) { return x >= 1.0 ? a * std::exp(-(a + 1.0) * std::log(x)) : 0.0; };
            measure_.support_lower = 1.0;
            total_mass_ = 1.0;
          } else if constexpr (std::is_same_v<F, Stable>) {
            const double a = f.alpha, c = a / std::tgamma(1.0 - a);
            measure_.density = [a, c](double x) { return c * std::exp(-(1.0 + a) * std::log(x)); };
          } else if constexpr (std::is_same_v<F, TwoStableMix>) {
            const double a1 = f.alpha1, a2 = f.alpha2;
            const double k1 = f.c1 * a1 / std::tgamma(1.0 - a1), k2 = f.c2 * a2 / std::tgamma(1.0 - a2);
            measure_.density = [=](double x) {
              const double l = std::log(x);
              return k1 * std::exp(-(1.0 + a1) * l) + k2 * std::exp(-(1.0 + a2) * l);
            };
          } else if constexpr (std::is_same_v<F, UniformStableMix>) {
            measure_.density = [](double x) { return detail::uniform_mix_density(x); };
          } else if constexpr (std::is_same_v<F, GIG>) {
            const double q = 0.5 * f.gamma * f.gamma;
            if (f.delta == 0.0) {
              const double k = f.kappa;
              measure_.density = [k, q](double x) { return k / x * std::exp(-q * x); };
            } else {
              gig_ = std::make_shared<const detail::GigWeights>(f.delta, f.gamma, f.kappa);
              auto g = gig_;
              measure_.density = [g](double x) {
                return std::exp(-g->q * x) / x * (detail::gig_inner(*g, x) + g->kappa_plus);
              };
            }
          } else if constexpr (std::is_same_v<F, PureDrift>) {
            drift_ = f.mu;
            total_mass_ = 0.0;
          } else {
            form_ = ExponentForm::measure_defined;
            drift_ = f.drift;
            double mass = 0.0;
            double lower = std::numeric_limits<double>::infinity();
            std::vector<MeasureKernel> dens;
            for (const auto& k : f.kernels) {
              if (const auto* at = std::get_if<AtomKernel>(&k)) {
                measure_.atoms.push_back({at->x, at->w});
                mass += at->w;
                lower = std::min(lower, at->x);
              } else if (std::holds_alternative<ParetoKernel>(k)) {
                dens.push_back(k);
                mass += 1.0;
                lower = std::min(lower, 1.0);
              } else {
                dens.push_back(k);
                mass = std::numeric_limits<double>::infinity();
                lower = 0.0;
              }
            }
            if (!dens.empty()) {
              measure_.density = [dens](double x) {
                double s = 0.0;
                for (const auto& k : dens) s += detail::kernel_density(k, x);
                return s;
              };
            }
            total_mass_ = mass;
            measure_.support_lower = std::isfinite(lower) ? lower : 0.0;
          }
        },
        family_);
  }

  FamilyParams family_;
  double drift_ = 0.0;
  LevyMeasure measure_;
  ExponentForm form_ = ExponentForm::closed_form;
  double total_mass_ = 0.0;
  std::shared_ptr<const detail::GigWeights> gig_;
};

/// Density of the absolutely continuous part of the Lévy measure at x > 0.
inline double levy_density(const SubordinatorSpec& spec, double x) {
  if (!(x > 0.0)) throw DomainError("levy_density requires x > 0");
  const auto& d = spec.measure().density;
  return d ? d(x) : 0.0;
}

/// E D(1) = drift + int x Pi(dx); +inf when the jump mean diverges.
inline double mean_of_D1(const SubordinatorSpec& spec) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PoissonDrift>) {
          return f.mu + f.r;
        } else if constexpr (std::is_same_v<F, ParetoCP>) {
          return f.alpha > 1.0 ? f.alpha / (f.alpha - 1.0) : inf;
        } else if constexpr (std::is_same_v<F, Stable> || std::is_same_v<F, TwoStableMix> ||
                             std::is_same_v<F, UniformStableMix>) {
          return inf;
        } else if constexpr (std::is_same_v<F, GIG>) {
          if (f.delta == 0.0) return 2.0 * f.kappa / (f.gamma * f.gamma);
          if (f.gamma > 0.0) {
            const double x = f.gamma * f.delta;
            return f.delta / f.gamma *
                   std::exp(special::log_bessel_k(1.0 + f.kappa, x) - special::log_bessel_k(f.kappa, x));
          }
          return f.kappa < -1.0 ? f.delta * f.delta / (2.0 * (-f.kappa - 1.0)) : inf;
        } else if constexpr (std::is_same_v<F, PureDrift>) {
          return f.mu;
        } else {
          double m = f.drift;
          for (const auto& k : f.kernels) {
            m += std::visit(
                [inf](const auto& v) -> double {
                  using K = std::decay_t<decltype(v)>;
                  if constexpr (std::is_same_v<K, AtomKernel>) return v.x * v.w;
                  else if constexpr (std::is_same_v<K, ParetoKernel>) return v.alpha > 1.0 ? v.alpha / (v.alpha - 1.0) : inf;
                  else if constexpr (std::is_same_v<K, StableKernel>) return inf;
                  else return std::exp(special::log_gamma(v.a + 2.0) - (v.a + 2.0) * std::log(v.b));
                },
                k);
          }
          return m;
        }
      },
      spec.family());
}

} // namespace invsub
