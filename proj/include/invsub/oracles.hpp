#pragma once

// Closed-form renewal functions and the leading-order asymptotics of U at
// t -> 0 and t -> inf obtained from the Tauberian theorem.

#include <cmath>
#include <numbers>
#include <string>

#include "invsub/errors.hpp"
#include "invsub/levy.hpp"
#include "invsub/special_functions.hpp"

namespace invsub {

/// True when exact_U / exact_dU have a closed form for this spec.
inline bool has_exact_U(const SubordinatorSpec& spec) {
  if (spec.is<PoissonDrift>()) return spec.as<PoissonDrift>().mu == 0.0;
  return spec.is<PureDrift>() || spec.is<Stable>() || spec.is<UniformStableMix>();
}

inline double exact_U(const SubordinatorSpec& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("exact_U requires t >= 0");
  if (!has_exact_U(spec)) throw UnsupportedError("no closed-form U for family " + spec.name());
  if (spec.is<PoissonDrift>()) return std::floor(t + 1.0) / spec.as<PoissonDrift>().r;
  if (spec.is<PureDrift>()) return t / spec.as<PureDrift>().mu;
  if (t == 0.0) return 0.0;
  if (spec.is<Stable>()) {
    const double a = spec.as<Stable>().alpha;
    return std::exp(a * std::log(t) - special::log_gamma(1.0 + a));
  }
  return special::kEulerGamma + special::exp_scaled_gamma0(t) + std::log(t);
}

/// Density of the renewal measure. For driftless Poisson only the lattice
/// atoms carry mass, so the density vanishes.
inline double exact_dU(const SubordinatorSpec& spec, double t) {
  if (!(t > 0.0)) throw DomainError("exact_dU requires t > 0");
  if (!has_exact_U(spec)) throw UnsupportedError("no closed-form U' for family " + spec.name());
  if (spec.is<PoissonDrift>()) return 0.0;
  if (spec.is<PureDrift>()) return 1.0 / spec.as<PureDrift>().mu;
  if (spec.is<Stable>()) {
    const double a = spec.as<Stable>().alpha;
    return std::exp((a - 1.0) * std::log(t) - special::log_gamma(a));
  }
  return special::exp_scaled_gamma0(t);
}

/// Var E(t) for the alpha-stable inverse.
inline double exact_var_stable(double alpha, double t) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("exact_var_stable requires 0 < alpha < 1");
  if (!(t >= 0.0)) throw DomainError("exact_var_stable requires t >= 0");
  if (t == 0.0) return 0.0;
  const double lt = std::log(t);
  const double second = 2.0 * std::exp(2.0 * alpha * lt - special::log_gamma(1.0 + 2.0 * alpha));
  const double mean = std::exp(alpha * lt - special::log_gamma(1.0 + alpha));
  return second - mean * mean;
}

enum class AsymptoticRegime { t_to_zero, t_to_infinity };

inline std::string to_string(AsymptoticRegime r) {
  return r == AsymptoticRegime::t_to_zero ? "t_to_zero" : "t_to_infinity";
}

/// Identifier of the formula asymptotic_U uses for (spec, regime), or an
/// empty string when none applies.
inline std::string asymptotic_formula(const SubordinatorSpec& spec, AsymptoticRegime regime) {
  const bool zero = regime == AsymptoticRegime::t_to_zero;
  if (spec.is<ParetoCP>()) {
    if (zero) return "";
    const double a = spec.as<ParetoCP>().alpha;
    return a < 1.0 ? "pareto_power" : (a == 1.0 ? "pareto_log" : "pareto_linear");
  }
  if (spec.is<TwoStableMix>()) return zero ? "two_stable_alpha1" : "two_stable_alpha2";
  if (spec.is<GIG>()) {
    const auto& g = spec.as<GIG>();
    if (zero) return g.delta == 0.0 ? "gig_log" : "gig_sqrt";
    if (g.gamma > 0.0) return "renewal_slope";
    if (g.kappa > -1.0) return "gig_power";
    if (g.kappa == -1.0) return "gig_log_linear";
    return "gig_linear";
  }
  return "";
}

inline double asymptotic_U(const SubordinatorSpec& spec, double t, AsymptoticRegime regime) {
  if (!(t > 0.0)) throw DomainError("asymptotic_U requires t > 0");
  const std::string id = asymptotic_formula(spec, regime);
  if (id.empty())
    throw UnsupportedError("no asymptotic form for family " + spec.name() + " as " + to_string(regime));
  const double lt = std::log(t);
  using special::log_gamma;

  if (spec.is<ParetoCP>()) {
    const double a = spec.as<ParetoCP>().alpha;
    if (id == "pareto_power") {
      // -alpha Gamma(-alpha) = Gamma(1 - alpha)
      return std::exp(a * lt - log_gamma(1.0 - a) - log_gamma(1.0 + a));
    }
    if (id == "pareto_log") return t / (1.0 - special::kEulerGamma + lt);
    return (a - 1.0) / a * t;
  }
  if (spec.is<TwoStableMix>()) {
    const auto& m = spec.as<TwoStableMix>();
    const double a = id == "two_stable_alpha1" ? m.alpha1 : m.alpha2;
    const double c = id == "two_stable_alpha1" ? m.c1 : m.c2;
    return std::exp(a * lt - log_gamma(1.0 + a)) / c;
  }
  const auto& g = spec.as<GIG>();
  const double d = g.delta, k = g.kappa;
  if (id == "gig_log") return -1.0 / (k * lt);
  if (id == "gig_sqrt") return std::sqrt(2.0 / (std::numbers::pi * d * d)) * std::sqrt(t);
  if (id == "renewal_slope") return t / mean_of_D1(spec);
  if (id == "gig_power") {
    // phi ~ A lambda^{-kappa} with A = -Gamma(kappa) / (2^{-kappa} delta^{2 kappa} Gamma(-kappa))
    const double log_a = std::log(-std::tgamma(k)) + k * std::log(2.0) - 2.0 * k * std::log(d) - log_gamma(-k);
    return std::exp(-k * lt - log_a - log_gamma(1.0 - k));
  }
  if (id == "gig_log_linear") {
    // phi ~ (delta^2/2) lambda (log(1/lambda) - C) as lambda -> 0, so U ~ 2t / (delta^2 (log t - C)).
    const double c = 2.0 * special::kEulerGamma - 1.0 + std::log(2.0 * d * d) - std::log(4.0);
    return 2.0 * t / (d * d * (lt - c));
  }
  return 2.0 * (-k - 1.0) * t / (d * d);
}

} // namespace invsub
