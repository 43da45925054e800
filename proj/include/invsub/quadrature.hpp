#pragma once

// Adaptive Gauss-Kronrod quadrature on finite and semi-infinite ranges, plus
// Gauss-Legendre rules for fixed-node work.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <queue>
#include <type_traits>
#include <utility>
#include <vector>

namespace invsub::quad {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_intervals = 4000;
};

template <typename T>
struct Result {
  T value{};
  double abs_error = 0.0;
  bool converged = true;
  long evaluations = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair (abscissae symmetric about 0).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <typename T>
struct Segment {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

} // namespace detail

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
template <typename T, typename F>
Result<T> kronrod15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * detail::kKronrodWeights[7];
  T gauss = fc * detail::kGaussWeights[3];
  double abs_sum = detail::magnitude(fc) * detail::kKronrodWeights[7];
  std::array<T, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * detail::kKronrodNodes[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const T pair = f1[j] + f2[j];
    kronrod += pair * detail::kKronrodWeights[j];
    abs_sum += (detail::magnitude(f1[j]) + detail::magnitude(f2[j])) * detail::kKronrodWeights[j];
    if (j % 2 == 1) gauss += pair * detail::kGaussWeights[j / 2];
  }
  const T mean = kronrod * 0.5;
  double asc = detail::kKronrodWeights[7] * detail::magnitude(fc - mean);
  for (int j = 0; j < 7; ++j)
    asc += detail::kKronrodWeights[j] *
           (detail::magnitude(f1[j] - mean) + detail::magnitude(f2[j] - mean));
  asc *= std::abs(half);
  abs_sum *= std::abs(half);

  Result<T> r;
  r.value = kronrod * half;
  r.evaluations = 15;
  double err = detail::magnitude((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(err, 50.0 * eps * abs_sum);
  r.abs_error = err;
  return r;
}

/// Globally adaptive bisection on [a, b]; the worst panel is split first.
template <typename F>
auto integrate(F&& f, double a, double b, const Options& opt = {}) {
  using T = std::decay_t<decltype(f(a))>;
  Result<T> total;
  if (a == b) return total;
  std::priority_queue<detail::Segment<T>> heap;
  auto first = kronrod15<T>(f, a, b);
  total.evaluations = first.evaluations;
  heap.push({a, b, first.value, first.abs_error});
  T value = first.value;
  double error = first.abs_error;
  int intervals = 1;
  // Below ~100 ulps of the total the error estimate is pure rounding noise.
  constexpr double floor = 100.0 * std::numeric_limits<double>::epsilon();
  while (error > std::max(opt.abs_tol, std::max(opt.rel_tol, floor) * detail::magnitude(value))) {
    if (intervals >= opt.max_intervals) {
      total.converged = false;
      break;
    }
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      total.converged = false;
      break;
    }
    heap.pop();
    auto left = kronrod15<T>(f, worst.a, mid);
    auto right = kronrod15<T>(f, mid, worst.b);
    total.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.abs_error + right.abs_error - worst.error;
    heap.push({worst.a, mid, left.value, left.abs_error});
    heap.push({mid, worst.b, right.value, right.abs_error});
    ++intervals;
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  T sum{};
  double err_sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err_sum += heap.top().error;
    heap.pop();
  }
  total.value = sum;
  total.abs_error = err_sum;
  return total;
}

/// Integral over [a, inf). Panels of doubling width starting at `scale` are
/// added until the integrand has fallen below 1e-16 of its observed peak and
/// the last panel no longer moves the total.
template <typename F>
auto integrate_to_infinity(F&& f, double a, double scale, const Options& opt = {},
                           int max_panels = 400) {
  using T = std::decay_t<decltype(f(a))>;
  Result<T> total;
  double left = a;
  double width = scale;
  double peak = 0.0;
  for (int p = 0; p < max_panels; ++p) {
    const double right = left + width;
    auto piece = integrate(f, left, right, opt);
    total.value += piece.value;
    total.abs_error += piece.abs_error;
    total.evaluations += piece.evaluations + 2;
    total.converged = total.converged && piece.converged;
    const double f_mid = detail::magnitude(f(0.5 * (left + right)));
    const double f_end = detail::magnitude(f(right));
    peak = std::max({peak, f_mid, f_end, detail::magnitude(piece.value) / width});
    const double tol = std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total.value));
    if (f_end <= 1e-16 * peak && f_mid <= 1e-16 * peak && detail::magnitude(piece.value) <= tol)
      return total;
    if (peak == 0.0 && p > 60) return total;
    left = right;
    width *= 2.0;
    if (!std::isfinite(left)) break;
  }
  total.converged = false;
  return total;
}

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  template <typename F>
  auto apply(F&& f, double a, double b) const {
    using T = std::decay_t<decltype(f(a))>;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    T s{};
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(c + h * nodes[i]);
    return s * h;
  }
};

/// Shared immutable rules (thread-safe static initialisation).
inline const GaussLegendre& gauss_legendre_20() {
  static const GaussLegendre rule(20);
  return rule;
}
inline const GaussLegendre& gauss_legendre_64() {
  static const GaussLegendre rule(64);
  return rule;
}

} // namespace invsub::quad
