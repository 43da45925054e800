#pragma once

// Truncated power series in one variable s: c_0 + c_1 s + ... + c_{n-1} s^{n-1}.
// Coefficients are Taylor coefficients f^{(j)}/j!, so a series in s = (x - x0)/h
// carries the scaled derivatives f^{(j)}(x0) h^j / j!.

#include <cmath>
#include <cstddef>
#include <vector>

#include "invsub/errors.hpp"

namespace invsub {

class TruncatedSeries {
public:
  explicit TruncatedSeries(std::size_t order) : c_(order, 0.0) {}
  explicit TruncatedSeries(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  /// x0 + h s.
  static TruncatedSeries variable(std::size_t order, double x0, double h) {
    TruncatedSeries r(order);
    if (order > 0) r.c_[0] = x0;
    if (order > 1) r.c_[1] = h;
    return r;
  }

  static TruncatedSeries constant(std::size_t order, double v) {
    TruncatedSeries r(order);
    if (order > 0) r.c_[0] = v;
    return r;
  }

  std::size_t order() const { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }
  const std::vector<double>& coeffs() const { return c_; }

  TruncatedSeries& operator+=(const TruncatedSeries& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  TruncatedSeries& operator-=(const TruncatedSeries& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  TruncatedSeries& operator*=(double a) {
    for (double& v : c_) v *= a;
    return *this;
  }

  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
  friend TruncatedSeries operator*(TruncatedSeries a, double s) { return a *= s; }
  friend TruncatedSeries operator*(double s, TruncatedSeries a) { return a *= s; }

  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    a.check_same(b);
    const std::size_t n = a.order();
    TruncatedSeries r(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (a.c_[i] == 0.0) continue;
      for (std::size_t j = 0; i + j < n; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return r;
  }

  /// a / b by forward substitution on the Cauchy product.
  friend TruncatedSeries operator/(const TruncatedSeries& a, const TruncatedSeries& b) {
    a.check_same(b);
    if (b.order() > 0 && b.c_[0] == 0.0) throw DomainError("series division by a series with zero constant term");
    const std::size_t n = a.order();
    TruncatedSeries q(n);
    for (std::size_t k = 0; k < n; ++k) {
      double s = a.c_[k];
      for (std::size_t j = 1; j <= k; ++j) s -= b.c_[j] * q.c_[k - j];
      q.c_[k] = s / b.c_[0];
    }
    return q;
  }

  TruncatedSeries reciprocal() const { return constant(order(), 1.0) / *this; }

  /// exp(x): from y' = x' y.
  friend TruncatedSeries exp(const TruncatedSeries& x) {
    const std::size_t n = x.order();
    TruncatedSeries y(n);
    if (n == 0) return y;
    y.c_[0] = std::exp(x.c_[0]);
    for (std::size_t k = 1; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * x.c_[j] * y.c_[k - j];
      y.c_[k] = s / static_cast<double>(k);
    }
    return y;
  }

  /// log(x) for x_0 > 0: from x y' = x'.
  friend TruncatedSeries log(const TruncatedSeries& x) {
    const std::size_t n = x.order();
    TruncatedSeries y(n);
    if (n == 0) return y;
    if (!(x.c_[0] > 0.0)) throw DomainError("series log needs a positive constant term");
    y.c_[0] = std::log(x.c_[0]);
    for (std::size_t k = 1; k < n; ++k) {
      double s = static_cast<double>(k) * x.c_[k];
      for (std::size_t j = 1; j < k; ++j) s -= static_cast<double>(j) * y.c_[j] * x.c_[k - j];
      y.c_[k] = s / (static_cast<double>(k) * x.c_[0]);
    }
    return y;
  }

  /// x^alpha for x_0 > 0: from x y' = alpha x' y.
  friend TruncatedSeries pow(const TruncatedSeries& x, double alpha) {
    const std::size_t n = x.order();
    TruncatedSeries y(n);
    if (n == 0) return y;
    if (!(x.c_[0] > 0.0)) throw DomainError("series pow needs a positive constant term");
    y.c_[0] = std::pow(x.c_[0], alpha);
    for (std::size_t k = 1; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 1; j <= k; ++j)
        s += (alpha * static_cast<double>(j) - static_cast<double>(k - j)) * x.c_[j] * y.c_[k - j];
      y.c_[k] = s / (static_cast<double>(k) * x.c_[0]);
    }
    return y;
  }

private:
  void check_same(const TruncatedSeries& o) const {
    if (o.order() != order()) throw DomainError("series orders differ");
  }

  std::vector<double> c_;
};

} // namespace invsub
