#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

namespace oracle {

/// AUC by explicit pair counting: +1 per correctly ordered pair, +0.5 per tie.
inline double auc_pairs(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

struct WelchRef {
  double t;
  double df;
};

/// Welch statistic and Welch-Satterthwaite df in 50-digit decimal arithmetic.
inline WelchRef welch_reference(std::span<const double> a, std::span<const double> b) {
  using big = boost::multiprecision::cpp_dec_float_50;
  const auto moments = [](std::span<const double> x) {
    big sum = 0;
    for (double v : x) sum += big(v);
    const big n = big(static_cast<long long>(x.size()));
    const big mean = sum / n;
    big ss = 0;
    for (double v : x) ss += (big(v) - mean) * (big(v) - mean);
    return std::pair<big, big>{mean, big(ss / (n - 1))};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const big na = big(static_cast<long long>(a.size()));
  const big nb = big(static_cast<long long>(b.size()));
  const big qa = va / na;
  const big qb = vb / nb;
  const big t = (ma - mb) / sqrt(qa + qb);
  const big df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1) + qb * qb / (nb - 1));
  return {t.convert_to<double>(), df.convert_to<double>()};
}

/// Two-sided Student-t tail probability by adaptive quadrature of the
/// density over [|t|, inf).
inline double t_two_sided_quadrature(double t, double df) {
  const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                          0.5 * std::log(df * M_PI);
  const auto density = [&](double x) {
    return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(x * x / df));
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double tail =
      integrator.integrate(density, std::abs(t), std::numeric_limits<double>::infinity(), 1e-14);
  return 2.0 * tail;
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major n x n).
/// Returns eigenvalues descending with matching unit eigenvectors.
inline std::pair<std::vector<double>, std::vector<std::vector<double>>> jacobi_eigen(
    std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  for (auto i : order) {
    values.push_back(a[i * n + i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k * n + i];
    vectors.push_back(col);
  }
  return {values, vectors};
}

/// Central finite-difference derivative of f at x along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

/// Population mean/std by two passes.
inline std::pair<double, double> mean_std(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace oracle
