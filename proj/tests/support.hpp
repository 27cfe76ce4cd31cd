#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace support {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Growth curve example: cubic difference estimate with t = age - 11.
inline Vec growth_c_hat() {
  Vec c(4);
  c << 2.053, 0.551, 0.0536, -0.0301;
  return c;
}

// Covariance rounded to three significant digits.
inline Mat growth_sigma_rounded() {
  Mat s(4, 4);
  s << 0.649, 0, -0.0173, 0,
       0, 0.140, 0, -0.0157,
       -0.0173, 0, 0.00345, 0,
       0, -0.0157, 0, 0.00192;
  return s;
}

// The same covariance rebuilt from the fitted intraclass parameters:
// (F' V^-1 F)^-1 with V = S0/11 + S1/16 at t = -3, -1, 1, 3.
inline Mat growth_sigma_rebuilt() {
  auto intraclass = [](double tau, double rho) {
    return Mat(tau * ((1 - rho) * Mat::Identity(4, 4) + rho * Mat::Ones(4, 4)));
  };
  const Mat V = intraclass(4.469, 0.868) / 11.0 + intraclass(5.147, 0.479) / 16.0;
  Mat F(4, 4);
  const double ts[] = {-3, -1, 1, 3};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) F(i, k) = std::pow(ts[i], k);
  const Mat info = F.transpose() * V.inverse() * F;
  return info.inverse();
}

inline Mat derivative_matrix(int n) {
  Mat L = Mat::Zero(n, n + 1);
  for (int i = 0; i < n; ++i) L(i, i + 1) = i + 1;
  return L;
}

// Random SPD matrix with eigenvalues in [lo, hi].
inline Mat random_spd(int k, std::mt19937_64& rng, double lo = 0.3, double hi = 3.0) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(lo, hi);
  Mat a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = z(rng);
  Eigen::HouseholderQR<Mat> qr(a);
  const Mat q = qr.householderQ();
  Vec d(k);
  for (int i = 0; i < k; ++i) d[i] = u(rng);
  return q * d.asDiagonal() * q.transpose();
}

inline Vec random_normal(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Vec v(k);
  for (int i = 0; i < k; ++i) v[i] = z(rng);
  return v;
}

// Upper tail of chi-square with k degrees of freedom by the finite series.
inline double chi2_upper(int k, double x) {
  if (k == 0) return x <= 0 ? 1.0 : 0.0;
  if (x <= 0) return 1.0;
  const double h = 0.5 * x;
  double sum = 0.0;
  if (k % 2 == 0) {
    double term = 1.0;
    for (int j = 0; j < k / 2; ++j) {
      sum += term;
      term *= h / (j + 1);
    }
    return std::exp(-h) * sum;
  }
  sum = std::erfc(std::sqrt(h));
  double term = std::sqrt(h) / std::tgamma(1.5);
  for (int j = 0; j < (k - 1) / 2; ++j) {
    sum += std::exp(-h) * term;
    term *= h / (j + 1.5);
  }
  return sum;
}

// Upper tail of Beta(p, q) from the continued fraction, taken on whichever
// side converges fast.
inline double beta_upper(double p, double q, double x) {
  if (p == 0) return x <= 0 ? 1.0 : 0.0;
  if (q == 0) return x <= 1 ? 1.0 : 0.0;
  if (x <= 0) return 1.0;
  if (x >= 1) return 0.0;
  // modified Lentz on the classical continued fraction for I_x(a, b)
  auto cf = [](double a, double b, double z) {
    const double tiny = 1e-300;
    double c = 1.0, d = 1.0 - (a + b) * z / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < 10000; ++m) {
      for (int half = 0; half < 2; ++half) {
        const double num = half == 0 ? m * (b - m) * z / ((a + 2 * m - 1) * (a + 2 * m))
                                      : -(a + m) * (a + b + m) * z / ((a + 2 * m) * (a + 2 * m + 1));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        if (half == 1 && std::abs(d * c - 1.0) < 1e-16) return h;
      }
    }
    return h;
  };
  const double front =
      std::exp(p * std::log(x) + q * std::log1p(-x) + std::lgamma(p + q) - std::lgamma(p) - std::lgamma(q));
  if (x < (p + 1.0) / (p + q + 2.0)) return 1.0 - front * cf(p, q, x) / p;
  return front * cf(q, p, 1.0 - x) / q;
}

// Mixture survival sum_i w_i G_i(a) G_{n+1-i}(b) from the series above.
inline double chibar(double a, double b, const Vec& w) {
  const int n = static_cast<int>(w.size()) - 2;
  double s = 0.0;
  for (int i = 0; i <= n + 1; ++i) s += w[i] * chi2_upper(i, a) * chi2_upper(n + 1 - i, b);
  return s;
}

inline double poly_value(const Vec& c, double t) {
  double acc = 0.0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = acc * t + c[i];
  return acc;
}

inline Vec poly_product(const Vec& a, const Vec& b) {
  Vec out = Vec::Zero(a.size() + b.size() - 1);
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Linear factor (t - r) and constant k as coefficient vectors.
inline Vec lin(double r) {
  Vec v(2);
  v << -r, 1.0;
  return v;
}

inline Vec padded(const Vec& v, int n) {
  Vec out = Vec::Zero(n + 1);
  out.head(v.size()) = v;
  return out;
}

// Dense grid minimum over [lo, hi] followed by golden-section refinement
// around the best few grid cells.
inline double grid_min(const Vec& c, double lo, double hi, int points = 100000) {
  double best = std::min(poly_value(c, lo), poly_value(c, hi));
  std::vector<double> vals(points + 1);
  for (int i = 0; i <= points; ++i) vals[i] = poly_value(c, lo + (hi - lo) * i / points);
  for (int i = 1; i < points; ++i) {
    if (vals[i] > vals[i - 1] || vals[i] > vals[i + 1]) continue;
    double a = lo + (hi - lo) * (i - 1) / points, b = lo + (hi - lo) * (i + 1) / points;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80; ++it) {
      const double x1 = b - g * (b - a), x2 = a + g * (b - a);
      if (poly_value(c, x1) < poly_value(c, x2)) b = x2; else a = x1;
    }
    best = std::min(best, poly_value(c, 0.5 * (a + b)));
  }
  for (double v : vals) best = std::min(best, v);
  return best;
}

}  // namespace support
