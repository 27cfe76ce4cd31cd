#include <doctest.h>

#include <cmath>
#include <random>

#include "conepos/error.hpp"
#include "conepos/null_dist.hpp"
#include "support.hpp"

using namespace conepos;

namespace {

WeightVector weights(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return WeightVector::from_values(v);
}

const WeightVector& wedge() {
  static const WeightVector w = weights({0.25, 0.5, 0.25});
  return w;
}

}  // namespace

TEST_SUITE("null_dist") {

TEST_CASE("chi-square and beta tails match the series oracles") {
  for (int k = 0; k <= 7; ++k)
    for (double x : {0.0, 0.3, 1.0, 2.706, 7.0, 25.0, 80.0})
      CHECK(chi2_survival(k, x) == doctest::Approx(support::chi2_upper(k, x)).epsilon(1e-11));
  for (double p : {0.5, 1.0, 1.5, 3.0})
    for (double q : {0.5, 2.0, 5.5})
      for (double x : {0.05, 0.3, 0.5, 0.8, 0.99})
        CHECK(beta_survival(p, q, x) == doctest::Approx(support::beta_upper(p, q, x)).epsilon(1e-9));
  CHECK(beta_survival(0, 2, 0.0) == 1.0);
  CHECK(beta_survival(0, 2, 0.1) == 0.0);
  CHECK(beta_survival(2, 0, 0.9) == 1.0);
}

TEST_CASE("mixture survival examples") {
  const WeightVector g = weights({0.0072, 0.0657, 0.2416, 0.4343, 0.2512});
  CHECK(chibar_joint_survival(19.293, -kInf, g) == doctest::Approx(0.000293).epsilon(0.02));
  CHECK(chibar_joint_survival(0, 0, g) == 1.0);
  CHECK(chibar_joint_survival(-1, -1, g) == 1.0);
  const double want = 0.5 * support::chi2_upper(1, 2.706) + 0.25 * support::chi2_upper(2, 2.706);
  CHECK(chibar_joint_survival(2.706, -kInf, wedge()) == doctest::Approx(want).epsilon(1e-12));
  CHECK(want == doctest::Approx(0.1146).epsilon(1e-3));

  const WeightVector d = weights({0.3318, 0.4792, 0.168, 0.0208});
  CHECK(pvalue_lambda01(9.293, d) == doctest::Approx(0.00324).epsilon(0.01));
  CHECK(pvalue_lambda12(0.417, d) == doctest::Approx(0.787).epsilon(0.002));
  CHECK(pvalue_lambda01(-1e-300, wedge()) == 1.0);
}

TEST_CASE("mixture survival against the oracle on random weights") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 1), x(-1, 12);
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 5;
    Vector w(n + 2);
    for (int i = 0; i < n + 2; ++i) w[i] = u(rng);
    w /= w.sum();
    const double a = x(rng), b = x(rng);
    CHECK(chibar_joint_survival(a, b, w) == doctest::Approx(support::chibar(a, b, w)).epsilon(1e-10));
    // joint survival is nonincreasing in each argument
    CHECK(chibar_joint_survival(a + 0.5, b, w) <= chibar_joint_survival(a, b, w) + 1e-15);
    CHECK(chibar_joint_survival(a, b + 0.5, w) <= chibar_joint_survival(a, b, w) + 1e-15);
    const int nu = 1 + k % 12;
    const double ba = u(rng), bb = u(rng);
    double want = 0;
    for (int i = 0; i <= n + 1; ++i)
      want += w[i] * support::beta_upper(0.5 * i, 0.5 * (n + 1 - i + nu), ba) *
              support::beta_upper(0.5 * (n + 1 - i), 0.5 * nu, bb);
    CHECK(betabar_joint_survival(ba, bb, w, nu) == doctest::Approx(want).epsilon(1e-8));
  }
  CHECK(betabar_joint_survival(0, 0, wedge(), 3) == 1.0);
}

TEST_CASE("point mass of lambda01 at zero") {
  const WeightVector g = weights({0.0072, 0.0657, 0.2416, 0.4343, 0.2512});
  CHECK(pvalue_lambda01(1e-300, g) == doctest::Approx(1 - 0.0072).epsilon(1e-12));
}

TEST_CASE("lambda12 quantiles") {
  const WeightVector d = weights({0.3318, 0.4792, 0.168, 0.0208});
  const double q = quantile_lambda12(0.05, d);
  CHECK(pvalue_lambda12(q, d) == doctest::Approx(0.05).epsilon(1e-8));
  // reversed wedge weights make lambda12 look like lambda01 above
  const double q2 = quantile_lambda12(0.5 * support::chi2_upper(1, 2.706) + 0.25 * support::chi2_upper(2, 2.706), wedge());
  CHECK(q2 == doctest::Approx(2.706).epsilon(1e-9));
  // point mass at zero for lambda12 is w_{n+1}
  const WeightVector heavy = weights({0.05, 0.15, 0.3, 0.5});
  CHECK(quantile_lambda12(0.5, heavy) == 0.0);
  CHECK(quantile_lambda12(0.49, heavy) > 0.0);
  CHECK_THROWS_AS(quantile_lambda12(1.0, heavy), InvalidArgument);
}

TEST_CASE("studentized quantile") {
  const WeightVector d = weights({0.3318, 0.4792, 0.168, 0.0208});
  for (auto sc : {VarianceScaling::S, VarianceScaling::SqrtS}) {
    const double q = quantile_lambda12_prime(0.05, d, 7, sc);
    CHECK(survival_lambda12_prime(q, d, 7, sc) == doctest::Approx(0.05).epsilon(1e-8));
    CHECK(quantile_lambda12_prime(0.05, d, 100000, sc) == doctest::Approx(quantile_lambda12(0.05, d)).epsilon(1e-3));
  }
  CHECK(variance_scaling_from_string(to_string(VarianceScaling::SqrtS)) == VarianceScaling::SqrtS);
  CHECK_THROWS_AS(variance_scaling_from_string("cube"), InvalidArgument);
}

TEST_CASE("studentized survival against simulation") {
  std::mt19937_64 rng(43);
  std::discrete_distribution<int> pick({0.25, 0.5, 0.25});
  std::chi_squared_distribution<double> s5(5);
  const int N = 1000000;
  std::vector<std::chi_squared_distribution<double>> chis;
  for (int k = 1; k <= 2; ++k) chis.emplace_back(k);
  const double qs = quantile_lambda12_prime(0.05, wedge(), 5, VarianceScaling::S);
  const double qr = quantile_lambda12_prime(0.05, wedge(), 5, VarianceScaling::SqrtS);
  long hs = 0, hr = 0;
  for (int i = 0; i < N; ++i) {
    const int idx = pick(rng);  // weight index i gives lambda12 ~ chi2_{n+1-i}
    const int dof = 2 - idx;
    const double l12 = dof == 0 ? 0.0 : chis[dof - 1](rng);
    const double s = s5(rng) / 5;
    hs += l12 / s >= qs;
    hr += l12 / std::sqrt(s) >= qr;
  }
  const double se = std::sqrt(0.05 * 0.95 / N);
  CHECK(std::abs(double(hs) / N - 0.05) <= 3 * se);
  CHECK(std::abs(double(hr) / N - 0.05) <= 3 * se);
}

TEST_CASE("survival bounds") {
  WeightBounds b;
  b.u = Vector(7);
  b.v = Vector(7);
  b.u << 0.01, 0.04, 0.34, 0.16, 0, 0.3, 0.15;
  b.v << 0.01, 0.04, 0, 0.16, 0.34, 0.3, 0.15;
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0, 30.0}) {
    for (auto which : {Statistic::Lambda01, Statistic::Lambda12}) {
      const auto [lo, hi] = survival_bounds(x, b, which);
      CHECK(lo <= hi + 1e-15);
      CHECK(lo >= 0.0);
      CHECK(hi <= 1.0);
    }
  }
  const auto [lo, hi] = survival_bounds(0.0, b, Statistic::Lambda01);
  CHECK(lo == 1.0);
  CHECK(hi == 1.0);
}

TEST_CASE("tail asymptotes") {
  const WeightVector g = weights({0.0072, 0.0657, 0.2416, 0.4343, 0.2512});
  // the next term w3 G3 / (w4 G4) only decays like x^-1/2, so the ratio is
  // still near 1.3 at x = 80; check the approach instead
  double last = kInf;
  for (double x : {80.0, 200.0, 800.0}) {
    const double ratio = pvalue_lambda01(x, g) / tail_asymptote(x, g, Statistic::Lambda01);
    CHECK(ratio > 1.0);
    CHECK(ratio < last);
    last = ratio;
  }
  const double r = pvalue_lambda01(800, g) / tail_asymptote(800, g, Statistic::Lambda01);
  const double next = 0.4343 * support::chi2_upper(3, 800) / (0.2512 * support::chi2_upper(4, 800));
  CHECK(std::abs(r - 1.0 - next) < 0.005);
  // the lambda12 tail is led by w0 = 0.0072, so it converges much more slowly
  const double r80 = pvalue_lambda12(80, g) / tail_asymptote(80, g, Statistic::Lambda12);
  const double r800 = pvalue_lambda12(800, g) / tail_asymptote(800, g, Statistic::Lambda12);
  CHECK(r800 < r80);
  CHECK(r800 > 1.0);
  CHECK(tail_asymptote(20, wedge(), Statistic::Lambda01) == doctest::Approx(0.25 * support::chi2_upper(2, 20)));
  CHECK(tail_asymptote(20, wedge(), Statistic::Lambda12) == doctest::Approx(0.25 * support::chi2_upper(2, 20)));
}

}
