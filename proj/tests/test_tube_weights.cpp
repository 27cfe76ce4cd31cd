#include <doctest.h>

#include <cmath>
#include <random>

#include "conepos/error.hpp"
#include "conepos/null_dist.hpp"
#include "conepos/tube_weights.hpp"
#include "support.hpp"

using namespace conepos;

TEST_SUITE("tube_weights") {

TEST_CASE("sphere volumes") {
  CHECK(omega(1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(omega(2) == doctest::Approx(2 * M_PI).epsilon(1e-15));
  CHECK(omega(3) == doctest::Approx(4 * M_PI).epsilon(1e-15));
  CHECK(omega(4) == doctest::Approx(2 * M_PI * M_PI).epsilon(1e-15));
}

TEST_CASE("the n = 1 wedge") {
  const Domain d = Domain::bounded(-1, 1);
  const MetricPair id = MetricPair::identity(2);
  const VolumeEstimate up = vol_Kstar_cap(1, d, id, Representation::Upper);
  const VolumeEstimate lo = vol_Kstar_cap(1, d, id, Representation::Lower);
  CHECK(std::abs(up.value - M_PI / 2) <= std::max(up.error, 1e-3));
  CHECK(std::abs(lo.value - M_PI / 2) <= std::max(lo.error, 1e-3));
  const VolumeEstimate k = vol_K_cap(1, d, id);
  CHECK(std::abs(k.value - M_PI / 2) <= std::max(k.error, 1e-3));
  const WeightVector w = complete_weights(1, d, id);
  CHECK(w.status == WeightStatus::Exact);
  CHECK(w.weights[0] == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(w.weights[1] == 0.5);
  CHECK(w.weights[2] == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("weights are invariant to the metric scale") {
  std::mt19937_64 rng(21);
  const MetricPair m = MetricPair::from_covariance(support::random_spd(3, rng));
  const Domain d = Domain::bounded(-1, 2);
  const WeightVector a = complete_weights(2, d, m);
  const WeightVector b = complete_weights(2, d, m.scaled(7.5));
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("full line strata for n = 2") {
  const MetricPair id = MetricPair::identity(3);
  const Domain full = Domain::full_line();
  // only the lower boundary form and the double-root stratum exist
  CHECK_THROWS_AS(Stratum::moment_upper(2, 1, full), InvalidArgument);
  CHECK_THROWS_AS(Stratum::poly_lower_anchor(2, full), InvalidArgument);
  CHECK_THROWS_AS(Stratum::poly_upper_anchor(2, full), InvalidArgument);
  const VolumeEstimate lower_only = integrate_stratum(Stratum::moment_lower(2, 1, full), id);
  CHECK(vol_bKstar_cap(2, full, id).value == doctest::Approx(lower_only.value).epsilon(1e-12));
  const VolumeEstimate dr = integrate_stratum(Stratum::poly_double_root(2, full), id);
  CHECK(vol_bK_cap(2, full, id).value == doctest::Approx(dr.value).epsilon(1e-12));
  const WeightVector w = complete_weights(2, full, id);
  CHECK(w.weights.minCoeff() > 0);
  CHECK(w.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bound vectors follow the parity layout") {
  ExtremeWeights e;
  e.n = 5;
  e.w0 = 0.01;
  e.w1 = 0.04;
  e.wn = 0.3;
  e.wn1 = 0.15;
  WeightBounds b = weight_bounds(e);
  Vector u(7), v(7);
  u << 0.01, 0.04, 0.5 - 0.01 - 0.15, 0.5 - 0.04 - 0.3, 0, 0.3, 0.15;
  v << 0.01, 0.04, 0, 0.5 - 0.04 - 0.3, 0.5 - 0.01 - 0.15, 0.3, 0.15;
  CHECK((b.u - u).norm() < 1e-15);
  CHECK((b.v - v).norm() < 1e-15);

  e.n = 6;
  b = weight_bounds(e);
  Vector v6(8);
  v6 << 0.01, 0.04, 0, 0, 0.5 - 0.01 - 0.3, 0.5 - 0.04 - 0.15, 0.3, 0.15;
  CHECK((b.v - v6).norm() < 1e-15);
  for (const Vector* x : {&b.u, &b.v}) {
    double odd = 0, even = 0;
    for (int i = 0; i < x->size(); ++i) (i % 2 ? odd : even) += (*x)[i];
    CHECK(odd == doctest::Approx(0.5));
    CHECK(even == doctest::Approx(0.5));
  }
  e.n = 3;
  CHECK_THROWS_AS(weight_bounds(e), InvalidArgument);
}

TEST_CASE("bounds sandwich the exact n = 4 distribution") {
  std::mt19937_64 rng(23);
  const MetricPair m = MetricPair::from_covariance(support::random_spd(5, rng));
  const Domain d = Domain::bounded(-1, 1);
  const WeightVector w = complete_weights(4, d, m);
  const WeightBounds b = weight_bounds(w.extremes);
  const double slack = w.total_error();
  for (double a : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double exact = pvalue_lambda01(a, w);
    const auto [lo, hi] = survival_bounds(a, b, Statistic::Lambda01);
    CHECK(lo <= exact + slack);
    CHECK(exact <= hi + slack);
    const double exact12 = pvalue_lambda12(a, w);
    const auto [lo12, hi12] = survival_bounds(a, b, Statistic::Lambda12);
    CHECK(lo12 <= exact12 + slack);
    CHECK(exact12 <= hi12 + slack);
  }
}

TEST_CASE("weights of the growth curve derivative") {
  const support::Mat L = support::derivative_matrix(3);
  const MetricPair m = MetricPair::from_covariance(L * support::growth_sigma_rebuilt() * L.transpose());
  const WeightVector w = complete_weights(2, Domain::bounded(-3, 3), m);
  // reference values for w1 and w3; w0 and w2 are checked in the acceptance suite
  CHECK(w.weights[1] == doctest::Approx(0.4792).epsilon(0.005 / 0.4792));
  CHECK(w.weights[3] == doctest::Approx(0.0208).epsilon(0.005 / 0.0208));
  CHECK(w.extremes.w0 == doctest::Approx(w.extremes.w0_lower).epsilon(1e-3));
}

}
