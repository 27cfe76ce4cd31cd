#include <doctest.h>

#include <cmath>
#include <random>

#include "conepos/error.hpp"
#include "conepos/inference.hpp"
#include "support.hpp"

using namespace conepos;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

WeightVector wedge() { return WeightVector::from_values(vec({0.25, 0.5, 0.25})); }

WeightVector flat(int n) { return WeightVector::from_values(Vector::Constant(n + 2, 1.0 / (n + 2))); }

WeightVector cubic_weights() { return WeightVector::from_values(vec({0.0072, 0.0657, 0.2416, 0.4343, 0.2512})); }

WeightVector derivative_weights() { return WeightVector::from_values(vec({0.3318, 0.4792, 0.168, 0.0208})); }

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("stats validation") {
  CHECK_THROWS_AS(SufficientStats::known(vec({1, 2}), Matrix::Identity(3, 3)).validate(), InvalidArgument);
  CHECK_THROWS_AS(SufficientStats::known(vec({1, 2}), Matrix::Identity(2, 2), -1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(SufficientStats::estimated(vec({1, 2}), Matrix::Identity(2, 2), 1.0, 0).validate(), InvalidArgument);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = -1;
  CHECK_THROWS_AS(SufficientStats::known(vec({1, 2}), bad).validate(), InvalidArgument);
  const SufficientStats s = SufficientStats::estimated(vec({1, 2}), 2.0 * Matrix::Identity(2, 2), 0.5, 4);
  CHECK((s.covariance() - Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK_FALSE(s.known_variance());
  CHECK(to_string(TestMode::UnknownVariance) == "unknown_variance");
}

TEST_CASE("zero estimate gives zero statistics") {
  const SufficientStats s = SufficientStats::known(Vector::Zero(2), Matrix::Identity(2, 2));
  const TestReport r = lrt(s, Domain::bounded(-1, 1), wedge());
  CHECK(r.lambda01 == 0.0);
  CHECK(r.lambda12 == 0.0);
  CHECK(r.p01 == 1.0);
  CHECK(r.p12 == 1.0);
  CHECK(std::isnan(r.beta01));
}

TEST_CASE("cubic growth example is interior") {
  const Vector c = support::growth_c_hat();
  const Matrix sigma = support::growth_sigma_rounded();
  const TestReport r = lrt(SufficientStats::known(c, sigma), Domain::bounded(-3, 3), cubic_weights());
  CHECK(r.projection.path == "interior");
  CHECK(r.lambda12 == 0.0);
  CHECK(r.lambda01 == doctest::Approx(c.dot(sigma.ldlt().solve(c))).epsilon(1e-12));
  CHECK(r.p01 == doctest::Approx(support::chibar(r.lambda01, -kInf, cubic_weights().weights)).epsilon(1e-10));
  CHECK(r.p12 == 1.0);
}

TEST_CASE("derivative growth example") {
  const Matrix L = support::derivative_matrix(3);
  const Vector d = L * support::growth_c_hat();
  const Matrix sigma = L * support::growth_sigma_rounded() * L.transpose();
  const TestReport r = lrt(SufficientStats::known(d, sigma), Domain::bounded(-3, 3), derivative_weights());
  const Vector dk = r.projection.c_K;
  CHECK(std::abs(dk[0] - 0.348) < 1e-3);
  CHECK(std::abs(dk[1] - 0.0776) < 1e-3);
  CHECK(std::abs(dk[2] + 0.0128) < 1e-3);
  const double total = d.dot(sigma.ldlt().solve(d));
  CHECK(std::abs(r.lambda01 + r.lambda12 - total) < 1e-10 * total);
  CHECK(std::abs(r.lambda12 - 0.417) < 0.01);
  CHECK(r.p01 == doctest::Approx(pvalue_lambda01(r.lambda01, derivative_weights())).epsilon(1e-14));
  CHECK(r.p12 == doctest::Approx(pvalue_lambda12(r.lambda12, derivative_weights())).epsilon(1e-14));
  CHECK(std::abs(r.p12 - 0.787) < 0.01);
}

TEST_CASE("lambda split is exact on random inputs") {
  std::mt19937_64 rng(61);
  const Domain doms[] = {Domain::bounded(-1, 2), Domain::half_line(0), Domain::full_line()};
  for (const Domain& dom : doms) {
    for (int k = 0; k < 20; ++k) {
      const int n = dom.kind() == DomainKind::FullLine ? 2 : 1 + k % 3;
      const Matrix s0 = support::random_spd(n + 1, rng);
      const Vector c = support::random_normal(n + 1, rng);
      const WeightVector w = WeightVector::from_values(Vector::Constant(n + 2, 1.0 / (n + 2)));
      const TestReport r = lrt(SufficientStats::known(c, s0, 2.0), dom, w);
      const double total = c.dot((2.0 * s0).ldlt().solve(c));
      CHECK(std::abs(r.lambda01 + r.lambda12 - total) < 1e-9 * total);
      CHECK(r.lambda01 >= 0.0);
      CHECK(r.lambda12 >= -1e-12 * total);
      CHECK(r.p01 >= 0.0);
      CHECK(r.p01 <= 1.0);
      CHECK(r.p12 >= 0.0);
      CHECK(r.p12 <= 1.0);
    }
  }
}

TEST_CASE("beta statistics agree with the known-variance form") {
  std::mt19937_64 rng(62);
  const Domain dom = Domain::bounded(0, 1);
  for (int k = 0; k < 30; ++k) {
    const int n = 1 + k % 3;
    const Matrix s0 = support::random_spd(n + 1, rng);
    const Vector c = support::random_normal(n + 1, rng);
    const double sigma2 = 0.7, sigma2_hat = 1.3;
    const int nu = 3 + k % 5;
    const WeightVector w = WeightVector::from_values(Vector::Constant(n + 2, 1.0 / (n + 2)));
    const TestReport known = lrt(SufficientStats::known(c, s0, sigma2), dom, w);
    const TestReport est = lrt(SufficientStats::estimated(c, s0, sigma2_hat, nu), dom, w);
    CHECK(est.mode == TestMode::UnknownVariance);
    const double ratio = nu * sigma2_hat / sigma2;
    if (known.lambda12 > 0.0)
      CHECK(std::abs(est.beta12 - known.lambda12 / (known.lambda12 + ratio)) < 1e-10);
    const double l01 = est.lambda01, l12 = est.lambda12;
    CHECK(std::abs(est.beta01 - l01 / (l01 + l12 + nu)) < 1e-14);
    CHECK(est.p01 == doctest::Approx(pvalue_beta01(est.beta01, w, nu)).epsilon(1e-14));
    CHECK(est.p12 == doctest::Approx(pvalue_beta12(est.beta12, w, nu)).epsilon(1e-14));
  }
}

TEST_CASE("bounds-only weights give p-value intervals") {
  WeightVector w;
  w.weights = Vector::Constant(7, std::nan(""));
  w.status = WeightStatus::BoundsOnly;
  WeightBounds b;
  b.u = vec({0.01, 0.05, 0.2, 0.3, 0.25, 0.15, 0.04});
  b.v = vec({0.02, 0.04, 0.18, 0.32, 0.26, 0.12, 0.06});
  w.bounds = b;
  Vector c = Vector::Zero(6);
  c[0] = 3.0;
  const TestReport r = lrt(SufficientStats::known(c, Matrix::Identity(6, 6)), Domain::bounded(0, 1), w);
  REQUIRE(r.p01_interval.has_value());
  CHECK(r.p01_interval->first <= r.p01_interval->second);
  CHECK(r.p01 == r.p01_interval->second);
  const auto expect = survival_bounds(r.lambda01, b, Statistic::Lambda01);
  CHECK(r.p01_interval->first == expect.first);
}

TEST_CASE("pointwise band matches the closed form") {
  const Vector c = vec({0.2, -0.4, 0.3});
  std::mt19937_64 rng(63);
  const Matrix s0 = support::random_spd(3, rng);
  const SufficientStats s = SufficientStats::known(c, s0, 0.5);
  BandSpec spec;
  spec.grid = {-1.0, -0.3, 0.0, 0.8, 1.0};
  const Band b = band(s, Domain::bounded(-1, 1), spec, flat(2));
  const double q = quantile_lambda12(0.05, flat(2));
  CHECK(b.critical == q);
  CHECK(pvalue_lambda12(q, flat(2)) == doctest::Approx(0.05).epsilon(1e-8));
  REQUIRE(b.samples.size() == 5);
  for (const BandSample& x : b.samples) {
    const Vector psi = basis(2, x.t);
    const double scale = std::sqrt(psi.dot(0.5 * s0 * psi));
    CHECK(x.estimate == doctest::Approx(support::poly_value(c, x.t)).epsilon(1e-14));
    CHECK(x.scale == doctest::Approx(scale).epsilon(1e-14));
    CHECK(x.lower == doctest::Approx(x.estimate - std::sqrt(q) * scale).epsilon(1e-14));
  }
  spec.grid = {1.5};
  CHECK_THROWS_AS(band(s, Domain::bounded(-1, 1), spec, flat(2)), InvalidArgument);
}

TEST_CASE("band is homogeneous in the measure") {
  const Vector c = vec({0.2, -0.4, 0.3});
  const SufficientStats s = SufficientStats::known(c, Matrix::Identity(3, 3));
  BandSpec spec;
  spec.family = MeasureFamily::Custom;
  spec.measures = {{{0.1, 1.0}, {0.7, 2.0}}, {{0.1, 3.0}, {0.7, 6.0}}};
  const Band b = band(s, Domain::bounded(0, 1), spec, flat(2));
  REQUIRE(b.samples.size() == 2);
  CHECK(b.samples[1].estimate == doctest::Approx(3.0 * b.samples[0].estimate).epsilon(1e-14));
  CHECK(b.samples[1].lower == doctest::Approx(3.0 * b.samples[0].lower).epsilon(1e-13));
  CHECK(b.samples[1].t == 1.0);
}

TEST_CASE("integral family moments") {
  BandSpec spec;
  spec.family = MeasureFamily::Integral;
  spec.t0 = -0.5;
  spec.grid = {0.25, 1.0};
  for (std::size_t j = 0; j < spec.grid.size(); ++j) {
    const Vector m = measure_moments(3, spec, j);
    // midpoint rule as the oracle
    const int steps = 200000;
    const double h = (spec.grid[j] - spec.t0) / steps;
    Vector want = Vector::Zero(4);
    for (int i = 0; i < steps; ++i) want += h * basis(3, spec.t0 + (i + 0.5) * h);
    CHECK((m - want).norm() < 1e-9);
  }
  spec.grid = {-1.0};
  CHECK_THROWS_AS(measure_moments(3, spec, 0), InvalidArgument);
  CHECK(to_string(MeasureFamily::Integral) == "integral");
}

TEST_CASE("unknown-variance band uses the scaled quantile") {
  const SufficientStats s = SufficientStats::estimated(vec({0.1, 0.2}), Matrix::Identity(2, 2), 0.8, 6);
  BandSpec spec;
  spec.grid = {0.0, 1.0};
  const Band b = band(s, Domain::bounded(0, 1), spec, wedge());
  CHECK(b.unknown_variance);
  CHECK(b.critical == doctest::Approx(quantile_lambda12_prime(0.05, wedge(), 6, VarianceScaling::S)).epsilon(1e-14));
  CHECK(b.critical > quantile_lambda12(0.05, wedge()));
  spec.scaling = VarianceScaling::SqrtS;
  CHECK(band_critical_value(s, spec, wedge()) ==
        doctest::Approx(quantile_lambda12_prime(0.05, wedge(), 6, VarianceScaling::SqrtS)).epsilon(1e-14));
}

TEST_CASE("variance ratio draws") {
  double mean = 0.0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) mean += variance_ratio_draw(9, static_cast<std::uint64_t>(i), 5);
  mean /= count;
  // s has mean 1 and variance 2/nu
  CHECK(std::abs(mean - 1.0) < 4.0 * std::sqrt(0.4 / count));
  CHECK(variance_ratio_draw(9, 17, 5) == variance_ratio_draw(9, 17, 5));
  CHECK(variance_ratio_draw(9, 17, 5) != variance_ratio_draw(10, 17, 5));
}

TEST_CASE("MC oracle on the wedge") {
  McOptions opts;
  opts.draws = 20000;
  opts.seed = 77;
  opts.threads = 1;
  const Domain dom = Domain::bounded(-1, 1);
  const MetricPair metric = MetricPair::identity(2);
  const McNullSample a = mc_null_oracle(dom, metric, opts);
  opts.threads = 4;
  const McNullSample b = mc_null_oracle(dom, metric, opts);
  CHECK(a.lambda01() == b.lambda01());
  CHECK(a.lambda12() == b.lambda12());
  CHECK(a.failures() == 0);
  CHECK(a.size() == 20000);
  CHECK(a.seed() == 77);

  const Estimate zero = a.point_mass_zero();
  CHECK(std::abs(zero.value - 0.25) < 3.0 * zero.se + 1e-3);
  for (double x : {0.5, 2.0})
    for (double y : {-kInf, 0.5, 2.0}) {
      const Estimate e = a.joint_survival(x, y);
      CHECK(std::abs(e.value - chibar_joint_survival(x, y, wedge())) < 3.0 * e.se + 1e-3);
    }
  for (double x : {0.1, 0.3}) {
    const Estimate e = a.beta_joint_survival(x, -kInf, 5);
    CHECK(std::abs(e.value - betabar_joint_survival(x, -kInf, wedge(), 5)) < 3.0 * e.se + 1e-3);
  }
  const std::vector<double> s = a.variance_ratios(5);
  CHECK(s[123] == variance_ratio_draw(77, 123, 5));

  opts.draws = 999;
  CHECK_THROWS_AS(mc_null_oracle(dom, metric, opts), InvalidArgument);
}

TEST_CASE("monotonicity probe") {
  const Domain dom = Domain::bounded(0, 1);
  const MetricPair m = MetricPair::identity(3);
  CHECK(monotonicity_probe(Vector::Zero(3), vec({-1, 0.3, 0.2}), m, dom));
  CHECK(monotonicity_probe(vec({1, 0, 0}), vec({0, 1, 0}), m, dom));
  CHECK_THROWS_AS(monotonicity_probe(vec({-1, 0, 0}), vec({0, 1, 0}), m, dom), InvalidArgument);

  std::mt19937_64 rng(64);
  const Domain doms[] = {Domain::bounded(-1, 1), Domain::half_line(0), Domain::full_line()};
  int failures = 0;
  for (const Domain& d : doms) {
    for (int k = 0; k < 30; ++k) {
      const int n = d.kind() == DomainKind::FullLine ? 2 + 2 * (k % 2) : 1 + k % 4;
      const MetricPair metric = MetricPair::from_covariance(support::random_spd(n + 1, rng));
      // c in K as a square plus a constant
      Vector root = support::random_normal(n / 2 + 1, rng);
      Vector c = Vector::Zero(n + 1);
      const Vector sq = support::poly_product(root, root);
      c.head(sq.size()) = sq;
      c[0] += 0.1;
      if (!monotonicity_probe(c, support::random_normal(n + 1, rng), metric, d)) ++failures;
    }
  }
  CHECK(failures == 0);
}

}
