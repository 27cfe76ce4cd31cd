#include <doctest.h>

#include <cmath>
#include <random>

#include "conepos/error.hpp"
#include "conepos/projection.hpp"
#include "support.hpp"

using namespace conepos;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_SUITE("projection_solver") {

TEST_CASE("Markov-Lukacs coefficient map") {
  const Domain d = Domain::bounded(0, 1);
  MLParam p{Matrix::Zero(2, 2), Matrix::Zero(1, 1)};
  p.Q1(0, 0) = 1;
  CHECK((ml_coeffs(p, d) - vec({1, 0, 0})).norm() < 1e-15);
  p.Q1.setZero();
  p.Q2(0, 0) = 1;
  CHECK((ml_coeffs(p, d) - vec({0, 1, -1})).norm() < 1e-15);
  MLParam q{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  q.Q1(1, 1) = 1;
  CHECK((ml_coeffs(q, d) - vec({0, 0, 0, 1})).norm() < 1e-15);
  CHECK_THROWS_AS(ml_coeffs(MLParam{Matrix::Zero(3, 3), Matrix::Zero(1, 1)}, d), InvalidArgument);
}

TEST_CASE("hilbert metric example") {
  const ProjectionResult r =
      project(vec({0, 0.5, -1.5, 1}), MetricPair::from_covariance(hilbert_matrix(4)), Domain::bounded(0, 1));
  const Vector want = vec({0.0258, 0.5151, -1.4891, 1.0086});
  CHECK(r.converged);
  CHECK((r.c_K - want).cwiseAbs().maxCoeff() <= 5e-4);
  CHECK(std::abs(r.kkt.complementarity) < 1e-7 * r.c_hat.dot(MetricPair::from_covariance(hilbert_matrix(4)).primal() * r.c_hat));
  CHECK(r.kkt.ok());
  REQUIRE(r.kkt.touching_points.size() == 1);
}

TEST_CASE("running out of steps is reported") {
  ProjectionOptions opts;
  opts.max_iter = 3;
  const MetricPair m = MetricPair::from_covariance(hilbert_matrix(4));
  const ProjectionResult r = project(vec({0, 0.5, -1.5, 1}), m, Domain::bounded(0, 1), opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations <= 3);
  CHECK(r.duality_gap > opts.tol);
  CHECK(r.c_K.allFinite());
  CHECK_FALSE(r.kkt.ok());
}

TEST_CASE("interior and polar cases") {
  const Domain d = Domain::bounded(0, 1);
  std::mt19937_64 rng(31);
  const MetricPair m = MetricPair::from_covariance(support::random_spd(4, rng));
  const ProjectionResult in = project(vec({1, 0, 0, 0}), m, d);
  CHECK((in.c_K - in.c_hat).norm() == 0.0);
  CHECK(in.lambda12 == 0.0);
  CHECK(in.residual.norm() == 0.0);
  for (double t0 : {0.0, 0.3, 1.0}) {
    const Vector c = -m.dual() * basis(3, t0);
    const ProjectionResult pol = project(c, m, d);
    CHECK(pol.c_K.norm() == 0.0);
    CHECK(pol.lambda01 == 0.0);
    CHECK(pol.kkt.ok());
  }
}

TEST_CASE("derivative of the growth curve") {
  const Matrix L = support::derivative_matrix(3);
  const MetricPair m = MetricPair::from_covariance(L * support::growth_sigma_rounded() * L.transpose());
  const ProjectionResult r = project(vec({0.551, 0.107, -0.0902}), m, Domain::bounded(-3, 3));
  CHECK(r.kkt.ok());
  CHECK(r.c_K[0] == doctest::Approx(0.348).epsilon(1e-3 / 0.348));
  CHECK(r.c_K[1] == doctest::Approx(0.0776).epsilon(1e-3 / 0.0776));
  CHECK(r.c_K[2] == doctest::Approx(-0.0128).epsilon(1e-3 / 0.0128));
  CHECK(r.lambda12 == doctest::Approx(0.417).epsilon(0.01 / 0.417));
}

TEST_CASE("scale of the metric does not move the projection") {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 30; ++k) {
    const int n = 2 + k % 3;
    const MetricPair m = MetricPair::from_covariance(support::random_spd(n + 1, rng));
    const Vector c = support::random_normal(n + 1, rng);
    const Domain d = Domain::bounded(-1, 1);
    const ProjectionResult a = project(c, m, d);
    const ProjectionResult b = project(c, m.scaled(25.0), d);
    CHECK((a.c_K - b.c_K).norm() <= 1e-8 * c.norm());
  }
}

TEST_CASE("degenerate metrics are rejected") {
  Matrix s = Matrix::Identity(3, 3);
  s(2, 2) = 1e-14;
  CHECK_THROWS_AS(project(vec({1, -1, 1}), MetricPair::from_covariance(s), Domain::bounded(0, 1)), DegenerateMetric);
}

TEST_CASE("lower-degree and unbounded cases stay certified") {
  std::mt19937_64 rng(35);
  const Domain doms[] = {Domain::half_line(-0.5), Domain::full_line()};
  for (const Domain& d : doms) {
    for (int k = 0; k < 100; ++k) {
      const int n = d.kind() == DomainKind::FullLine ? 2 + 2 * (k % 2) : 1 + k % 4;
      const MetricPair m = MetricPair::from_covariance(support::random_spd(n + 1, rng));
      Vector c = support::random_normal(n + 1, rng);
      if (k % 5 == 0) c[n] = 0;  // leading coefficient at the boundary
      const ProjectionResult r = project(c, m, d);
      CHECK(r.converged);
      CHECK(r.kkt.ok());
      CHECK(member_K(r.c_K, d));
    }
  }
}

}
