#include "conepos/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "conepos/error.hpp"

namespace conepos {

namespace {

constexpr double kMaxCondition = 1e12;

void check_spd(const Matrix& m, const char* what) {
  require(m.rows() == m.cols() && m.rows() >= 1, std::string(what) + " must be square");
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + m.cwiseAbs().maxCoeff()),
          std::string(what) + " must be symmetric");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument(std::string(what) + " must be positive definite");
  }
}

Matrix symmetric_inverse(const Matrix& m) {
  Matrix inv = Eigen::LLT<Matrix>(m).solve(Matrix::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace

MetricPair::MetricPair(Matrix g, Matrix g_inv) : g_(std::move(g)), g_inv_(std::move(g_inv)) {
  const double cond = condition_number();
  if (!(cond <= kMaxCondition)) {
    std::ostringstream os;
    os << "metric condition number " << cond << " exceeds " << kMaxCondition;
    throw DegenerateMetric(os.str());
  }
}

MetricPair MetricPair::from_covariance(const Matrix& sigma) {
  check_spd(sigma, "covariance");
  Matrix s = 0.5 * (sigma + sigma.transpose());
  return MetricPair(symmetric_inverse(s), s);
}

MetricPair MetricPair::from_precision(const Matrix& g) {
  check_spd(g, "precision");
  Matrix s = 0.5 * (g + g.transpose());
  Matrix inv = symmetric_inverse(s);
  return MetricPair(std::move(s), std::move(inv));
}

MetricPair MetricPair::identity(int size) {
  return MetricPair(Matrix::Identity(size, size), Matrix::Identity(size, size));
}

MetricPair MetricPair::scaled(double k) const {
  require(k > 0.0, "metric scale must be positive");
  return MetricPair(k * g_, g_inv_ / k);
}

double MetricPair::condition_number() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(g_, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) return kInf;
  return ev.maxCoeff() / ev.minCoeff();
}

Matrix hilbert_matrix(int n) {
  require(n >= 1, "Hilbert matrix size must be positive");
  Matrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = 1.0 / (i + j + 1);
  return h;
}

double MetricPair::primal_norm(const Vector& x) const { return std::sqrt(std::max(0.0, primal_norm2(x))); }

}  // namespace conepos
