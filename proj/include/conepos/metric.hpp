#pragma once

#include "conepos/poly.hpp"

namespace conepos {

/// A symmetric positive-definite inner product on coefficient space together
/// with its inverse. The primal matrix G = Sigma^{-1} measures coefficient
/// vectors; the dual matrix Sigma measures moment vectors.
class MetricPair {
 public:
  /// Builds the pair from a covariance Sigma (G = Sigma^{-1}).
  static MetricPair from_covariance(const Matrix& sigma);
  /// Builds the pair from a precision matrix G (Sigma = G^{-1}).
  static MetricPair from_precision(const Matrix& g);
  static MetricPair identity(int size);

  const Matrix& primal() const { return g_; }
  const Matrix& dual() const { return g_inv_; }
  int size() const { return static_cast<int>(g_.rows()); }

  /// The pair for the rescaled inner product kG.
  MetricPair scaled(double k) const;

  double primal_inner(const Vector& x, const Vector& y) const { return x.dot(g_ * y); }
  double primal_norm2(const Vector& x) const { return primal_inner(x, x); }
  double primal_norm(const Vector& x) const;
  double dual_norm2(const Vector& x) const { return x.dot(g_inv_ * x); }

  /// Spectral condition number of G.
  double condition_number() const;

 private:
  MetricPair(Matrix g, Matrix g_inv);

  Matrix g_;
  Matrix g_inv_;
};

/// The n x n Hilbert matrix (1/(i+j-1)).
Matrix hilbert_matrix(int n);

}  // namespace conepos
