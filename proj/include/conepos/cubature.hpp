#pragma once

#include <functional>
#include <span>

#include "conepos/poly.hpp"

namespace conepos {

struct CubatureOptions {
  /// Gauss-Legendre order per dimension; the error estimate compares against
  /// order-2.
  int order = 7;
  double rel_tol = 1e-3;
  double abs_tol = 1e-12;
  long max_evaluations = 20'000'000;
  /// Cells split per dimension before adaptation starts; 0 picks 2 for
  /// dim <= 3 and 1 above.
  int initial_splits = 0;
  /// Cells refined per round. Fixed, so the sequence of refinements does not
  /// depend on the thread count.
  int batch = 16;
  int threads = 1;
};

struct CubatureResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  long cells = 0;
  bool converged = false;
};

using BoxIntegrand = std::function<double(std::span<const double>)>;

/// Nodes and weights of the n-point Gauss-Legendre rule on [0, 1].
void gauss_legendre(int n, Vector& nodes, Vector& weights);

/// Adaptive integral of f over (0,1)^dim. Refines the cells with the largest
/// error estimate, bisecting each along the dimension whose top Legendre
/// coefficients are largest. Sums run pairwise in a fixed cell order.
CubatureResult integrate_unit_box(int dim, const BoxIntegrand& f, const CubatureOptions& opts = {});

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

}  // namespace conepos
