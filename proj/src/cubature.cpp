#include "conepos/cubature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "conepos/error.hpp"
#include "conepos/parallel.hpp"

namespace conepos {

void gauss_legendre(int n, Vector& nodes, Vector& weights) {
  require(n >= 1, "Gauss-Legendre order must be positive");
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Matrix jacobi = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = 0.5 * (es.eigenvalues()[i] + 1.0);
    const double v = es.eigenvectors()(0, i);
    weights[i] = v * v;  // sums to 1 on [0, 1]
  }
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

namespace {

struct Cell {
  std::vector<double> lo;
  std::vector<double> hi;
  double value = 0.0;
  double error = 0.0;
  int split_dim = 0;
};

class TensorRule {
 public:
  TensorRule(int dim, int order) : dim_(dim), order_(order) {
    gauss_legendre(order, hi_nodes_, hi_weights_);
    const int low = std::max(1, order - 2);
    gauss_legendre(low, lo_nodes_, lo_weights_);
    // Legendre polynomials P_{k-1}, P_{k-2} at the high-order nodes, scaled
    // so that sum_i w_i g_i P(x_i) * norm gives the expansion coefficient.
    top_.resize(2, Vector(order));
    for (int i = 0; i < order; ++i) {
      const double x = 2.0 * hi_nodes_[i] - 1.0;
      double p0 = 1.0, p1 = x;
      std::vector<double> p(order + 1);
      p[0] = p0;
      if (order >= 1) p[1] = p1;
      for (int k = 1; k < order; ++k) p[k + 1] = ((2.0 * k + 1.0) * x * p[k] - k * p[k - 1]) / (k + 1.0);
      for (int r = 0; r < 2; ++r) {
        const int deg = order - 1 - r;
        top_[r][i] = deg >= 0 ? (2.0 * deg + 1.0) * p[deg] : 0.0;
      }
    }
  }

  long evaluations_per_cell() const {
    return ipow(order_, dim_) + ipow(lo_nodes_.size(), dim_);
  }

  void apply(Cell& cell, const BoxIntegrand& f) const {
    std::vector<double> width(dim_);
    double volume = 1.0;
    for (int j = 0; j < dim_; ++j) {
      width[j] = cell.hi[j] - cell.lo[j];
      volume *= width[j];
    }
    std::vector<double> x(dim_);
    std::vector<int> idx(dim_, 0);

    // High-order tensor rule, keeping per-dimension marginals for the split
    // indicator.
    const long hi_count = ipow(order_, dim_);
    std::vector<double> terms(hi_count);
    std::vector<Vector> marginal(dim_, Vector::Zero(order_));
    for (long p = 0; p < hi_count; ++p) {
      double w = 1.0;
      for (int j = 0; j < dim_; ++j) {
        x[j] = cell.lo[j] + width[j] * hi_nodes_[idx[j]];
        w *= hi_weights_[idx[j]];
      }
      const double v = f(x);
      terms[p] = w * v;
      for (int j = 0; j < dim_; ++j) marginal[j][idx[j]] += terms[p] / hi_weights_[idx[j]];
      advance(idx, order_);
    }
    const double q_hi = volume * pairwise_sum(terms);

    const int lo_order = static_cast<int>(lo_nodes_.size());
    const long lo_count = ipow(lo_order, dim_);
    std::fill(idx.begin(), idx.end(), 0);
    terms.assign(lo_count, 0.0);
    for (long p = 0; p < lo_count; ++p) {
      double w = 1.0;
      for (int j = 0; j < dim_; ++j) {
        x[j] = cell.lo[j] + width[j] * lo_nodes_[idx[j]];
        w *= lo_weights_[idx[j]];
      }
      terms[p] = w * f(x);
      advance(idx, lo_order);
    }
    const double q_lo = volume * pairwise_sum(terms);

    cell.value = q_hi;
    cell.error = std::abs(q_hi - q_lo);
    double best = -1.0;
    for (int j = 0; j < dim_; ++j) {
      double indicator = 0.0;
      for (int r = 0; r < 2; ++r) {
        double coef = 0.0;
        for (int i = 0; i < order_; ++i) coef += hi_weights_[i] * marginal[j][i] * top_[r][i];
        indicator += std::abs(coef);
      }
      indicator *= width[j];
      if (indicator > best) {
        best = indicator;
        cell.split_dim = j;
      }
    }
  }

 private:
  static long ipow(long base, int e) {
    long r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  }
  static void advance(std::vector<int>& idx, int order) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (++idx[j] < order) return;
      idx[j] = 0;
    }
  }

  int dim_;
  int order_;
  Vector hi_nodes_, hi_weights_, lo_nodes_, lo_weights_;
  std::vector<Vector> top_;
};

}  // namespace

CubatureResult integrate_unit_box(int dim, const BoxIntegrand& f, const CubatureOptions& opts) {
  require(dim >= 0, "dimension must be nonnegative");
  require(opts.order >= 3, "cubature order must be at least 3");
  CubatureResult result;
  if (dim == 0) {
    result.value = f(std::span<const double>());
    result.evaluations = 1;
    result.cells = 1;
    result.converged = true;
    return result;
  }
  const TensorRule rule(dim, opts.order);
  const int splits = opts.initial_splits > 0 ? opts.initial_splits : (dim <= 3 ? 2 : 1);
  const int threads = std::max(1, opts.threads);

  std::vector<Cell> cells;
  {
    long count = 1;
    for (int j = 0; j < dim; ++j) count *= splits;
    cells.resize(count);
    for (long c = 0; c < count; ++c) {
      long rem = c;
      cells[c].lo.resize(dim);
      cells[c].hi.resize(dim);
      for (int j = 0; j < dim; ++j) {
        const long k = rem % splits;
        rem /= splits;
        cells[c].lo[j] = static_cast<double>(k) / splits;
        cells[c].hi[j] = static_cast<double>(k + 1) / splits;
      }
    }
    parallel_for(cells.size(), threads, [&](std::size_t i) { rule.apply(cells[i], f); });
    result.evaluations = count * rule.evaluations_per_cell();
  }

  std::vector<double> values, errors;
  auto totals = [&]() {
    values.resize(cells.size());
    errors.resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      values[i] = cells[i].value;
      errors[i] = cells[i].error;
    }
    result.value = pairwise_sum(values);
    result.error = pairwise_sum(errors);
  };
  totals();

  std::vector<std::size_t> order;
  while (true) {
    const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(result.value));
    if (result.error <= target) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= opts.max_evaluations) break;

    order.resize(cells.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min<std::size_t>(opts.batch, cells.size());
    std::partial_sort(order.begin(), order.begin() + take, order.end(), [&](std::size_t a, std::size_t b) {
      if (cells[a].error != cells[b].error) return cells[a].error > cells[b].error;
      return a < b;
    });
    std::sort(order.begin(), order.begin() + take);

    std::vector<std::size_t> touched;
    touched.reserve(2 * take);
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t i = order[k];
      Cell right = cells[i];
      const int j = cells[i].split_dim;
      const double mid = 0.5 * (cells[i].lo[j] + cells[i].hi[j]);
      cells[i].hi[j] = mid;
      right.lo[j] = mid;
      touched.push_back(i);
      touched.push_back(cells.size());
      cells.push_back(std::move(right));
    }
    std::vector<double> parent(take);
    for (std::size_t k = 0; k < take; ++k) parent[k] = cells[touched[2 * k]].value;
    parallel_for(touched.size(), threads, [&](std::size_t k) { rule.apply(cells[touched[k]], f); });
    // The two-level difference is a direct measurement of the parent's
    // error; the children keep half of it each so a lucky agreement of the
    // embedded rules on a singular cell cannot end refinement early.
    for (std::size_t k = 0; k < take; ++k) {
      Cell& l = cells[touched[2 * k]];
      Cell& r = cells[touched[2 * k + 1]];
      const double d = 0.5 * std::abs(parent[k] - l.value - r.value);
      l.error = std::max(l.error, d);
      r.error = std::max(r.error, d);
    }
    result.evaluations += static_cast<long>(touched.size()) * rule.evaluations_per_cell();
    totals();
  }
  result.cells = static_cast<long>(cells.size());
  return result;
}

}  // namespace conepos
