#include "conepos/projection.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/tools/minima.hpp>

#include "conepos/error.hpp"

namespace conepos {

namespace {

std::vector<std::pair<int, int>> svec_entries(int size) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < size; ++i) {
    for (int j = i; j < size; ++j) out.emplace_back(i, j);
  }
  return out;
}

// Coefficients of weight(t) t^k padded to degree n.
Vector shifted(const Vector& weight, int k, int n) {
  Vector out = Vector::Zero(n + 1);
  for (Eigen::Index i = 0; i < weight.size(); ++i) {
    if (i + k <= n) out[i + k] += weight[i];
  }
  return out;
}

Matrix from_svec(const Vector& q, Eigen::Index offset, const std::vector<std::pair<int, int>>& entries, int size) {
  Matrix m(size, size);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto [i, j] = entries[e];
    m(i, j) = m(j, i) = q[offset + static_cast<Eigen::Index>(e)];
  }
  return m;
}

void add_svec(Vector& q, Eigen::Index offset, const std::vector<std::pair<int, int>>& entries, const Matrix& m) {
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto [i, j] = entries[e];
    q[offset + static_cast<Eigen::Index>(e)] = m(i, j);
  }
}

// Gradient and Hessian of -logdet(Q) in svec coordinates, given W = Q^{-1}.
void logdet_derivatives(const Matrix& w, const std::vector<std::pair<int, int>>& entries, Eigen::Index offset,
                        Vector& grad, Matrix& hess) {
  const auto count = static_cast<Eigen::Index>(entries.size());
  for (Eigen::Index a = 0; a < count; ++a) {
    const auto [i, j] = entries[a];
    grad[offset + a] -= (i == j) ? w(i, i) : 2.0 * w(i, j);
    for (Eigen::Index b = a; b < count; ++b) {
      const auto [k, l] = entries[b];
      // tr(W E_a W E_b) with E_a = e_i e_j^T (+ e_j e_i^T off the diagonal).
      double h = w(l, i) * w(j, k);
      if (i != j) h += w(l, j) * w(i, k);
      if (k != l) h += w(k, i) * w(j, l);
      if (i != j && k != l) h += w(k, j) * w(i, l);
      hess(offset + a, offset + b) += h;
      if (b != a) hess(offset + b, offset + a) += h;
    }
  }
}

}  // namespace

Vector ml_coeffs(const MLParam& param, const Domain& domain) {
  require(param.Q1.rows() == param.Q1.cols() && param.Q2.rows() == param.Q2.cols(), "blocks must be square");
  const int n = static_cast<int>(param.Q1.rows() + param.Q2.rows()) - 1;
  require(n >= 1, "blocks imply a degree below 1");
  const MarkovLukacsBlocks blocks = markov_lukacs_blocks(n, domain);
  require(param.Q1.rows() == blocks.size1 && param.Q2.rows() == blocks.size2,
          "block sizes do not match the domain and degree");
  Vector out = Vector::Zero(n + 1);
  for (int i = 0; i < blocks.size1; ++i) {
    for (int j = 0; j < blocks.size1; ++j) out += param.Q1(i, j) * shifted(blocks.weight1, i + j, n);
  }
  for (int i = 0; i < blocks.size2; ++i) {
    for (int j = 0; j < blocks.size2; ++j) out += param.Q2(i, j) * shifted(blocks.weight2, i + j, n);
  }
  return out;
}

bool KktReport::ok(double primal_tol, double comp_tol, double dual_tol) const {
  return primal_feasibility <= primal_tol && complementarity <= comp_tol && dual_feasibility >= -dual_tol;
}

Projector::Projector(MetricPair metric, Domain domain, ProjectionOptions opts)
    : metric_(std::move(metric)), domain_(domain), opts_(opts), n_(metric_.size() - 1) {
  require(n_ >= 1, "projection needs degree >= 1");
  require(opts_.tol > 0.0 && opts_.max_iter > 0 && opts_.shrink > 0.0 && opts_.shrink < 1.0,
          "invalid projection options");
  blocks_ = markov_lukacs_blocks(n_, domain_);
  entries1_ = svec_entries(blocks_.size1);
  entries2_ = svec_entries(blocks_.size2);
  const auto n1 = static_cast<Eigen::Index>(entries1_.size());
  const auto n2 = static_cast<Eigen::Index>(entries2_.size());
  A_.resize(n_ + 1, n1 + n2);
  for (Eigen::Index e = 0; e < n1; ++e) {
    const auto [i, j] = entries1_[e];
    A_.col(e) = (i == j ? 1.0 : 2.0) * shifted(blocks_.weight1, i + j, n_);
  }
  for (Eigen::Index e = 0; e < n2; ++e) {
    const auto [i, j] = entries2_[e];
    A_.col(n1 + e) = (i == j ? 1.0 : 2.0) * shifted(blocks_.weight2, i + j, n_);
  }
  AtGA2_ = 2.0 * A_.transpose() * metric_.primal() * A_;
  // ||e(I, I)||_G sets the size of the starting point relative to c_hat in
  // a way that does not depend on the scale of G.
  Vector q_identity = Vector::Zero(n1 + n2);
  for (Eigen::Index e = 0; e < n1; ++e) q_identity[e] = entries1_[e].first == entries1_[e].second ? 1.0 : 0.0;
  for (Eigen::Index e = 0; e < n2; ++e) q_identity[n1 + e] = entries2_[e].first == entries2_[e].second ? 1.0 : 0.0;
  unit_norm_ = metric_.primal_norm(A_ * q_identity);
}

ProjectionResult Projector::project(const Vector& c_hat) const {
  require(c_hat.size() == n_ + 1, "coefficient vector does not match the metric");
  require(c_hat.allFinite(), "coefficients must be finite");
  ProjectionResult out;
  out.c_hat = c_hat;
  const double norm2 = metric_.primal_norm2(c_hat);
  const Polynomial p(c_hat, domain_);
  if (norm2 == 0.0 || global_min(p).value >= 0.0) {
    out.c_K = c_hat;
    out.path = "interior";
  } else if (member_Kstar(-(metric_.primal() * c_hat), domain_)) {
    out.c_K = Vector::Zero(n_ + 1);
    out.path = "polar";
  } else {
    barrier(c_hat, out);
    out.path = "barrier";
  }
  out.residual = c_hat - out.c_K;
  out.lambda01 = metric_.primal_norm2(out.c_K);
  out.lambda12 = norm2 - out.lambda01;
  out.kkt = kkt_check(out, metric_, domain_);
  if (out.path == "barrier") polish(out);
  if (out.kkt.ok()) out.converged = true;
  return out;
}

namespace {

// How far a certificate is from the default tolerances; below 1 means ok().
double merit(const KktReport& k) {
  return std::max({k.primal_feasibility / 1e-9, k.complementarity / 1e-7, std::max(0.0, -k.dual_feasibility) / 1e-9});
}

}  // namespace

// Degenerate optima (no strict complementarity) leave the barrier point a
// square root of mu away from the face. Guess the face from the touching
// points and the trailing coefficients, project onto it exactly, let the
// interior touching points slide to the best position, and keep the result
// if it certifies better than the barrier point.
void Projector::polish(ProjectionResult& out) const {
  double best = merit(out.kkt);
  if (best <= 1e-2) return;
  const Eigen::LLT<Matrix> chol(metric_.primal());
  const double reach = 1e3 * (1.0 + std::max(std::isfinite(domain_.lower()) ? std::abs(domain_.lower()) : 0.0,
                                              std::isfinite(domain_.upper()) ? std::abs(domain_.upper()) : 0.0));
  std::vector<int> drops{0};
  if (domain_.kind() == DomainKind::HalfLine)
    for (int k = 1; k <= n_; ++k) drops.push_back(k);
  if (domain_.kind() == DomainKind::FullLine)
    for (int k = 2; k <= n_; k += 2) drops.push_back(k);

  // exact projection onto the face of polynomials W(t) q(t), where W has a
  // double root at interior touching points, a simple one at endpoints, and
  // q loses its top `drop` coefficients. Working with q keeps the roots
  // exact, which matters once they sit far from the origin.
  auto face = [&](int drop, const std::vector<double>& points, Vector& c) {
    Vector w = Vector::Ones(1);
    for (double t : points) {
      Vector root(2);
      root << -t, 1.0;
      w = poly_mul(w, root);
      if (domain_.contains_interior(t)) w = poly_mul(w, root);
    }
    const Eigen::Index free = n_ + 1 - drop - (w.size() - 1);
    if (free < 1 || free == n_ + 1) return false;
    Matrix V = Matrix::Zero(n_ + 1, free);
    for (Eigen::Index k = 0; k < free; ++k) {
      V.col(k).segment(k, w.size()) = w;
      V.col(k).normalize();
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(chol.matrixU() * V);
    if (qr.rank() < free) return false;
    c = V * qr.solve(chol.matrixU() * out.c_hat);
    return c.allFinite();
  };
  auto certify = [&](const Vector& c) {
    ProjectionResult cand = out;
    cand.c_K = c;
    cand.residual = out.c_hat - c;
    cand.lambda01 = metric_.primal_norm2(c);
    cand.lambda12 = metric_.primal_norm2(out.c_hat) - cand.lambda01;
    cand.kkt = kkt_check(cand, metric_, domain_);
    return cand;
  };

  // the certificate's touching points plus near misses, which an unfinished
  // barrier run can leave well above zero
  std::vector<double> pool = out.kkt.touching_points;
  const double cnorm = out.c_K.norm();
  std::vector<double> near = critical_points(out.c_K, domain_);
  if (std::isfinite(domain_.lower())) near.push_back(domain_.lower());
  if (std::isfinite(domain_.upper())) near.push_back(domain_.upper());
  for (double t : near) {
    if (std::abs(eval(out.c_K, t)) > 1e-3 * cnorm * basis(n_, t).norm()) continue;
    bool seen = false;
    for (double s : pool) seen = seen || std::abs(s - t) <= 1e-6 * (1.0 + std::abs(t));
    if (!seen) pool.push_back(t);
  }
  // a double root drifting to infinity shows up only in the leading terms
  if (!std::isfinite(domain_.upper()) && n_ >= 2 && out.c_K[n_] > 0.0 && out.c_K[n_ - 1] != 0.0) {
    const double far = -2.0 * out.c_K[n_ - 2] / out.c_K[n_ - 1];
    if (std::isfinite(far) && std::abs(far) > reach && domain_.contains_interior(far)) pool.push_back(far);
  }
  if (pool.size() > 6) pool.resize(6);
  for (int drop : drops) {
    for (unsigned mask = 0; mask < (1u << pool.size()); ++mask) {
      std::vector<double> points;
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (mask & (1u << i)) points.push_back(pool[i]);
      Vector c;
      if (!face(drop, points, c)) continue;
      ProjectionResult cand = certify(c);
      if (merit(cand.kkt) > 1e-2) {
        // the barrier only locates roots to about sqrt(mu); slide them
        bool moved = false;
        for (int round = 0; round < 3; ++round) {
          for (std::size_t i = 0; i < points.size(); ++i) {
            if (!domain_.contains_interior(points[i])) continue;
            const double width = (std::abs(points[i]) > reach ? 0.5 : 0.05) * (1.0 + std::abs(points[i]));
            const double lo = std::max(points[i] - width, domain_.lower() + 1e-12 * width);
            const double hi = std::min(points[i] + width, domain_.upper() - 1e-12 * width);
            auto dist = [&](double t) {
              std::vector<double> trial = points;
              trial[i] = t;
              Vector ct;
              return face(drop, trial, ct) ? metric_.primal_norm2(out.c_hat - ct) : kInf;
            };
            points[i] = boost::math::tools::brent_find_minima(dist, lo, hi, 40).first;
            moved = true;
          }
        }
        if (moved && face(drop, points, c)) cand = certify(c);
      }
      const double m = merit(cand.kkt);
      if (cand.kkt.ok() && m < best) {
        best = m;
        out = std::move(cand);
      }
    }
  }
}

void Projector::barrier(const Vector& c_hat, ProjectionResult& out) const {
  const Matrix& g = metric_.primal();
  const auto n1 = static_cast<Eigen::Index>(entries1_.size());
  const auto dim = A_.cols();
  const int s1 = blocks_.size1;
  const int s2 = blocks_.size2;
  const double norm2 = metric_.primal_norm2(c_hat);
  const double eps = 0.1 * std::sqrt(norm2) / ((n_ + 1) * unit_norm_);

  Vector q = Vector::Zero(dim);
  add_svec(q, 0, entries1_, eps * Matrix::Identity(s1, s1));
  add_svec(q, n1, entries2_, eps * Matrix::Identity(s2, s2));

  struct Eval {
    bool feasible = false;
    double value = 0.0;
    Matrix w1, w2;
  };
  auto evaluate = [&](const Vector& x, double mu) {
    Eval e;
    const Matrix q1 = from_svec(x, 0, entries1_, s1);
    const Matrix q2 = from_svec(x, n1, entries2_, s2);
    Eigen::LLT<Matrix> l1(q1), l2(q2);
    if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) return e;
    double logdet = 0.0;
    for (int i = 0; i < s1; ++i) logdet += 2.0 * std::log(l1.matrixL()(i, i));
    for (int i = 0; i < s2; ++i) logdet += 2.0 * std::log(l2.matrixL()(i, i));
    if (!std::isfinite(logdet)) return e;
    const Vector r = c_hat - A_ * x;
    e.feasible = true;
    e.value = r.dot(g * r) - mu * logdet;
    e.w1 = l1.solve(Matrix::Identity(s1, s1));
    e.w2 = l2.solve(Matrix::Identity(s2, s2));
    return e;
  };

  double mu = norm2;
  const double mu_target = opts_.tol * norm2 / (s1 + s2);
  // Past the gap target the path is followed further until c_K settles at
  // the coefficient level; an ill-conditioned G can hide large coefficient
  // errors behind a small relative gap.
  const double mu_floor = 1e-14 * norm2 / (s1 + s2);
  const double coef_tol = opts_.coef_tol * c_hat.norm();
  Vector c_prev = A_ * q;
  bool settled = false;
  int iterations = 0;
  bool budget_left = true;
  Eval cur = evaluate(q, mu);
  if (!cur.feasible) throw NumericalError("barrier start is not positive definite");

  while (budget_left) {
    // Centering: damped Newton on the barrier objective for this mu.
    for (;;) {
      if (iterations >= opts_.max_iter) {
        budget_left = false;
        break;
      }
      const Vector r = c_hat - A_ * q;
      Vector grad = -2.0 * (A_.transpose() * (g * r));
      Matrix hess = Matrix::Zero(dim, dim);
      Vector bgrad = Vector::Zero(dim);
      logdet_derivatives(cur.w1, entries1_, 0, bgrad, hess);
      logdet_derivatives(cur.w2, entries2_, n1, bgrad, hess);
      grad += mu * bgrad;
      hess = AtGA2_ + mu * hess;
      const double floor = 1e-12 * hess.diagonal().cwiseAbs().maxCoeff();
      hess.diagonal().array() += floor;
      const Vector step = hess.ldlt().solve(-grad);
      const double decrement = -grad.dot(step);
      ++iterations;
      if (!(decrement >= 0.0) || !step.allFinite()) throw NumericalError("barrier Newton system is singular");
      // Newton decrement of the self-concordant function objective / mu,
      // with a floor at the roundoff level of the objective itself.
      if (decrement <= 1e-12 * mu || decrement <= 1e-15 * norm2) break;
      double t = 1.0;
      Eval next;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        next = evaluate(q + t * step, mu);
        if (next.feasible && next.value <= cur.value - 1e-4 * t * decrement) break;
        next.feasible = false;
      }
      if (!next.feasible) break;  // no progress possible at this mu
      q += t * step;
      cur = std::move(next);
      if (t < 1e-6) break;  // stalled at roundoff
    }
    const Vector c_now = A_ * q;
    const double moved = (c_now - c_prev).norm();
    c_prev = c_now;
    if (mu <= mu_target && (moved <= coef_tol || mu <= mu_floor)) {
      settled = true;
      break;
    }
    mu = mu <= mu_target ? std::max(mu * opts_.shrink, mu_floor) : std::max(mu * opts_.shrink, mu_target);
    cur = evaluate(q, mu);
  }

  out.param.Q1 = from_svec(q, 0, entries1_, s1);
  out.param.Q2 = from_svec(q, n1, entries2_, s2);
  out.c_K = A_ * q;
  out.iterations = iterations;
  out.duality_gap = mu * (s1 + s2) / norm2;
  out.converged = settled || mu <= mu_target;
}

ProjectionResult project(const Vector& c_hat, const MetricPair& metric, const Domain& domain,
                         const ProjectionOptions& opts) {
  return Projector(metric, domain, opts).project(c_hat);
}

KktReport kkt_check(const ProjectionResult& result, const MetricPair& metric, const Domain& domain) {
  KktReport report;
  const double norm2 = metric.primal_norm2(result.c_hat);
  const double scale = std::max(result.c_hat.norm(), 1e-300);
  const Minimum m = global_min(Polynomial(result.c_K, domain), default_positivity_tol(result.c_K));
  report.primal_feasibility = std::isfinite(m.value) ? std::max(0.0, -m.value) / scale : kInf;
  report.complementarity =
      norm2 > 0.0 ? std::abs(metric.primal_inner(result.residual, result.c_K)) / norm2 : 0.0;

  const Vector y = -(metric.primal() * result.residual);
  const int n = static_cast<int>(y.size()) - 1;
  const MarkovLukacsBlocks blocks = markov_lukacs_blocks(n, domain);
  const Matrix h1 = localized_hankel(y, blocks.weight1, blocks.size1);
  const Matrix h2 = localized_hankel(y, blocks.weight2, blocks.size2);
  const double trace = std::abs(h1.trace()) + std::abs(h2.trace());
  if (trace > 0.0) {
    double lo = kInf;
    for (const Matrix* h : {&h1, &h2}) {
      if (h->rows() == 0) continue;
      lo = std::min(lo, Eigen::SelfAdjointEigenSolver<Matrix>(*h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff());
    }
    report.dual_feasibility = lo / trace;
  }

  const double cnorm = result.c_K.norm();
  if (cnorm > 0.0) {
    std::vector<double> candidates = critical_points(result.c_K, domain);
    if (std::isfinite(domain.lower())) candidates.push_back(domain.lower());
    if (std::isfinite(domain.upper())) candidates.push_back(domain.upper());
    std::sort(candidates.begin(), candidates.end());
    for (double t : candidates) {
      const double scale_t = basis(n, t).norm();
      if (std::abs(eval(result.c_K, t)) <= 1e-6 * cnorm * scale_t) report.touching_points.push_back(t);
    }
  }
  return report;
}

double distance_to_K(const Vector& x, const Projector& projector) {
  const ProjectionResult r = projector.project(x);
  return std::sqrt(std::max(0.0, projector.metric().primal_norm2(r.residual)));
}

}  // namespace conepos
