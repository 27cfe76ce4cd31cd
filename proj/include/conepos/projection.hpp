#pragma once

#include <string>
#include <vector>

#include "conepos/cone_geometry.hpp"
#include "conepos/metric.hpp"

namespace conepos {

/// The two PSD blocks of the Markov-Lukacs representation.
struct MLParam {
  Matrix Q1;
  Matrix Q2;
};

/// Coefficients of w1(t) psi^T Q1 psi + w2(t) psi^T Q2 psi. The degree is
/// size(Q1) + size(Q2) - 1.
Vector ml_coeffs(const MLParam& param, const Domain& domain);

struct ProjectionOptions {
  /// Relative duality-gap target: mu (s1 + s2) <= tol ||c_hat||_G^2.
  double tol = 1e-9;
  /// After the gap target is met, stages continue until c_K moves less than
  /// coef_tol * ||c_hat|| between stages.
  double coef_tol = 1e-9;
  /// Newton step budget across all barrier stages.
  int max_iter = 200;
  /// Barrier parameter reduction per stage.
  double shrink = 0.2;
};

struct KktReport {
  /// max(0, -min_T f(t; c_K)) / ||c_hat||.
  double primal_feasibility = 0.0;
  /// |<r, c_K>_G| / ||c_hat||_G^2.
  double complementarity = 0.0;
  /// Smallest eigenvalue of the localized Hankel matrices of -G r, relative
  /// to their traces. Nonnegative means dual feasible.
  double dual_feasibility = 0.0;
  /// Points of T where f(t; c_K) touches zero (the active face).
  std::vector<double> touching_points;

  bool ok(double primal_tol = 1e-9, double comp_tol = 1e-7, double dual_tol = 1e-9) const;
};

struct ProjectionResult {
  Vector c_hat;
  Vector c_K;
  /// c_hat - c_K.
  Vector residual;
  /// ||c_K||_G^2 and ||c_hat||_G^2 - ||c_K||_G^2.
  double lambda01 = 0.0;
  double lambda12 = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  /// Gap target met, or the step budget ran out on a point whose KKT
  /// certificate passes anyway.
  bool converged = true;
  /// "interior" (c_hat in K), "polar" (-G c_hat in K*) or "barrier".
  std::string path;
  MLParam param;
  KktReport kkt;
};

/// Projection onto K under <.,.>_G for a fixed metric and domain. Caches the
/// linear map of the Markov-Lukacs parameterization, so repeated calls are
/// cheap. Thread-safe for concurrent project() calls.
class Projector {
 public:
  Projector(MetricPair metric, Domain domain, ProjectionOptions opts = {});

  ProjectionResult project(const Vector& c_hat) const;

  int degree() const { return n_; }
  const MetricPair& metric() const { return metric_; }
  const Domain& domain() const { return domain_; }

 private:
  MetricPair metric_;
  Domain domain_;
  ProjectionOptions opts_;
  int n_;
  MarkovLukacsBlocks blocks_;
  // Entries (i, j), i <= j, of each block in svec order.
  std::vector<std::pair<int, int>> entries1_, entries2_;
  Matrix A_;
  Matrix AtGA2_;
  double unit_norm_;

  void barrier(const Vector& c_hat, ProjectionResult& out) const;
  void polish(ProjectionResult& out) const;
};

ProjectionResult project(const Vector& c_hat, const MetricPair& metric, const Domain& domain,
                         const ProjectionOptions& opts = {});

/// Recomputes the optimality conditions of a projection from scratch.
KktReport kkt_check(const ProjectionResult& result, const MetricPair& metric, const Domain& domain);

/// ||x - Pi(x)||_G.
double distance_to_K(const Vector& x, const Projector& projector);

}  // namespace conepos
