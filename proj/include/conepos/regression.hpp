#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conepos/inference.hpp"

namespace conepos {

struct Observation {
  double t = 0.0;
  double y = 0.0;
};

struct GroupedObservation {
  int group = 0;
  std::string subject;
  double t = 0.0;
  double y = 0.0;
};

/// Least squares fit of a degree-n polynomial. Returns c_hat, Sigma0 =
/// (F'F)^{-1}, the residual mean square and nu = N - n - 1.
SufficientStats ols_fit(const std::vector<Observation>& data, int n);

/// Statistics of c1 - c0 for independent fits.
SufficientStats two_sample_difference(const SufficientStats& stats0, const SufficientStats& stats1);

/// Statistics of the derivative coefficients L c_hat, degree n - 1.
SufficientStats derivative_transform(const SufficientStats& stats);

/// tau {(1 - rho) I + rho J}.
struct IntraclassParams {
  double tau = 1.0;
  double rho = 0.0;
  Matrix matrix(int p) const;
};

/// Maximum likelihood intraclass parameters for zero-mean residual rows
/// (one row per subject). Kept strictly inside the PSD region.
IntraclassParams fit_intraclass_covariance(const Matrix& residuals);

struct IntraclassModel {
  /// Sorted distinct time points, after centering.
  std::vector<double> timepoints;
  double center = 0.0;
  Vector mu;
  Vector c;
  IntraclassParams cov0;
  IntraclassParams cov1;
  int n0 = 0;
  int n1 = 0;
  std::vector<double> loglik_trace;
  int iterations = 0;
  /// c_hat with Sigma = (F' V^{-1} F)^{-1} treated as known.
  SufficientStats stats;
};

struct IntraclassOptions {
  /// Subtracted from t; the midpoint of the design when empty.
  std::optional<double> center;
  int max_iter = 500;
  double tol = 1e-10;
};

/// Two-group growth curve fit: group 0 has mean mu_t, group 1 has mean
/// mu_t + f(t; c). Block ascent between GLS for (mu, c) and closed-form
/// intraclass updates per group.
IntraclassModel intraclass_fit(const std::vector<GroupedObservation>& data, int n,
                               const IntraclassOptions& opts = {});

/// CSV with header t,y.
std::vector<Observation> read_observations_csv(const std::string& path);
/// CSV with header group,subject,t,y.
std::vector<GroupedObservation> read_grouped_csv(const std::string& path);
/// Header of a CSV file, lower-cased and without spaces.
std::vector<std::string> read_csv_header(const std::string& path);

}  // namespace conepos
