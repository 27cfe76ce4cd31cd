#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conepos/null_dist.hpp"
#include "conepos/projection.hpp"
#include "conepos/tube_weights.hpp"

namespace conepos {

/// Estimate c_hat ~ N(c, sigma^2 Sigma0) with either a known sigma^2 or an
/// independent estimate sigma2_hat on nu degrees of freedom.
struct SufficientStats {
  Vector c_hat;
  Matrix Sigma0;
  std::optional<double> sigma2;
  std::optional<double> sigma2_hat;
  int nu = 0;

  static SufficientStats known(Vector c_hat, Matrix Sigma0, double sigma2 = 1.0);
  static SufficientStats estimated(Vector c_hat, Matrix Sigma0, double sigma2_hat, int nu);

  bool known_variance() const { return sigma2.has_value(); }
  int degree() const { return static_cast<int>(c_hat.size()) - 1; }
  /// sigma^2 Sigma0, or sigma2_hat Sigma0 when the variance is estimated.
  Matrix covariance() const;
  void validate() const;
};

enum class TestMode { KnownVariance, UnknownVariance };

std::string to_string(TestMode mode);

struct TestReport {
  TestMode mode = TestMode::KnownVariance;
  int nu = 0;
  /// Always in the covariance() metric.
  double lambda01 = 0.0;
  double lambda12 = 0.0;
  /// Unknown-variance statistics; NaN in known-variance mode.
  double beta01 = 0.0;
  double beta12 = 0.0;
  WeightVector weights;
  /// Point p-values. With bounds-only weights these are the conservative
  /// (upper) ends of the intervals below.
  double p01 = 1.0;
  double p12 = 1.0;
  std::optional<std::pair<double, double>> p01_interval;
  std::optional<std::pair<double, double>> p12_interval;
  ProjectionResult projection;
};

struct InferenceOptions {
  CubatureOptions cubature;
  ProjectionOptions projection;
};

/// Likelihood ratio tests of H0: c = 0 against H1: f >= 0 on T, and of H1
/// against the unrestricted alternative.
TestReport lrt(const SufficientStats& stats, const Domain& domain, const InferenceOptions& opts = {});
TestReport lrt(const SufficientStats& stats, const Domain& domain, const WeightVector& weights,
               const InferenceOptions& opts = {});

enum class MeasureFamily { Pointwise, Integral, Custom };

std::string to_string(MeasureFamily family);

/// A nonnegative measure given by atoms (t_j, mass_j).
using AtomicMeasure = std::vector<std::pair<double, double>>;

struct BandSpec {
  double alpha = 0.05;
  MeasureFamily family = MeasureFamily::Pointwise;
  /// Pointwise: evaluation points. Integral: upper limits t of the
  /// Lebesgue measure on [t0, t].
  std::vector<double> grid;
  double t0 = 0.0;
  std::vector<AtomicMeasure> measures;
  VarianceScaling scaling = VarianceScaling::S;
};

struct BandSample {
  /// Grid point; for custom measures the index of the measure.
  double t = 0.0;
  /// mu[f_chat].
  double estimate = 0.0;
  /// mu[f_chat] - sqrt(q) ||mu[psi]||.
  double lower = 0.0;
  /// ||mu[psi]|| in the covariance metric.
  double scale = 0.0;
};

struct Band {
  std::vector<BandSample> samples;
  /// The lambda12 quantile in use (lambda'_12 for estimated variance).
  double critical = 0.0;
  bool unknown_variance = false;
};

/// Simultaneous lower bounds on mu[f_c] for all measures of the family.
Band band(const SufficientStats& stats, const Domain& domain, const BandSpec& spec, const WeightVector& weights);

/// Critical value of the band: lambda12 quantile, or lambda'12 for
/// estimated variance.
double band_critical_value(const SufficientStats& stats, const BandSpec& spec, const WeightVector& weights);

/// mu[psi_n] for one member of the family.
Vector measure_moments(int n, const BandSpec& spec, std::size_t index);

struct McOptions {
  long draws = 100000;
  std::uint64_t seed = 20240601;
  int threads = 0;
  ProjectionOptions projection;
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Null draws c_hat ~ N(0, Sigma) and their LRT statistics.
class McNullSample {
 public:
  McNullSample(std::uint64_t seed, std::vector<double> lambda01, std::vector<double> lambda12, long failures);

  long size() const { return static_cast<long>(lambda01_.size()); }
  long failures() const { return failures_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& lambda01() const { return lambda01_; }
  const std::vector<double>& lambda12() const { return lambda12_; }

  /// Empirical P(lambda01 >= a, lambda12 >= b) with its binomial standard
  /// error. -inf disables a coordinate.
  Estimate joint_survival(double a, double b) const;
  /// Empirical P(beta01 >= a, beta12 >= b) with nu s ~ chi2_nu drawn from
  /// the same seed.
  Estimate beta_joint_survival(double a, double b, int nu) const;
  /// P(lambda01 = 0), up to the solver's roundoff.
  Estimate point_mass_zero(double rel_tol = 1e-9) const;
  /// Variance ratios s ~ chi2_nu / nu for each draw.
  std::vector<double> variance_ratios(int nu) const;

 private:
  std::uint64_t seed_;
  std::vector<double> lambda01_;
  std::vector<double> lambda12_;
  long failures_;
};

McNullSample mc_null_oracle(const Domain& domain, const MetricPair& metric, const McOptions& opts = {});

/// Draw of s ~ chi2_nu / nu for draw index `index`.
double variance_ratio_draw(std::uint64_t seed, std::uint64_t index, int nu);

/// dist(x + c, K) <= dist(x, K) + 1e-8 max(1, ||x|| + ||c||) for c in K.
bool monotonicity_probe(const Vector& c, const Vector& x, const MetricPair& metric, const Domain& domain);

}  // namespace conepos
