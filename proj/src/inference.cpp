#include "conepos/inference.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/gamma.hpp>

#include "conepos/error.hpp"
#include "conepos/parallel.hpp"
#include "conepos/rng.hpp"

namespace conepos {

SufficientStats SufficientStats::known(Vector c_hat, Matrix Sigma0, double sigma2) {
  SufficientStats s;
  s.c_hat = std::move(c_hat);
  s.Sigma0 = std::move(Sigma0);
  s.sigma2 = sigma2;
  s.validate();
  return s;
}

SufficientStats SufficientStats::estimated(Vector c_hat, Matrix Sigma0, double sigma2_hat, int nu) {
  SufficientStats s;
  s.c_hat = std::move(c_hat);
  s.Sigma0 = std::move(Sigma0);
  s.sigma2_hat = sigma2_hat;
  s.nu = nu;
  s.validate();
  return s;
}

void SufficientStats::validate() const {
  require(c_hat.size() >= 2, "c_hat needs degree >= 1");
  require(Sigma0.rows() == c_hat.size() && Sigma0.cols() == c_hat.size(), "Sigma0 does not match c_hat");
  require(Sigma0.allFinite() && (Sigma0 - Sigma0.transpose()).cwiseAbs().maxCoeff() <=
                                    1e-10 * Sigma0.cwiseAbs().maxCoeff(),
          "Sigma0 must be symmetric");
  require(Eigen::LLT<Matrix>(Sigma0).info() == Eigen::Success, "Sigma0 must be positive definite");
  require(sigma2.has_value() != sigma2_hat.has_value(), "give exactly one of sigma2 and sigma2_hat");
  if (sigma2) require(*sigma2 > 0.0, "sigma2 must be positive");
  if (sigma2_hat) {
    require(*sigma2_hat >= 0.0, "sigma2_hat must be nonnegative");
    require(nu >= 1, "nu must be at least 1 with an estimated variance");
  }
}

Matrix SufficientStats::covariance() const {
  validate();
  require(sigma2.value_or(0.0) > 0.0 || sigma2_hat.value_or(0.0) > 0.0,
          "the variance estimate is zero, so the covariance is singular");
  return (sigma2 ? *sigma2 : *sigma2_hat) * Sigma0;
}

std::string to_string(TestMode mode) {
  return mode == TestMode::KnownVariance ? "known_variance" : "unknown_variance";
}

std::string to_string(MeasureFamily family) {
  switch (family) {
    case MeasureFamily::Pointwise: return "pointwise";
    case MeasureFamily::Integral: return "integral";
    case MeasureFamily::Custom: return "custom";
  }
  return "unknown";
}

TestReport lrt(const SufficientStats& stats, const Domain& domain, const InferenceOptions& opts) {
  stats.validate();
  const MetricPair metric = MetricPair::from_covariance(stats.covariance());
  return lrt(stats, domain, compute_weights(stats.degree(), domain, metric, opts.cubature), opts);
}

TestReport lrt(const SufficientStats& stats, const Domain& domain, const WeightVector& weights,
               const InferenceOptions& opts) {
  stats.validate();
  const int n = stats.degree();
  require_degree_fits(n, domain);
  require(weights.degree() == n, "weights do not match the degree");
  const MetricPair metric = MetricPair::from_covariance(stats.covariance());
  TestReport report;
  report.weights = weights;
  report.projection = project(stats.c_hat, metric, domain, opts.projection);
  if (!report.projection.converged) throw NumericalError("projection did not converge");
  report.lambda01 = report.projection.lambda01;
  report.lambda12 = std::max(0.0, report.projection.lambda12);
  const bool exact = weights.status == WeightStatus::Exact;
  if (stats.known_variance()) {
    report.mode = TestMode::KnownVariance;
    report.beta01 = report.beta12 = std::numeric_limits<double>::quiet_NaN();
    if (exact) {
      report.p01 = pvalue_lambda01(report.lambda01, weights);
      report.p12 = pvalue_lambda12(report.lambda12, weights);
    } else {
      report.p01_interval = survival_bounds(report.lambda01, *weights.bounds, Statistic::Lambda01);
      report.p12_interval = survival_bounds(report.lambda12, *weights.bounds, Statistic::Lambda12);
    }
  } else {
    report.mode = TestMode::UnknownVariance;
    report.nu = stats.nu;
    // Norms in the estimated metric, as the statistics are defined.
    const double nu = stats.nu;
    report.beta01 = report.lambda01 / (report.lambda01 + report.lambda12 + nu);
    report.beta12 = report.lambda12 / (report.lambda12 + nu);
    if (exact) {
      report.p01 = pvalue_beta01(report.beta01, weights, stats.nu);
      report.p12 = pvalue_beta12(report.beta12, weights, stats.nu);
    } else {
      report.p01_interval = survival_bounds_beta(report.beta01, *weights.bounds, Statistic::Lambda01, stats.nu);
      report.p12_interval = survival_bounds_beta(report.beta12, *weights.bounds, Statistic::Lambda12, stats.nu);
    }
  }
  if (report.p01_interval) report.p01 = report.p01_interval->second;
  if (report.p12_interval) report.p12 = report.p12_interval->second;
  return report;
}

Vector measure_moments(int n, const BandSpec& spec, std::size_t index) {
  switch (spec.family) {
    case MeasureFamily::Pointwise:
      return basis(n, spec.grid.at(index));
    case MeasureFamily::Integral: {
      const double t = spec.grid.at(index);
      require(t >= spec.t0, "integral band points must satisfy t >= t0");
      Vector m(n + 1);
      for (int k = 0; k <= n; ++k) m[k] = (std::pow(t, k + 1) - std::pow(spec.t0, k + 1)) / (k + 1);
      return m;
    }
    case MeasureFamily::Custom: {
      Vector m = Vector::Zero(n + 1);
      for (const auto& [t, mass] : spec.measures.at(index)) {
        require(mass >= 0.0 && std::isfinite(t), "custom measures need finite atoms with nonnegative mass");
        m += mass * basis(n, t);
      }
      return m;
    }
  }
  return Vector();
}

double band_critical_value(const SufficientStats& stats, const BandSpec& spec, const WeightVector& weights) {
  stats.validate();
  require(spec.alpha > 0.0 && spec.alpha < 1.0, "alpha must lie in (0, 1)");
  if (stats.known_variance()) return quantile_lambda12(spec.alpha, weights);
  return quantile_lambda12_prime(spec.alpha, weights, stats.nu, spec.scaling);
}

Band band(const SufficientStats& stats, const Domain& domain, const BandSpec& spec, const WeightVector& weights) {
  stats.validate();
  const int n = stats.degree();
  require(weights.degree() == n, "weights do not match the degree");
  const std::size_t count = spec.family == MeasureFamily::Custom ? spec.measures.size() : spec.grid.size();
  require(count > 0, "the band needs at least one measure");
  if (spec.family != MeasureFamily::Custom) {
    for (double t : spec.grid) require(domain.contains(t), "band grid points must lie in T");
  }
  const Matrix cov = stats.covariance();
  Band out;
  out.unknown_variance = !stats.known_variance();
  out.critical = band_critical_value(stats, spec, weights);
  const double root = std::sqrt(out.critical);
  for (std::size_t i = 0; i < count; ++i) {
    const Vector m = measure_moments(n, spec, i);
    BandSample s;
    s.t = spec.family == MeasureFamily::Custom ? static_cast<double>(i) : spec.grid[i];
    s.estimate = stats.c_hat.dot(m);
    s.scale = std::sqrt(std::max(0.0, m.dot(cov * m)));
    s.lower = s.estimate - root * s.scale;
    out.samples.push_back(s);
  }
  return out;
}

double variance_ratio_draw(std::uint64_t seed, std::uint64_t index, int nu) {
  require(nu >= 1, "nu must be at least 1");
  PhiloxStream stream(seed, index, 1);
  return 2.0 * boost::math::gamma_p_inv(0.5 * nu, stream.uniform()) / nu;
}

McNullSample::McNullSample(std::uint64_t seed, std::vector<double> lambda01, std::vector<double> lambda12,
                           long failures)
    : seed_(seed), lambda01_(std::move(lambda01)), lambda12_(std::move(lambda12)), failures_(failures) {}

namespace {

Estimate proportion(long hits, long total) {
  Estimate e;
  if (total == 0) return e;
  e.value = static_cast<double>(hits) / total;
  e.se = std::sqrt(e.value * (1.0 - e.value) / total);
  return e;
}

}  // namespace

Estimate McNullSample::joint_survival(double a, double b) const {
  long hits = 0, total = 0;
  for (std::size_t i = 0; i < lambda01_.size(); ++i) {
    if (std::isnan(lambda01_[i])) continue;
    ++total;
    if (lambda01_[i] >= a && lambda12_[i] >= b) ++hits;
  }
  return proportion(hits, total);
}

std::vector<double> McNullSample::variance_ratios(int nu) const {
  std::vector<double> s(lambda01_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = variance_ratio_draw(seed_, i, nu);
  return s;
}

Estimate McNullSample::beta_joint_survival(double a, double b, int nu) const {
  const std::vector<double> s = variance_ratios(nu);
  long hits = 0, total = 0;
  for (std::size_t i = 0; i < lambda01_.size(); ++i) {
    if (std::isnan(lambda01_[i])) continue;
    ++total;
    const double denom = nu * s[i];
    const double b01 = lambda01_[i] / (lambda01_[i] + lambda12_[i] + denom);
    const double b12 = lambda12_[i] / (lambda12_[i] + denom);
    if (b01 >= a && b12 >= b) ++hits;
  }
  return proportion(hits, total);
}

Estimate McNullSample::point_mass_zero(double rel_tol) const {
  long hits = 0, total = 0;
  for (std::size_t i = 0; i < lambda01_.size(); ++i) {
    if (std::isnan(lambda01_[i])) continue;
    ++total;
    if (lambda01_[i] <= rel_tol * (lambda01_[i] + lambda12_[i])) ++hits;
  }
  return proportion(hits, total);
}

McNullSample mc_null_oracle(const Domain& domain, const MetricPair& metric, const McOptions& opts) {
  require(opts.draws >= 1000, "the Monte Carlo oracle needs at least 1000 draws");
  const int n = metric.size() - 1;
  require_degree_fits(n, domain);
  const Projector projector(metric, domain, opts.projection);
  const Matrix chol = Eigen::LLT<Matrix>(metric.dual()).matrixL();
  const auto draws = static_cast<std::size_t>(opts.draws);
  std::vector<double> l01(draws), l12(draws);
  std::vector<char> failed(draws, 0);
  parallel_for(draws, resolve_threads(opts.threads), [&](std::size_t i) {
    PhiloxStream stream(opts.seed, i, 0);
    Vector z(n + 1);
    for (int k = 0; k <= n; ++k) z[k] = stream.normal();
    const Vector c = chol * z;
    try {
      const ProjectionResult r = projector.project(c);
      if (!r.converged) throw NumericalError("not converged");
      l01[i] = r.lambda01;
      l12[i] = std::max(0.0, r.lambda12);
    } catch (const NumericalError&) {
      failed[i] = 1;
      l01[i] = l12[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  long failures = 0;
  for (char f : failed) failures += f;
  return McNullSample(opts.seed, std::move(l01), std::move(l12), failures);
}

bool monotonicity_probe(const Vector& c, const Vector& x, const MetricPair& metric, const Domain& domain) {
  require(member_K(c, domain), "the shift must lie in K");
  const Projector projector(metric, domain);
  const double before = distance_to_K(x, projector);
  const double after = distance_to_K(x + c, projector);
  const double slack = 1e-8 * std::max(1.0, metric.primal_norm(x) + metric.primal_norm(c));
  return after <= before + slack;
}

}  // namespace conepos
