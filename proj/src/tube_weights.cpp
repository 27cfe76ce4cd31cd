#include "conepos/tube_weights.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "conepos/error.hpp"

namespace conepos {

double omega(int d) {
  require(d >= 1, "sphere dimension must be positive");
  return 2.0 * std::pow(M_PI, 0.5 * d) / boost::math::tgamma(0.5 * d);
}

VolumeEstimate& VolumeEstimate::operator+=(const VolumeEstimate& other) {
  value += other.value;
  error += other.error;
  evaluations += other.evaluations;
  converged = converged && other.converged;
  return *this;
}

namespace {

// Maps s in (0,1) onto int T; returns the point and dt/ds.
inline void compactify(const Domain& domain, double s, double& t, double& dt) {
  switch (domain.kind()) {
    case DomainKind::Bounded:
      t = domain.lower() + (domain.upper() - domain.lower()) * s;
      dt = domain.upper() - domain.lower();
      return;
    case DomainKind::HalfLine: {
      const double r = 1.0 - s;
      t = domain.lower() + s / r;
      dt = 1.0 / (r * r);
      return;
    }
    case DomainKind::FullLine: {
      const double q = s * (1.0 - s);
      t = (2.0 * s - 1.0) / q;
      dt = (2.0 * s * s - 2.0 * s + 1.0) / (q * q);
      return;
    }
  }
}

}  // namespace

double stratum_box_integrand(const Stratum& stratum, const MetricPair& metric, std::span<const double> u) {
  const int na = stratum.angle_count();
  const int no = stratum.ordered_count();
  const int nf = stratum.free_count();
  const Domain& domain = stratum.domain();
  thread_local std::vector<double> coords;
  thread_local std::vector<double> s;
  coords.resize(u.size());
  double factor = 1.0;
  for (int i = 0; i < na; ++i) {
    coords[i] = 0.5 * M_PI * u[i];
    factor *= 0.5 * M_PI;
  }
  // Duffy ordering: s_{m-1} = u_{m-1}, s_i = u_i s_{i+1}.
  s.resize(no);
  for (int i = no - 1; i >= 0; --i) {
    if (i == no - 1) {
      s[i] = u[na + i];
    } else {
      s[i] = u[na + i] * s[i + 1];
      factor *= s[i + 1];
    }
  }
  for (int i = 0; i < no; ++i) {
    double t = 0.0, dt = 0.0;
    compactify(domain, s[i], t, dt);
    if (!std::isfinite(t) || !domain.contains_interior(t)) return 0.0;
    if (i > 0 && !(t > coords[na + i - 1])) return 0.0;
    coords[na + i] = t;
    factor *= dt;
  }
  for (int i = 0; i < nf; ++i) {
    double t = 0.0, dt = 0.0;
    compactify(domain, u[na + no + i], t, dt);
    if (!std::isfinite(t) || !domain.contains_interior(t)) return 0.0;
    coords[na + no + i] = t;
    factor *= dt;
  }
  if (!std::isfinite(factor) || factor == 0.0) return 0.0;
  const NormalizedPoint p = normalize_and_jacobian(stratum, coords, metric);
  // The rank test runs in box coordinates: on unbounded domains the natural
  // Gram determinant decays like a power of tau while the substitution
  // factor grows to match.
  if (!(p.gram_det * factor * factor >= 1e-14)) return 0.0;
  const double v = p.gram_sqrt * factor;
  return std::isfinite(v) ? v : 0.0;
}

VolumeEstimate integrate_stratum(const Stratum& stratum, const MetricPair& metric, const CubatureOptions& opts) {
  require(metric.size() == stratum.degree() + 1, "metric size does not match the degree");
  const CubatureResult r = integrate_unit_box(
      stratum.dim(), [&](std::span<const double> u) { return stratum_box_integrand(stratum, metric, u); }, opts);
  VolumeEstimate out;
  out.value = r.value;
  out.error = r.error;
  out.evaluations = r.evaluations;
  out.converged = r.converged;
  return out;
}

VolumeEstimate vol_Kstar_cap(int n, const Domain& domain, const MetricPair& metric, Representation rep,
                             const CubatureOptions& opts) {
  require(n >= 1, "degree must be at least 1");
  const Stratum s = rep == Representation::Upper ? Stratum::moment_upper(n, n, domain)
                                                 : Stratum::moment_lower(n, n, domain);
  return integrate_stratum(s, metric, opts);
}

VolumeEstimate vol_bKstar_cap(int n, const Domain& domain, const MetricPair& metric, const CubatureOptions& opts) {
  require(n >= 2, "boundary volumes need n >= 2");
  VolumeEstimate v = integrate_stratum(Stratum::moment_lower(n, n - 1, domain), metric, opts);
  if (domain.kind() != DomainKind::FullLine) {
    v += integrate_stratum(Stratum::moment_upper(n, n - 1, domain), metric, opts);
  }
  return v;
}

VolumeEstimate vol_K_cap(int n, const Domain& domain, const MetricPair& metric, const CubatureOptions& opts) {
  require(n >= 1, "degree must be at least 1");
  return integrate_stratum(Stratum::poly_interior(n, domain), metric, opts);
}

VolumeEstimate vol_bK_cap(int n, const Domain& domain, const MetricPair& metric, const CubatureOptions& opts) {
  require(n >= 2, "boundary volumes need n >= 2");
  VolumeEstimate v = integrate_stratum(Stratum::poly_double_root(n, domain), metric, opts);
  if (domain.kind() != DomainKind::FullLine) {
    v += integrate_stratum(Stratum::poly_lower_anchor(n, domain), metric, opts);
  }
  if (domain.kind() == DomainKind::Bounded) {
    v += integrate_stratum(Stratum::poly_upper_anchor(n, domain), metric, opts);
  }
  if (domain.kind() == DomainKind::HalfLine) {
    v += integrate_stratum(Stratum::poly_lower_degree(n, domain), metric, opts);
  }
  return v;
}

ExtremeWeights extreme_weights(int n, const Domain& domain, const MetricPair& metric, const CubatureOptions& opts) {
  require(n >= 1, "degree must be at least 1");
  require_degree_fits(n, domain);
  require(metric.size() == n + 1, "metric size does not match the degree");
  ExtremeWeights ext;
  ext.n = n;
  const double cap = omega(n + 1);
  const VolumeEstimate ks_up = vol_Kstar_cap(n, domain, metric, Representation::Upper, opts);
  const VolumeEstimate ks_lo = vol_Kstar_cap(n, domain, metric, Representation::Lower, opts);
  const VolumeEstimate k = vol_K_cap(n, domain, metric, opts);
  ext.w0 = ks_up.value / cap;
  ext.e0 = ks_up.error / cap;
  ext.w0_lower = ks_lo.value / cap;
  ext.e0_lower = ks_lo.error / cap;
  ext.wn1 = k.value / cap;
  ext.en1 = k.error / cap;
  ext.evaluations = ks_up.evaluations + ks_lo.evaluations + k.evaluations;
  ext.converged = ks_up.converged && ks_lo.converged && k.converged;
  if (n >= 2) {
    const double rim = 2.0 * omega(n);
    const VolumeEstimate bks = vol_bKstar_cap(n, domain, metric, opts);
    const VolumeEstimate bk = vol_bK_cap(n, domain, metric, opts);
    ext.w1 = bks.value / rim;
    ext.e1 = bks.error / rim;
    ext.wn = bk.value / rim;
    ext.en = bk.error / rim;
    ext.evaluations += bks.evaluations + bk.evaluations;
    ext.converged = ext.converged && bks.converged && bk.converged;
  } else {
    ext.w1 = ext.wn = 0.5;
  }
  return ext;
}

std::string to_string(WeightStatus status) {
  return status == WeightStatus::Exact ? "exact" : "bounds_only";
}

WeightVector WeightVector::from_values(const Vector& w, const Vector& err) {
  require(w.size() >= 3, "a weight vector needs at least three entries");
  WeightVector out;
  out.weights = w;
  out.est_error = err.size() == w.size() ? err : Vector::Zero(w.size());
  out.status = WeightStatus::Exact;
  out.extremes.n = static_cast<int>(w.size()) - 2;
  return out;
}

WeightVector complete_weights(const ExtremeWeights& ext) {
  const int n = ext.n;
  require(n >= 1 && n <= 4, "exact weights are available for 1 <= n <= 4");
  WeightVector out;
  out.extremes = ext;
  out.status = WeightStatus::Exact;
  Vector& w = out.weights;
  Vector& e = out.est_error;
  w.resize(n + 2);
  e.resize(n + 2);
  switch (n) {
    case 1:
      w << 0.5 - ext.wn1, 0.5, ext.wn1;
      e << ext.en1, 0.0, ext.en1;
      break;
    case 2:
      w << 0.5 - ext.wn, ext.w1, ext.wn, 0.5 - ext.w1;
      e << ext.en, ext.e1, ext.en, ext.e1;
      break;
    case 3:
      w << ext.w0, ext.w1, 0.5 - ext.w0 - ext.wn1, ext.wn, ext.wn1;
      e << ext.e0, ext.e1, ext.e0 + ext.en1, ext.en, ext.en1;
      break;
    case 4:
      w << ext.w0, ext.w1, 0.5 - ext.w0 - ext.wn, 0.5 - ext.w1 - ext.wn1, ext.wn, ext.wn1;
      e << ext.e0, ext.e1, ext.e0 + ext.en, ext.e1 + ext.en1, ext.en, ext.en1;
      break;
  }
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] < -e[i] - 1e-12) {
      throw NumericalError("completed weight w" + std::to_string(i) + " is negative beyond its error estimate");
    }
  }
  return out;
}

WeightVector complete_weights(int n, const Domain& domain, const MetricPair& metric, const CubatureOptions& opts) {
  return complete_weights(extreme_weights(n, domain, metric, opts));
}

WeightBounds weight_bounds(const ExtremeWeights& ext) {
  const int n = ext.n;
  require(n >= 4, "u/v bounds need n >= 4");
  WeightBounds b;
  b.u = Vector::Zero(n + 2);
  b.v = Vector::Zero(n + 2);
  const bool odd = n % 2 != 0;
  // The two middle entries of each vector; which extreme pairs with w0
  // follows the parity of n so the odd and even sums stay 1/2.
  const double even_mid = odd ? 0.5 - ext.w0 - ext.wn1 : 0.5 - ext.w0 - ext.wn;
  const double odd_mid = odd ? 0.5 - ext.w1 - ext.wn : 0.5 - ext.w1 - ext.wn1;
  for (Vector* x : {&b.u, &b.v}) {
    (*x)[0] = ext.w0;
    (*x)[1] = ext.w1;
    (*x)[n] = ext.wn;
    (*x)[n + 1] = ext.wn1;
  }
  b.u[2] = even_mid;
  b.u[3] = odd_mid;
  if (odd) {
    b.v[n - 2] = odd_mid;
    b.v[n - 1] = even_mid;
  } else {
    b.v[n - 2] = even_mid;
    b.v[n - 1] = odd_mid;
  }
  return b;
}

WeightBounds weight_bounds(int n, const Domain& domain, const MetricPair& metric, const CubatureOptions& opts) {
  return weight_bounds(extreme_weights(n, domain, metric, opts));
}

WeightVector compute_weights(int n, const Domain& domain, const MetricPair& metric, const CubatureOptions& opts) {
  const ExtremeWeights ext = extreme_weights(n, domain, metric, opts);
  if (n <= 4) return complete_weights(ext);
  WeightVector out;
  out.extremes = ext;
  out.status = WeightStatus::BoundsOnly;
  out.weights = Vector::Constant(n + 2, std::numeric_limits<double>::quiet_NaN());
  out.est_error = Vector::Zero(n + 2);
  out.weights[0] = ext.w0;
  out.weights[1] = ext.w1;
  out.weights[n] = ext.wn;
  out.weights[n + 1] = ext.wn1;
  out.est_error[0] = ext.e0;
  out.est_error[1] = ext.e1;
  out.est_error[n] = ext.en;
  out.est_error[n + 1] = ext.en1;
  out.bounds = weight_bounds(ext);
  return out;
}

}  // namespace conepos
