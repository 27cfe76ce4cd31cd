#include "conepos/null_dist.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "conepos/cubature.hpp"
#include "conepos/error.hpp"

namespace conepos {

namespace {

void check_weights(const Vector& w) {
  require(w.size() >= 3, "weights need at least three entries");
  require(w.allFinite(), "weights must be finite; bounds-only vectors have no point distribution");
}

const Vector& exact(const WeightVector& w) {
  if (w.status != WeightStatus::Exact) {
    throw InvalidArgument("exact weights are unavailable for n > 4; use survival_bounds");
  }
  return w.weights;
}

// Bisection for the root of decreasing f on (0, inf): f(x) = alpha.
template <class F>
double invert_survival(F survival, double alpha) {
  double lo = 0.0;
  double hi = 1.0;
  while (survival(hi) > alpha) {
    lo = hi;
    hi *= 2.0;
    require(hi < 1e8, "quantile search diverged");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (survival(mid) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double chi2_survival(int k, double x) {
  require(k >= 0, "degrees of freedom must be nonnegative");
  if (x <= 0.0) return 1.0;
  if (k == 0) return 0.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

double beta_survival(double k, double l, double x) {
  require(k >= 0.0 && l >= 0.0 && !(k == 0.0 && l == 0.0), "invalid beta shapes");
  if (x <= 0.0) return 1.0;
  if (k == 0.0) return 0.0;
  if (l == 0.0) return x <= 1.0 ? 1.0 : 0.0;
  if (x >= 1.0) return 0.0;
  return boost::math::ibetac(k, l, x);
}

double chibar_joint_survival(double a, double b, const Vector& w) {
  check_weights(w);
  const int n = static_cast<int>(w.size()) - 2;
  double s = 0.0;
  for (int i = 0; i <= n + 1; ++i) {
    if (w[i] == 0.0) continue;
    s += w[i] * chi2_survival(i, a) * chi2_survival(n + 1 - i, b);
  }
  return s;
}

double chibar_joint_survival(double a, double b, const WeightVector& w) {
  return chibar_joint_survival(a, b, exact(w));
}

double betabar_joint_survival(double a, double b, const Vector& w, int nu) {
  check_weights(w);
  require(nu >= 1, "nu must be at least 1");
  const int n = static_cast<int>(w.size()) - 2;
  double s = 0.0;
  for (int i = 0; i <= n + 1; ++i) {
    if (w[i] == 0.0) continue;
    s += w[i] * beta_survival(0.5 * i, 0.5 * (n + 1 - i + nu), a) * beta_survival(0.5 * (n + 1 - i), 0.5 * nu, b);
  }
  return s;
}

double betabar_joint_survival(double a, double b, const WeightVector& w, int nu) {
  return betabar_joint_survival(a, b, exact(w), nu);
}

double pvalue_lambda01(double x, const WeightVector& w) { return chibar_joint_survival(x, -kInf, w); }
double pvalue_lambda12(double x, const WeightVector& w) { return chibar_joint_survival(-kInf, x, w); }
double pvalue_beta01(double x, const WeightVector& w, int nu) { return betabar_joint_survival(x, -kInf, w, nu); }
double pvalue_beta12(double x, const WeightVector& w, int nu) { return betabar_joint_survival(-kInf, x, w, nu); }

double quantile_lambda12(double alpha, const WeightVector& w) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  const Vector& v = exact(w);
  const double at_zero = 1.0 - v[v.size() - 1];
  if (at_zero <= alpha) return 0.0;
  return invert_survival([&](double x) { return chibar_joint_survival(-kInf, x, v); }, alpha);
}

std::string to_string(VarianceScaling scaling) { return scaling == VarianceScaling::S ? "s" : "sqrt_s"; }

VarianceScaling variance_scaling_from_string(const std::string& name) {
  if (name == "s") return VarianceScaling::S;
  if (name == "sqrt_s" || name == "sqrt-s") return VarianceScaling::SqrtS;
  throw InvalidArgument("unknown variance scaling '" + name + "' (expected s or sqrt_s)");
}

namespace {

// Quantiles of s ~ chi2_nu / nu at Gauss-Legendre nodes in probability
// space, clustered toward both tails; the range drops 1e-12 of mass.
struct SNodes {
  std::vector<double> s;
  std::vector<double> weight;
};

const SNodes& s_nodes(int nu) {
  thread_local std::map<int, SNodes> cache;
  auto it = cache.find(nu);
  if (it != cache.end()) return it->second;
  constexpr int kNodes = 128;
  constexpr double kTail = 1e-12;
  Vector x, wx;
  gauss_legendre(kNodes, x, wx);
  boost::math::chi_squared_distribution<double> chi(nu);
  SNodes out;
  double total = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    // v in (0,1) -> u = (1 - cos(pi v)) / 2 clusters nodes at both ends.
    const double v = x[i];
    const double u01 = 0.5 * (1.0 - std::cos(M_PI * v));
    const double du = 0.5 * M_PI * std::sin(M_PI * v);
    const double u = 0.5 * kTail + (1.0 - kTail) * u01;
    out.s.push_back(boost::math::quantile(chi, u) / nu);
    out.weight.push_back(wx[i] * du * (1.0 - kTail));
    total += out.weight.back();
  }
  for (double& w : out.weight) w /= total;
  return cache.emplace(nu, std::move(out)).first->second;
}

}  // namespace

double survival_lambda12_prime(double x, const WeightVector& w, int nu, VarianceScaling scaling) {
  require(nu >= 1, "nu must be at least 1");
  const Vector& v = exact(w);
  if (x <= 0.0) return 1.0;
  const SNodes& nodes = s_nodes(nu);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.s.size(); ++i) {
    const double s = nodes.s[i];
    const double scaled = scaling == VarianceScaling::S ? x * s : x * std::sqrt(s);
    acc += nodes.weight[i] * chibar_joint_survival(-kInf, scaled, v);
  }
  return acc;
}

double quantile_lambda12_prime(double alpha, const WeightVector& w, int nu, VarianceScaling scaling) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  const Vector& v = exact(w);
  const double at_zero = 1.0 - v[v.size() - 1];
  if (at_zero <= alpha) return 0.0;
  return invert_survival([&](double x) { return survival_lambda12_prime(x, w, nu, scaling); }, alpha);
}

std::pair<double, double> survival_bounds(double x, const WeightBounds& bounds, Statistic which) {
  require(bounds.u.size() == bounds.v.size() && bounds.u.size() >= 3, "u and v must match");
  if (which == Statistic::Lambda01) {
    return {chibar_joint_survival(x, -kInf, bounds.u), chibar_joint_survival(x, -kInf, bounds.v)};
  }
  return {chibar_joint_survival(-kInf, x, bounds.v), chibar_joint_survival(-kInf, x, bounds.u)};
}

std::pair<double, double> survival_bounds_beta(double x, const WeightBounds& bounds, Statistic which, int nu) {
  require(bounds.u.size() == bounds.v.size() && bounds.u.size() >= 3, "u and v must match");
  if (which == Statistic::Lambda01) {
    return {betabar_joint_survival(x, -kInf, bounds.u, nu), betabar_joint_survival(x, -kInf, bounds.v, nu)};
  }
  return {betabar_joint_survival(-kInf, x, bounds.v, nu), betabar_joint_survival(-kInf, x, bounds.u, nu)};
}

double tail_asymptote(double x, const Vector& w, Statistic which) {
  require(x > 0.0, "the tail asymptote needs x > 0");
  const int n = static_cast<int>(w.size()) - 2;
  const double weight = which == Statistic::Lambda01 ? w[n + 1] : w[0];
  return weight * chi2_survival(n + 1, x);
}

double tail_asymptote(double x, const WeightVector& w, Statistic which) {
  return tail_asymptote(x, w.weights, which);
}

}  // namespace conepos
