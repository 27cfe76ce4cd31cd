#pragma once

#include <utility>

#include "conepos/tube_weights.hpp"

namespace conepos {

/// Upper tail of chi-square with k degrees of freedom; k = 0 is a point mass
/// at zero, so the tail is 1 for x <= 0 and 0 otherwise.
double chi2_survival(int k, double x);

/// Upper tail of Beta(k, l). A zero first shape is a point mass at 0, a zero
/// second shape a point mass at 1.
double beta_survival(double k, double l, double x);

/// P(lambda01 >= a, lambda12 >= b) = sum w_i G_i(a) G_{n+1-i}(b). Pass -inf
/// for a marginal.
double chibar_joint_survival(double a, double b, const Vector& w);
double chibar_joint_survival(double a, double b, const WeightVector& w);

/// P(beta01 >= a, beta12 >= b) under nu error degrees of freedom.
double betabar_joint_survival(double a, double b, const Vector& w, int nu);
double betabar_joint_survival(double a, double b, const WeightVector& w, int nu);

double pvalue_lambda01(double x, const WeightVector& w);
double pvalue_lambda12(double x, const WeightVector& w);
double pvalue_beta01(double x, const WeightVector& w, int nu);
double pvalue_beta12(double x, const WeightVector& w, int nu);

/// Upper alpha point of lambda12 under H0. Returns 0 when the point mass at
/// zero already exceeds 1 - alpha.
double quantile_lambda12(double alpha, const WeightVector& w);

/// How the unknown-variance band quantile divides lambda12 by the variance
/// ratio s ~ chi2_nu / nu.
enum class VarianceScaling {
  /// lambda12 / s: the scaling implied by the beta statistics.
  S,
  /// lambda12 / sqrt(s).
  SqrtS,
};

std::string to_string(VarianceScaling scaling);
VarianceScaling variance_scaling_from_string(const std::string& name);

/// P(lambda12 / s^p >= x) with p = 1 or 1/2, integrating the chi-bar
/// survival against the law of s.
double survival_lambda12_prime(double x, const WeightVector& w, int nu, VarianceScaling scaling);

/// Upper alpha point of lambda12 / s^p.
double quantile_lambda12_prime(double alpha, const WeightVector& w, int nu,
                               VarianceScaling scaling = VarianceScaling::S);

enum class Statistic { Lambda01, Lambda12 };

/// Lower and upper bounds on the marginal survival from the u/v vectors.
std::pair<double, double> survival_bounds(double x, const WeightBounds& bounds, Statistic which);

/// Same for the beta statistics.
std::pair<double, double> survival_bounds_beta(double x, const WeightBounds& bounds, Statistic which, int nu);

/// Large-x approximation: w_{n+1} G_{n+1}(x) for lambda01, w_0 G_{n+1}(x)
/// for lambda12.
double tail_asymptote(double x, const Vector& w, Statistic which);
double tail_asymptote(double x, const WeightVector& w, Statistic which);

}  // namespace conepos
