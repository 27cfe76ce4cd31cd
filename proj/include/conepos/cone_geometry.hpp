#pragma once

#include <span>
#include <string>
#include <vector>

#include "conepos/metric.hpp"
#include "conepos/poly.hpp"

namespace conepos {

/// Strictly increasing points of int T.
class SimplexPoint {
 public:
  SimplexPoint() = default;
  SimplexPoint(std::vector<double> taus, const Domain& domain);

  const std::vector<double>& taus() const { return taus_; }
  int size() const { return static_cast<int>(taus_.size()); }

 private:
  std::vector<double> taus_;
};

/// A point of the open positive orthant of the unit sphere, in polar
/// coordinates theta in (0, pi/2)^m.
class PositiveSpherePoint {
 public:
  explicit PositiveSpherePoint(std::vector<double> theta);

  const std::vector<double>& theta() const { return theta_; }
  const Vector& rhos() const { return rhos_; }
  /// d rho / d theta, (m+1) x m.
  const Matrix& jacobian() const { return jacobian_; }

 private:
  std::vector<double> theta_;
  Vector rhos_;
  Matrix jacobian_;
};

// Explicit parameterizations of the cones.

/// Upper-principal moment representation phi^(U)_{n,l}: atoms at the interior
/// points tau with the endpoint b (and a, for odd l).
Vector phi_upper(int n, int l, const Vector& rho, const Vector& tau, const Domain& domain);

/// Lower-principal moment representation phi^(L)_{n,l}.
Vector phi_lower(int n, int l, const Vector& rho, const Vector& tau, const Domain& domain);

/// Coefficients of the product-form positive polynomial p_n(t; alpha, gamma)
/// (interlacing squared factors weighted by the domain's boundary factors).
Vector varphi(int n, const Eigen::Vector2d& alpha, const Vector& gamma, const Domain& domain);

/// Coefficients of (t - gamma_tilde)^i p_{n-i}(t; alpha, gamma). For i = 1,
/// gamma_tilde must be a finite endpoint of the domain, and at b the factor
/// is (b - t) so the result stays in K; for i = 2 it is an interior point,
/// and when n = 2 only alpha[0] is used.
/// Like phi_upper and varphi, points of the closed domain are accepted.
Vector varphi_boundary(int n, int i, const Eigen::Vector2d& alpha, const Vector& gamma,
                       double gamma_tilde, const Domain& domain);

enum class Side { Primal, Dual };

/// Which stratum of K, K*, or their boundaries a chart covers.
enum class StratumKind {
  MomentUpper,      // phi^(U)_{n,l}
  MomentLower,      // phi^(L)_{n,l}
  PolyInterior,     // varphi_n
  PolyDoubleRoot,   // varphi_n^(2), interior double root
  PolyLowerAnchor,  // varphi_n^(1)(., a)
  PolyUpperAnchor,  // -varphi_n^(1)(., b)
  PolyLowerDegree,  // varphi_{n-1}, padded to degree n
};

std::string to_string(StratumKind kind);

/// A local chart of one stratum. Local coordinates are laid out as
/// [angles..., ordered points..., free point], where the angles live in
/// (0, pi/2), the ordered points are strictly increasing in int T and the
/// optional free point is anywhere in int T.
///
/// The charts weight unit-norm atoms (moment side) or unit-norm product terms
/// (polynomial side). The image is the same set as phi_upper / varphi etc.
/// produce; only the meaning of the angles changes.
class Stratum {
 public:
  static Stratum moment_upper(int n, int l, const Domain& domain);
  static Stratum moment_lower(int n, int l, const Domain& domain);
  static Stratum poly_interior(int n, const Domain& domain);
  static Stratum poly_double_root(int n, const Domain& domain);
  static Stratum poly_lower_anchor(int n, const Domain& domain);
  static Stratum poly_upper_anchor(int n, const Domain& domain);
  static Stratum poly_lower_degree(int n, const Domain& domain);

  StratumKind kind() const { return kind_; }
  int degree() const { return n_; }
  int level() const { return l_; }
  const Domain& domain() const { return domain_; }
  Side side() const;

  int angle_count() const { return angles_; }
  int ordered_count() const { return ordered_; }
  int free_count() const { return free_; }
  int dim() const { return angles_ + ordered_ + free_; }

  /// Raw (unnormalized) image and, if requested, its (n+1) x dim Jacobian.
  void evaluate(std::span<const double> coords, Vector& value, Matrix* jacobian) const;
  Vector evaluate(std::span<const double> coords) const;

 private:
  Stratum(StratumKind kind, int n, int l, const Domain& domain);

  void evaluate_moment(std::span<const double> coords, Vector& value, Matrix* jacobian) const;
  void evaluate_poly(std::span<const double> coords, Vector& value, Matrix* jacobian) const;

  StratumKind kind_;
  int n_;
  int l_;
  Domain domain_;
  int angles_ = 0;
  int ordered_ = 0;
  int free_ = 0;
  // Moment strata: for each atom, -1 = left endpoint, -2 = right endpoint,
  // otherwise the index of the ordered point.
  std::vector<int> atoms_;
};

struct NormalizedPoint {
  /// x / ||x|| under the side's metric.
  Vector unit;
  /// det(J^T M J) of the normalized map and its square root.
  double gram_det = 0.0;
  double gram_sqrt = 0.0;
  /// False when the Gram determinant falls below 1e-14 (the chart is
  /// degenerate there).
  bool regular = false;
};

/// Normalizes the chart image on the unit sphere of the side's metric (Sigma
/// for dual, Sigma^{-1} for primal) and returns the surface element.
NormalizedPoint normalize_and_jacobian(const Stratum& stratum, std::span<const double> coords,
                                       const MetricPair& metric);

/// Analytic Jacobian of the normalized map.
Matrix normalized_jacobian(const Stratum& stratum, std::span<const double> coords,
                           const MetricPair& metric);

/// Central-difference Jacobian of the normalized map.
Matrix normalized_jacobian_fd(const Stratum& stratum, std::span<const double> coords,
                              const MetricPair& metric, double step = 1e-6);

/// Weight polynomials and block sizes of the Markov-Lukacs representation
/// p(t) = w1(t) psi^T Q1 psi + w2(t) psi^T Q2 psi on the given domain.
struct MarkovLukacsBlocks {
  Vector weight1;
  int size1 = 0;
  Vector weight2;
  int size2 = 0;
};

MarkovLukacsBlocks markov_lukacs_blocks(int n, const Domain& domain);

/// Localized Hankel matrix (sum_k w_k y_{i+j+k})_{i,j < size}.
Matrix localized_hankel(const Vector& moments, const Vector& weight, int size);

/// c in K: the polynomial is nonnegative on the domain up to tol.
bool member_K(const Vector& coeffs, const Domain& domain, double tol);
bool member_K(const Vector& coeffs, const Domain& domain);

/// y in K*: both localized Hankel matrices are PSD, with eigenvalues allowed
/// down to -rel_tol * (sum of their traces).
bool member_Kstar(const Vector& moments, const Domain& domain, double rel_tol = 1e-10);

}  // namespace conepos
