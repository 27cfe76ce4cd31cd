#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace conepos {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class DomainKind { Bounded, HalfLine, FullLine };

/// The region T on which positivity is asserted: [a,b], [a,inf) or the whole
/// real line.
class Domain {
 public:
  static Domain bounded(double a, double b);
  static Domain half_line(double a);
  static Domain full_line();

  DomainKind kind() const { return kind_; }
  /// inf T; -inf for the full line.
  double lower() const { return a_; }
  /// sup T; +inf unless bounded.
  double upper() const { return b_; }

  bool contains(double t) const { return t >= a_ && t <= b_; }
  bool contains_interior(double t) const { return t > a_ && t < b_; }

  std::string to_string() const;

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  Domain(DomainKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  DomainKind kind_;
  double a_;
  double b_;
};

/// Throws InvalidArgument when the full line is paired with an odd degree.
void require_degree_fits(int n, const Domain& domain);

/// f(t;c) = sum c_i t^i in the monomial basis, tied to the domain on which
/// positivity questions are asked. The last coefficient may be zero.
class Polynomial {
 public:
  Polynomial(Vector coeffs, Domain domain);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const Vector& coeffs() const { return coeffs_; }
  const Domain& domain() const { return domain_; }

  double operator()(double t) const;

 private:
  Vector coeffs_;
  Domain domain_;
};

/// psi_n(t) = (1, t, ..., t^n); for t = +-inf the limit direction
/// (0, ..., 0, (+-1)^n).
Vector basis(int n, double t);

/// d/dt psi_n(t) for finite t.
Vector basis_derivative(int n, double t);

/// Horner evaluation of sum c_i t^i.
double eval(const Vector& coeffs, double t);
inline double eval(const Polynomial& p, double t) { return eval(p.coeffs(), t); }

/// Coefficient map of d/dt on degree-n polynomials: an n x (n+1) matrix.
Matrix derivative_operator(int n);

/// Coefficients of the derivative (length reduced by one, minimum one).
Vector differentiate(const Vector& coeffs);

/// Coefficients of the product of two polynomials.
Vector poly_mul(const Vector& lhs, const Vector& rhs);

/// Pads with zeros (or truncates trailing zeros) to length n+1.
Vector resize_coeffs(const Vector& coeffs, int n);

struct Minimum {
  /// Point attaining the infimum; +-inf when the polynomial diverges to -inf
  /// in that direction.
  double argmin;
  double value;
};

/// Infimum of the polynomial over its domain. Interior critical points come
/// from the companion matrix of p', refined by bisection.
///
/// On unbounded domains, leading coefficients with |c_i| <= trim are treated
/// as zero before the divergence test; this lets boundary points produced by
/// a numerical projection (whose top coefficient is zero up to roundoff)
/// classify as nonnegative.
Minimum global_min(const Polynomial& p, double trim = 0.0);

/// Interior critical points of the polynomial on the domain, ascending.
std::vector<double> critical_points(const Vector& coeffs, const Domain& domain);

/// 1e-9 times the Euclidean norm of the coefficients.
double default_positivity_tol(const Vector& coeffs);

/// True iff the infimum over the domain is >= -tol.
bool is_positive(const Polynomial& p, double tol);
bool is_positive(const Polynomial& p);

}  // namespace conepos
