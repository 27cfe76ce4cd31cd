#include "conepos/cone_geometry.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "conepos/error.hpp"

namespace conepos {

namespace {

constexpr int kLeftEnd = -1;
constexpr int kRightEnd = -2;
constexpr double kMinGramDet = 1e-14;

Vector constant_poly(double c) { return Vector::Constant(1, c); }

// (t - r) as coefficients.
Vector linear_factor(double r) {
  Vector v(2);
  v << -r, 1.0;
  return v;
}

// (t - r)^2 as coefficients.
Vector square_factor(double r) {
  Vector v(3);
  v << r * r, -2.0 * r, 1.0;
  return v;
}

// d/dr (t - r)^2 = -2 (t - r).
Vector square_factor_derivative(double r) {
  Vector v(2);
  v << 2.0 * r, -2.0;
  return v;
}

// Two-term product form of a positive polynomial of degree k: interlaced
// squared factors, each half weighted by the domain's boundary factor.
struct ProductForm {
  Vector weight1;
  std::vector<int> roots1;
  Vector weight2;
  std::vector<int> roots2;
};

ProductForm product_form(int k, const Domain& domain) {
  require(k >= 1, "product form needs degree >= 1");
  require_degree_fits(k, domain);
  ProductForm form;
  const bool even = k % 2 == 0;
  const int m = k / 2;
  // gamma indices are 0-based here; "odd" in 1-based numbering means 0, 2, 4...
  auto indices = [](int first, int count) {
    std::vector<int> out;
    for (int j = 0; j < count; ++j) out.push_back(first + 2 * j);
    return out;
  };
  if (even) {
    form.roots1 = indices(0, m);
    form.roots2 = indices(1, m - 1);
  } else {
    form.roots1 = indices(1, m);
    form.roots2 = indices(0, m);
  }
  const double a = domain.lower();
  const double b = domain.upper();
  switch (domain.kind()) {
    case DomainKind::Bounded:
      if (even) {
        form.weight1 = constant_poly(1.0);
        form.weight2 = poly_mul(linear_factor(a), -linear_factor(b));
      } else {
        form.weight1 = linear_factor(a);
        form.weight2 = -linear_factor(b);
      }
      break;
    case DomainKind::HalfLine:
      if (even) {
        form.weight1 = constant_poly(1.0);
        form.weight2 = linear_factor(a);
      } else {
        form.weight1 = linear_factor(a);
        form.weight2 = constant_poly(1.0);
      }
      break;
    case DomainKind::FullLine:
      form.weight1 = constant_poly(1.0);
      form.weight2 = constant_poly(1.0);
      break;
  }
  return form;
}

Vector product_of_squares(const Vector& weight, const std::vector<int>& roots,
                          std::span<const double> gamma, int skip) {
  Vector acc = weight;
  for (int j : roots) {
    if (j == skip) continue;
    acc = poly_mul(acc, square_factor(gamma[j]));
  }
  return acc;
}

// Value of p_k(t; alpha, gamma) and its partials with respect to alpha and
// gamma. Columns of d_gamma follow gamma order.
struct ProductEval {
  Vector value;
  Vector d_alpha1;
  Vector d_alpha2;
  Matrix d_gamma;
};

// With normalize_terms each of the two products is rescaled to unit
// Euclidean norm. That is a reparameterization of alpha, so the image set is
// unchanged, but it keeps the two terms on a common scale when roots move
// far out on unbounded domains.
ProductEval eval_product_form(int k, double alpha1, double alpha2, std::span<const double> gamma,
                              const Domain& domain, bool with_derivatives, bool normalize_terms = false) {
  const ProductForm form = product_form(k, domain);
  require(static_cast<int>(gamma.size()) == k - 1, "gamma must have degree-1 entries");
  ProductEval out;
  Vector part1 = resize_coeffs(product_of_squares(form.weight1, form.roots1, gamma, -1), k);
  Vector part2 = resize_coeffs(product_of_squares(form.weight2, form.roots2, gamma, -1), k);
  const double norm1 = normalize_terms ? part1.norm() : 1.0;
  const double norm2 = normalize_terms ? part2.norm() : 1.0;
  part1 /= norm1;
  part2 /= norm2;
  out.value = alpha1 * part1 + alpha2 * part2;
  if (!with_derivatives) return out;
  out.d_alpha1 = part1;
  out.d_alpha2 = part2;
  out.d_gamma = Matrix::Zero(k + 1, k - 1);
  auto fill = [&](const Vector& weight, const std::vector<int>& roots, const Vector& unit, double norm,
                  double alpha) {
    for (int j : roots) {
      const Vector rest = product_of_squares(weight, roots, gamma, j);
      Vector d = resize_coeffs(poly_mul(rest, square_factor_derivative(gamma[j])), k) / norm;
      if (normalize_terms) d -= unit * unit.dot(d);
      out.d_gamma.col(j) += alpha * d;
    }
  };
  fill(form.weight1, form.roots1, part1, norm1, alpha1);
  fill(form.weight2, form.roots2, part2, norm2, alpha2);
  return out;
}

void polar_chart(std::span<const double> theta, Vector& rho, Matrix& jac) {
  const int m = static_cast<int>(theta.size());
  rho.resize(m + 1);
  jac = Matrix::Zero(m + 1, m);
  std::vector<double> s(m), c(m);
  for (int i = 0; i < m; ++i) {
    s[i] = std::sin(theta[i]);
    c[i] = std::cos(theta[i]);
  }
  // rho_i = cos(theta_i) prod_{j<i} sin(theta_j); rho_m = prod sin(theta_j).
  for (int i = 0; i <= m; ++i) {
    double prefix = 1.0;
    for (int j = 0; j < i && j < m; ++j) prefix *= s[j];
    rho[i] = (i < m) ? c[i] * prefix : prefix;
    for (int k = 0; k < std::min(i + 1, m); ++k) {
      double d = 1.0;
      for (int j = 0; j < i && j < m; ++j) d *= (j == k) ? c[j] : s[j];
      if (i < m) d *= (k == i) ? -s[i] : c[i];
      jac(i, k) = d;
    }
  }
}

void check_interior_points(std::span<const double> pts, const Domain& domain, bool ordered) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    require(domain.contains_interior(pts[i]), "parameter point outside the open domain");
    if (ordered && i > 0) require(pts[i - 1] < pts[i], "ordered points must increase strictly");
  }
}

// Public maps also accept points of the closure (limits of the charts).
void check_closure_points(std::span<const double> pts, const Domain& domain) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    require(std::isfinite(pts[i]) && domain.contains(pts[i]), "parameter point outside the domain");
    if (i > 0) require(pts[i - 1] <= pts[i], "ordered points must not decrease");
  }
}

// Slot layout of the moment representations.
std::vector<int> moment_atoms(bool upper, int l) {
  const int m = l / 2;
  std::vector<int> atoms;
  if (upper) {
    if (l % 2 != 0) atoms.push_back(kLeftEnd);
    for (int i = 0; i < m; ++i) atoms.push_back(i);
    atoms.push_back(kRightEnd);
  } else {
    if (l % 2 == 0) {
      atoms.push_back(kLeftEnd);
      for (int i = 0; i < m; ++i) atoms.push_back(i);
    } else {
      for (int i = 0; i <= m; ++i) atoms.push_back(i);
    }
  }
  return atoms;
}

Vector moment_combination(int n, bool upper, int l, const Vector& rho, const Vector& tau,
                          const Domain& domain) {
  require(n >= 1 && (l == n || l == n - 1) && l >= 1, "moment map needs l in {n, n-1}, l >= 1");
  require_degree_fits(n, domain);
  if (domain.kind() == DomainKind::FullLine && upper && l != n) {
    throw InvalidArgument("the upper boundary representation does not exist on the full line");
  }
  const std::vector<int> atoms = moment_atoms(upper, l);
  int ordered = 0;
  for (int s : atoms) ordered += s >= 0 ? 1 : 0;
  require(rho.size() == static_cast<Eigen::Index>(atoms.size()), "rho has the wrong length");
  require(tau.size() == ordered, "tau has the wrong length");
  for (Eigen::Index i = 0; i < rho.size(); ++i) require(rho[i] >= 0.0, "rho must be nonnegative");
  check_closure_points(std::span<const double>(tau.data(), tau.size()), domain);
  Vector out = Vector::Zero(n + 1);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double t = atoms[i] == kLeftEnd    ? domain.lower()
                     : atoms[i] == kRightEnd ? domain.upper()
                                             : tau[atoms[i]];
    out += rho[static_cast<Eigen::Index>(i)] * basis(n, t);
  }
  return out;
}

}  // namespace

SimplexPoint::SimplexPoint(std::vector<double> taus, const Domain& domain) : taus_(std::move(taus)) {
  check_interior_points(taus_, domain, true);
}

PositiveSpherePoint::PositiveSpherePoint(std::vector<double> theta) : theta_(std::move(theta)) {
  for (double t : theta_) require(t > 0.0 && t < M_PI / 2, "polar angles must lie in (0, pi/2)");
  polar_chart(theta_, rhos_, jacobian_);
}

Vector phi_upper(int n, int l, const Vector& rho, const Vector& tau, const Domain& domain) {
  return moment_combination(n, true, l, rho, tau, domain);
}

Vector phi_lower(int n, int l, const Vector& rho, const Vector& tau, const Domain& domain) {
  return moment_combination(n, false, l, rho, tau, domain);
}

Vector varphi(int n, const Eigen::Vector2d& alpha, const Vector& gamma, const Domain& domain) {
  require(alpha[0] >= 0.0 && alpha[1] >= 0.0, "alpha must be nonnegative");
  check_closure_points(std::span<const double>(gamma.data(), gamma.size()), domain);
  return eval_product_form(n, alpha[0], alpha[1], std::span<const double>(gamma.data(), gamma.size()),
                           domain, false)
      .value;
}

Vector varphi_boundary(int n, int i, const Eigen::Vector2d& alpha, const Vector& gamma,
                       double gamma_tilde, const Domain& domain) {
  require(i == 1 || i == 2, "boundary order must be 1 or 2");
  require(n - i >= 0 && n >= 2, "boundary maps need n >= 2");
  require_degree_fits(n, domain);
  if (i == 2) {
    require(domain.contains_interior(gamma_tilde), "double root must be interior");
  } else {
    const bool at_a = std::isfinite(domain.lower()) && gamma_tilde == domain.lower();
    const bool at_b = domain.kind() == DomainKind::Bounded && gamma_tilde == domain.upper();
    require(at_a || at_b, "simple boundary root must sit at a finite endpoint");
  }
  Vector factor = linear_factor(gamma_tilde);
  if (i == 2) factor = square_factor(gamma_tilde);
  // (b - t) keeps the b-anchored form nonnegative on T
  if (i == 1 && gamma_tilde == domain.upper()) factor = -factor;
  if (n == 2 && i == 2) {
    require(alpha[0] >= 0.0, "alpha must be nonnegative");
    return alpha[0] * factor;
  }
  const Vector inner = varphi(n - i, alpha, gamma, domain);
  return resize_coeffs(poly_mul(factor, inner), n);
}

std::string to_string(StratumKind kind) {
  switch (kind) {
    case StratumKind::MomentUpper: return "moment_upper";
    case StratumKind::MomentLower: return "moment_lower";
    case StratumKind::PolyInterior: return "poly_interior";
    case StratumKind::PolyDoubleRoot: return "poly_double_root";
    case StratumKind::PolyLowerAnchor: return "poly_lower_anchor";
    case StratumKind::PolyUpperAnchor: return "poly_upper_anchor";
    case StratumKind::PolyLowerDegree: return "poly_lower_degree";
  }
  return "unknown";
}

Stratum::Stratum(StratumKind kind, int n, int l, const Domain& domain)
    : kind_(kind), n_(n), l_(l), domain_(domain) {
  require_degree_fits(n, domain);
  switch (kind) {
    case StratumKind::MomentUpper:
    case StratumKind::MomentLower: {
      const bool upper = kind == StratumKind::MomentUpper;
      require(l == n || (l == n - 1 && n >= 2), "moment strata need l = n, or l = n-1 with n >= 2");
      if (domain.kind() == DomainKind::FullLine && upper && l != n) {
        throw InvalidArgument("the upper boundary representation does not exist on the full line");
      }
      atoms_ = moment_atoms(upper, l);
      for (int s : atoms_) ordered_ += s >= 0 ? 1 : 0;
      angles_ = static_cast<int>(atoms_.size()) - 1;
      break;
    }
    case StratumKind::PolyInterior:
      angles_ = 1;
      ordered_ = n - 1;
      break;
    case StratumKind::PolyDoubleRoot:
      require(n >= 2, "double-root stratum needs n >= 2");
      angles_ = n == 2 ? 0 : 1;
      ordered_ = n == 2 ? 0 : n - 3;
      free_ = 1;
      break;
    case StratumKind::PolyLowerAnchor:
      require(n >= 2 && std::isfinite(domain.lower()), "lower-anchor stratum needs n >= 2 and finite a");
      angles_ = 1;
      ordered_ = n - 2;
      break;
    case StratumKind::PolyUpperAnchor:
      require(n >= 2 && domain.kind() == DomainKind::Bounded,
              "upper-anchor stratum needs n >= 2 and a bounded domain");
      angles_ = 1;
      ordered_ = n - 2;
      break;
    case StratumKind::PolyLowerDegree:
      require(n >= 2 && domain.kind() == DomainKind::HalfLine,
              "lower-degree stratum needs n >= 2 and a half-line domain");
      angles_ = 1;
      ordered_ = n - 2;
      break;
  }
}

Stratum Stratum::moment_upper(int n, int l, const Domain& domain) {
  return Stratum(StratumKind::MomentUpper, n, l, domain);
}
Stratum Stratum::moment_lower(int n, int l, const Domain& domain) {
  return Stratum(StratumKind::MomentLower, n, l, domain);
}
Stratum Stratum::poly_interior(int n, const Domain& domain) {
  return Stratum(StratumKind::PolyInterior, n, n, domain);
}
Stratum Stratum::poly_double_root(int n, const Domain& domain) {
  return Stratum(StratumKind::PolyDoubleRoot, n, n - 1, domain);
}
Stratum Stratum::poly_lower_anchor(int n, const Domain& domain) {
  return Stratum(StratumKind::PolyLowerAnchor, n, n - 1, domain);
}
Stratum Stratum::poly_upper_anchor(int n, const Domain& domain) {
  return Stratum(StratumKind::PolyUpperAnchor, n, n - 1, domain);
}
Stratum Stratum::poly_lower_degree(int n, const Domain& domain) {
  return Stratum(StratumKind::PolyLowerDegree, n, n - 1, domain);
}

Side Stratum::side() const {
  return (kind_ == StratumKind::MomentUpper || kind_ == StratumKind::MomentLower) ? Side::Dual
                                                                                  : Side::Primal;
}

void Stratum::evaluate(std::span<const double> coords, Vector& value, Matrix* jacobian) const {
  require(static_cast<int>(coords.size()) == dim(), "coordinate count does not match the chart");
  if (side() == Side::Dual) {
    evaluate_moment(coords, value, jacobian);
  } else {
    evaluate_poly(coords, value, jacobian);
  }
}

Vector Stratum::evaluate(std::span<const double> coords) const {
  Vector v;
  evaluate(coords, v, nullptr);
  return v;
}

void Stratum::evaluate_moment(std::span<const double> coords, Vector& value, Matrix* jacobian) const {
  Vector rho;
  Matrix drho;
  polar_chart(coords.subspan(0, angles_), rho, drho);
  const auto tau = coords.subspan(angles_, ordered_);
  value = Vector::Zero(n_ + 1);
  if (jacobian) *jacobian = Matrix::Zero(n_ + 1, dim());
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const int slot = atoms_[i];
    const double t = slot == kLeftEnd ? domain_.lower() : slot == kRightEnd ? domain_.upper() : tau[slot];
    // Atoms enter with unit Euclidean norm (a reparameterization of rho)
    // so that distant atoms do not swamp the others.
    Vector v = basis(n_, t);
    const double nv = v.norm();
    v /= nv;
    const auto ii = static_cast<Eigen::Index>(i);
    value += rho[ii] * v;
    if (!jacobian) continue;
    for (int k = 0; k < angles_; ++k) jacobian->col(k) += drho(ii, k) * v;
    if (slot >= 0) {
      Vector dv = basis_derivative(n_, t) / nv;
      dv -= v * v.dot(dv);
      jacobian->col(angles_ + slot) = rho[ii] * dv;
    }
  }
}

void Stratum::evaluate_poly(std::span<const double> coords, Vector& value, Matrix* jacobian) const {
  const double a = domain_.lower();
  const double b = domain_.upper();
  if (kind_ == StratumKind::PolyDoubleRoot && n_ == 2) {
    const double g = coords[0];
    value = square_factor(g);
    if (jacobian) {
      *jacobian = Matrix::Zero(3, 1);
      jacobian->col(0).head(2) = square_factor_derivative(g);
    }
    return;
  }
  const double theta = coords[0];
  const double alpha1 = std::cos(theta);
  const double alpha2 = std::sin(theta);
  const auto gamma = coords.subspan(1, ordered_);

  Vector prefactor = constant_poly(1.0);
  int inner_degree = n_;
  switch (kind_) {
    case StratumKind::PolyInterior:
      break;
    case StratumKind::PolyDoubleRoot:
      prefactor = square_factor(coords[1 + ordered_]);
      inner_degree = n_ - 2;
      break;
    case StratumKind::PolyLowerAnchor:
      prefactor = linear_factor(a);
      inner_degree = n_ - 1;
      break;
    case StratumKind::PolyUpperAnchor:
      prefactor = -linear_factor(b);
      inner_degree = n_ - 1;
      break;
    case StratumKind::PolyLowerDegree:
      inner_degree = n_ - 1;
      break;
    default:
      break;
  }
  const ProductEval inner =
      eval_product_form(inner_degree, alpha1, alpha2, gamma, domain_, jacobian != nullptr, true);
  value = resize_coeffs(poly_mul(prefactor, inner.value), n_);
  if (!jacobian) return;
  *jacobian = Matrix::Zero(n_ + 1, dim());
  const Vector d_theta = -alpha2 * inner.d_alpha1 + alpha1 * inner.d_alpha2;
  jacobian->col(0) = resize_coeffs(poly_mul(prefactor, d_theta), n_);
  for (int j = 0; j < ordered_; ++j) {
    jacobian->col(1 + j) = resize_coeffs(poly_mul(prefactor, inner.d_gamma.col(j)), n_);
  }
  if (kind_ == StratumKind::PolyDoubleRoot) {
    const double g = coords[1 + ordered_];
    jacobian->col(1 + ordered_) = resize_coeffs(poly_mul(square_factor_derivative(g), inner.value), n_);
  }
}

namespace {

const Matrix& side_metric(const Stratum& stratum, const MetricPair& metric) {
  return stratum.side() == Side::Dual ? metric.dual() : metric.primal();
}

Matrix normalize_jacobian(const Vector& x, const Matrix& jac, const Matrix& m) {
  const double norm = std::sqrt(x.dot(m * x));
  const Vector u = x / norm;
  const Eigen::RowVectorXd proj = u.transpose() * m * jac;
  return (jac - u * proj) / norm;
}

}  // namespace

NormalizedPoint normalize_and_jacobian(const Stratum& stratum, std::span<const double> coords,
                                       const MetricPair& metric) {
  require(metric.size() == stratum.degree() + 1, "metric size does not match the degree");
  Vector x;
  Matrix jac;
  stratum.evaluate(coords, x, &jac);
  const Matrix& m = side_metric(stratum, metric);
  NormalizedPoint out;
  const double norm2 = x.dot(m * x);
  if (!(norm2 > 0.0)) return out;
  out.unit = x / std::sqrt(norm2);
  if (stratum.dim() == 0) {
    out.regular = true;
    out.gram_det = 1.0;
    out.gram_sqrt = 1.0;
    return out;
  }
  const Matrix nj = normalize_jacobian(x, jac, m);
  const Matrix gram = nj.transpose() * m * nj;
  const double det = gram.determinant();
  if (!(det > 0.0)) return out;
  out.gram_det = det;
  out.gram_sqrt = std::sqrt(det);
  out.regular = det >= kMinGramDet;
  return out;
}

Matrix normalized_jacobian(const Stratum& stratum, std::span<const double> coords, const MetricPair& metric) {
  Vector x;
  Matrix jac;
  stratum.evaluate(coords, x, &jac);
  return normalize_jacobian(x, jac, side_metric(stratum, metric));
}

Matrix normalized_jacobian_fd(const Stratum& stratum, std::span<const double> coords, const MetricPair& metric,
                              double step) {
  const Matrix& m = side_metric(stratum, metric);
  auto unit = [&](std::span<const double> c) {
    const Vector x = stratum.evaluate(c);
    return Vector(x / std::sqrt(x.dot(m * x)));
  };
  Matrix out(stratum.degree() + 1, stratum.dim());
  std::vector<double> work(coords.begin(), coords.end());
  for (int j = 0; j < stratum.dim(); ++j) {
    const double h = step * std::max(1.0, std::abs(coords[j]));
    work[j] = coords[j] + h;
    const Vector plus = unit(work);
    work[j] = coords[j] - h;
    const Vector minus = unit(work);
    work[j] = coords[j];
    out.col(j) = (plus - minus) / (2.0 * h);
  }
  return out;
}

MarkovLukacsBlocks markov_lukacs_blocks(int n, const Domain& domain) {
  require_degree_fits(n, domain);
  const int m = n / 2;
  const bool even = n % 2 == 0;
  const double a = domain.lower();
  const double b = domain.upper();
  MarkovLukacsBlocks blocks;
  switch (domain.kind()) {
    case DomainKind::Bounded:
      if (even) {
        blocks = {constant_poly(1.0), m + 1, poly_mul(linear_factor(a), -linear_factor(b)), m};
      } else {
        blocks = {linear_factor(a), m + 1, -linear_factor(b), m + 1};
      }
      break;
    case DomainKind::HalfLine:
      if (even) {
        blocks = {constant_poly(1.0), m + 1, linear_factor(a), m};
      } else {
        blocks = {linear_factor(a), m + 1, constant_poly(1.0), m + 1};
      }
      break;
    case DomainKind::FullLine:
      blocks = {constant_poly(1.0), m + 1, constant_poly(1.0), m};
      break;
  }
  return blocks;
}

Matrix localized_hankel(const Vector& moments, const Vector& weight, int size) {
  Matrix h = Matrix::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < weight.size(); ++k) {
        const Eigen::Index idx = i + j + k;
        require(idx < moments.size(), "moment vector too short for the localized Hankel matrix");
        acc += weight[k] * moments[idx];
      }
      h(i, j) = acc;
    }
  }
  return h;
}

bool member_K(const Vector& coeffs, const Domain& domain, double tol) {
  return is_positive(Polynomial(coeffs, domain), tol);
}

bool member_K(const Vector& coeffs, const Domain& domain) {
  return is_positive(Polynomial(coeffs, domain));
}

bool member_Kstar(const Vector& moments, const Domain& domain, double rel_tol) {
  const int n = static_cast<int>(moments.size()) - 1;
  const MarkovLukacsBlocks blocks = markov_lukacs_blocks(n, domain);
  const Matrix h1 = localized_hankel(moments, blocks.weight1, blocks.size1);
  const Matrix h2 = localized_hankel(moments, blocks.weight2, blocks.size2);
  const double scale = std::abs(h1.trace()) + std::abs(h2.trace());
  const double floor = -rel_tol * scale;
  for (const Matrix* h : {&h1, &h2}) {
    if (h->rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(*h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < floor) return false;
  }
  return true;
}

}  // namespace conepos
