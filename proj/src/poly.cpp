#include "conepos/poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "conepos/error.hpp"

namespace conepos {

Domain Domain::bounded(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a < b,
          "bounded domain needs finite endpoints a < b");
  return Domain(DomainKind::Bounded, a, b);
}

Domain Domain::half_line(double a) {
  require(std::isfinite(a), "half-line domain needs a finite left endpoint");
  return Domain(DomainKind::HalfLine, a, kInf);
}

Domain Domain::full_line() { return Domain(DomainKind::FullLine, -kInf, kInf); }

std::string Domain::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case DomainKind::Bounded:
      os << "[" << a_ << "," << b_ << "]";
      break;
    case DomainKind::HalfLine:
      os << "[" << a_ << ",inf)";
      break;
    case DomainKind::FullLine:
      os << "(-inf,inf)";
      break;
  }
  return os.str();
}

void require_degree_fits(int n, const Domain& domain) {
  require(n >= 1, "degree must be at least 1");
  if (domain.kind() == DomainKind::FullLine && n % 2 != 0) {
    throw InvalidArgument("the full line requires an even degree, got " +
                          std::to_string(n));
  }
}

Polynomial::Polynomial(Vector coeffs, Domain domain)
    : coeffs_(std::move(coeffs)), domain_(domain) {
  require(coeffs_.size() >= 1, "polynomial needs at least one coefficient");
}

double Polynomial::operator()(double t) const { return eval(coeffs_, t); }

Vector basis(int n, double t) {
  require(n >= 0, "basis degree must be nonnegative");
  Vector v = Vector::Zero(n + 1);
  if (std::isinf(t)) {
    v[n] = (t < 0 && n % 2 != 0) ? -1.0 : 1.0;
    return v;
  }
  v[0] = 1.0;
  for (int i = 1; i <= n; ++i) v[i] = v[i - 1] * t;
  return v;
}

Vector basis_derivative(int n, double t) {
  Vector v = Vector::Zero(n + 1);
  double power = 1.0;
  for (int i = 1; i <= n; ++i) {
    v[i] = i * power;
    power *= t;
  }
  return v;
}

double eval(const Vector& coeffs, double t) {
  double acc = 0.0;
  for (Eigen::Index i = coeffs.size() - 1; i >= 0; --i) acc = acc * t + coeffs[i];
  return acc;
}

Matrix derivative_operator(int n) {
  require(n >= 2, "derivative operator needs degree >= 2");
  Matrix L = Matrix::Zero(n, n + 1);
  for (int i = 0; i < n; ++i) L(i, i + 1) = i + 1;
  return L;
}

Vector differentiate(const Vector& coeffs) {
  const Eigen::Index n = coeffs.size() - 1;
  if (n <= 0) return Vector::Zero(1);
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = static_cast<double>(i + 1) * coeffs[i + 1];
  return d;
}

Vector poly_mul(const Vector& lhs, const Vector& rhs) {
  Vector out = Vector::Zero(lhs.size() + rhs.size() - 1);
  for (Eigen::Index i = 0; i < lhs.size(); ++i)
    for (Eigen::Index j = 0; j < rhs.size(); ++j) out[i + j] += lhs[i] * rhs[j];
  return out;
}

Vector resize_coeffs(const Vector& coeffs, int n) {
  Vector out = Vector::Zero(n + 1);
  const Eigen::Index keep = std::min<Eigen::Index>(coeffs.size(), n + 1);
  out.head(keep) = coeffs.head(keep);
  for (Eigen::Index i = keep; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0.0) throw InvalidArgument("cannot truncate a nonzero coefficient");
  }
  return out;
}

namespace {

int effective_degree(const Vector& c, double trim) {
  int d = static_cast<int>(c.size()) - 1;
  while (d > 0 && std::abs(c[d]) <= trim) --d;
  return d;
}

// Real roots of the polynomial with the given coefficients (degree >= 1,
// nonzero leading coefficient).
std::vector<double> real_roots(const Vector& c) {
  const int d = static_cast<int>(c.size()) - 1;
  std::vector<double> roots;
  if (d == 1) {
    roots.push_back(-c[0] / c[1]);
    return roots;
  }
  Matrix companion = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -c[i] / c[d];
  Eigen::EigenSolver<Matrix> solver(companion, false);
  for (const auto& z : solver.eigenvalues()) {
    if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z.real()))) roots.push_back(z.real());
  }
  return roots;
}

// Bisection on a sign change of p' around the rough root r.
double refine_critical_point(const Vector& dp, double r, double lo_bound, double hi_bound) {
  double delta = 1e-8 * (1.0 + std::abs(r));
  for (int expand = 0; expand < 30; ++expand, delta *= 2.0) {
    const double lo = std::max(lo_bound, r - delta);
    const double hi = std::min(hi_bound, r + delta);
    double flo = eval(dp, lo);
    const double fhi = eval(dp, hi);
    if ((flo <= 0.0 && fhi >= 0.0) || (flo >= 0.0 && fhi <= 0.0)) {
      double left = lo;
      double right = hi;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (left + right);
        const double fm = eval(dp, mid);
        if ((fm <= 0.0) == (flo <= 0.0)) {
          left = mid;
          flo = fm;
        } else {
          right = mid;
        }
      }
      return 0.5 * (left + right);
    }
  }
  return r;
}

}  // namespace

Minimum global_min(const Polynomial& p, double trim) {
  const Domain& dom = p.domain();
  const bool unbounded = dom.kind() != DomainKind::Bounded;
  const int d = effective_degree(p.coeffs(), unbounded ? trim : 0.0);
  const Vector c = p.coeffs().head(d + 1);

  if (unbounded && d >= 1) {
    const double lead = c[d];
    if (lead < 0.0) return {kInf, -kInf};
    if (dom.kind() == DomainKind::FullLine && d % 2 != 0) return {-kInf, -kInf};
  }

  Minimum best{0.0, kInf};
  auto consider = [&](double t) {
    const double v = eval(c, t);
    if (v < best.value) best = {t, v};
  };
  if (std::isfinite(dom.lower())) consider(dom.lower());
  if (std::isfinite(dom.upper())) consider(dom.upper());
  if (d == 0) {
    if (!std::isfinite(best.value)) best = {0.0, c[0]};
    return best;
  }

  for (double t : critical_points(c, dom)) consider(t);
  if (!std::isfinite(best.value)) best = {0.0, c[0]};
  return best;
}

std::vector<double> critical_points(const Vector& coeffs, const Domain& domain) {
  std::vector<double> out;
  if (coeffs.size() < 2) return out;
  Vector dp = differentiate(coeffs);
  int dd = static_cast<int>(dp.size()) - 1;
  while (dd > 0 && dp[dd] == 0.0) --dd;
  if (dd < 1) return out;
  dp.conservativeResize(dd + 1);
  for (double r : real_roots(dp)) {
    if (!domain.contains_interior(r)) continue;
    out.push_back(refine_critical_point(dp, r, domain.lower(), domain.upper()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double default_positivity_tol(const Vector& coeffs) { return 1e-9 * coeffs.norm(); }

bool is_positive(const Polynomial& p, double tol) {
  require(tol >= 0.0, "positivity tolerance must be nonnegative");
  return global_min(p, tol).value >= -tol;
}

bool is_positive(const Polynomial& p) {
  return is_positive(p, default_positivity_tol(p.coeffs()));
}

}  // namespace conepos
