#include "conepos/regression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "conepos/error.hpp"

namespace conepos {

namespace {

Matrix design(const std::vector<double>& t, int n) {
  Matrix F(static_cast<Eigen::Index>(t.size()), n + 1);
  for (std::size_t i = 0; i < t.size(); ++i) F.row(static_cast<Eigen::Index>(i)) = basis(n, t[i]).transpose();
  return F;
}

Matrix spd_inverse(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " is not positive definite");
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

}  // namespace

SufficientStats ols_fit(const std::vector<Observation>& data, int n) {
  require(n >= 1, "degree must be at least 1");
  std::vector<double> t;
  Vector y(static_cast<Eigen::Index>(data.size()));
  std::set<double> distinct;
  for (std::size_t i = 0; i < data.size(); ++i) {
    require(std::isfinite(data[i].t) && std::isfinite(data[i].y), "observations must be finite");
    t.push_back(data[i].t);
    y[static_cast<Eigen::Index>(i)] = data[i].y;
    distinct.insert(data[i].t);
  }
  require(static_cast<int>(distinct.size()) >= n + 1, "design is rank deficient");
  const int nu = static_cast<int>(data.size()) - n - 1;
  require(nu >= 1, "no residual degrees of freedom for the variance estimate");

  const Matrix F = design(t, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(F);
  if (qr.rank() < n + 1) throw InvalidArgument("design is rank deficient");
  const Vector c = qr.solve(y);
  const Vector r = y - F * c;

  SufficientStats s;
  s.c_hat = c;
  s.Sigma0 = spd_inverse(F.transpose() * F, "F'F");
  s.Sigma0 = 0.5 * (s.Sigma0 + s.Sigma0.transpose());
  s.sigma2_hat = r.squaredNorm() / nu;
  s.nu = nu;
  return s;
}

SufficientStats two_sample_difference(const SufficientStats& a, const SufficientStats& b) {
  a.validate();
  b.validate();
  require(a.degree() == b.degree(), "the two fits have different degrees");
  require(a.known_variance() == b.known_variance(), "cannot mix known and estimated variances");
  SufficientStats out;
  out.c_hat = b.c_hat - a.c_hat;
  if (a.known_variance()) {
    if (*a.sigma2 == *b.sigma2) {
      out.Sigma0 = a.Sigma0 + b.Sigma0;
      out.sigma2 = *a.sigma2;
    } else {
      out.Sigma0 = *a.sigma2 * a.Sigma0 + *b.sigma2 * b.Sigma0;
      out.sigma2 = 1.0;
    }
  } else {
    // pooled, assuming a common error variance
    out.nu = a.nu + b.nu;
    out.sigma2_hat = (a.nu * *a.sigma2_hat + b.nu * *b.sigma2_hat) / out.nu;
    out.Sigma0 = a.Sigma0 + b.Sigma0;
  }
  return out;
}

SufficientStats derivative_transform(const SufficientStats& stats) {
  stats.validate();
  const int n = stats.degree();
  require(n >= 2, "the derivative transform needs degree >= 2");
  const Matrix L = derivative_operator(n);
  SufficientStats out = stats;
  out.c_hat = L * stats.c_hat;
  out.Sigma0 = L * stats.Sigma0 * L.transpose();
  return out;
}

Matrix IntraclassParams::matrix(int p) const {
  return tau * ((1.0 - rho) * Matrix::Identity(p, p) + rho * Matrix::Ones(p, p));
}

IntraclassParams fit_intraclass_covariance(const Matrix& residuals) {
  const auto m = residuals.rows();
  const auto p = residuals.cols();
  require(m >= 1 && p >= 2, "need at least one subject and two time points");
  const Matrix S = residuals.transpose() * residuals / static_cast<double>(m);
  // Eigenvalues of the structure: along 1 and on its complement.
  double l1 = S.sum() / p;
  double l2 = (S.trace() - l1) / (p - 1);
  const double scale = S.trace() / p;
  require(scale > 0.0, "residuals are identically zero");
  const double floor = 1e-10 * scale;
  l1 = std::max(l1, floor);
  l2 = std::max(l2, floor);
  IntraclassParams out;
  out.tau = (l1 + (p - 1) * l2) / p;
  out.rho = (l1 - l2) / (p * out.tau);
  return out;
}

namespace {

double group_loglik(const Matrix& R, const IntraclassParams& cov) {
  const int p = static_cast<int>(R.cols());
  const double l1 = cov.tau * (1.0 + (p - 1) * cov.rho);
  const double l2 = cov.tau * (1.0 - cov.rho);
  const Matrix inv = spd_inverse(cov.matrix(p), "intraclass covariance");
  double quad = 0.0;
  for (Eigen::Index h = 0; h < R.rows(); ++h) quad += R.row(h) * inv * R.row(h).transpose();
  const double logdet = std::log(l1) + (p - 1) * std::log(l2);
  return -0.5 * (R.rows() * (logdet + p * std::log(2.0 * std::numbers::pi)) + quad);
}

}  // namespace

IntraclassModel intraclass_fit(const std::vector<GroupedObservation>& data, int n, const IntraclassOptions& opts) {
  require(n >= 1, "degree must be at least 1");
  require(!data.empty(), "no observations");
  std::set<double> tset;
  std::map<std::string, std::map<double, double>> subjects[2];
  for (const auto& o : data) {
    require(o.group == 0 || o.group == 1, "group must be 0 or 1");
    require(std::isfinite(o.t) && std::isfinite(o.y), "observations must be finite");
    tset.insert(o.t);
    auto& row = subjects[o.group][o.subject];
    require(!row.count(o.t), "duplicate time point for subject " + o.subject);
    row[o.t] = o.y;
  }
  const std::vector<double> traw(tset.begin(), tset.end());
  const int p = static_cast<int>(traw.size());
  require(p >= n + 1, "fewer time points than coefficients");
  require(p >= 2, "need at least two time points");

  IntraclassModel model;
  model.center = opts.center.value_or(0.5 * (traw.front() + traw.back()));
  for (double t : traw) model.timepoints.push_back(t - model.center);

  Matrix X[2];
  for (int g = 0; g < 2; ++g) {
    const auto m = static_cast<Eigen::Index>(subjects[g].size());
    require(m >= 2, "each group needs at least two subjects");
    X[g].resize(m, p);
    Eigen::Index h = 0;
    for (const auto& [id, row] : subjects[g]) {
      require(static_cast<int>(row.size()) == p, "subject " + id + " is missing time points");
      int k = 0;
      for (const auto& [t, y] : row) X[g](h, k++) = y;
      ++h;
    }
  }
  model.n0 = static_cast<int>(X[0].rows());
  model.n1 = static_cast<int>(X[1].rows());
  const Vector xbar0 = X[0].colwise().mean().transpose();
  const Vector xbar1 = X[1].colwise().mean().transpose();
  const Vector d = xbar1 - xbar0;
  const Matrix F = design(model.timepoints, n);

  IntraclassParams cov[2];
  auto residuals = [&](int g, const Vector& mean) {
    return Matrix(X[g].rowwise() - mean.transpose());
  };
  cov[0] = fit_intraclass_covariance(residuals(0, xbar0));
  cov[1] = fit_intraclass_covariance(residuals(1, xbar1));

  Vector mu, c;
  Matrix Sigma;
  double prev = -kInf;
  for (int it = 1;; ++it) {
    const Matrix S0 = cov[0].matrix(p);
    const Matrix S1 = cov[1].matrix(p);
    const Matrix V = S0 / model.n0 + S1 / model.n1;
    const Matrix Vinv = spd_inverse(V, "V");
    Sigma = spd_inverse(F.transpose() * Vinv * F, "F'V^{-1}F");
    c = Sigma * F.transpose() * Vinv * d;
    const Matrix P0 = model.n0 * spd_inverse(S0, "Sigma_0");
    const Matrix P1 = model.n1 * spd_inverse(S1, "Sigma_1");
    mu = (P0 + P1).ldlt().solve(P0 * xbar0 + P1 * (xbar1 - F * c));

    cov[0] = fit_intraclass_covariance(residuals(0, mu));
    cov[1] = fit_intraclass_covariance(residuals(1, mu + F * c));
    const double ll = group_loglik(residuals(0, mu), cov[0]) + group_loglik(residuals(1, mu + F * c), cov[1]);
    model.loglik_trace.push_back(ll);
    model.iterations = it;
    if (ll - prev < opts.tol) break;
    if (it >= opts.max_iter) throw NumericalError("intraclass fit did not converge");
    prev = ll;
  }
  // final GLS step at the converged covariances
  const Matrix V = cov[0].matrix(p) / model.n0 + cov[1].matrix(p) / model.n1;
  const Matrix Vinv = spd_inverse(V, "V");
  Sigma = spd_inverse(F.transpose() * Vinv * F, "F'V^{-1}F");
  c = Sigma * F.transpose() * Vinv * d;

  model.mu = mu;
  model.c = c;
  model.cov0 = cov[0];
  model.cov1 = cov[1];
  model.stats = SufficientStats::known(c, 0.5 * (Sigma + Sigma.transpose()), 1.0);
  return model;
}

namespace {

std::string clean(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch) || ch == '"'; }),
          s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(clean(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& path, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw InvalidArgument(path + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  int lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (clean(line).empty()) continue;
    auto cells = split(line);
    if (!seen_header) {
      for (auto& c : cells) std::transform(c.begin(), c.end(), c.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (cells != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw InvalidArgument(path + ": expected header " + want);
      }
      seen_header = true;
      continue;
    }
    if (cells.size() != header.size())
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " columns");
    cells.push_back(std::to_string(lineno));
    rows.push_back(std::move(cells));
  }
  if (!seen_header) throw InvalidArgument(path + ": empty file");
  return rows;
}

}  // namespace

std::vector<std::string> read_csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (clean(line).empty()) continue;
    auto cells = split(line);
    for (auto& c : cells) std::transform(c.begin(), c.end(), c.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return cells;
  }
  return {};
}

std::vector<Observation> read_observations_csv(const std::string& path) {
  std::vector<Observation> out;
  for (const auto& r : read_rows(path, {"t", "y"})) {
    const int line = std::stoi(r.back());
    out.push_back({to_double(r[0], path, line), to_double(r[1], path, line)});
  }
  return out;
}

std::vector<GroupedObservation> read_grouped_csv(const std::string& path) {
  std::vector<GroupedObservation> out;
  for (const auto& r : read_rows(path, {"group", "subject", "t", "y"})) {
    const int line = std::stoi(r.back());
    const double g = to_double(r[0], path, line);
    if (g != 0.0 && g != 1.0) throw InvalidArgument(path + ":" + std::to_string(line) + ": group must be 0 or 1");
    out.push_back({static_cast<int>(g), r[1], to_double(r[2], path, line), to_double(r[3], path, line)});
  }
  return out;
}

}  // namespace conepos
