#include "conepos/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "conepos/error.hpp"
#include "conepos/inference.hpp"
#include "conepos/parallel.hpp"
#include "conepos/regression.hpp"

namespace conepos::cli {

using nlohmann::json;

namespace {

// Numbers with 17 significant digits, non-finite values as null.
void write_json(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        write_json(it.value(), out, indent, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      // numeric arrays stay on one line
      bool flat = true;
      for (const auto& v : j) flat = flat && v.is_primitive();
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat ? ", " : ",";
        if (!flat) out += "\n" + pad;
        write_json(j[i], out, indent, depth + 1);
      }
      if (!flat && !j.empty()) out += "\n" + close;
      out += "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

std::string format_json(const json& j) {
  std::string out;
  write_json(j, out, 2, 0);
  return out + "\n";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
  return a;
}

Matrix matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "matrix must be a nonempty JSON array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Matrix m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& r = j[static_cast<std::size_t>(i)];
    require(r.is_array() && static_cast<Eigen::Index>(r.size()) == rows, "matrix must be square");
    for (Eigen::Index k = 0; k < rows; ++k) {
      require(r[static_cast<std::size_t>(k)].is_number(), "matrix entries must be numbers");
      m(i, k) = r[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "expected a nonempty numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), "array entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_arg(const std::string& text) {
  const std::string body = !text.empty() && text[0] == '@' ? slurp(text.substr(1)) : text;
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("invalid JSON: ") + e.what());
  }
}

json stats_to_json(const SufficientStats& s) {
  json j;
  j["c_hat"] = to_json(s.c_hat);
  j["Sigma0"] = to_json(s.Sigma0);
  if (s.sigma2) {
    j["sigma2"] = *s.sigma2;
  } else {
    j["sigma2_hat"] = *s.sigma2_hat;
    j["nu"] = s.nu;
  }
  return j;
}

SufficientStats stats_from_json(json j) {
  if (j.contains("result") && j["result"].contains("stats")) j = j["result"]["stats"];
  require(j.is_object() && j.contains("c_hat") && j.contains("Sigma0"), "stats need c_hat and Sigma0");
  const Vector c = vector_from_json(j["c_hat"]);
  const Matrix S = matrix_from_json(j["Sigma0"]);
  if (j.contains("sigma2_hat")) {
    require(j.contains("nu"), "an estimated variance needs nu");
    return SufficientStats::estimated(c, S, j["sigma2_hat"].get<double>(), j["nu"].get<int>());
  }
  return SufficientStats::known(c, S, j.value("sigma2", 1.0));
}

json weights_to_json(const WeightVector& w) {
  json j;
  j["status"] = to_string(w.status);
  j["weights"] = to_json(w.weights);
  j["est_error"] = to_json(w.est_error);
  if (w.bounds) j["bounds"] = {{"u", to_json(w.bounds->u)}, {"v", to_json(w.bounds->v)}};
  const ExtremeWeights& e = w.extremes;
  j["extremes"] = {{"w0", e.w0}, {"w1", e.w1}, {"wn", e.wn}, {"wn1", e.wn1},
                   {"e0", e.e0}, {"e1", e.e1}, {"en", e.en}, {"en1", e.en1},
                   {"w0_lower", e.w0_lower}, {"e0_lower", e.e0_lower}};
  return j;
}

json kkt_to_json(const KktReport& k) {
  return {{"primal_feasibility", k.primal_feasibility},
          {"complementarity", k.complementarity},
          {"dual_feasibility", k.dual_feasibility},
          {"touching_points", k.touching_points},
          {"ok", k.ok()}};
}

json projection_to_json(const ProjectionResult& r) {
  return {{"c_hat", to_json(r.c_hat)},   {"c_K", to_json(r.c_K)},       {"residual", to_json(r.residual)},
          {"lambda01", r.lambda01},      {"lambda12", r.lambda12},      {"path", r.path},
          {"duality_gap", r.duality_gap}, {"kkt", kkt_to_json(r.kkt)}};
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

struct Common {
  std::string domain = "0,1";
  std::string metric;
  int degree = 0;
  int threads = 0;
  double rel_tol = 1e-3;
  int order = 7;
  long max_evals = 20'000'000;
};

void add_cubature_flags(CLI::App* app, Common& c) {
  app->add_option("--rel-tol", c.rel_tol, "relative cubature tolerance")->capture_default_str();
  app->add_option("--order", c.order, "Gauss-Legendre order per cell")->capture_default_str();
  app->add_option("--max-evals", c.max_evals, "cubature evaluation budget")->capture_default_str();
}

CubatureOptions cubature(const Common& c) {
  CubatureOptions o;
  o.rel_tol = c.rel_tol;
  o.order = c.order;
  o.max_evaluations = c.max_evals;
  o.threads = resolve_threads(c.threads);
  return o;
}

json cubature_config(const Common& c) {
  return {{"rel_tol", c.rel_tol}, {"order", c.order}, {"max_evals", c.max_evals}};
}

// Stats from --stats, or from --coeffs with --metric as covariance.
struct StatsSource {
  std::string stats;
  std::string coeffs;
  std::optional<double> sigma2_hat;
  int nu = 0;
  bool derivative = false;
};

void add_stats_flags(CLI::App* app, StatsSource& s, Common& c) {
  app->add_option("--stats", s.stats, "sufficient statistics as JSON or @file (output of fit)");
  app->add_option("--coeffs", s.coeffs, "estimate c_hat, comma separated (with --metric as its covariance)");
  app->add_option("--metric", c.metric, "covariance of c_hat: JSON matrix, @file or preset");
  app->add_option("--sigma2-hat", s.sigma2_hat, "variance estimate; switches to the unknown-variance test");
  app->add_option("--nu", s.nu, "degrees of freedom of --sigma2-hat");
  app->add_flag("--derivative", s.derivative, "test the derivative L c instead of c");
}

SufficientStats load_stats(const StatsSource& s, const Common& c) {
  SufficientStats stats;
  if (!s.stats.empty()) {
    require(s.coeffs.empty(), "give either --stats or --coeffs");
    stats = stats_from_json(parse_json_arg(s.stats));
  } else {
    require(!s.coeffs.empty(), "give --stats or --coeffs");
    require(!c.metric.empty(), "--coeffs needs --metric");
    const auto v = parse_list(s.coeffs);
    const Vector ch = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    const Matrix cov = parse_metric(c.metric, static_cast<int>(v.size())).dual();
    stats = s.sigma2_hat ? SufficientStats::estimated(ch, cov, *s.sigma2_hat, s.nu) : SufficientStats::known(ch, cov);
  }
  if (s.derivative) stats = derivative_transform(stats);
  return stats;
}

std::vector<double> parse_grid(const std::string& text) {
  static const std::regex range(R"(^\s*([^:]+):([^:]+):(\d+)\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, range)) {
    const double a = std::stod(m[1]);
    const double b = std::stod(m[2]);
    const int k = std::stoi(m[3]);
    require(k >= 2 && a < b, "grid a:b:k needs a < b and k >= 2");
    std::vector<double> out;
    for (int i = 0; i < k; ++i) out.push_back(i == k - 1 ? b : a + (b - a) * i / (k - 1));
    return out;
  }
  return parse_list(text);
}

json make_output(const std::string& command, json config, json result, json diagnostics) {
  json j;
  j["command"] = command;
  j["config"] = std::move(config);
  j["result"] = std::move(result);
  j["diagnostics"] = std::move(diagnostics);
  return j;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Likelihood ratio tests for positivity of a polynomial regression curve", "conepos"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--threads", common.threads, "worker threads (default: CONEPOS_THREADS, then all cores)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit a polynomial by least squares or the intraclass growth model");
  std::string data_path;
  std::optional<double> center;
  fit->add_option("--data", data_path, "CSV with header t,y or group,subject,t,y")->required();
  fit->add_option("--degree", common.degree, "polynomial degree")->required();
  fit->add_option("--center", center, "subtracted from t in the grouped model (default: design midpoint)");

  // project
  auto* proj = app.add_subcommand("project", "project an estimate onto the cone of nonnegative polynomials");
  std::string coeffs;
  proj->add_option("--coeffs", coeffs, "coefficients c_0..c_n, comma separated")->required();
  proj->add_option("--degree", common.degree, "degree (checked against --coeffs)");
  proj->add_option("--domain", common.domain, "a,b or a,inf or -inf,inf")->capture_default_str();
  proj->add_option("--metric", common.metric, "covariance: JSON matrix, @file or preset")->required();

  // weights
  auto* wts = app.add_subcommand("weights", "mixing weights of the null distribution");
  wts->add_option("--degree", common.degree, "polynomial degree")->required();
  wts->add_option("--domain", common.domain, "a,b or a,inf or -inf,inf")->capture_default_str();
  wts->add_option("--metric", common.metric, "covariance: JSON matrix, @file or preset")->required();
  add_cubature_flags(wts, common);

  // test
  auto* tst = app.add_subcommand("test", "likelihood ratio tests of c = 0 vs positivity and positivity vs all");
  StatsSource src;
  add_stats_flags(tst, src, common);
  tst->add_option("--domain", common.domain, "a,b or a,inf or -inf,inf")->capture_default_str();
  add_cubature_flags(tst, common);

  // band
  auto* bnd = app.add_subcommand("band", "simultaneous lower confidence band, written as CSV t,estimate,lower");
  BandSpec spec;
  std::string family = "pointwise", grid, scaling = "s", format = "csv";
  add_stats_flags(bnd, src, common);
  bnd->add_option("--domain", common.domain, "a,b or a,inf or -inf,inf")->capture_default_str();
  bnd->add_option("--alpha", spec.alpha, "level")->capture_default_str();
  bnd->add_option("--family", family, "pointwise or integral")->capture_default_str();
  bnd->add_option("--grid", grid, "points as a:b:k or a comma list")->required();
  bnd->add_option("--t0", spec.t0, "lower limit of the integral family")->capture_default_str();
  bnd->add_option("--scaling", scaling, "variance scaling for estimated variance: s or sqrt_s")
      ->capture_default_str();
  bnd->add_option("--format", format, "csv or json")->capture_default_str();
  add_cubature_flags(bnd, common);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo null distribution of the statistics");
  McOptions mc;
  std::string a_list = "0", b_list = "0";
  int sim_nu = 0;
  bool compare = false;
  sim->add_option("--degree", common.degree, "polynomial degree")->required();
  sim->add_option("--domain", common.domain, "a,b or a,inf or -inf,inf")->capture_default_str();
  sim->add_option("--metric", common.metric, "covariance: JSON matrix, @file or preset")->required();
  sim->add_option("--draws", mc.draws, "number of null draws")->capture_default_str();
  sim->add_option("--seed", mc.seed, "random seed")->capture_default_str();
  sim->add_option("--a", a_list, "lambda01 thresholds, comma separated")->capture_default_str();
  sim->add_option("--b", b_list, "lambda12 thresholds, comma separated")->capture_default_str();
  sim->add_option("--nu", sim_nu, "also report beta statistics with this many degrees of freedom");
  sim->add_flag("--compare", compare, "compare against the mixture formula (degree <= 4)");
  add_cubature_flags(sim, common);

  std::vector<std::string> argv_store{"conepos"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    throw InvalidArgument(e.what());
  }

  if (fit->parsed()) {
    const auto header = read_csv_header(data_path);
    json config = {{"data", data_path}, {"degree", common.degree}};
    if (header == std::vector<std::string>{"t", "y"}) {
      const SufficientStats s = ols_fit(read_observations_csv(data_path), common.degree);
      out << format_json(make_output("fit", config, {{"model", "ols"}, {"stats", stats_to_json(s)}},
                                     {{"nu", s.nu}}));
      return 0;
    }
    IntraclassOptions opts;
    opts.center = center;
    const IntraclassModel m = intraclass_fit(read_grouped_csv(data_path), common.degree, opts);
    config["center"] = m.center;
    json result = {{"model", "intraclass"},
                   {"stats", stats_to_json(m.stats)},
                   {"timepoints", m.timepoints},
                   {"mu", to_json(m.mu)},
                   {"tau0", m.cov0.tau},
                   {"rho0", m.cov0.rho},
                   {"tau1", m.cov1.tau},
                   {"rho1", m.cov1.rho},
                   {"n0", m.n0},
                   {"n1", m.n1}};
    json diag = {{"iterations", m.iterations},
                 {"loglik", m.loglik_trace.back()},
                 {"approximate", true},
                 {"note", "Sigma is the plug-in estimate treated as known"}};
    out << format_json(make_output("fit", config, result, diag));
    return 0;
  }

  if (proj->parsed()) {
    const auto v = parse_list(coeffs);
    const int n = static_cast<int>(v.size()) - 1;
    if (common.degree) require(common.degree == n, "--degree does not match --coeffs");
    const Domain dom = parse_domain(common.domain);
    const MetricPair metric = parse_metric(common.metric, n + 1);
    const Vector c = Eigen::Map<const Vector>(v.data(), n + 1);
    const ProjectionResult r = project(c, metric, dom);
    if (!r.converged) throw NumericalError("projection did not converge");
    json config = {{"degree", n}, {"domain", dom.to_string()}, {"metric", common.metric}};
    out << format_json(make_output("project", config, projection_to_json(r),
                                   {{"iterations", r.iterations}, {"converged", r.converged}}));
    return 0;
  }

  if (wts->parsed()) {
    const Domain dom = parse_domain(common.domain);
    const MetricPair metric = parse_metric(common.metric, common.degree + 1);
    const WeightVector w = compute_weights(common.degree, dom, metric, cubature(common));
    json config = {{"degree", common.degree}, {"domain", dom.to_string()}, {"metric", common.metric},
                   {"cubature", cubature_config(common)}};
    json diag = {{"evaluations", w.extremes.evaluations}, {"converged", w.extremes.converged},
                 {"total_error", w.total_error()}};
    if (w.status == WeightStatus::Exact) {
      double odd = 0.0, even = 0.0;
      for (Eigen::Index i = 0; i < w.weights.size(); ++i) (i % 2 ? odd : even) += w.weights[i];
      diag["even_sum"] = even;
      diag["odd_sum"] = odd;
    }
    out << format_json(make_output("weights", config, weights_to_json(w), diag));
    return 0;
  }

  if (tst->parsed() || bnd->parsed()) {
    const SufficientStats stats = load_stats(src, common);
    const int n = stats.degree();
    const Domain dom = parse_domain(common.domain);
    require_degree_fits(n, dom);
    const MetricPair metric = MetricPair::from_covariance(stats.covariance());
    const WeightVector w = compute_weights(n, dom, metric, cubature(common));
    json config = {{"domain", dom.to_string()}, {"stats", stats_to_json(stats)}, {"derivative", src.derivative},
                   {"cubature", cubature_config(common)}};

    if (tst->parsed()) {
      InferenceOptions io;
      io.cubature = cubature(common);
      const TestReport r = lrt(stats, dom, w, io);
      json result = {{"mode", to_string(r.mode)},
                     {"lambda01", r.lambda01},
                     {"lambda12", r.lambda12},
                     {"p01", r.p01},
                     {"p12", r.p12},
                     {"weights", weights_to_json(r.weights)},
                     {"projection", projection_to_json(r.projection)}};
      if (r.mode == TestMode::UnknownVariance) {
        result["nu"] = r.nu;
        result["beta01"] = r.beta01;
        result["beta12"] = r.beta12;
      }
      if (r.p01_interval) result["p01_interval"] = {r.p01_interval->first, r.p01_interval->second};
      if (r.p12_interval) result["p12_interval"] = {r.p12_interval->first, r.p12_interval->second};
      json diag = {{"evaluations", w.extremes.evaluations},
                   {"weight_error", w.total_error()},
                   {"projection_iterations", r.projection.iterations}};
      out << format_json(make_output("test", config, result, diag));
      return 0;
    }

    require(format == "csv" || format == "json", "--format must be csv or json");
    if (family == "pointwise") {
      spec.family = MeasureFamily::Pointwise;
    } else if (family == "integral") {
      spec.family = MeasureFamily::Integral;
    } else {
      throw InvalidArgument("--family must be pointwise or integral");
    }
    spec.grid = parse_grid(grid);
    spec.scaling = variance_scaling_from_string(scaling);
    const Band b = band(stats, dom, spec, w);
    if (format == "csv") {
      out << "t,estimate,lower\n";
      for (const auto& s : b.samples) out << fmt(s.t) << "," << fmt(s.estimate) << "," << fmt(s.lower) << "\n";
      return 0;
    }
    json samples = json::array();
    for (const auto& s : b.samples)
      samples.push_back({{"t", s.t}, {"estimate", s.estimate}, {"lower", s.lower}, {"scale", s.scale}});
    config["alpha"] = spec.alpha;
    config["family"] = to_string(spec.family);
    config["t0"] = spec.t0;
    config["scaling"] = to_string(spec.scaling);
    out << format_json(make_output("band", config,
                                   {{"critical", b.critical},
                                    {"unknown_variance", b.unknown_variance},
                                    {"samples", samples},
                                    {"weights", weights_to_json(w)}},
                                   {{"weight_error", w.total_error()}}));
    return 0;
  }

  if (sim->parsed()) {
    const Domain dom = parse_domain(common.domain);
    const MetricPair metric = parse_metric(common.metric, common.degree + 1);
    mc.threads = resolve_threads(common.threads);
    const McNullSample sample = mc_null_oracle(dom, metric, mc);
    const auto as = parse_list(a_list);
    const auto bs = parse_list(b_list);
    std::optional<WeightVector> w;
    if (compare) {
      require(common.degree <= 4, "--compare needs degree <= 4");
      w = compute_weights(common.degree, dom, metric, cubature(common));
    }
    json table = json::array();
    for (double a : as) {
      for (double b : bs) {
        json row = {{"a", a}, {"b", b}, {"lambda", estimate_json(sample.joint_survival(a, b))}};
        if (w) row["chibar"] = chibar_joint_survival(a, b, *w);
        table.push_back(row);
      }
    }
    json result = {{"draws", sample.size()},
                   {"failures", sample.failures()},
                   {"point_mass_zero", estimate_json(sample.point_mass_zero())},
                   {"joint_survival", table}};
    if (sim_nu > 0) {
      json beta = json::array();
      for (double a : as) {
        for (double b : bs) {
          // thresholds are read on the lambda scale and mapped to beta
          const double ba = a / (a + sim_nu), bb = b / (b + sim_nu);
          json row = {{"a", ba}, {"b", bb}, {"beta", estimate_json(sample.beta_joint_survival(ba, bb, sim_nu))}};
          if (w) row["betabar"] = betabar_joint_survival(ba, bb, *w, sim_nu);
          beta.push_back(row);
        }
      }
      result["beta_joint_survival"] = beta;
    }
    json config = {{"degree", common.degree}, {"domain", dom.to_string()}, {"metric", common.metric},
                   {"draws", mc.draws}, {"seed", mc.seed}};
    if (sim_nu > 0) config["nu"] = sim_nu;
    out << format_json(make_output("simulate", config, result, {{"failures", sample.failures()}}));
    return 0;
  }
  (void)err;
  return 0;
}

void report_error(std::ostream& err, const std::string& type, const std::string& message) {
  err << json({{"error", {{"type", type}, {"message", message}}}}).dump() << "\n";
}

}  // namespace

Domain parse_domain(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (t == "full" || t == "r") return Domain::full_line();
  if (t.rfind("half:", 0) == 0) return Domain::half_line(parse_list(t.substr(5)).at(0));
  const auto comma = t.find(',');
  require(comma != std::string::npos, "domain must look like a,b");
  auto value = [](const std::string& s) {
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    return parse_list(s).at(0);
  };
  const double a = value(t.substr(0, comma));
  const double b = value(t.substr(comma + 1));
  if (a == -kInf && b == kInf) return Domain::full_line();
  require(a != -kInf, "a left-infinite domain is only supported as the full line");
  if (b == kInf) return Domain::half_line(a);
  return Domain::bounded(a, b);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    require(used == cell.size() && used > 0 && std::isfinite(v), "not a number: '" + cell + "'");
    out.push_back(v);
  }
  require(!out.empty(), "empty number list");
  return out;
}

MetricPair parse_metric(const std::string& text, int size) {
  static const std::regex preset(R"(^(hilbert|invhilbert|identity)(\d*)$)");
  std::smatch m;
  if (std::regex_match(text, m, preset)) {
    const int k = m[2].length() ? std::stoi(m[2]) : size;
    require(k == size, "metric preset " + text + " does not match " + std::to_string(size) + " coefficients");
    if (m[1] == "identity") return MetricPair::identity(k);
    if (m[1] == "hilbert") return MetricPair::from_covariance(hilbert_matrix(k));
    return MetricPair::from_precision(hilbert_matrix(k));
  }
  const json j = parse_json_arg(text);
  MetricPair pair = MetricPair::identity(1);
  if (j.is_object()) {
    if (j.contains("covariance")) {
      pair = MetricPair::from_covariance(matrix_from_json(j["covariance"]));
    } else if (j.contains("precision")) {
      pair = MetricPair::from_precision(matrix_from_json(j["precision"]));
    } else {
      throw InvalidArgument("metric object needs a covariance or precision entry");
    }
  } else {
    pair = MetricPair::from_covariance(matrix_from_json(j));
  }
  require(pair.size() == size, "metric is " + std::to_string(pair.size()) + "x" + std::to_string(pair.size()) +
                                   " but there are " + std::to_string(size) + " coefficients");
  return pair;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const InvalidArgument& e) {
    report_error(err, "usage", e.what());
    return 2;
  } catch (const NumericalError& e) {
    report_error(err, "numerical", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    report_error(err, "usage", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error(err, "numerical", e.what());
    return 3;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace conepos::cli
