#include "steinlab/clt_bench.hpp"
#include "steinlab/inequalities.hpp"
#include "steinlab/io.hpp"
#include "steinlab/parallel.hpp"
#include "steinlab/semigroups.hpp"
#include "steinlab/special.hpp"
#include "steinlab/stein.hpp"
#include "steinlab/test_functions.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef STEINLAB_VERSION
#define STEINLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace steinlab;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  int jobs = 1;
  double budget_scale = 1.0;
};

struct Context {
  const Options& opt;
  const Json& config;
  // entry i runs on seed mix_substream(opt.seed, i), so results do not depend on --jobs
  std::uint64_t entry_seed(std::size_t i) const { return mix_substream(opt.seed, i); }
  std::size_t budget(const Json& entry, std::size_t fallback) const {
    const double b = entry.value("budget", config.value("budget", static_cast<double>(fallback)));
    return static_cast<std::size_t>(std::max(100.0, std::round(b * opt.budget_scale)));
  }
};

struct Outputs {
  std::string csv;
  Json summary;
  bool pass = true;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::vector<double> numbers_of(const Json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

TestFunction polynomial_1d(std::vector<double> a, const std::string& name) {
  auto eval = [a](double x, int order) {
    double acc = 0.0;
    for (std::size_t i = a.size(); i-- > static_cast<std::size_t>(order);) {
      double c = a[i];
      for (int k = 0; k < order; ++k) c *= static_cast<double>(i - static_cast<std::size_t>(k));
      acc = acc * x + c;
    }
    return acc;
  };
  return TestFunction::callback(
      1, [eval](const Eigen::VectorXd& x) { return eval(x(0), 0); },
      [eval](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, eval(x(0), 1)); },
      [eval](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Constant(1, 1, eval(x(0), 2)); }, name);
}

// "dictionary", "dict:<name>", "hermite:k1,k2", "coord:j", "bump:c,w[,a]",
// "cos:xi..", "sin:xi..", "const:c", "poly:a0,a1,.."
std::vector<TestFunction> parse_functions(const std::string& s, int d) {
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (head == "dictionary") return scalar_dictionary(d);
  if (head == "smooth_dictionary") return smooth_dictionary(d);
  TestFunction f;
  if (head == "dict") {
    for (auto& g : scalar_dictionary(d))
      if (g.name == rest) return {g};
    throw std::invalid_argument("unknown dictionary member " + rest);
  } else if (head == "hermite") {
    std::vector<int> k;
    for (double v : split_numbers(rest)) k.push_back(static_cast<int>(v));
    f = TestFunction::hermite(k);
  } else if (head == "coord") {
    f = TestFunction::coordinate(d, std::stoi(rest));
  } else if (head == "bump") {
    const auto v = split_numbers(rest);
    if (v.size() < 2) throw std::invalid_argument("bump needs center,width");
    f = TestFunction::bump_1d(v[0], v[1], v.size() > 2 ? v[2] : 1.0);
  } else if (head == "cos" || head == "sin") {
    const auto v = split_numbers(rest);
    f = TestFunction::character(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())),
                                head == "sin" ? -std::numbers::pi / 2 : 0.0);
  } else if (head == "const") {
    f = TestFunction::constant(d, std::stod(rest));
  } else if (head == "poly") {
    f = polynomial_1d(split_numbers(rest), s);
  } else {
    throw std::invalid_argument("unknown test function " + s);
  }
  f.name = s;
  return {f};
}

TestFunction parse_function(const std::string& s, int d) {
  auto fs = parse_functions(s, d);
  if (fs.size() != 1) throw std::invalid_argument("expected a single test function: " + s);
  return fs.front();
}

std::vector<TestFunction> functions_of(const Json& entry, int d) {
  std::vector<TestFunction> out;
  const Json& j = entry.at("functions");
  if (j.is_string()) return parse_functions(j.get<std::string>(), d);
  for (const auto& s : j)
    for (auto& f : parse_functions(s.get<std::string>(), d)) out.push_back(f);
  return out;
}

std::vector<std::pair<TestFunction, TestFunction>> pairs_of(const Json& entry, int d) {
  std::vector<std::pair<TestFunction, TestFunction>> out;
  for (const auto& p : entry.at("pairs"))
    out.emplace_back(parse_function(p.at(0).get<std::string>(), d), parse_function(p.at(1).get<std::string>(), d));
  return out;
}

std::vector<Eigen::MatrixXd> sigmas_of(const Json& entry, int d) {
  if (entry.contains("sigmas")) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& s : entry.at("sigmas")) out.push_back(matrix_from_json(s));
    return out;
  }
  if (entry.contains("sigma")) return {matrix_from_json(entry.at("sigma"))};
  return {Eigen::MatrixXd::Identity(d, d)};
}

std::string fmt(double v) { return format_number(v); }

// ---------------------------------------------------------------- verify

void check_stable_moment_guard(const Json& e) {
  for (double alpha : numbers_of(e.at("alpha")))
    for (double p1 : numbers_of(e.at("p1")))
      if (!(p1 < alpha)) throw std::invalid_argument("moment guard: stable_lp_poincare needs p1 < alpha (p1 = " +
                                                     fmt(p1) + ", alpha = " + fmt(alpha) + ")");
}

std::vector<InequalityReport> run_verify_entry(const Json& e, const Context& ctx, std::uint64_t seed) {
  const std::string op = e.at("op").get<std::string>();
  const int d = e.value("d", 1);
  std::vector<InequalityReport> out;
  if (op == "lp_poincare_gaussian") {
    const auto fs = functions_of(e, d);
    const auto ps = numbers_of(e.at("p"));
    const auto sigmas = sigmas_of(e, d);
    std::uint64_t sub = 0;
    for (const auto& sigma : sigmas)
      for (const auto& f : fs)
        for (double p : ps) {
          auto r = lp_poincare_gaussian(f, p, sigma, ctx.budget(e, 100000), mix_substream(seed, sub++));
          if (sigmas.size() > 1) r.name += ":sigma=" + std::to_string(&sigma - sigmas.data());
          out.push_back(r);
        }
  } else if (op == "pisier") {
    std::uint64_t sub = 0;
    for (const auto& f : functions_of(e, d))
      for (double p : numbers_of(e.at("p")))
        out.push_back(pisier_check(f, p, ctx.budget(e, 100000), mix_substream(seed, sub++)));
  } else if (op == "cov_representation_gaussian") {
    std::uint64_t sub = 0;
    for (const auto& sigma : sigmas_of(e, d))
      for (const auto& [f, g] : pairs_of(e, d))
        out.push_back(verify_cov_representation_gaussian(f, g, sigma, e.value("z_nodes", kCovZNodes),
                                                         ctx.budget(e, 100000), mix_substream(seed, sub++)));
  } else if (op == "cov_representation_stable") {
    std::uint64_t sub = 0;
    for (double alpha : numbers_of(e.at("alpha")))
      for (const auto& [f, g] : pairs_of(e, 1)) {
        auto r = verify_cov_representation_stable_1d(f, g, alpha, e.value("z_nodes", kCovZNodes),
                                                     ctx.budget(e, 2000), e.value("quad_tol", 1e-8),
                                                     mix_substream(seed, sub++));
        out.push_back(r);
      }
  } else if (op == "stable_lp_poincare") {
    check_stable_moment_guard(e);
    std::uint64_t sub = 0;
    for (double alpha : numbers_of(e.at("alpha"))) {
      const MeasureSpec spec = e.contains("spec") ? measure_spec_from_json(e.at("spec"))
                                                  : MeasureSpec::stable(alpha, SpectralMeasure::standard_1d());
      for (const auto& f : functions_of(e, spec.d))
        for (double p : numbers_of(e.at("p")))
          for (double p1 : numbers_of(e.at("p1")))
            out.push_back(stable_lp_poincare(f, p, p1, alpha, spec, ctx.budget(e, 100000), mix_substream(seed, sub++)));
    }
  } else if (op == "sobolev_type") {
    HermiteCombination comb;
    for (const auto& t : e.at("terms")) comb.push_back({t.at("coef").get<double>(), t.at("k").get<std::vector<int>>()});
    std::uint64_t sub = 0;
    for (double p : numbers_of(e.at("p")))
      for (double lambda : numbers_of(e.at("lambda")))
        out.push_back(sobolev_type_check(comb, p, lambda, ctx.budget(e, 100000), mix_substream(seed, sub++)));
  } else if (op == "asymmetric_cov") {
    const CovFamily family = cov_family_from_string(e.at("family").get<std::string>());
    MeasureSpec spec = measure_spec_from_json(e.at("spec"));
    std::optional<double> kappa;
    if (e.contains("jacobi_kappa")) kappa = e.at("jacobi_kappa").get<double>();
    std::uint64_t sub = 0;
    for (const auto& [f, g] : pairs_of(e, spec.d))
      for (double p : numbers_of(e.at("p")))
        out.push_back(asymmetric_cov_suite(family, spec, f, g, p, ctx.budget(e, 100000), mix_substream(seed, sub++),
                                           kappa, e.value("quad_tol", 1e-8)));
  } else if (op == "poincare_rayleigh") {
    const MeasureSpec spec = measure_spec_from_json(e.at("spec"));
    const Eigen::MatrixXd sigma = e.contains("sigma") ? matrix_from_json(e.at("sigma")) : spec.covariance();
    const auto est = poincare_rayleigh(spec, sigma, vector_dictionary(spec.d), ctx.budget(e, 100000), seed);
    const double upper = est.analytic_upper.value_or(std::numeric_limits<double>::infinity());
    out.push_back(make_report("poincare_rayleigh:" + to_string(spec.kind) + ":" + est.argmax, est.lower_bound, upper,
                              est.std_error));
  } else if (op == "exp_weighted") {
    for (const auto& f : functions_of(e, 1)) out.push_back(exp_weighted_vs_nonlocal(f, e.value("quad_tol", 1e-11)));
  } else {
    throw std::invalid_argument("verify: unknown op " + op);
  }
  return out;
}

void validate_verify(const Json& e) {
  if (!e.contains("op")) throw std::invalid_argument("suite entry without \"op\"");
  if (e.at("op") == "stable_lp_poincare") check_stable_moment_guard(e);
}

Outputs cmd_verify(const Context& ctx) {
  const Json& suite = ctx.config.at("suite");
  for (const auto& e : suite) validate_verify(e);
  std::vector<InequalityReport> rows;
  for (std::size_t i = 0; i < suite.size(); ++i)
    for (auto& r : run_verify_entry(suite[i], ctx, ctx.entry_seed(i))) rows.push_back(std::move(r));
  Outputs o;
  o.csv = inequality_csv(rows);
  Json reports = Json::array();
  int failed = 0;
  for (const auto& r : rows) {
    reports.push_back(to_json(r));
    failed += r.pass ? 0 : 1;
  }
  o.pass = failed == 0;
  o.summary = Json{{"total", rows.size()}, {"failed", failed}, {"pass", o.pass}, {"reports", reports}};
  return o;
}

// ---------------------------------------------------------------- clt

Outputs cmd_clt(const Context& ctx) {
  const Json& suite = ctx.config.at("suite");
  std::ostringstream csv;
  csv << "experiment,n,w1_hat,w1_floor,bound,std_error\n";
  Json experiments = Json::array();
  Outputs o;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Json& e = suite[i];
    ExperimentConfig cfg;
    cfg.spec = measure_spec_from_json(e.at("spec"));
    cfg.sigma = e.contains("sigma") ? matrix_from_json(e.at("sigma")) : cfg.spec.covariance();
    if (e.contains("poincare")) cfg.poincare = e.at("poincare").get<double>();
    if (e.contains("n_grid")) cfg.n_grid = e.at("n_grid").get<std::vector<int>>();
    cfg.m = static_cast<std::size_t>(std::max(16.0, std::round(e.value("m", 2048.0) * ctx.opt.budget_scale)));
    cfg.reps = e.value("reps", cfg.reps);
    cfg.estimator = w1_estimator_from_string(e.value("estimator", std::string("auto")));
    cfg.sinkhorn_eps = e.value("sinkhorn_eps", cfg.sinkhorn_eps);
    cfg.require_informative = e.value("require_informative", cfg.require_informative);
    cfg.seed = ctx.entry_seed(i);
    const std::string name = e.value("name", "experiment" + std::to_string(i));
    const RateReport r = run_clt_experiment(cfg);
    for (const auto& row : r.rows)
      csv << csv_field(name) << ',' << row.n << ',' << fmt(row.w1_hat) << ',' << fmt(row.w1_floor) << ','
          << fmt(row.bound) << ',' << fmt(row.std_error) << '\n';
    Json j = to_json(r);
    j["name"] = name;
    j["spec"] = e.at("spec");
    experiments.push_back(j);
    o.pass = o.pass && r.bound_respected;
  }
  o.csv = csv.str();
  o.summary = Json{{"pass", o.pass}, {"experiments", experiments}};
  return o;
}

// ---------------------------------------------------------------- stein

struct SteinRow {
  std::string name;
  std::string quantity;
  double value = 0.0;
  double std_error = 0.0;
  double w1_bound = std::numeric_limits<double>::quiet_NaN();
  double reference = std::numeric_limits<double>::quiet_NaN();
  bool pass = true;
};

SteinKernelField kernel_for(const MeasureSpec& spec) {
  if (spec.kind == MeasureKind::ExpPower && spec.radial) return tau_radial_multid(spec.delta, spec.d);
  if (spec.d == 1) return kernel_1d(spec);
  return product_kernel(spec);
}

std::vector<SteinRow> run_stein_entry(const Json& e, const Context& ctx, std::uint64_t seed) {
  const std::string op = e.at("op").get<std::string>();
  const std::string name = e.value("name", op);
  std::vector<SteinRow> out;
  if (op == "discrepancy") {
    const MeasureSpec spec = measure_spec_from_json(e.at("spec"));
    const DiscrepancyReport r = stein_discrepancy(kernel_for(spec), spec, ctx.budget(e, 100000), seed);
    SteinRow row{name, "discrepancy", r.discrepancy, r.std_error, r.w1_bound};
    if (e.contains("reference")) {
      row.reference = e.at("reference").get<double>();
      row.pass = std::abs(r.discrepancy - row.reference) <= 4.0 * r.std_error + 1e-12;
    }
    out.push_back(row);
    for (int n : e.value("n", std::vector<int>{})) {
      const SumBound b = sum_discrepancy_bound(r, n);
      out.push_back({name, "sum_bound:n=" + std::to_string(n), b.discrepancy, r.std_error / n, b.w1_bound});
    }
  } else if (op == "stein_factors") {
    const int d = e.value("d", 2);
    const Eigen::MatrixXd sigma = e.contains("sigma") ? matrix_from_json(e.at("sigma"))
                                                      : Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d));
    const int n_points = e.value("points", 100);
    const Eigen::MatrixXd points = sample(MeasureSpec::gaussian(sigma), static_cast<std::size_t>(n_points), seed, 1).data;
    const auto dict = e.contains("functions") ? functions_of(e, d) : scalar_dictionary(d);
    for (const auto& r : stein_factor_suite(dict, sigma, points, ctx.budget(e, 1000), seed)) {
      const bool hs_ok = r.max_hs <= r.hs_bound + 4.0 * r.hs_std_error;
      const bool op_ok = !std::isfinite(r.op_bound) || r.max_op <= r.op_bound + 4.0 * r.op_std_error;
      const bool grad_ok = r.max_grad <= 1.0 + 4.0 * r.grad_std_error;
      out.push_back({name + ":" + r.name, "max_hess_hs", r.max_hs, r.hs_std_error, NAN, r.hs_bound, hs_ok});
      if (std::isfinite(r.op_bound))
        out.push_back({name + ":" + r.name, "max_hess_op", r.max_op, r.op_std_error, NAN, r.op_bound, op_ok});
      out.push_back({name + ":" + r.name, "max_grad", r.max_grad, r.grad_std_error, NAN, 1.0, grad_ok});
    }
  } else if (op == "kernel_identity") {
    const MeasureSpec spec = measure_spec_from_json(e.at("spec"));
    const SteinKernelField field = kernel_for(spec);
    std::uint64_t sub = 0;
    for (const auto& f : vector_dictionary(spec.d)) {
      const auto c = kernel_identity_check(field, spec, f, ctx.budget(e, 100000), seed, sub++);
      out.push_back({name + ":" + f.name, "lhs_minus_rhs", c.lhs - c.rhs, c.std_error, NAN, 0.0,
                     std::abs(c.lhs - c.rhs) <= 4.0 * c.std_error + 1e-12});
    }
  } else if (op == "gaussian_norm_constant") {
    const int d = e.value("d", 2);
    const double scale = e.value("scale", 1.0 / std::sqrt(2.0));
    const auto r = expected_gaussian_norm(scale * Eigen::MatrixXd::Identity(d, d), ctx.budget(e, 1000000), seed);
    const double ref = scale * gaussian_norm_mean(d);
    out.push_back({name, "expected_norm", r.value, r.std_error, NAN, ref, std::abs(r.value - ref) <= 3.0 * r.std_error});
  } else {
    throw std::invalid_argument("stein: unknown op " + op);
  }
  return out;
}

Outputs cmd_stein(const Context& ctx) {
  const Json& suite = ctx.config.at("suite");
  std::vector<SteinRow> rows;
  for (std::size_t i = 0; i < suite.size(); ++i)
    for (auto& r : run_stein_entry(suite[i], ctx, ctx.entry_seed(i))) rows.push_back(std::move(r));
  Outputs o;
  std::ostringstream csv;
  csv << "name,quantity,value,std_error,w1_bound,reference,pass\n";
  Json js = Json::array();
  for (const auto& r : rows) {
    csv << csv_field(r.name) << ',' << csv_field(r.quantity) << ',' << fmt(r.value) << ',' << fmt(r.std_error) << ','
        << fmt(r.w1_bound) << ',' << fmt(r.reference) << ',' << (r.pass ? "true" : "false") << '\n';
    js.push_back(Json{{"name", r.name}, {"quantity", r.quantity}, {"value", r.value}, {"pass", r.pass}});
    o.pass = o.pass && r.pass;
  }
  o.csv = csv.str();
  o.summary = Json{{"pass", o.pass}, {"rows", js}};
  return o;
}

// ---------------------------------------------------------------- semigroup

struct CheckRow {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

CheckRow within(std::string name, double value, double tol) { return {std::move(name), value, tol, value <= tol}; }

double grid_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const DensityGrid1D& g) {
  return a.cwiseProduct(b).cwiseProduct(g.p).sum() * g.dx;
}

Eigen::VectorXd on_grid(const TestFunction& f, const DensityGrid1D& g) {
  Eigen::VectorXd v(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) v(j) = f.at(g.x(j));
  return v;
}

std::vector<CheckRow> run_semigroup_entry(const Json& e, std::uint64_t seed) {
  const std::string op = e.at("op").get<std::string>();
  std::vector<CheckRow> out;
  if (op == "bismut_character") {
    const int count = e.value("count", 30);
    const int d = e.value("d", 1);
    const double tol = e.value("tol", 1e-6);
    const BismutLhs mode = e.value("lhs", std::string("quadrature")) == "multiplier" ? BismutLhs::Multiplier
                                                                                     : BismutLhs::Quadrature;
    for (double alpha : numbers_of(e.at("alpha"))) {
      const MeasureSpec spec = d == 1 ? MeasureSpec::stable(alpha, SpectralMeasure::standard_1d())
                                      : MeasureSpec::stable(alpha, SpectralMeasure::axes(d, 0.25));
      Rng rng(seed, static_cast<std::uint64_t>(std::llround(alpha * 1000)));
      double worst = 0.0;
      for (int i = 0; i < count; ++i) {
        Eigen::VectorXd xi(d), x(d);
        for (int k = 0; k < d; ++k) {
          xi(k) = rng.uniform(-2.0, 2.0);
          x(k) = rng.uniform(-2.0, 2.0);
        }
        const double t = rng.uniform(0.1, 2.0);
        const double phase = rng.uniform() < 0.5 ? 0.0 : -std::numbers::pi / 2;
        const auto c = bismut_stable_check(TestFunction::character(xi, phase), t, x, spec, 0, seed, mode);
        worst = std::max(worst, c.gap);
      }
      out.push_back(within("bismut_character:alpha=" + fmt(alpha) + ":max_gap", worst, tol));
    }
  } else if (op == "t_family") {
    const double alpha = e.value("alpha", 1.5);
    const auto grid = shared_stable_density(alpha);
    const DensityGrid1D& g = *grid;
    const std::string tag = "t_family:alpha=" + fmt(alpha);
    const auto ts = numbers_of(e.value("t", Json::array({0.3, 1.0})));
    for (double t : ts) {
      out.push_back(within(tag + ":fixed_point:t=" + fmt(t), (t_family_1d(g.p, t, g) - g.p).cwiseAbs().maxCoeff(),
                           e.value("fixed_point_tol", 1e-6)));
      // T_t 1 = e^t in one dimension, read off at the origin
      const Eigen::VectorXd one = t_family_1d(Eigen::VectorXd::Ones(g.size()), t, g);
      out.push_back(within(tag + ":constant_mass:t=" + fmt(t), std::abs(one(g.size() / 2) / std::exp(t) - 1.0),
                           e.value("mass_tol", 1e-3)));
    }
    const Eigen::VectorXd f = on_grid(TestFunction::bump_1d(0.5, 2.0), g);
    const Eigen::VectorXd h = on_grid(TestFunction::bump_1d(-0.3, 1.5), g);
    const double s = e.value("composition_s", 0.3), u = e.value("composition_t", 0.3);
    const Eigen::VectorXd hp = h.cwiseProduct(g.p);
    out.push_back(within(tag + ":composition",
                         (t_family_1d(t_family_1d(hp, s, g), u, g) - t_family_1d(hp, s + u, g)).cwiseAbs().maxCoeff(),
                         e.value("composition_tol", 1e-6)));
    for (double t1 : ts)
      out.push_back(within(tag + ":duality:t=" + fmt(t1),
                           std::abs(grid_dot(stable_semigroup_grid_1d(f, t1, g), h, g) -
                                    grid_dot(f, dual_semigroup_1d(h, t1, g), g)),
                           e.value("duality_tol", 1e-5)));
  } else if (op == "q_alpha_table") {
    std::vector<double> alphas;
    if (e.contains("alpha")) {
      alphas = numbers_of(e.at("alpha"));
    } else {
      for (int i = 1; i <= 9; ++i) alphas.push_back(1.0 + 0.1 * i);
    }
    double prev = std::numeric_limits<double>::quiet_NaN(), jump = 0.0;
    bool finite = true;
    for (double a : alphas) {
      const double v = q_alpha_integral(a);
      out.push_back({"q_alpha_integral:alpha=" + fmt(a), v, 0.0, std::isfinite(v) && v > 0.0});
      finite = finite && std::isfinite(v);
      if (std::isfinite(prev)) jump = std::max(jump, std::abs(v - prev));
      prev = v;
    }
    out.push_back({"q_alpha_integral:max_adjacent_jump", jump, 0.1, finite && jump <= 0.1});
  } else {
    throw std::invalid_argument("semigroup: unknown op " + op);
  }
  return out;
}

Outputs cmd_semigroup(const Context& ctx) {
  const Json& suite = ctx.config.at("suite");
  Outputs o;
  std::ostringstream csv;
  csv << "name,value,tolerance,pass\n";
  Json js = Json::array();
  for (std::size_t i = 0; i < suite.size(); ++i)
    for (const auto& r : run_semigroup_entry(suite[i], ctx.entry_seed(i))) {
      csv << csv_field(r.name) << ',' << fmt(r.value) << ',' << fmt(r.tolerance) << ',' << (r.pass ? "true" : "false")
          << '\n';
      js.push_back(Json{{"name", r.name}, {"value", r.value}, {"tolerance", r.tolerance}, {"pass", r.pass}});
      o.pass = o.pass && r.pass;
    }
  o.csv = csv.str();
  o.summary = Json{{"pass", o.pass}, {"checks", js}};
  return o;
}

// ---------------------------------------------------------------- driver

int run(const std::string& command, const Options& opt, Outputs (*body)(const Context&)) {
  const std::string start = utc_now();
  Json config;
  std::string bytes;
  try {
    bytes = read_file(opt.config);
    config = Json::parse(bytes);
    if (!config.is_object() || !config.contains("suite") || !config.at("suite").is_array())
      throw std::invalid_argument("config must be an object with a \"suite\" array");
    if (opt.jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
    if (!(opt.budget_scale > 0.0)) throw std::invalid_argument("--budget-scale must be positive");
  } catch (const std::exception& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return 2;
  }
  set_workers(opt.jobs);
  Outputs o;
  try {
    o = body(Context{opt, config});
  } catch (const std::exception& ex) {
    std::cerr << command << ": " << ex.what() << '\n';
    return 2;
  }
  try {
    fs::create_directories(opt.out);
    const fs::path dir(opt.out);
    Json summary = Json{{"command", command}, {"seed", opt.seed}};
    summary.update(o.summary);
    write_file((dir / "suite.csv").string(), o.csv);
    write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
    const Json manifest{{"command", command},
                        {"config", opt.config},
                        {"config_digest", "fnv1a64:" + hex64(fnv1a64(bytes))},
                        {"seed", opt.seed},
                        {"jobs", opt.jobs},
                        {"budget_scale", opt.budget_scale},
                        {"version", STEINLAB_VERSION},
                        {"start", start},
                        {"end", utc_now()},
                        {"files", Json::array({"suite.csv", "summary.json", "manifest.json"})}};
    write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  } catch (const std::exception& ex) {
    std::cerr << "output error: " << ex.what() << '\n';
    return 2;
  }
  std::cout << command << ": " << (o.pass ? "pass" : "FAIL") << " (" << opt.out << ")\n";
  return o.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steinlab: Stein kernels, functional inequalities and CLT rates"};
  app.set_version_flag("--version", STEINLAB_VERSION);
  app.require_subcommand(1);
  Options opt;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON config with a suite array")->required();
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "base seed");
    sub->add_option("--jobs", opt.jobs, "worker threads");
    sub->add_option("--budget-scale", opt.budget_scale, "multiplier on Monte Carlo budgets");
    return sub;
  };
  CLI::App* verify = add("verify", "functional inequality suite");
  CLI::App* clt = add("clt", "CLT rate benchmark");
  CLI::App* stein = add("stein", "Stein kernel diagnostics and Stein factors");
  CLI::App* semigroup = add("semigroup", "semigroup identities");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (verify->parsed()) return run("verify", opt, cmd_verify);
  if (clt->parsed()) return run("clt", opt, cmd_clt);
  if (stein->parsed()) return run("stein", opt, cmd_stein);
  if (semigroup->parsed()) return run("semigroup", opt, cmd_semigroup);
  return 2;
}
