#include "steinlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace steinlab {

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix: expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("matrix: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("vector: expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

namespace {

Json spectral_to_json(const SpectralMeasure& s) {
  Json out = Json::array();
  for (const auto& a : s.atoms) out.push_back(Json{{"direction", vector_to_json(a.direction)}, {"weight", a.weight}});
  return out;
}

SpectralMeasure spectral_from_json(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "standard_1d") return SpectralMeasure::standard_1d();
    throw std::invalid_argument("spectral: unknown shorthand " + j.get<std::string>());
  }
  if (j.is_object()) {
    if (j.contains("axes")) return SpectralMeasure::axes(j.at("d").get<int>(), j.at("axes").get<double>());
    if (j.contains("circle")) return SpectralMeasure::circle(j.at("circle").get<int>(), j.at("total_weight").get<double>());
    throw std::invalid_argument("spectral: expected atoms, \"standard_1d\", {axes, d} or {circle, total_weight}");
  }
  SpectralMeasure s;
  for (const auto& a : j) s.atoms.push_back({vector_from_json(a.at("direction")), a.at("weight").get<double>()});
  return s;
}

}  // namespace

Json to_json(const MeasureSpec& spec) {
  Json j;
  j["kind"] = to_string(spec.kind);
  j["d"] = spec.d;
  switch (spec.kind) {
    case MeasureKind::Gaussian: j["sigma"] = matrix_to_json(spec.sigma); break;
    case MeasureKind::Stable:
      j["alpha"] = spec.alpha;
      j["spectral"] = spectral_to_json(spec.spectral);
      break;
    case MeasureKind::StableRotInv: j["alpha"] = spec.alpha; break;
    case MeasureKind::ExpPower:
      j["delta"] = spec.delta;
      j["radial"] = spec.radial;
      break;
    case MeasureKind::Gamma: j["shape"] = spec.alpha; break;
    case MeasureKind::Beta:
      j["a"] = spec.alpha;
      j["b"] = spec.beta;
      break;
    case MeasureKind::CenteredExponential:
    case MeasureKind::Uniform: break;
    case MeasureKind::LogConcave:
      if (spec.label != "quartic") throw std::invalid_argument("to_json: only the quartic log-concave family serializes");
      j["family"] = spec.label;
      j["kappa"] = spec.kappa;
      break;
  }
  return j;
}

MeasureSpec measure_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("measure spec: missing \"kind\"");
  const MeasureKind kind = measure_kind_from_string(j.at("kind").get<std::string>());
  const int d = j.value("d", 1);
  switch (kind) {
    case MeasureKind::Gaussian:
      return MeasureSpec::gaussian(j.contains("sigma") ? matrix_from_json(j.at("sigma"))
                                                       : Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d)));
    case MeasureKind::Stable: return MeasureSpec::stable(j.at("alpha").get<double>(), spectral_from_json(j.at("spectral")));
    case MeasureKind::StableRotInv: return MeasureSpec::stable_rot_inv(j.at("alpha").get<double>(), d);
    case MeasureKind::ExpPower: return MeasureSpec::exp_power(j.at("delta").get<double>(), d, j.value("radial", false));
    case MeasureKind::Gamma: return MeasureSpec::gamma(j.at("shape").get<double>());
    case MeasureKind::Beta: return MeasureSpec::beta_dist(j.at("a").get<double>(), j.at("b").get<double>());
    case MeasureKind::CenteredExponential: return MeasureSpec::centered_exponential(d);
    case MeasureKind::Uniform: return MeasureSpec::uniform(d);
    case MeasureKind::LogConcave:
      if (j.value("family", std::string("quartic")) != "quartic")
        throw std::invalid_argument("measure spec: unknown log-concave family");
      return log_concave_quartic(d, j.at("kappa").get<double>());
  }
  throw std::invalid_argument("measure spec: unhandled kind");
}

namespace {

// JSON has no infinities or NaN; they are written as strings
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

Json to_json(const DiscrepancyReport& r) {
  return Json{{"discrepancy", number(r.discrepancy)}, {"std_error", number(r.std_error)},
              {"w1_bound", number(r.w1_bound)},       {"budget", r.budget},
              {"seed", r.seed}};
}

Json to_json(const InequalityReport& r) {
  return Json{{"name", r.name},         {"lhs", number(r.lhs)},       {"rhs", number(r.rhs)},
              {"margin", number(r.margin)}, {"std_error", number(r.std_error)}, {"equality", r.equality},
              {"pass", r.pass}};
}

Json to_json(const RateReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"n", row.n},
                        {"w1_hat", number(row.w1_hat)},
                        {"w1_floor", number(row.w1_floor)},
                        {"bound", number(row.bound)},
                        {"std_error", number(row.std_error)},
                        {"informative", row.informative}});
  return Json{{"poincare", number(r.poincare)},       {"slope", number(r.slope)},
              {"slope_ci", number(r.slope_ci)},       {"informative_rows", r.informative_rows},
              {"bound_respected", r.bound_respected}, {"rows", rows}};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string inequality_csv(const std::vector<InequalityReport>& rows) {
  std::ostringstream os;
  os << "name,lhs,rhs,margin,std_error,pass\n";
  for (const auto& r : rows)
    os << csv_field(r.name) << ',' << format_number(r.lhs) << ',' << format_number(r.rhs) << ','
       << format_number(r.margin) << ',' << format_number(r.std_error) << ',' << (r.pass ? "true" : "false") << '\n';
  return os.str();
}

std::string rate_csv(const RateReport& r) {
  std::ostringstream os;
  os << "n,w1_hat,w1_floor,bound,std_error\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << format_number(row.w1_hat) << ',' << format_number(row.w1_floor) << ','
       << format_number(row.bound) << ',' << format_number(row.std_error) << '\n';
  return os.str();
}

std::string distance_csv(const std::vector<DistanceRow>& rows) {
  std::ostringstream os;
  os << "pair_id,estimator,value,gap,n,d,seed\n";
  for (const auto& r : rows)
    os << csv_field(r.pair_id) << ',' << csv_field(r.estimator) << ',' << format_number(r.value) << ','
       << format_number(r.gap) << ',' << r.n << ',' << r.d << ',' << r.seed << '\n';
  return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<DistanceRow> parse_distance_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("pair_id,estimator,value,gap,n,d,seed", 0) != 0)
    throw std::invalid_argument("distance csv: bad header");
  std::vector<DistanceRow> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::invalid_argument("distance csv: expected 7 fields");
    DistanceRow r;
    r.pair_id = f[0];
    r.estimator = f[1];
    r.value = std::stod(f[2]);
    r.gap = std::stod(f[3]);
    r.n = std::stoll(f[4]);
    r.d = std::stoll(f[5]);
    r.seed = std::stoull(f[6]);
    rows.push_back(r);
  }
  return rows;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace steinlab
