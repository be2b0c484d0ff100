#pragma once

#include "steinlab/clt_bench.hpp"
#include "steinlab/inequalities.hpp"
#include "steinlab/measures.hpp"
#include "steinlab/stein.hpp"
#include "steinlab/transport.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace steinlab {

using Json = nlohmann::ordered_json;

// row-major nested arrays
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

// {"kind": ..., kind-specific fields}. Spectral measures are atom arrays
// [{"direction": [...], "weight": w}] or the shorthand "standard_1d";
// LogConcave round-trips only the shipped "quartic" family.
Json to_json(const MeasureSpec& spec);
MeasureSpec measure_spec_from_json(const Json& j);

Json to_json(const DiscrepancyReport& r);
Json to_json(const InequalityReport& r);
Json to_json(const RateReport& r);

// Fixed-format number for CSV output: %.17g, so that equal doubles give equal bytes.
std::string format_number(double v);
// quotes fields containing commas, quotes or newlines
std::string csv_field(const std::string& s);

std::string inequality_csv(const std::vector<InequalityReport>& rows);
// header: n,w1_hat,w1_floor,bound,std_error
std::string rate_csv(const RateReport& r);
// header: pair_id,estimator,value,gap,n,d,seed
std::string distance_csv(const std::vector<DistanceRow>& rows);
std::vector<DistanceRow> parse_distance_csv(const std::string& text);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace steinlab
