#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gapspec/gapset.hpp"
#include "gapspec/jacobi.hpp"
#include "gapspec/ltverify.hpp"
#include "gapspec/reflmeasure.hpp"

namespace gapspec::io {

using json = nlohmann::json;

inline constexpr const char* kSchema = "gapspec/1";

// geometric:r:K, harmonic:K or list:v1,v2,...
std::vector<double> parse_eps(const std::string& spec);

json to_json(const GapSet& set);
GapSet gapset_from_json(const json& j);

json to_json(const ReflectionlessMeasure& mu);
// gamma is an explicit array or one of "alpha", "beta", "midpoint".
ReflectionlessMeasure measure_from_json(const json& j);

json to_json(const BoundReport& r);
// name, lhs, rhs, ratio, pass, N, p, seed
std::string reports_csv(std::span<const BoundReport> reports);

// Text with 17 significant digits; reading it back is bit-exact.
std::string format_double(double v);

// n,a,b rows: a_n couples sites n and n+1 and is empty on the last row.
std::string coeffs_csv(const JacobiCoeffs& j);
JacobiCoeffs read_coeffs_csv(std::istream& in);

// n,delta_a,delta_b rows; empty cells read as zero.
std::string perturbation_csv(const Perturbation& d);
Perturbation read_perturbation_csv(std::istream& in);

std::string read_file(const std::string& path);
json read_json_file(const std::string& path);

}  // namespace gapspec::io
