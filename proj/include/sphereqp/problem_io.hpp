#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sphereqp/linalg.hpp"
#include "sphereqp/qcqp.hpp"

namespace sphereqp::problem_io {

using json = nlohmann::json;

/// Thrown for malformed problem files; the message names the bad field.
struct ParseError : InvalidInputError {
    using InvalidInputError::InvalidInputError;
};

Matrix parse_matrix(const json& j, const std::string& field);
Vector parse_vector(const json& j, const std::string& field);
std::vector<Matrix> parse_matrix_list(const json& j, const std::string& field);

json matrix_to_json(const Matrix& m);
json vector_to_json(const Vector& v);

/// Read a whole file; throws ParseError when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// FNV-1a 64-bit hash of the raw problem text, hex encoded; echoed into
/// solution files for traceability.
std::string digest_hex(const std::string& content);

/// CSV with header iteration,objective,feasibility,primal_residual,gamma.
std::string trace_to_csv(const std::vector<qcqp::TraceRecord>& trace);

}  // namespace sphereqp::problem_io
