#include "sphereqp/problem_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sphereqp::problem_io {

namespace {

double parse_number(const json& j, const std::string& field) {
    if (!j.is_number()) {
        throw ParseError("field '" + field + "' must contain finite numbers");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ParseError("field '" + field + "' must contain finite numbers");
    }
    return v;
}

}  // namespace

Vector parse_vector(const json& j, const std::string& field) {
    if (!j.is_array()) {
        throw ParseError("field '" + field + "' must be an array of numbers");
    }
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = parse_number(j[i], field);
    }
    return v;
}

Matrix parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw ParseError("field '" + field + "' must be an array of rows");
    }
    const size_t rows = j.size();
    const size_t cols = j[0].size();
    Matrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ParseError("field '" + field + "' must be rectangular");
        }
        for (size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_number(j[r][c], field);
        }
    }
    return m;
}

std::vector<Matrix> parse_matrix_list(const json& j, const std::string& field) {
    if (!j.is_array()) {
        throw ParseError("field '" + field + "' must be a list of matrices");
    }
    std::vector<Matrix> out;
    for (size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_matrix(j[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write file: " + path);
    }
    out << content;
}

std::string digest_hex(const std::string& content) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char ch : content) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hash));
    return buf;
}

std::string trace_to_csv(const std::vector<qcqp::TraceRecord>& trace) {
    std::ostringstream out;
    out << "iteration,objective,feasibility,primal_residual,gamma\n";
    out.precision(17);
    for (const auto& rec : trace) {
        out << rec.iteration << ',' << rec.objective << ',' << rec.feasibility
            << ',' << rec.primal_residual << ',' << rec.gamma << '\n';
    }
    return out.str();
}

}  // namespace sphereqp::problem_io
