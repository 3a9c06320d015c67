#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "sphereqp/problem_io.hpp"

using namespace sphereqp;
namespace io = problem_io;

TEST_CASE("matrix round trip is bit exact") {
    Matrix m(2, 3);
    m << 1.0, -2.5, 1e-17, 3.0, 0.1 + 0.2, -1e300;
    const io::json j = io::matrix_to_json(m);
    const Matrix back = io::parse_matrix(j, "m");
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) CHECK(back(r, c) == m(r, c));
}

TEST_CASE("vector round trip is bit exact") {
    Vector v(4);
    v << 0.1, -0.3, 7.0, 2e-200;
    const Vector back = io::parse_vector(io::vector_to_json(v), "v");
    REQUIRE(back.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(back(i) == v(i));
}

TEST_CASE("parse errors name the offending field") {
    const io::json ragged = io::json::parse("[[1, 2], [3]]");
    try {
        io::parse_matrix(ragged, "Q");
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(std::string(e.what()).find("Q") != std::string::npos);
    }
    const io::json not_numbers = io::json::parse("[1, \"x\"]");
    try {
        io::parse_vector(not_numbers, "b");
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(std::string(e.what()).find("b") != std::string::npos);
    }
    const io::json not_list = io::json::parse("{\"a\": 1}");
    CHECK_THROWS_AS(io::parse_matrix_list(not_list, "H"), io::ParseError);
}

TEST_CASE("matrix list parsing") {
    const io::json j = io::json::parse("[[[1, 0], [0, 1]], [[2, 0], [0, 2]]]");
    const auto list = io::parse_matrix_list(j, "H");
    REQUIRE(list.size() == 2);
    CHECK(list[1](1, 1) == 2.0);
}

TEST_CASE("digest is deterministic and content sensitive") {
    const std::string a = io::digest_hex("hello");
    CHECK(a == io::digest_hex("hello"));
    CHECK(a != io::digest_hex("hello "));
    CHECK(a.size() == 16);
    for (char ch : a) {
        const bool hex = (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
        CHECK(hex);
    }
}

TEST_CASE("trace CSV has the documented header") {
    std::vector<qcqp::TraceRecord> trace;
    trace.push_back({0, -1.5, 0.25, 0.5, 2.0});
    trace.push_back({1, -1.6, 0.125, 0.25, 2.0});
    const std::string csv = io::trace_to_csv(trace);
    CHECK(csv.rfind("iteration,objective,feasibility,primal_residual,gamma\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("file round trip and missing file error") {
    const std::string path = "test_io_scratch.json";
    io::write_file(path, "{\"a\": 1}");
    CHECK(io::read_file(path) == "{\"a\": 1}");
    std::remove(path.c_str());
    CHECK_THROWS_AS(io::read_file("no_such_file_here.json"), io::ParseError);
}
