#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sphereqp/bounded_regression.hpp"
#include "sphereqp/cgevd.hpp"
#include "sphereqp/deconv_demo.hpp"
#include "sphereqp/problem_io.hpp"
#include "sphereqp/qcqp.hpp"
#include "sphereqp/scqp.hpp"
#include "sphereqp/tensor_rank1.hpp"

namespace {

using sphereqp::Matrix;
using sphereqp::Vector;
using sphereqp::problem_io::json;
namespace io = sphereqp::problem_io;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

struct CommonArgs {
    std::string in_path;
    std::string out_path;
    std::string trace_path;
    std::uint64_t seed = 0;
    double tol = -1.0;
    int max_iters = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_input = true) {
    auto* in = cmd->add_option("--in", args.in_path, "problem JSON file");
    if (needs_input) in->required();
    cmd->add_option("--out", args.out_path, "solution JSON path (default stdout)");
    cmd->add_option("--trace", args.trace_path, "per-iteration CSV path");
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--tol", args.tol, "convergence tolerance");
    cmd->add_option("--max-iters", args.max_iters, "iteration cap");
}

void emit(const CommonArgs& args, const json& solution) {
    const std::string text = solution.dump(2) + "\n";
    if (args.out_path.empty()) {
        std::cout << text;
    } else {
        io::write_file(args.out_path, text);
    }
}

json load_problem(const CommonArgs& args, std::string& digest) {
    const std::string raw = io::read_file(args.in_path);
    digest = io::digest_hex(raw);
    json j = json::parse(raw, nullptr, false);
    if (j.is_discarded()) {
        throw io::ParseError("file '" + args.in_path + "' is not valid JSON");
    }
    return j;
}

std::string require_kind(const json& j, std::initializer_list<const char*> allowed) {
    if (!j.contains("kind") || !j["kind"].is_string()) {
        throw io::ParseError("field 'kind' is missing or not a string");
    }
    const std::string kind = j["kind"].get<std::string>();
    for (const char* k : allowed) {
        if (kind == k) return kind;
    }
    throw io::ParseError("field 'kind' has unsupported value '" + kind + "'");
}

const json& require_field(const json& j, const std::string& field) {
    if (!j.contains(field)) {
        throw io::ParseError("field '" + field + "' is missing");
    }
    return j[field];
}

const char* multiplicity_name(sphereqp::scqp::Multiplicity m) {
    switch (m) {
        case sphereqp::scqp::Multiplicity::unique: return "unique";
        case sphereqp::scqp::Multiplicity::sign_pair: return "sign_pair";
        case sphereqp::scqp::Multiplicity::sphere_family: return "sphere_family";
    }
    return "unique";
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

int run_scqp(const CommonArgs& args) {
    std::string digest;
    const json problem = load_problem(args, digest);
    const std::string kind = require_kind(problem, {"scqp", "scqp_ineq"});
    const Matrix q = io::parse_matrix(require_field(problem, "Q"), "Q");
    const Vector b = io::parse_vector(require_field(problem, "b"), "b");

    const auto start = std::chrono::steady_clock::now();
    const sphereqp::scqp::Solution sol =
        kind == "scqp_ineq" ? sphereqp::scqp::solve_inequality(q, b)
                            : sphereqp::scqp::solve(q, b);
    json out;
    out["kind"] = kind;
    out["problem_digest"] = digest;
    out["x"] = io::vector_to_json(sol.x);
    out["multiplier"] = sol.multiplier;
    out["objective"] = sol.objective;
    out["multiplicity"] = multiplicity_name(sol.multiplicity);
    json alts = json::array();
    for (const Vector& a : sol.alternates) alts.push_back(io::vector_to_json(a));
    out["alternates"] = alts;
    out["converged"] = true;
    out["iterations"] = 1;
    out["wall_time_seconds"] = elapsed_seconds(start);
    emit(args, out);
    return kExitOk;
}

struct QcqpArgs {
    double gamma0 = -1.0;
    std::string gamma_policy = "adaptive";
    double alpha_step = 2.0;
    std::string mode = "exact";
    double mu = 1.0;
    std::string carrier = "min-cond";
    double jitter = 0.0;
};

int run_qcqp(const CommonArgs& args, const QcqpArgs& extra) {
    std::string digest;
    const json problem = load_problem(args, digest);
    require_kind(problem, {"qcqp"});
    sphereqp::qcqp::Problem p;
    p.q = io::parse_matrix(require_field(problem, "Q"), "Q");
    p.b = io::parse_vector(require_field(problem, "b"), "b");
    p.h = io::parse_matrix_list(require_field(problem, "H"), "H");
    if (problem.contains("H_ineq")) {
        const auto h_ineq = io::parse_matrix_list(problem["H_ineq"], "H_ineq");
        p = sphereqp::qcqp::lift_inequalities(p.q, p.b, p.h, h_ineq);
    }

    sphereqp::qcqp::Options opts;
    opts.gamma0 = extra.gamma0;
    opts.alpha_step = extra.alpha_step;
    opts.mu = extra.mu;
    opts.jitter = extra.jitter;
    if (extra.gamma_policy == "fixed") {
        opts.gamma_policy = sphereqp::qcqp::GammaPolicy::fixed;
    } else if (extra.gamma_policy == "adaptive") {
        opts.gamma_policy = sphereqp::qcqp::GammaPolicy::adaptive;
    } else {
        throw io::ParseError("--gamma-policy must be fixed or adaptive");
    }
    if (extra.mode == "exact") {
        opts.mode = sphereqp::qcqp::Mode::exact;
    } else if (extra.mode == "linearized") {
        opts.mode = sphereqp::qcqp::Mode::linearized;
    } else {
        throw io::ParseError("--mode must be exact or linearized");
    }
    if (extra.carrier == "min-cond") {
        opts.carrier = sphereqp::qcqp::CarrierPolicy::min_condition;
    } else if (extra.carrier == "frobenius") {
        opts.carrier = sphereqp::qcqp::CarrierPolicy::frobenius_combination;
    } else if (extra.carrier.rfind("index:", 0) == 0) {
        opts.carrier = sphereqp::qcqp::CarrierPolicy::given_index;
        opts.carrier_index = std::stoi(extra.carrier.substr(6));
    } else {
        throw io::ParseError("--carrier must be index:N, min-cond, or frobenius");
    }
    if (args.tol > 0.0) opts.tol = args.tol;
    if (args.max_iters > 0) opts.max_iters = args.max_iters;
    opts.collect_trace = !args.trace_path.empty();

    const auto start = std::chrono::steady_clock::now();
    const sphereqp::qcqp::Result res = sphereqp::qcqp::solve(p, opts);
    json out;
    out["kind"] = "qcqp";
    out["problem_digest"] = digest;
    out["x"] = io::vector_to_json(res.x);
    out["objective"] = res.objective;
    json residuals = json::array();
    for (const Matrix& hm : p.h) {
        residuals.push_back(res.x.dot(hm * res.x) - 1.0);
    }
    out["constraint_residuals"] = residuals;
    out["feasibility"] = res.feasibility;
    out["primal_residual"] = res.primal_residual;
    if (res.alpha.size() > 0) out["alpha"] = io::vector_to_json(res.alpha);
    out["converged"] = res.converged;
    out["iterations"] = res.iterations;
    out["wall_time_seconds"] = elapsed_seconds(start);
    emit(args, out);
    if (!args.trace_path.empty()) {
        io::write_file(args.trace_path, io::trace_to_csv(res.trace));
    }
    return res.converged ? kExitOk : kExitNotConverged;
}

int run_boundedreg(const CommonArgs& args) {
    std::string digest;
    const json problem = load_problem(args, digest);
    require_kind(problem, {"bounded_regression"});
    sphereqp::bounded_regression::Problem p;
    p.a = io::parse_matrix(require_field(problem, "A"), "A");
    p.y = io::parse_vector(require_field(problem, "y"), "y");
    if (!require_field(problem, "delta").is_number()) {
        throw io::ParseError("field 'delta' must be a number");
    }
    p.delta = problem["delta"].get<double>();

    sphereqp::bounded_regression::Options opts;
    opts.seed = args.seed;
    if (args.tol > 0.0) opts.tol = args.tol;
    if (args.max_iters > 0) opts.max_passes = args.max_iters;

    const auto start = std::chrono::steady_clock::now();
    const auto info = sphereqp::bounded_regression::validate_bound(p);
    const Vector x = sphereqp::bounded_regression::solve(p, opts);
    json out;
    out["kind"] = "bounded_regression";
    out["problem_digest"] = digest;
    out["x"] = io::vector_to_json(x);
    out["norm"] = x.norm();
    out["residual"] = (p.y - p.a * x).norm();
    out["residual_floor"] = info.residual_floor;
    out["converged"] = true;
    out["iterations"] = 1;
    out["wall_time_seconds"] = elapsed_seconds(start);
    emit(args, out);
    return kExitOk;
}

int run_rank1(const CommonArgs& args) {
    std::string digest;
    const json problem = load_problem(args, digest);
    require_kind(problem, {"rank1_sym4"});
    const json& dim_field = require_field(problem, "dim");
    if (!dim_field.is_number_integer()) {
        throw io::ParseError("field 'dim' must be an integer");
    }
    const auto dim = dim_field.get<Eigen::Index>();
    const Vector flat = io::parse_vector(require_field(problem, "tensor"), "tensor");
    const std::vector<double> raw(flat.data(), flat.data() + flat.size());
    const auto tensor = sphereqp::tensor_rank1::symmetrize(raw, dim);

    sphereqp::tensor_rank1::Options opts;
    if (args.tol > 0.0) opts.tol = args.tol;
    if (args.max_iters > 0) opts.max_iters = args.max_iters;

    const auto start = std::chrono::steady_clock::now();
    const auto res = sphereqp::tensor_rank1::best_rank1(tensor, opts);
    json out;
    out["kind"] = "rank1_sym4";
    out["problem_digest"] = digest;
    out["weight"] = res.weight;
    out["x"] = io::vector_to_json(res.direction);
    out["error"] = res.error;
    out["converged"] = res.converged;
    out["iterations"] = res.iterations;
    out["wall_time_seconds"] = elapsed_seconds(start);
    emit(args, out);
    return res.converged ? kExitOk : kExitNotConverged;
}

int run_cgevd(const CommonArgs& args) {
    std::string digest;
    const json problem = load_problem(args, digest);
    require_kind(problem, {"cgevd"});
    const json& dims = require_field(problem, "dims");
    sphereqp::cgevd::Problem p;
    p.q = io::parse_matrix(require_field(problem, "Q"), "Q");
    p.b = io::parse_matrix(require_field(problem, "B"), "B");
    for (const char* key : {"I", "J", "R", "S"}) {
        if (!dims.contains(key) || !dims[key].is_number_integer()) {
            throw io::ParseError(std::string("field 'dims.") + key +
                                 "' must be an integer");
        }
    }
    p.i_dim = dims["I"].get<Eigen::Index>();
    p.j_dim = dims["J"].get<Eigen::Index>();
    p.r_count = dims["R"].get<Eigen::Index>();
    p.s_rank = dims["S"].get<Eigen::Index>();

    sphereqp::cgevd::Options opts;
    opts.seed = args.seed;
    if (args.tol > 0.0) opts.tol = args.tol;
    if (args.max_iters > 0) opts.max_sweeps = args.max_iters;

    const auto start = std::chrono::steady_clock::now();
    const auto state = sphereqp::cgevd::solve(p, opts);
    const bool converged = state.feasibility < 1e-6;
    json out;
    out["kind"] = "cgevd";
    out["problem_digest"] = digest;
    out["A"] = io::matrix_to_json(state.a);
    json g_list = json::array();
    for (const Matrix& g : state.g) g_list.push_back(io::matrix_to_json(g));
    out["G"] = g_list;
    out["X"] = io::matrix_to_json(sphereqp::cgevd::assemble_x(p, state));
    out["objective"] = state.objective;
    out["feasibility"] = state.feasibility;
    out["stalled"] = state.stalled;
    out["converged"] = converged;
    out["iterations"] = state.sweeps;
    out["wall_time_seconds"] = elapsed_seconds(start);
    emit(args, out);
    return converged ? kExitOk : kExitNotConverged;
}

int run_demo_deconv(const CommonArgs& args, int size) {
    sphereqp::deconv_demo::Options opts;
    opts.size = size;
    opts.seed = args.seed;
    if (args.tol > 0.0) opts.tol = args.tol;
    if (args.max_iters > 0) opts.max_iters = args.max_iters;

    const auto start = std::chrono::steady_clock::now();
    const auto rep = sphereqp::deconv_demo::run(opts);
    json out;
    out["kind"] = "demo_deconv";
    out["size"] = rep.size;
    out["psnr_blurred_db"] = rep.psnr_blurred;
    out["psnr_reconstructed_db"] = rep.psnr_reconstructed;
    out["alpha"] = rep.alpha;
    out["alpha_stationarity"] = rep.alpha_stationarity;
    out["converged"] = rep.converged;
    out["iterations"] = rep.iterations;
    out["wall_time_seconds"] = elapsed_seconds(start);
    emit(args, out);
    if (!args.trace_path.empty()) {
        std::vector<sphereqp::qcqp::TraceRecord> trace;
        for (size_t i = 0; i < rep.objective_trace.size(); ++i) {
            trace.push_back({static_cast<int>(i), rep.objective_trace[i], 0.0,
                             0.0, 0.0});
        }
        io::write_file(args.trace_path, io::trace_to_csv(trace));
    }
    return rep.converged ? kExitOk : kExitNotConverged;
}

int run_bench_rank1(const CommonArgs& args, int count, int dim) {
    if (dim > 20) {
        throw io::ParseError("--dim must be at most 20");
    }
    std::mt19937_64 rng(args.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::ostringstream csv;
    csv << "instance,relative_error\n";
    csv.precision(17);
    int below = 0;
    const auto start = std::chrono::steady_clock::now();
    for (int inst = 0; inst < count; ++inst) {
        std::vector<double> raw(static_cast<size_t>(dim) * dim * dim * dim);
        for (double& v : raw) v = gauss(rng);
        const auto tensor = sphereqp::tensor_rank1::symmetrize(raw, dim, true);
        const auto solver_res = sphereqp::tensor_rank1::best_rank1(tensor);
        const auto oracle_res = sphereqp::tensor_rank1::best_rank1_power(
            tensor, 100, args.seed + 1000003ull * (inst + 1));
        const double best_sq =
            std::max(solver_res.weight * solver_res.weight,
                     oracle_res.weight * oracle_res.weight);
        const double err_solver = tensor.frobenius_sq() -
                                  solver_res.weight * solver_res.weight;
        const double err_best = tensor.frobenius_sq() - best_sq;
        const double rel = std::abs(err_solver - err_best) /
                           std::max(1e-300, err_best);
        csv << inst << ',' << rel << '\n';
        if (rel < 0.001) ++below;
    }
    json out;
    out["kind"] = "bench_rank1";
    out["count"] = count;
    out["dim"] = dim;
    out["fraction_below_1e-3"] =
        count > 0 ? static_cast<double>(below) / count : 0.0;
    out["wall_time_seconds"] = elapsed_seconds(start);
    emit(args, out);
    if (!args.trace_path.empty()) {
        io::write_file(args.trace_path, csv.str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sphere-constrained quadratic programming toolkit"};
    app.require_subcommand(1);

    CommonArgs scqp_args, qcqp_args_common, breg_args, rank1_args, cgevd_args,
        demo_args, bench_args;
    QcqpArgs qcqp_extra;
    int demo_size = 32;
    int bench_count = 200;
    int bench_dim = 10;

    auto* scqp_cmd = app.add_subcommand("scqp", "sphere-constrained QP");
    add_common(scqp_cmd, scqp_args);

    auto* qcqp_cmd = app.add_subcommand("qcqp", "QP over ellipsoid intersections");
    add_common(qcqp_cmd, qcqp_args_common);
    qcqp_cmd->add_option("--gamma0", qcqp_extra.gamma0, "initial step size");
    qcqp_cmd->add_option("--gamma-policy", qcqp_extra.gamma_policy,
                         "fixed or adaptive");
    qcqp_cmd->add_option("--alpha-step", qcqp_extra.alpha_step,
                         "gamma adaptation factor");
    qcqp_cmd->add_option("--mode", qcqp_extra.mode, "exact or linearized");
    qcqp_cmd->add_option("--mu", qcqp_extra.mu, "linearized proximal weight");
    qcqp_cmd->add_option("--carrier", qcqp_extra.carrier,
                         "index:N, min-cond, or frobenius");
    qcqp_cmd->add_option("--jitter", qcqp_extra.jitter,
                         "Cholesky jitter for semidefinite carriers");

    auto* breg_cmd = app.add_subcommand("boundedreg", "bounded-residual regression");
    add_common(breg_cmd, breg_args);

    auto* rank1_cmd = app.add_subcommand("rank1", "best rank-1 symmetric order-4");
    add_common(rank1_cmd, rank1_args);

    auto* cgevd_cmd = app.add_subcommand("cgevd", "structured generalized EVD");
    add_common(cgevd_cmd, cgevd_args);

    auto* demo_cmd = app.add_subcommand("demo-deconv", "deblurring demo");
    add_common(demo_cmd, demo_args, false);
    demo_cmd->add_option("--size", demo_size, "image side length (16..64)");

    auto* bench_cmd = app.add_subcommand("bench-rank1", "rank-1 benchmark");
    add_common(bench_cmd, bench_args, false);
    bench_cmd->add_option("--count", bench_count, "instances");
    bench_cmd->add_option("--dim", bench_dim, "tensor dimension (<= 20)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scqp_cmd->parsed()) return run_scqp(scqp_args);
        if (qcqp_cmd->parsed()) return run_qcqp(qcqp_args_common, qcqp_extra);
        if (breg_cmd->parsed()) return run_boundedreg(breg_args);
        if (rank1_cmd->parsed()) return run_rank1(rank1_args);
        if (cgevd_cmd->parsed()) return run_cgevd(cgevd_args);
        if (demo_cmd->parsed()) return run_demo_deconv(demo_args, demo_size);
        if (bench_cmd->parsed()) return run_bench_rank1(bench_args, bench_count, bench_dim);
    } catch (const sphereqp::InvalidInputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const sphereqp::NotPositiveDefiniteError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const sphereqp::ConvergenceError& e) {
        std::cerr << "did not converge: " << e.what() << "\n";
        return kExitNotConverged;
    }
    return kExitInput;
}
