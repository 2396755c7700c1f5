#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pintflow/driver/parallel.hpp"
#include "pintflow/precond/block_system.hpp"

namespace pintflow {

enum class ProblemKind { stokes_manufactured, oseen_cavity };
enum class PreconditionerKind { linear, nonlinear, oseen_uz };

std::string to_string(ProblemKind p);
std::string to_string(PreconditionerKind p);
ProblemKind parse_problem(const std::string& s);
PreconditionerKind parse_preconditioner(const std::string& s);

struct RunConfig {
    ProblemKind problem = ProblemKind::stokes_manufactured;
    PreconditionerKind preconditioner = PreconditionerKind::nonlinear;
    int level = 3;
    int coarsest_level = 1;
    int n_t = 15;
    double T = 10.0;
    double beta = 1e-3;
    double nu = 1e-2;

    double outer_tol = 1e-6;
    int outer_restart = 0;  // 0: 30 for the linear preconditioner, 10 otherwise
    int outer_max_iters = 500;

    InnerSettings inner{};

    std::size_t workers = 1;
    Schedule schedule = Schedule::dynamic;
    unsigned seed = 0;

    std::string json_path;
    std::string csv_path;
    std::string residual_csv_path;

    int effective_restart() const;
    void validate() const;
};

/// Sets one key from its textual value; unknown keys and malformed values
/// raise ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads `key = value` lines ('#' starts a comment) on top of cfg.
void apply_config_file(RunConfig& cfg, const std::string& path);

struct PhaseTimes {
    double assembly = 0.0;
    double setup = 0.0;
    double fft = 0.0;
    double block_solves = 0.0;
    double orthogonalization = 0.0;
    double solve = 0.0;  // outer Krylov solve including preconditioner applications
    double total = 0.0;
};

struct SolverReport {
    RunConfig config;
    std::size_t n_v = 0, n_p = 0, dofs = 0;
    int outer_iterations = 0;
    bool converged = false;
    double final_residual = 0.0;
    std::vector<double> residual_history;
    std::vector<double> inner_per_block;  // average inner iterations per application, per block
    double average_inner = 0.0;
    long preconditioner_applications = 0;
    long inner_failures = 0;
    double max_imag_ratio = 0.0;
    std::optional<double> velocity_error;
    std::size_t workers = 1;
    PhaseTimes times;
};

/// Assembles, builds the block contexts and runs the outer Krylov solve.
/// The solution (field-major) is stored in *solution if requested.
SolverReport run_solve(const RunConfig& cfg, std::vector<double>* solution = nullptr);

nlohmann::json report_to_json(const SolverReport& report);
/// Throws InputError naming the first field that is missing or mistyped.
void validate_report_json(const nlohmann::json& j);
void write_report_json(const std::string& path, const SolverReport& report);

std::string report_csv_header();
std::string report_csv_row(const SolverReport& report);
/// Appends the row, writing the header first if the file is new or empty.
void append_report_csv(const std::string& path, const SolverReport& report);

struct ScalingPoint {
    std::size_t workers = 1;
    int n_t = 0;
    double seconds = 0.0;
    int outer_iterations = 0;
    bool converged = false;
};

struct ScalingReport {
    std::string mode;  // "strong" or "weak"
    std::vector<ScalingPoint> points;
    std::optional<double> slope;  // least-squares slope of log(time) against log(workers)
    double max_time_ratio = 1.0;  // largest time over smallest time
};

/// Least-squares slope of log(seconds) over log(workers); empty for fewer
/// than two distinct worker counts.
std::optional<double> fit_loglog_slope(const std::vector<ScalingPoint>& points);

/// Same problem for every worker count.
ScalingReport run_strong_scaling(RunConfig cfg, const std::vector<std::size_t>& workers);

/// n_t = a * workers, so that there are a * workers - 1 time blocks and with
/// the contiguous schedule the first worker holds a - 1 of them.
ScalingReport run_weak_scaling(RunConfig cfg, int a, const std::vector<std::size_t>& workers);

nlohmann::json scaling_to_json(const ScalingReport& report);

struct ConvergencePoint {
    int level = 0;
    int n_t = 0;
    double h = 0.0;
    double tau = 0.0;
    double error = 0.0;
    int outer_iterations = 0;
    bool converged = false;
};

/// Manufactured Stokes problem (nu = 1) solved on each (level, n_t) pair.
std::vector<ConvergencePoint> run_convergence(RunConfig cfg, const std::vector<std::pair<int, int>>& refinements);

nlohmann::json convergence_to_json(const std::vector<ConvergencePoint>& points);

}  // namespace pintflow
