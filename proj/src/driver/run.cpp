#include "pintflow/driver/run.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "pintflow/krylov/gmres.hpp"
#include "pintflow/mesh/levels.hpp"
#include "pintflow/precond/circulant_preconditioner.hpp"
#include "pintflow/precond/oseen.hpp"
#include "pintflow/precond/stokes.hpp"
#include "pintflow/system/all_at_once.hpp"
#include "pintflow/system/problem.hpp"

namespace pintflow {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError("invalid integer for " + key + ": '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(out)) throw ConfigError("invalid number for " + key + ": '" + v + "'");
    return out;
}

}  // namespace

std::string to_string(ProblemKind p) {
    return p == ProblemKind::stokes_manufactured ? "stokes_manufactured" : "oseen_cavity";
}

std::string to_string(PreconditionerKind p) {
    switch (p) {
        case PreconditionerKind::linear: return "linear";
        case PreconditionerKind::nonlinear: return "nonlinear";
        case PreconditionerKind::oseen_uz: return "oseen_uz";
    }
    return "unknown";
}

ProblemKind parse_problem(const std::string& s) {
    if (s == "stokes_manufactured" || s == "stokes") return ProblemKind::stokes_manufactured;
    if (s == "oseen_cavity" || s == "oseen") return ProblemKind::oseen_cavity;
    throw ConfigError("unknown problem '" + s + "' (expected stokes_manufactured or oseen_cavity)");
}

PreconditionerKind parse_preconditioner(const std::string& s) {
    if (s == "linear") return PreconditionerKind::linear;
    if (s == "nonlinear") return PreconditionerKind::nonlinear;
    if (s == "oseen_uz") return PreconditionerKind::oseen_uz;
    throw ConfigError("unknown preconditioner '" + s + "' (expected linear, nonlinear or oseen_uz)");
}

int RunConfig::effective_restart() const {
    if (outer_restart > 0) return outer_restart;
    return preconditioner == PreconditionerKind::linear ? 30 : 10;
}

void RunConfig::validate() const {
    if (coarsest_level < 1 || level > 8 || coarsest_level > level) {
        throw ConfigError("levels must satisfy 1 <= coarsest_level <= level <= 8");
    }
    if (n_t < 3) throw ConfigError("n_t must be >= 3");
    if (!(T > 0.0)) throw ConfigError("final time T must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (!(nu > 0.0)) throw ConfigError("nu must be positive");
    if (!(outer_tol > 0.0 && outer_tol < 1.0)) throw ConfigError("outer tolerance must lie in (0, 1)");
    if (outer_restart < 0 || outer_max_iters < 1) throw ConfigError("outer restart/max iterations out of range");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (problem == ProblemKind::oseen_cavity && preconditioner != PreconditionerKind::oseen_uz) {
        throw ConfigError("the oseen_cavity problem requires the oseen_uz preconditioner");
    }
    inner.validate();
}

void apply_setting(RunConfig& cfg, const std::string& key_in, const std::string& value_in) {
    const std::string key = trim(key_in), v = trim(value_in);
    if (key == "problem") cfg.problem = parse_problem(v);
    else if (key == "preconditioner") cfg.preconditioner = parse_preconditioner(v);
    else if (key == "level") cfg.level = parse_int(key, v);
    else if (key == "coarsest_level") cfg.coarsest_level = parse_int(key, v);
    else if (key == "n_t") cfg.n_t = parse_int(key, v);
    else if (key == "T") cfg.T = parse_double(key, v);
    else if (key == "beta") cfg.beta = parse_double(key, v);
    else if (key == "nu") cfg.nu = parse_double(key, v);
    else if (key == "outer_tol") cfg.outer_tol = parse_double(key, v);
    else if (key == "outer_restart") cfg.outer_restart = parse_int(key, v);
    else if (key == "outer_max_iters") cfg.outer_max_iters = parse_int(key, v);
    else if (key == "inner_tol") cfg.inner.inner_tol = parse_double(key, v);
    else if (key == "inner_max_iters") cfg.inner.inner_max_iters = parse_int(key, v);
    else if (key == "inner_restart") cfg.inner.inner_restart = parse_int(key, v);
    else if (key == "uzawa_iters") cfg.inner.uzawa_iters = parse_int(key, v);
    else if (key == "uzawa_mu") cfg.inner.uzawa_mu = parse_double(key, v);
    else if (key == "mg_cycles") cfg.inner.mg.cycles = parse_int(key, v);
    else if (key == "mg_pre_sweeps") cfg.inner.mg.pre_sweeps = parse_int(key, v);
    else if (key == "mg_post_sweeps") cfg.inner.mg.post_sweeps = parse_int(key, v);
    else if (key == "sor_omega") cfg.inner.mg.omega = parse_double(key, v);
    else if (key == "chebyshev_iters") cfg.inner.chebyshev_iters = parse_int(key, v);
    else if (key == "workers") {
        const int w = parse_int(key, v);
        if (w < 1) throw ConfigError("workers must be >= 1");
        cfg.workers = static_cast<std::size_t>(w);
    } else if (key == "schedule") {
        if (v == "dynamic") cfg.schedule = Schedule::dynamic;
        else if (v == "contiguous") cfg.schedule = Schedule::contiguous;
        else throw ConfigError("unknown schedule '" + v + "' (expected dynamic or contiguous)");
    } else if (key == "seed") cfg.seed = static_cast<unsigned>(parse_int(key, v));
    else if (key == "json") cfg.json_path = v;
    else if (key == "csv") cfg.csv_path = v;
    else if (key == "residual_csv") cfg.residual_csv_path = v;
    else throw ConfigError("unknown configuration key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
}

SolverReport run_solve(const RunConfig& cfg, std::vector<double>* solution) {
    cfg.validate();
    const auto t_total = clock_type::now();
    SolverReport rep;
    rep.config = cfg;
    rep.workers = cfg.workers;

    auto t0 = clock_type::now();
    const TimeGrid grid(cfg.n_t, cfg.T);
    const ControlProblem problem = cfg.problem == ProblemKind::stokes_manufactured
                                       ? stokes_manufactured(cfg.beta, grid, cfg.nu)
                                       : oseen_cavity(cfg.beta, grid, cfg.nu);
    const LevelOperators levels = build_level_operators(cfg.coarsest_level, cfg.level, cfg.nu, problem.wind);
    const DiscreteOperators& ops = levels.finest();
    const BlockVector<real> rhs = build_rhs(problem, ops);
    const AllAtOnceOperator A(ops, grid, cfg.beta);
    rep.times.assembly = seconds_since(t0);
    rep.n_v = ops.n_v;
    rep.n_p = ops.n_p;
    rep.dofs = A.layout().size();

    t0 = clock_type::now();
    WorkerPool pool(cfg.workers, cfg.schedule);
    std::vector<StokesBlockContext> stokes;
    std::vector<OseenBlockContext> oseen;
    BlockSolver solver;
    switch (cfg.preconditioner) {
        case PreconditionerKind::linear:
            stokes = build_stokes_contexts(levels, grid, cfg.beta, cfg.inner);
            solver = stokes_block_solver(stokes, StokesVariant::linear, cfg.inner);
            break;
        case PreconditionerKind::nonlinear:
            stokes = build_stokes_contexts(levels, grid, cfg.beta, cfg.inner);
            solver = stokes_block_solver(stokes, StokesVariant::nonlinear, cfg.inner);
            break;
        case PreconditionerKind::oseen_uz:
            oseen = build_oseen_contexts(levels, grid, cfg.beta, cfg.inner);
            solver = oseen_block_solver(oseen, cfg.inner);
            break;
    }
    CirculantPreconditioner P(A.layout(), solver, &pool);
    rep.times.setup = seconds_since(t0);

    const BlockLayout layout = A.layout();
    const LinearOperator<real> A_op = [&](std::span<const real> x, std::span<real> y) {
        const BlockVector<real> xv(layout, std::vector<real>(x.begin(), x.end()));
        BlockVector<real> yv(layout);
        A.apply(xv, yv);
        std::copy(yv.data().begin(), yv.data().end(), y.begin());
    };
    KrylovConfig kc;
    kc.tol = cfg.outer_tol;
    kc.restart = cfg.effective_restart();
    kc.max_iters = cfg.outer_max_iters;
    kc.record_history = true;

    t0 = clock_type::now();
    const SolveResult<real> res = cfg.preconditioner == PreconditionerKind::linear
                                      ? gmres<real>(A_op, P.as_operator(), rhs.data(), kc)
                                      : fgmres<real>(A_op, P.as_operator(), rhs.data(), kc);
    rep.times.solve = seconds_since(t0);

    const CirculantStats& st = P.stats();
    rep.outer_iterations = res.iterations;
    rep.converged = res.converged;
    rep.final_residual = res.final_residual;
    rep.residual_history = res.residual_history;
    rep.preconditioner_applications = st.applications;
    rep.inner_failures = st.inner_failures;
    rep.max_imag_ratio = st.max_imag_ratio;
    rep.times.fft = st.fft_seconds;
    rep.times.block_solves = st.block_seconds;
    rep.times.orthogonalization = res.orthogonalization_seconds;
    rep.inner_per_block.assign(st.inner_iterations.size(), 0.0);
    if (st.applications > 0) {
        for (std::size_t j = 0; j < st.inner_iterations.size(); ++j) {
            rep.inner_per_block[j] = static_cast<double>(st.inner_iterations[j]) / static_cast<double>(st.applications);
        }
    }
    rep.average_inner = st.average_inner();

    const BlockVector<real> x(layout, res.x);
    if (problem.exact_v) rep.velocity_error = velocity_error(problem, ops, x);
    if (solution) *solution = res.x;
    rep.times.total = seconds_since(t_total);

    if (!cfg.residual_csv_path.empty()) write_residual_csv(cfg.residual_csv_path, res.residual_history);
    if (!cfg.json_path.empty()) write_report_json(cfg.json_path, rep);
    if (!cfg.csv_path.empty()) append_report_csv(cfg.csv_path, rep);
    return rep;
}

nlohmann::json report_to_json(const SolverReport& r) {
    const RunConfig& c = r.config;
    nlohmann::json j;
    j["problem"] = to_string(c.problem);
    j["preconditioner"] = to_string(c.preconditioner);
    j["config"] = {{"level", c.level},
                   {"coarsest_level", c.coarsest_level},
                   {"n_t", c.n_t},
                   {"T", c.T},
                   {"beta", c.beta},
                   {"nu", c.nu},
                   {"outer_tol", c.outer_tol},
                   {"outer_restart", c.effective_restart()},
                   {"outer_max_iters", c.outer_max_iters},
                   {"inner_tol", c.inner.inner_tol},
                   {"inner_max_iters", c.inner.inner_max_iters},
                   {"inner_restart", c.inner.inner_restart},
                   {"uzawa_iters", c.inner.uzawa_iters},
                   {"uzawa_mu", c.inner.uzawa_mu},
                   {"mg_cycles", c.inner.mg.cycles},
                   {"mg_pre_sweeps", c.inner.mg.pre_sweeps},
                   {"mg_post_sweeps", c.inner.mg.post_sweeps},
                   {"sor_omega", c.inner.mg.omega},
                   {"chebyshev_iters", c.inner.chebyshev_iters},
                   {"schedule", c.schedule == Schedule::dynamic ? "dynamic" : "contiguous"}};
    j["n_v"] = r.n_v;
    j["n_p"] = r.n_p;
    j["dofs"] = r.dofs;
    j["workers"] = r.workers;
    j["outer_iterations"] = r.outer_iterations;
    j["converged"] = r.converged;
    j["final_residual"] = r.final_residual;
    j["residual_history"] = r.residual_history;
    j["inner_per_block"] = r.inner_per_block;
    j["average_inner"] = r.average_inner;
    j["preconditioner_applications"] = r.preconditioner_applications;
    j["inner_failures"] = r.inner_failures;
    j["max_imag_ratio"] = r.max_imag_ratio;
    j["velocity_error"] = r.velocity_error ? nlohmann::json(*r.velocity_error) : nlohmann::json(nullptr);
    j["times"] = {{"assembly", r.times.assembly},   {"setup", r.times.setup},
                  {"fft", r.times.fft},             {"block_solves", r.times.block_solves},
                  {"orthogonalization", r.times.orthogonalization},
                  {"solve", r.times.solve},         {"total", r.times.total}};
    return j;
}

void validate_report_json(const nlohmann::json& j) {
    using nlohmann::json;
    auto need = [&](const json& obj, const std::string& where, const std::string& key, json::value_t type) {
        if (!obj.is_object() || !obj.contains(key)) throw InputError("report: missing field " + where + key);
        const json& v = obj.at(key);
        const bool number = type == json::value_t::number_float;
        const bool unsigned_int = type == json::value_t::number_unsigned;
        const bool ok = number         ? v.is_number()
                        : unsigned_int ? v.is_number_unsigned()
                        : type == json::value_t::number_integer ? v.is_number_integer()
                                                                : v.type() == type;
        if (!ok) throw InputError("report: field " + where + key + " has the wrong type");
        return v;
    };
    const auto S = json::value_t::string, F = json::value_t::number_float, I = json::value_t::number_integer,
               U = json::value_t::number_unsigned, B = json::value_t::boolean, A = json::value_t::array,
               O = json::value_t::object;
    for (const auto& [k, t] : std::vector<std::pair<std::string, json::value_t>>{
             {"problem", S}, {"preconditioner", S}, {"config", O}, {"n_v", U}, {"n_p", U}, {"dofs", U},
             {"workers", U}, {"outer_iterations", I}, {"converged", B}, {"final_residual", F},
             {"residual_history", A}, {"inner_per_block", A}, {"average_inner", F},
             {"preconditioner_applications", I}, {"inner_failures", I}, {"max_imag_ratio", F}, {"times", O}}) {
        need(j, "", k, t);
    }
    if (!j.contains("velocity_error") || !(j["velocity_error"].is_null() || j["velocity_error"].is_number())) {
        throw InputError("report: field velocity_error must be a number or null");
    }
    parse_problem(j["problem"].get<std::string>());
    parse_preconditioner(j["preconditioner"].get<std::string>());
    for (const auto& [k, t] : std::vector<std::pair<std::string, json::value_t>>{
             {"level", I}, {"coarsest_level", I}, {"n_t", I}, {"T", F}, {"beta", F}, {"nu", F}, {"outer_tol", F},
             {"outer_restart", I}, {"outer_max_iters", I}, {"inner_tol", F}, {"inner_max_iters", I},
             {"inner_restart", I}, {"uzawa_iters", I}, {"uzawa_mu", F}, {"mg_cycles", I}, {"mg_pre_sweeps", I},
             {"mg_post_sweeps", I}, {"sor_omega", F}, {"chebyshev_iters", I}, {"schedule", S}}) {
        need(j["config"], "config.", k, t);
    }
    for (const char* k : {"assembly", "setup", "fft", "block_solves", "orthogonalization", "solve", "total"}) {
        need(j["times"], "times.", k, F);
    }
    for (const auto& v : j["residual_history"]) {
        if (!v.is_number()) throw InputError("report: residual_history must hold numbers");
    }
    for (const auto& v : j["inner_per_block"]) {
        if (!v.is_number()) throw InputError("report: inner_per_block must hold numbers");
    }
    const auto blocks = j["inner_per_block"].size();
    const int n_t = j["config"]["n_t"].get<int>();
    if (blocks != static_cast<std::size_t>(n_t - 1)) throw InputError("report: inner_per_block must have n_t - 1 entries");
    const auto dofs = j["dofs"].get<std::size_t>();
    const auto expect = 2 * blocks * (j["n_v"].get<std::size_t>() + j["n_p"].get<std::size_t>());
    if (dofs != expect) throw InputError("report: dofs must equal 2 (n_t - 1)(n_v + n_p)");
}

void write_report_json(const std::string& path, const SolverReport& report) {
    const nlohmann::json j = report_to_json(report);
    validate_report_json(j);
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

std::string report_csv_header() { return "problem,preconditioner,level,n_t,beta,dofs,outer,avg_inner,cpu_s"; }

std::string report_csv_row(const SolverReport& r) {
    std::ostringstream os;
    os.precision(6);
    os << to_string(r.config.problem) << ',' << to_string(r.config.preconditioner) << ',' << r.config.level << ','
       << r.config.n_t << ',' << r.config.beta << ',' << r.dofs << ',' << r.outer_iterations << ',' << r.average_inner
       << ',' << r.times.total;
    return os.str();
}

void append_report_csv(const std::string& path, const SolverReport& report) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw InputError("cannot open " + path + " for writing");
    if (fresh) out << report_csv_header() << '\n';
    out << report_csv_row(report) << '\n';
}

std::optional<double> fit_loglog_slope(const std::vector<ScalingPoint>& points) {
    std::vector<double> xs, ys;
    for (const auto& p : points) {
        if (p.seconds > 0.0) {
            xs.push_back(std::log(static_cast<double>(p.workers)));
            ys.push_back(std::log(p.seconds));
        }
    }
    if (xs.size() < 2) return std::nullopt;
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

namespace {

ScalingReport finish_scaling(std::string mode, std::vector<ScalingPoint> points) {
    ScalingReport rep;
    rep.mode = std::move(mode);
    rep.points = std::move(points);
    rep.slope = fit_loglog_slope(rep.points);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& p : rep.points) {
        lo = std::min(lo, p.seconds);
        hi = std::max(hi, p.seconds);
    }
    rep.max_time_ratio = lo > 0.0 ? hi / lo : 1.0;
    return rep;
}

ScalingPoint timed_solve(const RunConfig& cfg) {
    const SolverReport r = run_solve(cfg);
    return {cfg.workers, cfg.n_t, r.times.solve, r.outer_iterations, r.converged};
}

}  // namespace

ScalingReport run_strong_scaling(RunConfig cfg, const std::vector<std::size_t>& workers) {
    cfg.json_path.clear();
    cfg.csv_path.clear();
    cfg.residual_csv_path.clear();
    std::vector<ScalingPoint> pts;
    for (std::size_t w : workers) {
        cfg.workers = w;
        pts.push_back(timed_solve(cfg));
    }
    return finish_scaling("strong", std::move(pts));
}

ScalingReport run_weak_scaling(RunConfig cfg, int a, const std::vector<std::size_t>& workers) {
    if (a < 1) throw ConfigError("weak scaling needs a >= 1 blocks per worker");
    cfg.json_path.clear();
    cfg.csv_path.clear();
    cfg.residual_csv_path.clear();
    cfg.schedule = Schedule::contiguous;
    std::vector<ScalingPoint> pts;
    for (std::size_t w : workers) {
        cfg.workers = w;
        cfg.n_t = a * static_cast<int>(w);
        pts.push_back(timed_solve(cfg));
    }
    return finish_scaling("weak", std::move(pts));
}

nlohmann::json scaling_to_json(const ScalingReport& r) {
    nlohmann::json j;
    j["mode"] = r.mode;
    j["slope"] = r.slope ? nlohmann::json(*r.slope) : nlohmann::json(nullptr);
    j["max_time_ratio"] = r.max_time_ratio;
    j["points"] = nlohmann::json::array();
    for (const auto& p : r.points) {
        j["points"].push_back({{"workers", p.workers},
                               {"n_t", p.n_t},
                               {"seconds", p.seconds},
                               {"outer_iterations", p.outer_iterations},
                               {"converged", p.converged}});
    }
    return j;
}

std::vector<ConvergencePoint> run_convergence(RunConfig cfg, const std::vector<std::pair<int, int>>& refinements) {
    cfg.problem = ProblemKind::stokes_manufactured;
    if (cfg.preconditioner == PreconditionerKind::oseen_uz) cfg.preconditioner = PreconditionerKind::nonlinear;
    cfg.nu = 1.0;
    cfg.json_path.clear();
    cfg.csv_path.clear();
    cfg.residual_csv_path.clear();
    std::vector<ConvergencePoint> out;
    for (const auto& [level, n_t] : refinements) {
        cfg.level = level;
        cfg.n_t = n_t;
        const SolverReport r = run_solve(cfg);
        ConvergencePoint p;
        p.level = level;
        p.n_t = n_t;
        p.h = 2.0 / static_cast<double>(1 << level);
        p.tau = cfg.T / n_t;
        p.error = r.velocity_error.value_or(std::nan(""));
        p.outer_iterations = r.outer_iterations;
        p.converged = r.converged;
        out.push_back(p);
    }
    return out;
}

nlohmann::json convergence_to_json(const std::vector<ConvergencePoint>& points) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : points) {
        j.push_back({{"level", p.level},
                     {"n_t", p.n_t},
                     {"h", p.h},
                     {"tau", p.tau},
                     {"velocity_error", p.error},
                     {"outer_iterations", p.outer_iterations},
                     {"converged", p.converged}});
    }
    return j;
}

}  // namespace pintflow
