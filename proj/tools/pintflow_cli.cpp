#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pintflow/driver/run.hpp"
#include "pintflow/mesh/levels.hpp"
#include "pintflow/spectra/verification.hpp"

using namespace pintflow;

namespace {

enum Exit { kOk = 0, kNotConverged = 1, kConfig = 2, kNumerical = 3, kInput = 4 };

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> sets;
    std::string problem, preconditioner, schedule;
    int level = -1, n_t = -1, workers = -1;
    double beta = -1.0, T = -1.0, nu = -1.0;
    bool beta_given = false;
    std::string json, csv;
};

void add_common(CLI::App* app, CommonOptions& o) {
    app->add_option("-c,--config", o.config_file, "key = value configuration file");
    app->add_option("-s,--set", o.sets, "override one setting, key=value (repeatable)");
    app->add_option("--problem", o.problem, "stokes_manufactured | oseen_cavity");
    app->add_option("--preconditioner", o.preconditioner, "linear | nonlinear | oseen_uz");
    app->add_option("--level", o.level, "finest mesh level");
    app->add_option("--nt", o.n_t, "number of time steps n_t");
    app->add_option("--beta", o.beta, "control cost weight")->each([&](const std::string&) { o.beta_given = true; });
    app->add_option("--T", o.T, "final time");
    app->add_option("--nu", o.nu, "viscosity");
    app->add_option("--workers", o.workers, "worker threads for the block solves");
    app->add_option("--schedule", o.schedule, "dynamic | contiguous");
    app->add_option("--json", o.json, "JSON report path");
    app->add_option("--csv", o.csv, "CSV row path (appended)");
}

RunConfig build_config(const CommonOptions& o) {
    RunConfig cfg;
    if (!o.config_file.empty()) apply_config_file(cfg, o.config_file);
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!o.problem.empty()) {
        cfg.problem = parse_problem(o.problem);
        if (o.preconditioner.empty() && cfg.problem == ProblemKind::oseen_cavity) {
            cfg.preconditioner = PreconditionerKind::oseen_uz;
        }
    }
    if (!o.preconditioner.empty()) cfg.preconditioner = parse_preconditioner(o.preconditioner);
    if (o.level >= 0) cfg.level = o.level;
    if (o.n_t >= 0) cfg.n_t = o.n_t;
    if (o.beta_given) cfg.beta = o.beta;
    if (o.T >= 0.0) cfg.T = o.T;
    if (o.nu >= 0.0) cfg.nu = o.nu;
    if (o.workers >= 0) apply_setting(cfg, "workers", std::to_string(o.workers));
    if (!o.schedule.empty()) apply_setting(cfg, "schedule", o.schedule);
    if (!o.json.empty()) cfg.json_path = o.json;
    if (!o.csv.empty()) cfg.csv_path = o.csv;
    cfg.workers = workers_from_environment(cfg.workers);
    return cfg;
}

std::vector<std::size_t> parse_worker_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        RunConfig tmp;
        apply_setting(tmp, "workers", item);
        out.push_back(tmp.workers);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

int cmd_solve(const RunConfig& cfg) {
    const SolverReport r = run_solve(cfg);
    std::cout << report_csv_header() << '\n' << report_csv_row(r) << '\n';
    if (r.velocity_error) std::cout << "velocity_error " << *r.velocity_error << '\n';
    if (!r.converged) {
        std::cerr << "outer solver did not converge (relative residual " << r.final_residual << ")\n";
        return kNotConverged;
    }
    return kOk;
}

int cmd_eigs(const RunConfig& cfg, const std::string& spectra_csv, const std::string& summary_json) {
    if (cfg.problem != ProblemKind::stokes_manufactured) throw ConfigError("eigs supports the Stokes problem only");
    const LevelOperators levels = build_level_operators(cfg.level, cfg.level, cfg.nu);
    const TimeGrid grid(cfg.n_t, cfg.T);
    PreconditionedSpectra sp;
    const SpectralSummary s = verify_eigenvalue_counts(levels.finest(), grid, cfg.beta, &sp);
    if (!spectra_csv.empty()) write_spectra_csv(spectra_csv, sp);
    nlohmann::json j = {{"n_t", s.n_t},
                        {"beta", s.beta},
                        {"n_v", s.n_v},
                        {"n_p", s.n_p},
                        {"N", s.N},
                        {"a_hat", s.bounds.a_hat},
                        {"b_hat", s.bounds.b_hat},
                        {"c", s.bounds.c},
                        {"d", s.bounds.d},
                        {"unit_count", s.unit_count},
                        {"unit_bound", s.unit_bound},
                        {"phat_count", s.phat_count},
                        {"phat_bound", s.phat_bound},
                        {"ptilde_count", s.ptilde_count},
                        {"ptilde_bound", s.ptilde_bound},
                        {"product_min", s.product_min},
                        {"product_max", s.product_max},
                        {"product_inside", s.product_inside},
                        {"unit_fraction", s.unit_fraction},
                        {"unit_fraction_threshold", s.unit_fraction_threshold}};
    write_json(summary_json, j);
    const bool ok = s.unit_ok() && s.phat_ok() && s.ptilde_ok() && s.product_inside;
    return ok ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parallel-in-time all-at-once solver for Stokes and Oseen distributed control"};
    app.require_subcommand(1);

    CommonOptions solve_o, eigs_o, scaling_o, conv_o;
    auto* solve = app.add_subcommand("solve", "solve one all-at-once system and report");
    add_common(solve, solve_o);

    auto* eigs = app.add_subcommand("eigs", "dense spectra of the preconditioned systems (small sizes only)");
    add_common(eigs, eigs_o);
    std::string spectra_csv, summary_json;
    eigs->add_option("--spectra-csv", spectra_csv, "CSV of the sorted eigenvalues");
    eigs->add_option("--summary", summary_json, "JSON summary path (stdout if omitted)");

    auto* scaling = app.add_subcommand("scaling", "time the solve for several worker counts");
    add_common(scaling, scaling_o);
    std::string worker_list = "1,2,4", mode = "strong", scaling_json;
    int blocks_per_worker = 2;
    scaling->add_option("--worker-list", worker_list, "comma separated worker counts");
    scaling->add_option("--mode", mode, "strong | weak")->check(CLI::IsMember({"strong", "weak"}));
    scaling->add_option("--blocks-per-worker", blocks_per_worker, "weak mode: n_t = a * workers");
    scaling->add_option("--out", scaling_json, "JSON output path (stdout if omitted)");

    auto* conv = app.add_subcommand("convergence", "manufactured-solution error under (h, tau) refinement");
    add_common(conv, conv_o);
    std::vector<int> conv_levels{2, 3, 4};
    int conv_nt0 = 8;
    std::string conv_json;
    conv->add_option("--levels", conv_levels, "mesh levels, n_t doubles with each");
    conv->add_option("--nt0", conv_nt0, "n_t on the first level");
    conv->add_option("--out", conv_json, "JSON output path (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return cmd_solve(build_config(solve_o));
        if (*eigs) {
            RunConfig cfg = build_config(eigs_o);
            if (eigs_o.level < 0) cfg.level = 1;
            if (eigs_o.n_t < 0) cfg.n_t = 6;
            if (eigs_o.nu < 0.0) cfg.nu = 1.0;
            return cmd_eigs(cfg, spectra_csv, summary_json);
        }
        if (*scaling) {
            const RunConfig cfg = build_config(scaling_o);
            const auto workers = parse_worker_list(worker_list);
            const unsigned hw = std::thread::hardware_concurrency();
            for (std::size_t w : workers) {
                if (hw > 0 && w > hw) std::cerr << "warning: " << w << " workers exceed " << hw << " hardware threads\n";
            }
            const ScalingReport r = mode == "strong" ? run_strong_scaling(cfg, workers)
                                                     : run_weak_scaling(cfg, blocks_per_worker, workers);
            write_json(scaling_json, scaling_to_json(r));
            return kOk;
        }
        if (*conv) {
            RunConfig cfg = build_config(conv_o);
            if (conv_o.T < 0.0) cfg.T = 1.0;
            std::vector<std::pair<int, int>> ref;
            int nt = conv_nt0;
            for (int l : conv_levels) {
                ref.emplace_back(l, nt);
                nt *= 2;
            }
            const auto pts = run_convergence(cfg, ref);
            write_json(conv_json, convergence_to_json(pts));
            for (const auto& p : pts) {
                if (!p.converged) return kNotConverged;
            }
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfig;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kConfig;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
