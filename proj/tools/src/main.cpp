// derham: command-line driver for the auxiliary-scheme experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "derham/cli.hpp"
#include "derham/parallel.hpp"

namespace {

using namespace derham;
using namespace derham::cli;

int emit(const std::string& text, const std::string& out)
{
    if (out.empty() || out == "-") {
        std::cout << text;
        return 0;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot write " << out << "\n";
        return 2;
    }
    f << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Auxiliary-scheme solvers for the curl-curl and grad-div problems"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string problem = "maxwell", domain = "cube", mode = "source", solver = "cg",
                precond = "none", output = "json", out;
    int threads = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--domain", domain, "cube | cube-with-hole")->capture_default_str();
        sub->add_option("--level", cfg.level, "mesh level 1..5")->capture_default_str();
        sub->add_option("--out", out, "output file (default stdout)");
        sub->add_option("--output", output, "json | csv")->capture_default_str();
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
    add_common(run_cmd);
    run_cmd->add_option("--mode", mode, "source | eigen | mesh-info")->capture_default_str();
    run_cmd->add_option("--problem", problem, "maxwell | graddiv")->capture_default_str();
    run_cmd->add_option("--solver", solver, "cg | mg (standalone multigrid)")->capture_default_str();
    run_cmd->add_option("--precond", precond, "none | ilu0 | sait | mg")->capture_default_str();
    run_cmd->add_option("--c", cfg.c, "shift c of the source problem")->capture_default_str();
    run_cmd->add_option("--tol", cfg.tol, "relative stopping tolerance")->capture_default_str();
    run_cmd->add_option("--nev", cfg.nev, "eigenpairs that must converge")->capture_default_str();
    run_cmd->add_option("--block", cfg.block, "LOBPCG block size")->capture_default_str();
    run_cmd->add_option("--seed", cfg.seed, "seed for loads and initial blocks")->capture_default_str();
    run_cmd->add_option("--max-iterations", cfg.max_iterations, "0 selects the solver default");
    run_cmd->add_option("--mg-nu", cfg.mg_nu, "smoothing sweeps per V-cycle side")->capture_default_str();
    run_cmd->add_option("--sait-tau", cfg.sait_tau, "SAIT drop threshold")->capture_default_str();
    run_cmd->add_option("--sait-m", cfg.sait_m, "SAIT iterations")->capture_default_str();
    run_cmd->add_option("--dump-operators", cfg.dump_operators, "write Matrix Market files here");
    run_cmd->add_flag("--allow-large", cfg.allow_large, "permit level-5 runs");
    run_cmd->add_option("--threads", threads, "worker threads (overrides DERHAM_THREADS)");

    CLI::App* info = app.add_subcommand("mesh-info", "entity counts of a mesh");
    add_common(info);

    int table = 0;
    int max_level = 3;
    TableOptions topts;
    CLI::App* tables = app.add_subcommand("reproduce-tables", "regenerate a published table as CSV");
    tables->add_option("--table", table, "table id 3..11")->required();
    tables->add_option("--max-level", max_level, "finest level")->capture_default_str();
    tables->add_option("--seed", topts.seed, "seed")->capture_default_str();
    tables->add_option("--tol", topts.tol, "tolerance")->capture_default_str();
    tables->add_option("--out", out, "output file or directory (default stdout)");
    tables->add_flag("--allow-large", topts.allow_large, "permit level 5");
    tables->add_option("--threads", threads, "worker threads (overrides DERHAM_THREADS)");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) {
        set_thread_count(threads);
    }

    try {
        if (*tables) {
            topts.max_level = max_level;
            const std::string csv = reproduce_table(table, topts);
            std::string path = out;
            if (!path.empty() && std::filesystem::is_directory(path)) {
                path = (std::filesystem::path(path) / ("table" + std::to_string(table) + ".csv")).string();
            }
            return emit(csv, path);
        }

        cfg.domain = parse_domain(domain);
        cfg.output = parse_output(output);
        if (*info) {
            cfg.mode = Mode::MeshInfo;
        } else {
            cfg.mode = parse_mode(mode);
            cfg.problem = parse_problem(problem);
            cfg.solver = parse_solver(solver);
            cfg.precond = parse_precond(precond);
        }
        const RunResult res = run(cfg);
        const int rc = emit(render(res.report, cfg.output), out);
        return rc != 0 ? rc : res.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << (*tables ? tables->help() : run_cmd->help());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
