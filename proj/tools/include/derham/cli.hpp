#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "derham/auxscheme.hpp"

namespace derham::cli {

enum class Mode { Source, Eigen, MeshInfo };
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

enum class OutputFormat { Json, Csv };
OutputFormat parse_output(std::string_view s);

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    ProblemKind problem = ProblemKind::Maxwell;
    DomainKind domain = DomainKind::Cube;
    int level = 1;
    Mode mode = Mode::Source;
    SolverKind solver = SolverKind::Cg;
    PrecondKind precond = PrecondKind::None;
    double c = 1.0;
    double tol = 1e-8;
    int nev = 20;
    int block = 25;
    std::uint64_t seed = 20240601;
    OutputFormat output = OutputFormat::Json;
    int max_iterations = 0;  // 0: 5000 for CG, 1000 for LOBPCG
    int mg_nu = 5;
    double sait_tau = 0.05;
    int sait_m = 10;
    bool allow_large = false;
    std::string dump_operators;  // directory for Matrix Market exports

    /// Throws ConfigError on invalid values or combinations.
    void validate() const;
    PrecondSettings precond_settings() const;
};

struct RunResult {
    int exit_code = 0;
    nlohmann::json report;
};

/// Runs one experiment. Reports contain no timings, so a fixed config and seed
/// always give identical output.
RunResult run(const ExperimentConfig& cfg);

/// Serializes a report in the requested format.
std::string render(const nlohmann::json& report, OutputFormat format);

nlohmann::json mesh_info(DomainKind domain, int level);

/// Deterministic load vector with entries uniform in [-1, 1].
Vector source_load(Index n, std::uint64_t seed);

/// Writes A, B, Mk, Mkm1, Mkp1, U, Dk, Dkm1 and the auxiliary matrix as .mtx files.
void dump_operators(const ComplexOperators& ops, const std::string& dir);

nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const EigenReport& r);
nlohmann::json to_json(const ClassifiedEigenpair& p);

struct TableOptions {
    int max_level = 3;
    bool allow_large = false;
    std::uint64_t seed = 20240601;
    double tol = 1e-8;
};

/// Table ids with a CSV layout mirroring the published tables.
bool is_table_id(int id);
/// CSV text for one table; throws ConfigError for unknown ids.
std::string reproduce_table(int id, const TableOptions& opts);

}  // namespace derham::cli
