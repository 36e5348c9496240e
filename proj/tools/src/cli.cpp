#include "derham/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "derham/matrix_market.hpp"

namespace derham::cli {

using nlohmann::json;

std::string_view to_string(Mode m)
{
    switch (m) {
    case Mode::Source:
        return "source";
    case Mode::Eigen:
        return "eigen";
    case Mode::MeshInfo:
        return "mesh-info";
    }
    return "unknown";
}

Mode parse_mode(std::string_view s)
{
    if (s == "source") {
        return Mode::Source;
    }
    if (s == "eigen") {
        return Mode::Eigen;
    }
    if (s == "mesh-info") {
        return Mode::MeshInfo;
    }
    throw ConfigError("unknown mode '" + std::string(s) + "'");
}

OutputFormat parse_output(std::string_view s)
{
    if (s == "json") {
        return OutputFormat::Json;
    }
    if (s == "csv") {
        return OutputFormat::Csv;
    }
    throw ConfigError("unknown output format '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const
{
    if (level < 1 || level > 5) {
        throw ConfigError("level must be in 1..5");
    }
    if (level == 5 && mode != Mode::MeshInfo && !allow_large) {
        throw ConfigError("level 5 runs need --allow-large");
    }
    if (mode == Mode::Eigen && solver == SolverKind::Multigrid) {
        throw ConfigError("eigen mode runs LOBPCG; --solver mg is only valid for source mode");
    }
    if (solver == SolverKind::Multigrid && precond != PrecondKind::None) {
        throw ConfigError("the standalone multigrid solver takes no --precond");
    }
    if (mode == Mode::Source && !(c > 0.0)) {
        throw ConfigError("source mode needs c > 0");
    }
    if (!(tol > 0.0) || tol >= 1.0) {
        throw ConfigError("tol must be in (0, 1)");
    }
    if (nev < 1 || block < nev) {
        throw ConfigError("need 1 <= nev <= block");
    }
    if (max_iterations < 0 || mg_nu < 0 || sait_m < 1 || sait_tau < 0.0 || sait_tau >= 1.0) {
        throw ConfigError("invalid iteration or preconditioner parameter");
    }
}

PrecondSettings ExperimentConfig::precond_settings() const
{
    PrecondSettings s;
    s.kind = precond;
    s.mg.nu = mg_nu;
    s.sait = {sait_tau, sait_m};
    return s;
}

Vector source_load(Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector f(static_cast<std::size_t>(n));
    for (double& v : f) {
        v = dist(rng);
    }
    return f;
}

json mesh_info(DomainKind domain, int level)
{
    const StructuredMesh mesh(domain, level);
    return json{{"domain", to_string(domain)}, {"level", level},   {"h", mesh.h()},
                {"nodes", mesh.count(0)},      {"edges", mesh.count(1)}, {"faces", mesh.count(2)},
                {"cells", mesh.count(3)},      {"chi", mesh.euler_characteristic()}};
}

void dump_operators(const ComplexOperators& ops, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto put = [&](const char* name, const CsrMatrix& m) {
        write_matrix_market(fs::path(dir) / (std::string(name) + ".mtx"), m);
    };
    put("A", ops.A);
    put("B", ops.B);
    put("Mk", ops.Mk);
    put("Mkm1", ops.Mkm1);
    put("Mkp1", ops.Mkp1);
    put("U", ops.U);
    put("Dk", ops.Dk);
    put("Dkm1", ops.Dkm1);
    put("S", build_auxiliary_matrix(ops));
}

json to_json(const SolveReport& r)
{
    return json{{"iterations", r.iterations},
                {"converged", r.converged},
                {"status", to_string(r.status)},
                {"final_relative_residual", r.final_relative_residual},
                {"residual_history", r.residual_history}};
}

json to_json(const EigenReport& r)
{
    json values = json::array();
    for (const auto& p : r.pairs) {
        values.push_back(p.lambda);
    }
    return json{{"iterations", r.iterations},
                {"converged", r.converged},
                {"converged_count", r.converged_count},
                {"block_size", r.block_size},
                {"seed", r.seed},
                {"eigenvalues", values},
                {"residual_history", r.residual_history},
                {"ritz_history", r.ritz_history}};
}

json to_json(const ClassifiedEigenpair& p)
{
    return json{{"lambda", p.lambda_h},
                {"lambda_tilde", p.lambda_tilde},
                {"lambda_aux", p.lambda_aux},
                {"type", to_string(p.type)}};
}

namespace {

json header(const ExperimentConfig& cfg)
{
    return json{{"problem", to_string(cfg.problem)},
                {"domain", to_string(cfg.domain)},
                {"level", cfg.level},
                {"mode", to_string(cfg.mode)},
                {"solver", to_string(cfg.solver)},
                {"precond", to_string(cfg.precond)},
                {"c", cfg.c},
                {"tol", cfg.tol},
                {"seed", cfg.seed}};
}

RunResult run_source(const ExperimentConfig& cfg, const StructuredMesh& mesh,
                     const ComplexOperators& ops)
{
    SourceConfig sc;
    sc.solver = cfg.solver;
    sc.precond = cfg.precond_settings();
    sc.tol = cfg.tol;
    if (cfg.max_iterations > 0) {
        sc.max_iterations = cfg.max_iterations;
    }
    const Vector f = source_load(ops.size(), cfg.seed);
    const SourceSolution sol = solve_source(mesh, ops, f, sc);

    RunResult out;
    out.report = header(cfg);
    out.report["dof"] = ops.size();
    out.report["iterations"] = sol.aux_report.iterations;
    out.report["converged"] = sol.converged();
    out.report["residual_history"] = sol.aux_report.residual_history;
    out.report["mass"] = to_json(sol.mass_report);
    out.report["residual_original"] = sol.residual_original;
    if (!sol.converged()) {
        out.report["failed_stage"] = sol.failed_stage;
    }
    out.exit_code = sol.converged() ? 0 : 1;
    return out;
}

RunResult run_eigen(const ExperimentConfig& cfg, const StructuredMesh& mesh,
                    const ComplexOperators& ops)
{
    EigenConfig ec;
    ec.nev = cfg.nev;
    ec.block = cfg.block;
    ec.tol = cfg.tol;
    ec.seed = cfg.seed;
    ec.precond = cfg.precond_settings();
    if (cfg.max_iterations > 0) {
        ec.max_iterations = cfg.max_iterations;
    }
    const EigenSolution sol = solve_eigen(mesh, ops, ec);

    RunResult out;
    out.report = header(cfg);
    out.report["dof"] = ops.size();
    out.report["nev"] = cfg.nev;
    out.report["block"] = cfg.block;
    out.report["precond_shift"] = ec.precond_shift;
    out.report["iterations"] = sol.report.iterations;
    out.report["converged"] = sol.report.converged;
    out.report["converged_count"] = sol.report.converged_count;
    out.report["residual_history"] = sol.report.residual_history;
    json pairs = json::array();
    for (const auto& p : sol.pairs) {
        pairs.push_back(to_json(p));
    }
    out.report["eigenpairs"] = pairs;
    out.exit_code = sol.report.converged ? 0 : 1;
    return out;
}

std::string csv_value(const json& v)
{
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

}  // namespace

RunResult run(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.mode == Mode::MeshInfo) {
        return {0, mesh_info(cfg.domain, cfg.level)};
    }
    const StructuredMesh mesh(cfg.domain, cfg.level);
    const ComplexOperators ops =
        build_operators(mesh, form_degree(cfg.problem), cfg.mode == Mode::Eigen ? 0.0 : cfg.c);
    if (!cfg.dump_operators.empty()) {
        dump_operators(ops, cfg.dump_operators);
    }
    return cfg.mode == Mode::Source ? run_source(cfg, mesh, ops) : run_eigen(cfg, mesh, ops);
}

std::string render(const json& report, OutputFormat format)
{
    if (format == OutputFormat::Json) {
        return report.dump(2) + "\n";
    }
    std::ostringstream os;
    if (report.contains("eigenpairs")) {
        os << "index,lambda,lambda_tilde,lambda_aux,type\n";
        int i = 0;
        for (const auto& p : report["eigenpairs"]) {
            os << i++ << ',' << csv_value(p["lambda"]) << ',' << csv_value(p["lambda_tilde"]) << ','
               << csv_value(p["lambda_aux"]) << ',' << csv_value(p["type"]) << '\n';
        }
        return os.str();
    }
    // Flat scalar fields, one header row and one value row.
    std::string keys;
    std::string values;
    for (const auto& [k, v] : report.items()) {
        if (v.is_structured()) {
            continue;
        }
        keys += (keys.empty() ? "" : ",") + k;
        values += (values.empty() ? "" : ",") + csv_value(v);
    }
    os << keys << '\n' << values << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Tables

namespace {

struct TableSpec {
    enum Kind { Source, Recompute, Lobpcg } kind;
    ProblemKind problem;
    DomainKind domain;
};

TableSpec table_spec(int id)
{
    switch (id) {
    case 3:
        return {TableSpec::Source, ProblemKind::Maxwell, DomainKind::Cube};
    case 4:
        return {TableSpec::Source, ProblemKind::Maxwell, DomainKind::CubeWithHole};
    case 5:
        return {TableSpec::Recompute, ProblemKind::Maxwell, DomainKind::Cube};
    case 6:
        return {TableSpec::Recompute, ProblemKind::Maxwell, DomainKind::CubeWithHole};
    case 7:
        return {TableSpec::Lobpcg, ProblemKind::Maxwell, DomainKind::Cube};
    case 8:
        return {TableSpec::Source, ProblemKind::GradDiv, DomainKind::Cube};
    case 9:
        return {TableSpec::Source, ProblemKind::GradDiv, DomainKind::CubeWithHole};
    case 10:
        return {TableSpec::Lobpcg, ProblemKind::GradDiv, DomainKind::Cube};
    case 11:
        return {TableSpec::Recompute, ProblemKind::GradDiv, DomainKind::Cube};
    default:
        throw ConfigError("unknown table id " + std::to_string(id) + " (expected 3..11)");
    }
}

std::string count(const SolveReport& r)
{
    return r.converged ? std::to_string(r.iterations) : "inf";
}

std::string h_label(int level)
{
    return "pi/" + std::to_string(1 << (level + 1));
}

std::string fixed(double v, int digits)
{
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

// Six decimals for O(1) values, three significant digits in scientific form for tiny ones.
std::string table_number(double v)
{
    std::ostringstream os;
    if (std::abs(v) < 1e-3) {
        os << std::scientific << std::setprecision(3) << v;
    } else {
        os << std::fixed << std::setprecision(6) << v;
    }
    return os.str();
}

// Smallest eigenvalues of the continuous problems on [0, pi]^3, with multiplicity.
std::vector<double> exact_cube_spectrum(ProblemKind p, std::size_t count)
{
    std::vector<double> out;
    for (int s = 1; out.size() < count; ++s) {
        for (int a = 0; a * a <= s; ++a) {
            for (int b = 0; a * a + b * b <= s; ++b) {
                const int rest = s - a * a - b * b;
                const int c = static_cast<int>(std::lround(std::sqrt(rest)));
                if (c * c != rest) {
                    continue;
                }
                const int nonzero = (a > 0) + (b > 0) + (c > 0);
                const int mult = p == ProblemKind::Maxwell ? std::max(0, nonzero - 1)
                                                           : (nonzero == 3 ? 1 : 0);
                for (int m = 0; m < mult; ++m) {
                    out.push_back(static_cast<double>(s));
                }
            }
        }
    }
    out.resize(count);
    return out;
}

std::string source_table(const TableSpec& t, const TableOptions& opts)
{
    std::ostringstream os;
    os << "level,h,dof,orig_cg,orig_ilu0,aux_cg,aux_ilu0,aux_sait,aux_mg_pcg,aux_mg,mass_cg,mass_ilu0\n";
    const int k = form_degree(t.problem);
    for (int l = 1; l <= opts.max_level; ++l) {
        const StructuredMesh mesh(t.domain, l);
        const ComplexOperators ops = build_operators(mesh, k, 1.0);
        const Vector f = source_load(ops.size(), opts.seed);
        SourceConfig sc;
        sc.tol = opts.tol;

        auto orig = [&](PrecondKind p) {
            sc.precond.kind = p;
            return count(solve_original(mesh, ops, f, sc).report);
        };
        auto aux = [&](SolverKind s, PrecondKind p) {
            sc.solver = s;
            sc.precond.kind = p;
            const std::string out = count(solve_source(mesh, ops, f, sc).aux_report);
            sc.solver = SolverKind::Cg;
            return out;
        };
        auto mass = [&](bool ilu) {
            const LinearOperator m = LinearOperator::from_matrix(ops.Mk);
            std::unique_ptr<Ilu0Preconditioner> pc;
            LinearOperator pop;
            if (ilu) {
                pc = std::make_unique<Ilu0Preconditioner>(ops.Mk);
                pop = pc->as_operator();
            }
            return count(cg(m, f, ilu ? &pop : nullptr, CgOptions{opts.tol, 5000}).report);
        };

        os << "l=" << l << ',' << h_label(l) << ',' << ops.size() << ',' << orig(PrecondKind::None)
           << ',' << orig(PrecondKind::Ilu0) << ',' << aux(SolverKind::Cg, PrecondKind::None) << ','
           << aux(SolverKind::Cg, PrecondKind::Ilu0) << ',' << aux(SolverKind::Cg, PrecondKind::Sait)
           << ',';
        // The published tables leave the multigrid columns empty on the coarsest level.
        if (l > 1) {
            os << aux(SolverKind::Cg, PrecondKind::Multigrid) << ','
               << aux(SolverKind::Multigrid, PrecondKind::None);
        } else {
            os << ',';
        }
        os << ',' << mass(false) << ',' << mass(true) << '\n';
    }
    return os.str();
}

std::string lobpcg_table(const TableSpec& t, const TableOptions& opts)
{
    std::ostringstream os;
    os << "level,h,dof,none,ilu0,sait,mg\n";
    const int k = form_degree(t.problem);
    for (int l = 1; l <= opts.max_level; ++l) {
        const StructuredMesh mesh(t.domain, l);
        const ComplexOperators ops = build_operators(mesh, k, 0.0);
        os << "l=" << l << ',' << h_label(l) << ',' << ops.size();
        for (PrecondKind p :
             {PrecondKind::None, PrecondKind::Ilu0, PrecondKind::Sait, PrecondKind::Multigrid}) {
            EigenConfig ec;
            ec.tol = opts.tol;
            ec.seed = opts.seed;
            ec.precond.kind = p;
            const EigenSolution sol = solve_eigen(mesh, ops, ec);
            os << ',' << (sol.report.converged ? std::to_string(sol.report.iterations) : "inf");
        }
        os << '\n';
    }
    return os.str();
}

std::string recompute_table(const TableSpec& t, const TableOptions& opts)
{
    const int l = opts.max_level;
    const StructuredMesh mesh(t.domain, l);
    const ComplexOperators ops = build_operators(mesh, form_degree(t.problem), 0.0);
    EigenConfig ec;
    ec.tol = opts.tol;
    ec.seed = opts.seed;
    ec.precond.kind = l > 1 ? PrecondKind::Multigrid : PrecondKind::Ilu0;
    const EigenSolution sol = solve_eigen(mesh, ops, ec);

    const bool cube = t.domain == DomainKind::Cube;
    std::ostringstream os;
    os << (cube ? "exact," : "") << "aux_lambda,original_lambda,auxiliary_part_lambda,type\n";
    const auto exact = exact_cube_spectrum(t.problem, sol.pairs.size());
    std::size_t next_exact = 0;
    for (const auto& p : sol.pairs) {
        if (cube) {
            if (p.type == EigenType::Type1 && next_exact < exact.size()) {
                os << fixed(exact[next_exact++], 6);
            }
            os << ',';
        }
        os << table_number(p.lambda_h) << ',' << table_number(p.lambda_tilde) << ','
           << table_number(p.lambda_aux) << ',' << to_string(p.type) << '\n';
    }
    return os.str();
}

}  // namespace

bool is_table_id(int id)
{
    return id >= 3 && id <= 11;
}

std::string reproduce_table(int id, const TableOptions& opts)
{
    const TableSpec t = table_spec(id);
    if (opts.max_level < 1 || opts.max_level > 5) {
        throw ConfigError("max level must be in 1..5");
    }
    if (opts.max_level == 5 && !opts.allow_large) {
        throw ConfigError("level 5 tables need --allow-large");
    }
    switch (t.kind) {
    case TableSpec::Source:
        return source_table(t, opts);
    case TableSpec::Lobpcg:
        return lobpcg_table(t, opts);
    case TableSpec::Recompute:
        return recompute_table(t, opts);
    }
    return {};
}

}  // namespace derham::cli
