// Command-line front end: verify suites, certify p-operator norms of matrices
// from JSON files, produce duality reports across exponents, print core
// dimension tables and replay stored failure cases.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lpdl/driver.hpp"
#include "lpdl/duality.hpp"
#include "lpdl/pnorm.hpp"

namespace {

using lpdl::Json;

std::vector<double> parse_p_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string item = text.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size())
                throw std::invalid_argument("bad exponent '" + item + "' in p list");
            out.push_back(v);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("the p list must not be empty");
    return out;
}

struct ConfigFlags {
    std::string config_file;
    std::string group;
    int n = -1;
    std::string action;
    std::string p_list;
    int tests = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double identity_tol = -1.0;
    double verdict_margin = -1.0;
    std::string out;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_file, "JSON config file; flags override it");
    cmd->add_option("--group", flags.group, "group literal, e.g. Z2, Z4, Z2xZ2");
    cmd->add_option("--n", flags.n, "degree of the matrix coefficient algebra");
    cmd->add_option("--action", flags.action,
                    "action literal: trivial, perm:(0 1), phased:(0 1)@0,1/4");
    cmd->add_option("--p", flags.p_list, "comma-separated exponents in (1, inf)");
    cmd->add_option("--tests", flags.tests, "random test elements per suite");
    cmd->add_option("--seed", flags.seed, "seed fixing all randomness")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--identity-tol", flags.identity_tol,
                    "entrywise tolerance for exact identities");
    cmd->add_option("--verdict-margin", flags.verdict_margin,
                    "relative margin for strict-contraction verdicts");
    cmd->add_option("--out", flags.out, "report base path (suffix chosen by format)");
}

lpdl::ExperimentConfig make_config(const ConfigFlags& flags) {
    lpdl::ExperimentConfig config;
    if (!flags.config_file.empty())
        config = lpdl::config_from_json(lpdl::read_json_file(flags.config_file));
    if (!flags.group.empty()) config.group = flags.group;
    if (flags.n >= 0) config.n = flags.n;
    if (!flags.action.empty()) config.action = flags.action;
    if (!flags.p_list.empty()) config.p_values = parse_p_list(flags.p_list);
    if (flags.tests >= 0) config.tests = flags.tests;
    if (flags.seed_set) config.seed = flags.seed;
    if (flags.identity_tol > 0.0) config.identity_tol = flags.identity_tol;
    if (flags.verdict_margin > 0.0) config.verdict_margin = flags.verdict_margin;
    if (!flags.out.empty()) config.out = flags.out;
    config.validate();
    return config;
}

void print_results(const std::string& heading, const std::vector<lpdl::SuiteResult>& results) {
    if (!heading.empty()) std::cout << "== " << heading << " ==\n";
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.suite << " ("
                  << static_cast<long>(r.wall_ms) << " ms, max residual " << r.max_residual
                  << ")\n";
        if (!r.passed)
            for (const auto& line : r.checks)
                if (line.rfind("FAIL", 0) == 0) std::cout << "       " << line << "\n";
    }
}

int cmd_verify(const ConfigFlags& flags, const std::vector<std::string>& suites,
               const std::string& format, bool sweep) {
    const lpdl::ExperimentConfig base = make_config(flags);

    std::vector<lpdl::ExperimentConfig> configs;
    if (sweep) {
        struct Cell {
            const char* group;
            int n;
            const char* action;
        };
        static const Cell grid[] = {
            {"Z2", 1, "trivial"},       {"Z3", 1, "trivial"},
            {"Z4", 1, "trivial"},       {"Z2xZ2", 1, "trivial"},
            {"Z2", 2, "trivial"},       {"Z3", 2, "trivial"},
            {"Z4", 2, "trivial"},       {"Z2xZ2", 2, "trivial"},
            {"Z2", 2, "perm:(0 1)"},    {"Z3", 2, "phased:()@0,1/3"},
            {"Z4", 2, "phased:(0 1)@0,1/4"}, {"Z2xZ2", 2, "phased:(0 1);()@0,1/2"},
        };
        for (const Cell& cell : grid) {
            lpdl::ExperimentConfig c = base;
            c.group = cell.group;
            c.n = cell.n;
            c.action = cell.action;
            configs.push_back(std::move(c));
        }
    } else {
        configs.push_back(base);
    }

    bool all_passed = true;
    std::vector<lpdl::SuiteResult> merged;
    for (const auto& config : configs) {
        std::vector<lpdl::SuiteResult> results;
        if (suites.empty()) {
            results = lpdl::run_all(config);
        } else {
            for (const auto& name : suites) results.push_back(lpdl::run_suite(config, name));
        }
        print_results(sweep ? config.tag() : "", results);
        for (auto& r : results) {
            all_passed = all_passed && r.passed;
            if (sweep) r.suite = config.tag() + "/" + r.suite;
            merged.push_back(std::move(r));
        }
    }

    if (!base.out.empty())
        lpdl::emit_report(merged, lpdl::config_to_json(base), format, base.out);
    std::cout << (all_passed ? "verify: PASS" : "verify: FAIL") << "\n";
    return all_passed ? 0 : 1;
}

int cmd_pnorm(const std::string& in, double p, bool p_set, const std::string& method,
              int restarts) {
    const lpdl::LabeledOperator op = lpdl::operator_from_json(lpdl::read_json_file(in));
    const double exponent = p_set ? p : op.p;
    if (!(exponent > 1.0))
        throw std::invalid_argument("exponent must exceed 1 (pass --p or store p in the file)");

    Json out;
    out["rows"] = static_cast<int>(op.mat.rows());
    out["cols"] = static_cast<int>(op.mat.cols());
    out["p"] = exponent;
    out["method"] = method;
    if (method == "power") {
        lpdl::PowerOptions popts;
        popts.restarts = restarts;
        const lpdl::NormEstimate est = lpdl::pnorm_lower_power(op.mat, exponent, popts);
        out["lower"] = est.lower;
    } else if (method == "grid") {
        out["upper"] = lpdl::pnorm_upper_grid(op.mat, exponent);
    } else if (method == "rt") {
        out["upper"] = lpdl::pnorm_upper_riesz_thorin(op.mat, exponent);
    } else if (method == "combined") {
        lpdl::EstimateOptions opts;
        opts.power.restarts = restarts;
        opts.use_grid = true;
        const lpdl::NormEstimate est = lpdl::pnorm_estimate(op.mat, exponent, opts);
        out["lower"] = est.lower;
        out["upper"] = est.upper;
        out["methods"] = est.methods;
        out["truncated"] = est.truncated;
    } else {
        throw std::invalid_argument("unknown method '" + method +
                                    "' (expected power, grid, rt or combined)");
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_duality_report(const ConfigFlags& flags) {
    lpdl::ExperimentConfig config = make_config(flags);
    if (config.out.empty()) config.out = "report";

    const lpdl::GroupAction alpha = config.parsed_action();
    Json chains = Json::array();
    std::string csv =
        "p,element,src_lower,src_upper,img_lower,img_upper,verdict,residual\n";
    bool healthy = true;

    for (double p : config.p_values) {
        const lpdl::ChainReport report =
            lpdl::chain_report(alpha, p, config.tests, config.seed);
        double residual = report.equivariance_residual;
        Json maps = Json::array();
        for (const auto& rec : report.maps) {
            residual = std::max(residual, rec.hom_residual);
            Json mj;
            mj["map"] = rec.map_name;
            mj["hom_residual"] = rec.hom_residual;
            maps.push_back(std::move(mj));
        }

        const std::string verdict =
            report.verdicts.verdict == lpdl::IsometryVerdict::isometric
                ? "isometric"
                : report.verdicts.verdict == lpdl::IsometryVerdict::strictly_contractive
                      ? "strictly-contractive"
                      : "inconclusive";
        healthy = healthy && report.full_rank == report.linearized_rank &&
                  residual <= 1e-9 &&
                  report.verdicts.verdict != lpdl::IsometryVerdict::inconclusive;

        Json cj;
        cj["p"] = p;
        cj["verdict"] = verdict;
        cj["witness_index"] = report.verdicts.witness_index;
        cj["linearized_rank"] = report.linearized_rank;
        cj["full_rank"] = report.full_rank;
        cj["equivariance_residual"] = report.equivariance_residual;
        cj["maps"] = std::move(maps);
        Json rows = Json::array();
        const std::size_t randoms =
            report.verdicts.rows.size() - (alpha.group().order() > 1 ? 1 : 0);
        for (std::size_t i = 0; i < report.verdicts.rows.size(); ++i) {
            const auto& row = report.verdicts.rows[i];
            const std::string id =
                i < randoms ? "F[" + std::to_string(i) + "]" : "witness";
            Json rj;
            rj["element"] = id;
            rj["src_lower"] = row.src.lower;
            rj["src_upper"] = row.src.upper;
            rj["img_lower"] = row.img.lower;
            rj["img_upper"] = row.img.upper;
            rows.push_back(std::move(rj));
            char line[256];
            std::snprintf(line, sizeof line, "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%s,%.17g\n",
                          p, id.c_str(), row.src.lower, row.src.upper, row.img.lower,
                          row.img.upper,
                          static_cast<int>(i) == report.verdicts.witness_index ||
                                  report.verdicts.verdict ==
                                      lpdl::IsometryVerdict::isometric
                              ? verdict.c_str()
                              : "",
                          residual);
            csv += line;
        }
        cj["norms"] = std::move(rows);
        chains.push_back(std::move(cj));
    }

    Json doc;
    doc["config"] = lpdl::config_to_json(config);
    doc["healthy"] = healthy;
    doc["chains"] = std::move(chains);

    const std::string base = config.out.size() > 5 &&
                                     config.out.rfind(".json") == config.out.size() - 5
                                 ? config.out.substr(0, config.out.size() - 5)
                                 : config.out;
    lpdl::write_json_file(base + ".json", doc);
    lpdl::write_text_file(base + ".csv", csv);
    std::cout << "wrote " << base << ".json and " << base << ".csv ("
              << (healthy ? "healthy" : "UNHEALTHY") << ")\n";
    return healthy ? 0 : 1;
}

int cmd_core(const ConfigFlags& flags) {
    const lpdl::ExperimentConfig config = make_config(flags);
    const lpdl::SuiteResult result = lpdl::run_suite(config, "core");
    std::cout << "core dimensions for " << config.tag() << "\n";
    for (const auto& line : result.checks) std::cout << "  " << line << "\n";
    std::cout << (result.passed ? "core: PASS" : "core: FAIL") << "\n";
    return result.passed ? 0 : 1;
}

int cmd_replay(const std::string& case_file) {
    Json doc = lpdl::read_json_file(case_file);
    if (doc.contains("failure") && doc.at("failure").is_object())
        doc = doc.at("failure");  // accept a whole report's suite block too
    return lpdl::replay_case(doc, std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified p-operator norms and duality chains for crossed products"};
    app.require_subcommand(1);

    ConfigFlags flags;
    std::vector<std::string> suites;
    std::string format = "json";
    bool sweep = false;
    CLI::App* verify = app.add_subcommand("verify", "run verification suites");
    add_config_flags(verify, flags);
    verify->add_option("--suite", suites, "suite name (repeatable); default: all");
    verify->add_option("--format", format, "report format: json, csv or md");
    verify->add_flag("--sweep", sweep, "run the standard group/action grid");

    std::string pnorm_in, pnorm_method = "combined";
    double pnorm_p = 0.0;
    bool pnorm_p_set = false;
    int pnorm_restarts = 20;
    CLI::App* pnorm = app.add_subcommand("pnorm", "certify the p-operator norm of a matrix");
    pnorm->add_option("--in", pnorm_in, "operator JSON file")->required();
    pnorm->add_option("--p", pnorm_p, "exponent (defaults to the one stored in the file)")
        ->each([&pnorm_p_set](const std::string&) { pnorm_p_set = true; });
    pnorm->add_option("--method", pnorm_method, "power, grid, rt or combined");
    pnorm->add_option("--restarts", pnorm_restarts, "power-iteration restarts");

    ConfigFlags report_flags;
    CLI::App* duality =
        app.add_subcommand("duality-report", "norm tables and verdicts across exponents");
    add_config_flags(duality, report_flags);

    ConfigFlags core_flags;
    CLI::App* core = app.add_subcommand("core", "print core dimension table");
    add_config_flags(core, core_flags);

    std::string case_file;
    CLI::App* replay = app.add_subcommand("replay", "re-run a stored failure case");
    replay->add_option("--case", case_file, "failure JSON from a report")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cmd_verify(flags, suites, format, sweep);
        if (pnorm->parsed())
            return cmd_pnorm(pnorm_in, pnorm_p, pnorm_p_set, pnorm_method, pnorm_restarts);
        if (duality->parsed()) return cmd_duality_report(report_flags);
        if (core->parsed()) return cmd_core(core_flags);
        if (replay->parsed()) return cmd_replay(case_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
