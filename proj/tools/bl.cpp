// Command-line front end: parse a datum file, dispatch one analysis, emit a
// human-readable or JSON report. Exit codes: 0 definitive, 2 undetermined or
// budget exhausted, 1 error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "bl/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Brascamp-Lieb datum analyzer"};
    app.require_subcommand(1);

    bl::cli::CommandSpec spec;
    double tol_opt = spec.tol.rank_tol;
    double stat_tol_opt = spec.tol.stat_tol;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("input", spec.input_path, "datum or job JSON file")->required();
        sub->add_option("--tol", tol_opt, "relative rank tolerance");
        sub->add_option("--stat-tol", stat_tol_opt, "stationarity residual bound");
        sub->add_option("--max-iter", spec.max_iter, "iteration budget for solves");
        sub->add_option("--budget", spec.budget, "search budget: small, default or large")
            ->check(CLI::IsMember({"small", "default", "large"}));
        sub->add_option("--seed", spec.seed, "seed for all randomized searches");
        sub->add_option("--format", spec.format, "report format: text or json")
            ->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--csv", spec.csv_path, "write a heatflow trace CSV sidecar");
        sub->add_option("--out", spec.out_path, "write the report to a file instead of stdout");
    };

    const std::pair<const char*, bl::cli::Verb> verbs[] = {
        {"validate", bl::cli::Verb::Validate},   {"finiteness", bl::cli::Verb::Finiteness},
        {"constant", bl::cli::Verb::Constant},   {"extremiser", bl::cli::Verb::Extremiser},
        {"structure", bl::cli::Verb::Structure}, {"polytope", bl::cli::Verb::Polytope},
        {"heatflow", bl::cli::Verb::Heatflow}};
    for (const auto& [name, verb] : verbs) {
        CLI::App* sub = app.add_subcommand(name);
        add_common(sub);
        sub->callback([&spec, verb = verb] { spec.verb = verb; });
    }

    CLI11_PARSE(app, argc, argv);
    spec.tol.rank_tol = tol_opt;
    spec.tol.stat_tol = stat_tol_opt;

    try {
        const bl::cli::RunReport report = bl::cli::run(spec);
        const std::string rendered = bl::cli::emit_report(report, spec.format);
        if (!spec.out_path.empty()) {
            std::ofstream out(spec.out_path);
            if (!out) {
                std::cerr << "error: cannot write " << spec.out_path << "\n";
                return 1;
            }
            out << rendered;
        } else {
            std::cout << rendered;
        }
        if (!spec.csv_path.empty() && !report.csv.empty()) {
            std::ofstream csv(spec.csv_path);
            if (!csv) {
                std::cerr << "error: cannot write " << spec.csv_path << "\n";
                return 1;
            }
            csv << report.csv;
        }
        return report.exit_code;
    } catch (const bl::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const bl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
