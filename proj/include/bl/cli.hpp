#pragma once

#include <chrono>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "bl/io.hpp"
#include "bl/quadrature.hpp"
#include "bl/version.hpp"

namespace bl::cli {

using nlohmann::json;

enum class Verb { Validate, Finiteness, Constant, Extremiser, Structure, Polytope, Heatflow };

inline const char* verb_name(Verb v) {
    switch (v) {
        case Verb::Validate: return "validate";
        case Verb::Finiteness: return "finiteness";
        case Verb::Constant: return "constant";
        case Verb::Extremiser: return "extremiser";
        case Verb::Structure: return "structure";
        case Verb::Polytope: return "polytope";
        case Verb::Heatflow: return "heatflow";
    }
    return "?";
}

inline std::optional<Verb> parse_verb(const std::string& s) {
    if (s == "validate") return Verb::Validate;
    if (s == "finiteness") return Verb::Finiteness;
    if (s == "constant") return Verb::Constant;
    if (s == "extremiser") return Verb::Extremiser;
    if (s == "structure") return Verb::Structure;
    if (s == "polytope") return Verb::Polytope;
    if (s == "heatflow") return Verb::Heatflow;
    return std::nullopt;
}

struct CommandSpec {
    Verb verb = Verb::Validate;
    std::string input_path;
    Tolerances tol;
    std::string budget = "default"; // small | default | large
    std::uint64_t seed = 0;
    int max_iter = 10000;
    std::string format = "text"; // text | json
    std::string csv_path;        // optional heatflow sidecar
    std::string out_path;        // optional report destination
};

struct RunReport {
    int exit_code = 1;
    json document;      // the versioned JSON report
    std::string text;   // the stable line-oriented rendering
    std::string csv;    // heatflow sidecar content when requested
    double elapsed_ms = 0.0;
};

inline SearchBudget budget_from_name(const std::string& name, std::uint64_t seed) {
    SearchBudget b;
    if (name == "small")
        b = SearchBudget::small_budget();
    else if (name == "large")
        b = SearchBudget::large_budget();
    else if (name == "default")
        b = SearchBudget::defaults();
    else
        throw ParseError("unknown budget '" + name + "' (use small, default or large)");
    b.seed = seed;
    return b;
}

namespace detail {

inline std::string fmt6(double v) {
    std::ostringstream o;
    o << std::setprecision(6) << v;
    return o.str();
}

inline json datum_digest(const BLDatum& d) {
    json dims = json::array(), exps = json::array();
    for (const auto& m : d.maps) {
        dims.push_back(static_cast<int>(m.matrix.rows()));
        exps.push_back(m.exponent);
    }
    return json{{"dim", d.dim}, {"target_dims", std::move(dims)}, {"exponents", std::move(exps)}};
}

inline void text_subspace(std::ostringstream& out, const Subspace& s,
                          const std::string& title) {
    out << title << " (dim " << s.dim() << " of " << s.ambient_dim() << ")\n";
    const Matrix bt = s.basis().transpose();
    for (int r = 0; r < bt.rows(); ++r) {
        out << "  [";
        for (int c = 0; c < bt.cols(); ++c) {
            if (c) out << ", ";
            out << fmt6(bt(r, c));
        }
        out << "]\n";
    }
}

// ---- heatflow job ---------------------------------------------------------

inline std::vector<double> parse_times(const json& j) {
    if (j.is_array()) {
        std::vector<double> ts;
        for (std::size_t i = 0; i < j.size(); ++i)
            ts.push_back(io::finite_number(j[i], "times[" + std::to_string(i) + "]"));
        return ts;
    }
    if (j.is_object()) {
        const double t0 = j.contains("start") ? io::finite_number(j["start"], "times.start") : 0.05;
        const double ratio =
            j.contains("ratio") ? io::finite_number(j["ratio"], "times.ratio") : 1.3;
        const int count = j.contains("count") ? j["count"].get<int>() : 25;
        return geometric_times(t0, ratio, count);
    }
    throw ParseError("times: expected an array or {start, ratio, count}");
}

inline GridField parse_input_field(const json& j, int axes, const std::string& where) {
    GridField f;
    if (j.contains("grid")) {
        const json& g = j["grid"];
        f.dims = g["dims"].get<std::vector<int>>();
        for (const auto& hw : g["half_widths"])
            f.half_widths.push_back(io::finite_number(hw, where + ".grid.half_widths"));
        for (const auto& v : g["values"])
            f.values.push_back(io::finite_number(v, where + ".grid.values"));
        f.check();
        return f;
    }
    if (!j.contains("bumps") || !j["bumps"].is_array() || j["bumps"].empty())
        throw ParseError(where + ": expected a grid or a nonempty bump list");
    const int points = j.contains("points") ? j["points"].get<int>() : 257;
    struct Bump {
        std::string kind;
        Vector center;
        double width = 1.0, weight = 1.0;
    };
    std::vector<Bump> bumps;
    double extent = 1.0;
    for (const auto& bj : j["bumps"]) {
        Bump b;
        b.kind = bj.contains("kind") ? bj["kind"].get<std::string>() : "bump";
        b.center = bj.contains("center") ? io::parse_vector(bj["center"], where + ".center")
                                         : Vector::Zero(axes);
        if (b.center.size() != axes) throw ParseError(where + ": bump center dimension");
        if (bj.contains("width")) b.width = io::finite_number(bj["width"], where + ".width");
        if (bj.contains("weight")) b.weight = io::finite_number(bj["weight"], where + ".weight");
        if (!(b.width > 0.0) || !(b.weight > 0.0))
            throw ParseError(where + ": bump width and weight must be positive");
        extent = std::max(extent, b.center.cwiseAbs().maxCoeff() + 4.0 * b.width);
        bumps.push_back(std::move(b));
    }
    const double half_width =
        j.contains("half_width") ? io::finite_number(j["half_width"], where + ".half_width")
                                 : extent;
    f.dims.assign(axes, points);
    f.half_widths.assign(axes, half_width);
    f.values.assign(static_cast<std::size_t>(std::pow(points, axes)), 0.0);
    std::vector<int> idx(axes, 0);
    for (std::size_t flat = 0; flat < f.values.size(); ++flat) {
        std::size_t rest = flat;
        for (int a = axes - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rest % points);
            rest /= points;
        }
        Vector x(axes);
        for (int a = 0; a < axes; ++a) x(a) = -half_width + f.spacing(a) * idx[a];
        double v = 0.0;
        for (const auto& b : bumps) {
            const double r = (x - b.center).norm() / b.width;
            if (b.kind == "gaussian")
                v += b.weight * std::exp(-M_PI * r * r);
            else if (r < 1.0)
                v += b.weight * std::pow(std::cos(0.5 * M_PI * r), 4);
        }
        f.values[flat] = v;
    }
    f.check();
    return f;
}

inline PointMassList parse_masses(const json& j, const std::string& where) {
    PointMassList out;
    if (!j.is_array()) throw ParseError(where + ": expected an array");
    for (const auto& mj : j) {
        PointMass pm;
        pm.location = io::parse_vector(mj["location"], where + ".location");
        pm.weight = io::finite_number(mj["weight"], where + ".weight");
        out.push_back(std::move(pm));
    }
    return out;
}

inline KernelSpec parse_kernel(const json& j) {
    const std::string kind = j.contains("kind") ? j["kind"].get<std::string>() : "gaussian";
    if (kind == "gaussian")
        return KernelSpec::gaussian(io::parse_matrix(j["matrix"], "kernel.matrix"));
    if (kind == "exponential")
        return KernelSpec::exponential(io::finite_number(j["rate"], "kernel.rate"));
    if (kind == "tabulated") {
        std::vector<double> xs, vals;
        for (const auto& x : j["grid"]) xs.push_back(io::finite_number(x, "kernel.grid"));
        for (const auto& v : j["values"]) vals.push_back(io::finite_number(v, "kernel.values"));
        return KernelSpec::tabulated(std::move(xs), std::move(vals));
    }
    throw ParseError("kernel.kind: expected gaussian, exponential or tabulated");
}

struct HeatflowOutcome {
    MonotonicityTrace trace;
    Direction direction = Direction::NonDecreasing;
    CheckResult check;
    std::string task;
};

inline HeatflowOutcome run_heatflow_job(const json& job) {
    if (!job.is_object() || !job.contains("task"))
        throw ParseError("heatflow job: missing task");
    HeatflowOutcome out;
    out.task = job["task"].get<std::string>();
    const std::vector<double> times = parse_times(job.contains("times") ? job["times"] : json());
    HeatflowOptions opt;
    if (job.contains("domain_points")) opt.domain_points = job["domain_points"].get<int>();
    if (job.contains("line_points")) opt.line_points = job["line_points"].get<int>();

    if (out.task == "geometric-heat") {
        const BLDatum d = io::parse_datum(job.at("datum"));
        std::vector<GridField> inputs;
        const json& ins = job.at("inputs");
        for (std::size_t k = 0; k < ins.size(); ++k)
            inputs.push_back(parse_input_field(ins[k], d.target_dim(static_cast<int>(k)),
                                               "inputs[" + std::to_string(k) + "]"));
        out.trace = evolve_geometric_heat(d, inputs, times, opt);
        out.direction = Direction::NonDecreasing;
    } else if (out.task == "sliding-gaussian") {
        const BLDatum d = io::parse_datum(job.at("datum"));
        GaussianInput g = job.contains("gaussian_input")
                              ? io::parse_gaussian_input(job["gaussian_input"], d)
                              : identity_input(d);
        std::vector<PointMassList> masses;
        const json& ms = job.at("masses");
        for (std::size_t k = 0; k < ms.size(); ++k)
            masses.push_back(parse_masses(ms[k], "masses[" + std::to_string(k) + "]"));
        out.trace = sliding_gaussian_trace(d, g, masses, times, opt);
        out.direction = Direction::NonIncreasing;
    } else if (out.task == "log-concave") {
        const KernelSpec kernel = parse_kernel(job.at("kernel"));
        const PointMassList mass = parse_masses(job.at("mass"), "mass");
        const double p = io::finite_number(job.at("p"), "p");
        out.trace = log_concave_trace(kernel, mass, p, times, opt);
        out.direction = Direction::NonIncreasing;
    } else if (out.task == "heat-extension") {
        const PointMassList mass = parse_masses(job.at("mass"), "mass");
        const double p = io::finite_number(job.at("p"), "p");
        out.trace = heat_extension_norm_trace(mass, p, times, opt);
        out.direction = Direction::NonDecreasing;
    } else {
        throw ParseError("heatflow job: unknown task '" + out.task + "'");
    }
    out.check = assert_monotone(out.trace, out.direction);
    return out;
}

} // namespace detail

/// Executes one command. Exit code 0 on a definitive outcome, 2 on
/// Undetermined or BudgetExhausted, 1 on errors (set by the caller when this
/// function throws).
inline RunReport run(const CommandSpec& spec) {
    const auto t_begin = std::chrono::steady_clock::now();
    spec.tol.validate();
    const SearchBudget budget = budget_from_name(spec.budget, spec.seed);

    RunReport report;
    json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["tool"] = json{{"name", kToolName}, {"version", kToolVersion}};
    doc["verb"] = verb_name(spec.verb);
    doc["settings"] = json{{"tolerances", io::tolerances_to_json(spec.tol)},
                           {"budget", spec.budget},
                           {"seed", spec.seed},
                           {"max_iter", spec.max_iter}};
    std::ostringstream text;
    text << kToolName << " " << verb_name(spec.verb) << " " << spec.input_path << "\n";

    std::ifstream in(spec.input_path);
    if (!in) throw ParseError("cannot open input file: " + spec.input_path);
    json input_json;
    try {
        input_json = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("invalid JSON in " + spec.input_path + ": " + e.what());
    }

    if (spec.verb == Verb::Heatflow) {
        const auto hf = detail::run_heatflow_job(input_json);
        doc["input"] = json{{"path", spec.input_path}, {"task", hf.task}};
        json result;
        result["task"] = hf.task;
        result["direction"] =
            hf.direction == Direction::NonDecreasing ? "NonDecreasing" : "NonIncreasing";
        result["trace"] = io::trace_to_json(hf.trace);
        result["monotone_pass"] = hf.check.pass;
        result["worst_violation"] = hf.check.worst_violation;
        doc["result"] = std::move(result);
        text << "task: " << hf.task << "\n";
        text << "samples: " << hf.trace.times.size() << "\n";
        if (hf.trace.limit) text << "limit = " << detail::fmt6(*hf.trace.limit) << "\n";
        text << "monotone (" << (hf.direction == Direction::NonDecreasing ? "nondecreasing"
                                                                          : "nonincreasing")
             << "): " << (hf.check.pass ? "pass" : "FAIL") << "\n";
        if (!hf.check.pass)
            text << "worst violation " << detail::fmt6(hf.check.worst_violation) << " at sample "
                 << hf.check.worst_index << "\n";
        report.exit_code = hf.check.pass ? 0 : 1;
        report.csv = io::trace_to_csv(hf.trace);
    } else {
        const BLDatum datum = io::parse_datum(input_json);
        doc["input"] = json{{"path", spec.input_path}, {"digest", detail::datum_digest(datum)}};

        switch (spec.verb) {
            case Verb::Validate: {
                const ValidationReport rep = validate_datum(datum, spec.tol);
                doc["result"] = io::validation_to_json(rep);
                text << "maps: " << datum.map_count() << ", dim: " << datum.dim << "\n";
                for (int j = 0; j < datum.map_count(); ++j)
                    text << "map " << j << ": rank " << rep.target_ranks[j] << "/"
                         << datum.target_dim(j)
                         << (rep.surjective[j] ? " surjective" : " NOT surjective") << "\n";
                text << "common kernel dim: " << rep.common_kernel_dim << "\n";
                text << "non-degenerate: " << (rep.non_degenerate ? "yes" : "no") << "\n";
                report.exit_code = 0;
                break;
            }
            case Verb::Finiteness: {
                const FinitenessVerdict v = general_finiteness(datum, budget, spec.tol);
                doc["result"] = io::finiteness_to_json(v);
                text << "status: " << io::finiteness_status_name(v.status) << "\n";
                if (v.scaling)
                    text << "scaling: " << detail::fmt6(v.scaling->lhs) << " vs "
                         << detail::fmt6(v.scaling->rhs)
                         << (v.scaling->holds ? " (holds)" : " (fails)") << "\n";
                if (v.witness_subspace)
                    detail::text_subspace(text, *v.witness_subspace, "witness subspace");
                if (v.witness_defect) text << "witness defect: " << *v.witness_defect << "\n";
                report.exit_code = v.status == FinitenessStatus::Undetermined ? 2 : 0;
                break;
            }
            case Verb::Constant:
            case Verb::Extremiser: {
                SolveOptions opt;
                opt.tol = spec.tol;
                opt.max_iter = spec.max_iter;
                opt.seed = spec.seed;
                const SolveOutcome sol =
                    fixed_point_solve(drop_zero_exponents(datum), std::nullopt, opt);
                doc["result"] = io::solve_outcome_to_json(sol);
                text << "status: " << io::solve_status_name(sol.status) << " after "
                     << sol.iterations << " iterations\n";
                if (sol.blg_value) text << "BL_g = " << detail::fmt6(*sol.blg_value) << "\n";
                if (spec.verb == Verb::Extremiser && sol.extremiser) {
                    for (int j = 0; j < static_cast<int>(sol.extremiser->A.size()); ++j) {
                        const Matrix& a = sol.extremiser->A[j];
                        text << "A_" << j << ":\n";
                        for (int r = 0; r < a.rows(); ++r) {
                            text << "  [";
                            for (int c = 0; c < a.cols(); ++c) {
                                if (c) text << ", ";
                                text << detail::fmt6(a(r, c));
                            }
                            text << "]\n";
                        }
                    }
                }
                if (sol.degeneration_subspace)
                    detail::text_subspace(text, *sol.degeneration_subspace,
                                          "degeneration subspace");
                report.exit_code = sol.status == SolveStatus::BudgetExhausted ? 2 : 0;
                break;
            }
            case Verb::Structure: {
                const Decomposition dec = decompose(drop_zero_exponents(datum), budget, spec.tol);
                json result;
                result["decomposition"] = io::decomposition_to_json(dec);
                text << "components: " << dec.components.size() << "\n";
                std::optional<ExtremisabilityVerdict> verdict;
                try {
                    verdict = classify_extremisability(drop_zero_exponents(datum), budget,
                                                       spec.tol);
                } catch (const NotApplicableError& e) {
                    result["classification"] = json{{"status", "NotApplicable"},
                                                    {"reason", e.what()}};
                    text << "classification: NotApplicable (" << e.what() << ")\n";
                }
                if (verdict) {
                    result["classification"] = io::classification_to_json(*verdict);
                    text << "classification: " << io::extremisability_name(verdict->status)
                         << "\n";
                    for (std::size_t i = 0; i < verdict->evidence.size(); ++i) {
                        const auto& ev = verdict->evidence[i];
                        text << "component " << i << ": dim " << ev.subspace.dim()
                             << (ev.simple_within_budget ? ", simple-within-budget"
                                                         : ", critical subspace found")
                             << ", solver " << io::solve_status_name(ev.solve_status) << "\n";
                        if (ev.critical)
                            text << "  defect " << detail::fmt6(ev.critical->defect) << " ("
                                 << io::critical_source_name(ev.critical->source) << ")\n";
                    }
                }
                CriticalSearchStats stats;
                const auto crit = find_critical_subspace(drop_zero_exponents(datum), budget,
                                                         spec.tol, &stats);
                if (crit) {
                    result["critical_subspace"] = io::critical_report_to_json(*crit);
                    detail::text_subspace(text, crit->subspace, "critical subspace");
                    text << "defect: " << detail::fmt6(crit->defect) << "\n";
                } else {
                    text << "no critical subspace found within budget\n";
                }
                result["budget_accounting"] =
                    json{{"candidates_examined", stats.candidates_examined},
                         {"lattice_candidates", stats.lattice_candidates},
                         {"lattice_depth", stats.depth_configured}};
                text << "candidates examined: " << stats.candidates_examined
                     << " (lattice size " << stats.lattice_candidates << ", depth "
                     << stats.depth_configured << ")\n";
                doc["result"] = std::move(result);
                report.exit_code =
                    (verdict && verdict->status != ExtremisabilityStatus::Undetermined) ? 0 : 2;
                break;
            }
            case Verb::Polytope: {
                const RankOnePolytope p = rank_one_polytope(datum, spec.tol);
                json result = io::polytope_to_json(p);
                result["h_representation"] = io::polytope_to_hrep(p);
                doc["result"] = std::move(result);
                text << "vertices (" << p.vertices.size() << "):\n";
                for (const auto& v : p.vertices) {
                    text << "  (";
                    for (std::size_t i = 0; i < v.size(); ++i) {
                        if (i) text << ",";
                        text << v[i];
                    }
                    text << ")\n";
                }
                text << io::polytope_to_hrep(p);
                report.exit_code = 0;
                break;
            }
            default:
                throw Error("unhandled verb");
        }
    }

    const auto t_end = std::chrono::steady_clock::now();
    report.elapsed_ms =
        std::chrono::duration_cast<std::chrono::microseconds>(t_end - t_begin).count() / 1000.0;
    // wall-clock stays out of the JSON document so identical runs are
    // byte-identical; the text rendering carries it
    text << "elapsed: " << std::fixed << std::setprecision(1) << report.elapsed_ms << " ms\n";
    report.document = std::move(doc);
    report.text = text.str();
    return report;
}

inline std::string emit_report(const RunReport& report, const std::string& format) {
    if (format == "json") return report.document.dump(2) + "\n";
    return report.text;
}

} // namespace bl::cli
