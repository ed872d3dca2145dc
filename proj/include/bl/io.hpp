#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bl/finiteness.hpp"
#include "bl/heatflow.hpp"

namespace bl::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

inline double finite_number(const json& j, const std::string& where) {
    if (!j.is_number())
        throw ParseError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(where + ": non-finite number rejected");
    return v;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ParseError(where + ": expected a nonempty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array()) throw ParseError(where + "[0]: expected an array");
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ParseError(where + "[" + std::to_string(r) + "]: ragged matrix");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<int>(r), static_cast<int>(c)) =
                finite_number(j[r][c], where + "[" + std::to_string(r) + "][" +
                                           std::to_string(c) + "]");
    }
    return m;
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline Vector parse_vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array");
    Vector v(static_cast<int>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<int>(i)) = finite_number(j[i], where + "[" + std::to_string(i) + "]");
    return v;
}

// ---------------------------------------------------------------------------
// Datum schema:
//   {"dim": n, "maps": [{"matrix": [[...]], "exponent": p, "label": "..."}]}
// ---------------------------------------------------------------------------

inline BLDatum parse_datum(const json& j) {
    if (!j.is_object()) throw ParseError("datum: expected an object");
    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw ParseError("datum.dim: expected an integer");
    BLDatum d;
    d.dim = j["dim"].get<int>();
    if (d.dim < 0) throw ParseError("datum.dim: must be nonnegative");
    if (!j.contains("maps") || !j["maps"].is_array())
        throw ParseError("datum.maps: expected an array");
    for (std::size_t k = 0; k < j["maps"].size(); ++k) {
        const json& mj = j["maps"][k];
        const std::string where = "datum.maps[" + std::to_string(k) + "]";
        if (!mj.is_object()) throw ParseError(where + ": expected an object");
        LinearMap m;
        if (!mj.contains("matrix")) throw ParseError(where + ".matrix: missing");
        m.matrix = parse_matrix(mj["matrix"], where + ".matrix");
        if (!mj.contains("exponent")) throw ParseError(where + ".exponent: missing");
        m.exponent = finite_number(mj["exponent"], where + ".exponent");
        if (m.exponent < 0.0) throw ParseError(where + ".exponent: must be nonnegative");
        if (mj.contains("label")) {
            if (!mj["label"].is_string()) throw ParseError(where + ".label: expected a string");
            m.label = mj["label"].get<std::string>();
        }
        d.maps.push_back(std::move(m));
    }
    try {
        d.check_shapes();
    } catch (const StructuralError& e) {
        throw ParseError(std::string("datum: ") + e.what());
    }
    return d;
}

inline json datum_to_json(const BLDatum& d) {
    json maps = json::array();
    for (const auto& m : d.maps) {
        json mj;
        mj["matrix"] = matrix_to_json(m.matrix);
        mj["exponent"] = m.exponent;
        if (!m.label.empty()) mj["label"] = m.label;
        maps.push_back(std::move(mj));
    }
    return json{{"dim", d.dim}, {"maps", std::move(maps)}};
}

inline BLDatum load_datum(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open input file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    return parse_datum(j);
}

inline GaussianInput parse_gaussian_input(const json& j, const BLDatum& d,
                                          const std::string& where = "gaussian_input") {
    if (!j.is_array()) throw ParseError(where + ": expected an array of matrices");
    GaussianInput g;
    for (std::size_t k = 0; k < j.size(); ++k)
        g.A.push_back(parse_matrix(j[k], where + "[" + std::to_string(k) + "]"));
    try {
        g.check_against(d);
    } catch (const StructuralError& e) {
        throw ParseError(where + ": " + e.what());
    }
    return g;
}

// ---------------------------------------------------------------------------
// Result payloads
// ---------------------------------------------------------------------------

inline json tolerances_to_json(const Tolerances& t) {
    return json{{"rank_tol", t.rank_tol},
                {"stat_tol", t.stat_tol},
                {"cond_max", t.cond_max},
                {"projector_tol", t.projector_tol}};
}

inline json subspace_to_json(const Subspace& s) {
    return json{{"ambient_dim", s.ambient_dim()},
                {"dim", s.dim()},
                {"basis_columns", matrix_to_json(s.basis())}};
}

inline json validation_to_json(const ValidationReport& r) {
    return json{{"target_ranks", r.target_ranks},
                {"surjective", r.surjective},
                {"common_kernel_dim", r.common_kernel_dim},
                {"non_degenerate", r.non_degenerate},
                {"has_zero_exponents", r.has_zero_exponents},
                {"rank_tol", r.rank_tol}};
}

inline std::string solve_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::Degenerated: return "Degenerated";
        case SolveStatus::BudgetExhausted: return "BudgetExhausted";
    }
    return "?";
}

inline json gaussian_input_to_json(const GaussianInput& g) {
    json out = json::array();
    for (const auto& a : g.A) out.push_back(matrix_to_json(a));
    return out;
}

inline json solve_outcome_to_json(const SolveOutcome& s) {
    json j;
    j["status"] = solve_status_name(s.status);
    j["iterations"] = s.iterations;
    j["final_residual"] = s.final_residual;
    j["final_cond"] = s.final_cond;
    if (s.blg_value) j["blg_value"] = *s.blg_value;
    if (s.extremiser) j["extremiser"] = gaussian_input_to_json(*s.extremiser);
    if (s.degeneration_subspace)
        j["degeneration_subspace"] = subspace_to_json(*s.degeneration_subspace);
    json trace = json::array();
    for (const auto& rec : s.trace)
        trace.push_back(json::array({rec.iter, rec.value, rec.residual, rec.cond}));
    j["trace"] = std::move(trace);
    return j;
}

inline std::string finiteness_status_name(FinitenessStatus s) {
    switch (s) {
        case FinitenessStatus::ProvenFinite: return "ProvenFinite";
        case FinitenessStatus::ProvenInfinite: return "ProvenInfinite";
        case FinitenessStatus::Undetermined: return "Undetermined";
    }
    return "?";
}

inline json finiteness_to_json(const FinitenessVerdict& v) {
    json j;
    j["status"] = finiteness_status_name(v.status);
    switch (v.certificate) {
        case CertificateKind::None: break;
        case CertificateKind::Extremiser: j["certificate"] = "Extremiser"; break;
        case CertificateKind::SemisimpleDecomposition:
            j["certificate"] = "SemisimpleDecomposition";
            break;
        case CertificateKind::RankOnePolytopeMembership:
            j["certificate"] = "RankOnePolytopeMembership";
            break;
    }
    if (v.extremiser) j["extremiser"] = gaussian_input_to_json(*v.extremiser);
    switch (v.witness) {
        case WitnessKind::None: break;
        case WitnessKind::ScalingFailure: j["witness"] = "ScalingFailure"; break;
        case WitnessKind::DimensionViolation: j["witness"] = "DimensionViolation"; break;
    }
    if (v.scaling)
        j["scaling"] = json{{"holds", v.scaling->holds},
                            {"lhs", v.scaling->lhs},
                            {"rhs", v.scaling->rhs}};
    if (v.witness_subspace) j["witness_subspace"] = subspace_to_json(*v.witness_subspace);
    if (v.witness_defect) j["witness_defect"] = *v.witness_defect;
    if (v.witness_subset) j["witness_subset"] = *v.witness_subset;
    if (v.witness_sides)
        j["witness_sides"] = json{{"exponent_sum", v.witness_sides->first},
                                  {"rank", v.witness_sides->second}};
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

inline json polytope_to_json(const RankOnePolytope& p) {
    json facets = json::array();
    for (const auto& f : p.facets)
        facets.push_back(json{{"subset", f.subset}, {"rank", f.rank}});
    return json{{"m", p.m}, {"n", p.n}, {"vertices", p.vertices}, {"facets", std::move(facets)}};
}

/// Plain-text H-representation, one inequality per line.
inline std::string polytope_to_hrep(const RankOnePolytope& p) {
    std::ostringstream out;
    out << "sum p[all] == " << p.n << "\n";
    for (const auto& f : p.facets) {
        out << "sum p[";
        for (std::size_t i = 0; i < f.subset.size(); ++i) {
            if (i) out << ",";
            out << f.subset[i];
        }
        out << "] <= " << f.rank << "\n";
    }
    return out.str();
}

inline std::string critical_source_name(CriticalSource s) {
    switch (s) {
        case CriticalSource::Lattice: return "Lattice";
        case CriticalSource::Eigenspace: return "Eigenspace";
        case CriticalSource::RankOne: return "RankOne";
        case CriticalSource::UserSupplied: return "UserSupplied";
    }
    return "?";
}

inline json critical_report_to_json(const CriticalReport& c) {
    return json{{"subspace", subspace_to_json(c.subspace)},
                {"defect", c.defect},
                {"source", critical_source_name(c.source)}};
}

inline std::string extremisability_name(ExtremisabilityStatus s) {
    switch (s) {
        case ExtremisabilityStatus::Extremisable: return "Extremisable";
        case ExtremisabilityStatus::NotExtremisable: return "NotExtremisable";
        case ExtremisabilityStatus::Undetermined: return "Undetermined";
    }
    return "?";
}

inline json decomposition_to_json(const Decomposition& dec) {
    json comps = json::array();
    for (const auto& [sub, datum] : dec.components)
        comps.push_back(json{{"subspace", subspace_to_json(sub)},
                             {"datum", datum_to_json(datum)}});
    return json{{"components", std::move(comps)},
                {"transform",
                 json{{"C", matrix_to_json(dec.transform.C)},
                      {"C_list", [&] {
                           json l = json::array();
                           for (const auto& c : dec.transform.C_list)
                               l.push_back(matrix_to_json(c));
                           return l;
                       }()}}}};
}

inline json classification_to_json(const ExtremisabilityVerdict& v) {
    json evidence = json::array();
    for (const auto& ev : v.evidence) {
        json e;
        e["subspace"] = subspace_to_json(ev.subspace);
        e["simple_within_budget"] = ev.simple_within_budget;
        e["solve_status"] = solve_status_name(ev.solve_status);
        if (ev.critical) e["critical"] = critical_report_to_json(*ev.critical);
        evidence.push_back(std::move(e));
    }
    return json{{"status", extremisability_name(v.status)},
                {"evidence", std::move(evidence)}};
}

inline json trace_to_json(const MonotonicityTrace& t) {
    json samples = json::array();
    for (std::size_t i = 0; i < t.times.size(); ++i)
        samples.push_back(json::array({t.times[i], t.values[i], t.error_bounds[i]}));
    json j{{"samples", std::move(samples)}};
    if (t.limit) j["limit"] = *t.limit;
    return j;
}

inline std::string trace_to_csv(const MonotonicityTrace& t) {
    std::ostringstream out;
    out.precision(17);
    out << "t,Q,error_bound\n";
    for (std::size_t i = 0; i < t.times.size(); ++i)
        out << t.times[i] << "," << t.values[i] << "," << t.error_bounds[i] << "\n";
    return out.str();
}

/// Self-contained gnuplot script with the trace data inlined.
inline std::string trace_to_gnuplot(const MonotonicityTrace& t, const std::string& title) {
    std::ostringstream out;
    out.precision(17);
    out << "$trace << EOD\n";
    for (std::size_t i = 0; i < t.times.size(); ++i)
        out << t.times[i] << " " << t.values[i] << " " << t.error_bounds[i] << "\n";
    out << "EOD\n";
    out << "set logscale x\n";
    out << "set xlabel 't'\n";
    out << "set ylabel 'Q'\n";
    if (t.limit) out << "limit = " << *t.limit << "\n";
    out << "plot $trace using 1:2:3 with yerrorlines title '" << title << "'";
    if (t.limit) out << ", limit with lines dashtype 2 title 'limit'";
    out << "\n";
    return out.str();
}

} // namespace bl::io
