#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bl/structure.hpp"

namespace bl {

struct ScalingCheck {
    bool holds = false;
    double lhs = 0.0; // dim H
    double rhs = 0.0; // sum p_j dim H_j
};

/// Scaling condition dim H = sum_j p_j dim H_j, decided exactly up to 1e-9.
inline ScalingCheck check_scaling(const BLDatum& d) {
    d.check_shapes();
    ScalingCheck c;
    c.lhs = static_cast<double>(d.dim);
    c.rhs = d.weighted_target_dim();
    c.holds = std::abs(c.lhs - c.rhs) <= 1e-9;
    return c;
}

enum class FinitenessStatus { ProvenFinite, ProvenInfinite, Undetermined };
enum class CertificateKind { None, Extremiser, SemisimpleDecomposition, RankOnePolytopeMembership };
enum class WitnessKind { None, ScalingFailure, DimensionViolation };

/// Honest tri-state verdict. ProvenInfinite always carries a witness with a
/// defect below -0.25 or a scaling mismatch; ProvenFinite carries its
/// certificate.
struct FinitenessVerdict {
    FinitenessStatus status = FinitenessStatus::Undetermined;
    CertificateKind certificate = CertificateKind::None;
    std::optional<GaussianInput> extremiser;
    WitnessKind witness = WitnessKind::None;
    std::optional<ScalingCheck> scaling;
    std::optional<Subspace> witness_subspace;
    std::optional<double> witness_defect;
    /// rank-one witnesses carry the violating subset with both sides of
    /// sum_{j in I} p_j <= d_I, which is exact even when the float defect
    /// of the orthocomplement sits above the certification threshold
    std::optional<std::vector<int>> witness_subset;
    std::optional<std::pair<double, double>> witness_sides; // (sum p, d_I)
    std::string note;
};

/// Barthe polytope data for rank-one squares: base-indicator vertices and
/// the unreduced facet list (subset, rank of the selected vectors).
struct RankOnePolytope {
    int m = 0;
    int n = 0;
    std::vector<std::vector<int>> vertices; // 0/1 indicator per map
    struct Facet {
        std::vector<int> subset; // 0-based indices
        int rank = 0;            // d_I
    };
    std::vector<Facet> facets;
};

namespace detail {

inline Matrix selected_columns(const std::vector<Vector>& vecs, unsigned long mask) {
    const int n = static_cast<int>(vecs.empty() ? 0 : vecs[0].size());
    int count = 0;
    for (std::size_t j = 0; j < vecs.size(); ++j)
        if (mask & (1UL << j)) ++count;
    Matrix cols(n, count);
    int c = 0;
    for (std::size_t j = 0; j < vecs.size(); ++j)
        if (mask & (1UL << j)) cols.col(c++) = vecs[j];
    return cols;
}

} // namespace detail

/// Exact decision for rank-one data: finite iff scaling holds and
/// sum_{j in I} p_j <= d_I for every subset I.
inline FinitenessVerdict rank_one_finiteness(const BLDatum& d, const Tolerances& tol = {}) {
    d.check_shapes();
    if (!is_rank_one(d))
        throw PreconditionError("rank_one_finiteness: all targets must be one-dimensional");
    FinitenessVerdict v;
    const ScalingCheck sc = check_scaling(d);
    v.scaling = sc;
    if (!sc.holds) {
        v.status = FinitenessStatus::ProvenInfinite;
        v.witness = WitnessKind::ScalingFailure;
        return v;
    }
    const auto vecs = bl::detail::rank_one_vectors(d);
    const int m = d.map_count();
    if (m > 30) throw BudgetError("rank_one_finiteness: too many maps for subset enumeration");
    for (unsigned long mask = 1; mask < (1UL << m); ++mask) {
        double psum = 0.0;
        std::vector<int> subset;
        for (int j = 0; j < m; ++j)
            if (mask & (1UL << j)) {
                psum += d.exponent(j);
                subset.push_back(j);
            }
        const Matrix cols = detail::selected_columns(vecs, mask);
        const int d_i = linalg::rank(cols, tol.rank_tol);
        if (psum > d_i + 1e-9) {
            v.status = FinitenessStatus::ProvenInfinite;
            v.witness = WitnessKind::DimensionViolation;
            v.witness_subset = subset;
            v.witness_sides = std::make_pair(psum, static_cast<double>(d_i));
            // witness subspace: orthocomplement of the span of the selected
            // vectors; its defect is negative
            const Subspace w = orthocomplement(Subspace::from_span(cols, tol.rank_tol));
            if (!w.is_zero() && !w.is_full()) {
                v.witness_subspace = w;
                v.witness_defect = criticality_defect(d, w, tol);
            }
            return v;
        }
    }
    v.status = FinitenessStatus::ProvenFinite;
    v.certificate = CertificateKind::RankOnePolytopeMembership;
    return v;
}

/// Enumerates all n-subsets that form bases (the polytope vertices) and all
/// facet data (I, d_I); m is capped at 20, beyond which per-query membership
/// should be used instead.
inline RankOnePolytope rank_one_polytope(const BLDatum& d, const Tolerances& tol = {}) {
    d.check_shapes();
    if (!is_rank_one(d))
        throw PreconditionError("rank_one_polytope: all targets must be one-dimensional");
    const int m = d.map_count();
    const int n = d.dim;
    if (m > 20)
        throw BudgetError("rank_one_polytope: m > 20; use the membership test instead");
    const auto vecs = bl::detail::rank_one_vectors(d);
    {
        Matrix all(n, m);
        for (int j = 0; j < m; ++j) all.col(j) = vecs[j];
        if (linalg::rank(all, tol.rank_tol) != n)
            throw PreconditionError("rank_one_polytope: vectors do not span the domain");
    }
    RankOnePolytope p;
    p.m = m;
    p.n = n;
    for (unsigned long mask = 1; mask < (1UL << m); ++mask) {
        int size = 0;
        for (int j = 0; j < m; ++j)
            if (mask & (1UL << j)) ++size;
        const Matrix cols = detail::selected_columns(vecs, mask);
        const int rank = linalg::rank(cols, tol.rank_tol);
        RankOnePolytope::Facet f;
        for (int j = 0; j < m; ++j)
            if (mask & (1UL << j)) f.subset.push_back(j);
        f.rank = rank;
        p.facets.push_back(std::move(f));
        if (size == n && rank == n) {
            std::vector<int> indicator(m, 0);
            for (int j = 0; j < m; ++j)
                if (mask & (1UL << j)) indicator[j] = 1;
            p.vertices.push_back(std::move(indicator));
        }
    }
    return p;
}

/// Index selection of the backwards greedy pass: i enters I_j when B_j e_i
/// falls outside the span of the later B_j e_{i'}. When the quotient-side
/// dimension conditions hold, the prefix sums obey
/// sum_j p_j |I_j cap {1..k}| <= k for every k.
struct GreedySelection {
    std::vector<std::vector<int>> index_sets; // 0-based positions into the basis
    std::vector<double> wedge_norms;

    double prefix_weight(const BLDatum& d, int k) const {
        double s = 0.0;
        for (int j = 0; j < d.map_count(); ++j)
            for (int i : index_sets[j])
                if (i < k) s += d.exponent(j);
        return s;
    }
};

inline GreedySelection greedy_index_selection(const BLDatum& d, const Matrix& basis,
                                              const Tolerances& tol = {}) {
    d.check_shapes();
    const int n = d.dim;
    if (basis.rows() != n || basis.cols() != n)
        throw StructuralError("greedy_index_selection: basis must be square of side dim");
    if ((basis.transpose() * basis - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8)
        throw PreconditionError("greedy_index_selection: basis is not orthonormal");
    GreedySelection sel;
    for (int j = 0; j < d.map_count(); ++j) {
        const int nj = d.target_dim(j);
        std::vector<int> chosen;
        Matrix span(nj, 0);
        for (int i = n - 1; i >= 0; --i) {
            const Vector be = d.map(j) * basis.col(i);
            Matrix trial(nj, span.cols() + 1);
            trial.leftCols(span.cols()) = span;
            trial.col(span.cols()) = be;
            if (linalg::rank(trial, tol.rank_tol) > linalg::rank(span, tol.rank_tol)) {
                chosen.push_back(i);
                span = std::move(trial);
            }
        }
        std::sort(chosen.begin(), chosen.end());
        Matrix wedge(nj, static_cast<int>(chosen.size()));
        for (std::size_t c = 0; c < chosen.size(); ++c)
            wedge.col(static_cast<int>(c)) = d.map(j) * basis.col(chosen[c]);
        // norm of the wedge product = sqrt(det of the Gram matrix)
        const Matrix gram = wedge.transpose() * wedge;
        sel.wedge_norms.push_back(std::sqrt(std::max(0.0, gram.determinant())));
        sel.index_sets.push_back(std::move(chosen));
    }
    return sel;
}

/// The full pipeline: scaling, exact rank-one decision, random and lattice
/// falsification of the dimension condition, then the semisimplicity
/// criterion for a finiteness certificate.
inline FinitenessVerdict general_finiteness(const BLDatum& d, const SearchBudget& budget = {},
                                            const Tolerances& tol = {}) {
    d.check_shapes();
    FinitenessVerdict v;
    const ScalingCheck sc = check_scaling(d);
    v.scaling = sc;
    if (!sc.holds) {
        v.status = FinitenessStatus::ProvenInfinite;
        v.witness = WitnessKind::ScalingFailure;
        return v;
    }
    const BLDatum work = drop_zero_exponents(d);
    if (is_rank_one(work) && work.map_count() <= 30) {
        FinitenessVerdict exact = rank_one_finiteness(work, tol);
        exact.scaling = sc;
        return exact;
    }

    // falsify the dimension condition on lattice and random candidates
    int examined = 0;
    const auto test = [&](const Subspace& s) -> bool {
        if (s.is_zero() || s.is_full()) return false;
        ++examined;
        const double defect = criticality_defect(work, s, tol);
        if (defect < -0.25) {
            v.status = FinitenessStatus::ProvenInfinite;
            v.witness = WitnessKind::DimensionViolation;
            v.witness_subspace = s;
            v.witness_defect = defect;
            return true;
        }
        return false;
    };
    for (const auto& s : bl::detail::lattice_candidates(work, budget, tol))
        if (test(s)) return v;
    Rng rng(budget.seed ^ 0x51ab5f2440912ce3ULL);
    for (int k = 1; k < work.dim; ++k) {
        for (int trial = 0; trial < budget.random_subspaces_per_dim; ++trial) {
            Matrix raw(work.dim, k);
            for (int r = 0; r < work.dim; ++r)
                for (int c = 0; c < k; ++c) raw(r, c) = rng.normal();
            if (test(Subspace::from_span(raw, tol.rank_tol))) return v;
        }
    }

    try {
        const ExtremisabilityVerdict ext = classify_extremisability(work, budget, tol);
        if (ext.status == ExtremisabilityStatus::Extremisable) {
            v.status = FinitenessStatus::ProvenFinite;
            SolveOptions opt;
            opt.tol = tol;
            opt.max_iter = budget.solver_max_iter;
            const SolveOutcome sol = fixed_point_solve(work, std::nullopt, opt);
            if (sol.status == SolveStatus::Converged) {
                v.certificate = CertificateKind::Extremiser;
                v.extremiser = sol.extremiser;
            } else {
                v.certificate = CertificateKind::SemisimpleDecomposition;
            }
            return v;
        }
    } catch (const Error&) {
        // fall through to Undetermined
    }
    v.status = FinitenessStatus::Undetermined;
    v.note = "budget exhausted after examining " + std::to_string(examined) +
             " candidate subspaces";
    return v;
}

} // namespace bl
