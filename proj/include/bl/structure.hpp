#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "bl/gaussian.hpp"

namespace bl {

/// Thrown by classify_extremisability when the scaling condition fails and
/// the question is vacuous (the constant is infinite).
class NotApplicableError : public Error {
public:
    explicit NotApplicableError(const std::string& what) : Error(what) {}
};

enum class CriticalSource { Lattice, Eigenspace, RankOne, UserSupplied };

/// A candidate critical subspace with its criticality defect
/// sum_j p_j dim(B_j V) - dim V; zero means critical.
struct CriticalReport {
    Subspace subspace;
    double defect = 0.0;
    CriticalSource source = CriticalSource::UserSupplied;
};

/// Caps for every search that is not guaranteed to terminate on its own.
struct SearchBudget {
    int lattice_depth = 3;
    int max_lattice = 512;
    int solver_max_iter = 50000;
    int max_subsets = 4096;
    int random_subspaces_per_dim = 200;
    int decompose_retries = 8;
    std::uint64_t seed = 0;

    static SearchBudget small_budget() {
        SearchBudget b;
        b.lattice_depth = 2;
        b.max_lattice = 96;
        b.solver_max_iter = 3000;
        b.max_subsets = 256;
        b.random_subspaces_per_dim = 40;
        b.decompose_retries = 4;
        return b;
    }
    static SearchBudget defaults() { return {}; }
    static SearchBudget large_budget() {
        SearchBudget b;
        b.lattice_depth = 4;
        b.max_lattice = 2048;
        b.solver_max_iter = 400000;
        b.max_subsets = 1 << 16;
        b.random_subspaces_per_dim = 500;
        b.decompose_retries = 12;
        return b;
    }
};

/// dim(B_j V) decided against the scale of B_j itself, so directions of V
/// that B_j annihilates up to roundoff do not inflate the image.
inline int image_dim(const BLDatum& d, int j, const Subspace& v, const Tolerances& tol) {
    return linalg::rank_scaled(d.map(j) * v.basis(), tol.rank_tol,
                               linalg::opnorm(d.map(j)));
}

inline Subspace image_space(const BLDatum& d, int j, const Subspace& v, const Tolerances& tol) {
    return Subspace::from_orthonormal(linalg::column_space_scaled(
        d.map(j) * v.basis(), tol.rank_tol, linalg::opnorm(d.map(j))));
}

/// sum_j p_j dim(B_j V) - dim V at rank tolerance; 0 means critical.
inline double criticality_defect(const BLDatum& d, const Subspace& v,
                                 const Tolerances& tol = {}) {
    d.check_shapes();
    if (v.ambient_dim() != d.dim)
        throw StructuralError("criticality_defect: wrong ambient dimension");
    if (v.is_zero() || v.is_full())
        throw PreconditionError("criticality_defect: subspace must be non-zero and proper");
    double s = 0.0;
    for (int j = 0; j < d.map_count(); ++j)
        s += d.exponent(j) * image_dim(d, j, v, tol);
    return s - v.dim();
}

namespace detail {

inline void push_unique(std::vector<Subspace>& list, const Subspace& s, double dedup_tol) {
    if (s.is_zero() || s.is_full()) return;
    for (const auto& t : list)
        if (t.dim() == s.dim() && projector_distance(t, s) < dedup_tol) return;
    list.push_back(s);
}

/// Closure of {range B_j^T, ker B_j} under sum and intersection, capped by
/// depth and count. Ranges come first so higher-dimensional witnesses are
/// examined before kernels.
inline std::vector<Subspace> lattice_candidates(const BLDatum& d, const SearchBudget& budget,
                                                const Tolerances& tol) {
    std::vector<Subspace> all;
    for (int j = 0; j < d.map_count(); ++j)
        push_unique(all, Subspace::from_span(d.map(j).transpose(), tol.rank_tol),
                    tol.projector_tol);
    for (int j = 0; j < d.map_count(); ++j)
        push_unique(all, Subspace::from_orthonormal(linalg::null_space(d.map(j), tol.rank_tol)),
                    tol.projector_tol);

    std::size_t frontier_begin = 0;
    for (int depth = 0; depth < budget.lattice_depth; ++depth) {
        const std::size_t frontier_end = all.size();
        if (frontier_begin == frontier_end) break;
        for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
            for (std::size_t k = 0; k < frontier_end; ++k) {
                if (i == k) continue;
                if (static_cast<int>(all.size()) >= budget.max_lattice) return all;
                push_unique(all, sum(all[i], all[k], tol.rank_tol), tol.projector_tol);
                push_unique(all, intersection(all[i], all[k], tol.rank_tol), tol.projector_tol);
            }
        }
        frontier_begin = frontier_end;
    }
    return all;
}

/// Eigenvalue-cluster subspaces of a symmetric matrix plus the cumulative
/// low spans, all proper.
inline std::vector<Subspace> spectral_candidates(const Matrix& m, double cluster_tol = 1e-6) {
    std::vector<Subspace> out;
    const int n = static_cast<int>(m.rows());
    if (n <= 1) return out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const Vector ev = es.eigenvalues();
    const double scale = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
    int begin = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || ev(i) - ev(i - 1) > cluster_tol * std::max(1.0, scale)) {
            if (i - begin < n)
                out.push_back(Subspace::from_orthonormal(
                    es.eigenvectors().middleCols(begin, i - begin)));
            begin = i;
        }
    }
    for (int k = 1; k < n; ++k)
        out.push_back(Subspace::from_orthonormal(es.eigenvectors().leftCols(k)));
    return out;
}

inline std::vector<Vector> rank_one_vectors(const BLDatum& d) {
    std::vector<Vector> v;
    for (int j = 0; j < d.map_count(); ++j) v.push_back(d.map(j).row(0).transpose());
    return v;
}

} // namespace detail

/// Budget accounting for one search run.
struct CriticalSearchStats {
    int candidates_examined = 0;
    int lattice_candidates = 0;
    int depth_configured = 0;
};

/// Searches the kernel/range lattice, the spectrum of a converged or
/// degenerated gram matrix, and (for rank-one data) spans of subsets of the
/// defining vectors. Returns the first subspace with |defect| <= 0.25;
/// exhausting the budget without a hit is a normal outcome.
inline std::optional<CriticalReport> find_critical_subspace(const BLDatum& d,
                                                            const SearchBudget& budget = {},
                                                            const Tolerances& tol = {},
                                                            CriticalSearchStats* stats = nullptr) {
    d.check_shapes();
    CriticalSearchStats local;
    if (!stats) stats = &local;
    stats->depth_configured = budget.lattice_depth;
    if (d.dim <= 1) return std::nullopt; // no non-zero proper subspaces to find
    const auto accept = [&](const Subspace& v, CriticalSource src)
        -> std::optional<CriticalReport> {
        if (v.is_zero() || v.is_full()) return std::nullopt;
        ++stats->candidates_examined;
        const double defect = criticality_defect(d, v, tol);
        if (std::abs(defect) <= 0.25) return CriticalReport{v, defect, src};
        return std::nullopt;
    };

    const auto lattice = detail::lattice_candidates(d, budget, tol);
    stats->lattice_candidates = static_cast<int>(lattice.size());
    for (const auto& v : lattice)
        if (auto r = accept(v, CriticalSource::Lattice)) return r;

    // spectrum of the iteration's gram matrix
    {
        SolveOptions opt;
        opt.tol = tol;
        opt.max_iter = budget.solver_max_iter;
        try {
            const SolveOutcome sol = fixed_point_solve(d, std::nullopt, opt);
            if (sol.status == SolveStatus::Converged) {
                const Matrix m = gram_matrix(d, *sol.extremiser);
                for (const auto& v : detail::spectral_candidates(m))
                    if (auto r = accept(v, CriticalSource::Eigenspace)) return r;
            } else if (sol.degeneration_subspace) {
                if (auto r = accept(*sol.degeneration_subspace, CriticalSource::Eigenspace))
                    return r;
            }
        } catch (const Error&) {
            // solver preconditions may fail (degenerate datum); other sources still apply
        }
    }

    if (is_rank_one(d) && d.map_count() <= 20) {
        const auto vecs = detail::rank_one_vectors(d);
        const int m = d.map_count();
        const long limit = std::min<long>(1L << m, budget.max_subsets);
        for (long mask = 1; mask < limit; ++mask) {
            Matrix cols(d.dim, 0);
            for (int j = 0; j < m; ++j)
                if (mask & (1L << j)) {
                    cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
                    cols.col(cols.cols() - 1) = vecs[j];
                }
            if (auto r = accept(Subspace::from_span(cols, tol.rank_tol), CriticalSource::RankOne))
                return r;
        }
    }
    return std::nullopt;
}

namespace detail {

/// B_j V and B_j W complementary in every target, and V, W complementary in
/// the domain, all at rank tolerance.
inline bool is_critical_pair(const BLDatum& d, const Subspace& v, const Subspace& w,
                             const Tolerances& tol) {
    if (v.dim() + w.dim() != d.dim) return false;
    if (intersection(v, w, tol.rank_tol).dim() != 0) return false;
    for (int j = 0; j < d.map_count(); ++j) {
        const Subspace iv = image_space(d, j, v, tol);
        const Subspace iw = image_space(d, j, w, tol);
        if (iv.dim() + iw.dim() != d.target_dim(j)) return false;
        if (intersection(iv, iw, tol.rank_tol).dim() != 0) return false;
    }
    return true;
}

} // namespace detail

/// Completes a subspace V into a critical pair (V, W) when possible: for
/// geometric data W = V^perp is tested directly, otherwise the datum is
/// normalised through a converged extremiser and the orthocomplement is
/// pulled back through the intertwining transform.
inline std::optional<std::pair<Subspace, Subspace>>
find_critical_pair(const BLDatum& d, const Subspace& v,
                   const SearchBudget& budget = {}, const Tolerances& tol = {}) {
    d.check_shapes();
    if (v.ambient_dim() != d.dim || v.is_zero() || v.is_full())
        throw PreconditionError("find_critical_pair: V must be a non-zero proper subspace");

    if (is_geometric(d)) {
        const Subspace w = orthocomplement(v);
        if (detail::is_critical_pair(d, v, w, tol)) return std::make_pair(v, w);
        return std::nullopt;
    }

    SolveOptions opt;
    opt.tol = tol;
    opt.max_iter = budget.solver_max_iter;
    SolveOutcome sol;
    try {
        sol = fixed_point_solve(drop_zero_exponents(d), std::nullopt, opt);
    } catch (const Error&) {
        return std::nullopt;
    }
    if (sol.status != SolveStatus::Converged) return std::nullopt;

    const Matrix m = gram_matrix(drop_zero_exponents(d), *sol.extremiser);
    const Matrix m_half = linalg::spd_power(m, 0.5);
    const Matrix m_inv_half = linalg::spd_power(m, -0.5);
    const Subspace v_geo = Subspace::from_span(m_half * v.basis(), tol.rank_tol);
    const Subspace w_geo = orthocomplement(v_geo);
    const Subspace w = Subspace::from_span(m_inv_half * w_geo.basis(), tol.rank_tol);
    if (detail::is_critical_pair(d, v, w, tol)) return std::make_pair(v, w);
    return std::nullopt;
}

/// Orthogonal components of the transformed datum together with the
/// equivalence transform realising the direct sum.
struct Decomposition {
    std::vector<std::pair<Subspace, BLDatum>> components;
    EquivalenceTransform transform;

    bool indecomposable() const { return components.size() <= 1; }
};

namespace detail {

/// Eigenspace partition of a random positive combination sum c_j B_j^T B_j,
/// refined by intersecting the partitions of several retries.
inline std::vector<Subspace> invariant_partition(const BLDatum& geo, int retries,
                                                 std::uint64_t seed, const Tolerances& tol) {
    const int n = geo.dim;
    std::vector<Subspace> parts{Subspace::full(n)};
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (int r = 0; r < retries; ++r) {
        Matrix s = Matrix::Zero(n, n);
        for (int j = 0; j < geo.map_count(); ++j)
            s.noalias() += rng.log_uniform(0.5, 2.0) * geo.map(j).transpose() * geo.map(j);
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
        const Vector ev = es.eigenvalues();
        const double scale = std::max(1.0, std::abs(ev(n - 1)));
        std::vector<Subspace> trial;
        int begin = 0;
        for (int i = 1; i <= n; ++i) {
            if (i == n || ev(i) - ev(i - 1) > 1e-7 * scale) {
                trial.push_back(Subspace::from_orthonormal(
                    es.eigenvectors().middleCols(begin, i - begin)));
                begin = i;
            }
        }
        // common refinement
        std::vector<Subspace> refined;
        int total = 0;
        for (const auto& p : parts)
            for (const auto& q : trial) {
                const Subspace meet = intersection(p, q, tol.rank_tol);
                if (meet.dim() > 0) {
                    refined.push_back(meet);
                    total += meet.dim();
                }
            }
        if (total == n) parts = std::move(refined);
    }
    return parts;
}

/// Parts whose images overlap in some target cannot be separated; merge them
/// into the connected components of that linkage relation.
inline std::vector<Subspace> merge_linked_parts(const BLDatum& geo,
                                                const std::vector<Subspace>& parts,
                                                const Tolerances& tol) {
    const int k = static_cast<int>(parts.size());
    std::vector<int> parent(k);
    for (int i = 0; i < k; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
            bool linked = false;
            for (int j = 0; j < geo.map_count() && !linked; ++j) {
                const int da = image_dim(geo, j, parts[a], tol);
                const int db = image_dim(geo, j, parts[b], tol);
                const int dab = image_dim(geo, j, sum(parts[a], parts[b], tol.rank_tol), tol);
                if (da + db > dab) linked = true;
            }
            if (linked) parent[find(a)] = find(b);
        }
    std::vector<Subspace> merged;
    std::vector<int> roots;
    for (int i = 0; i < k; ++i) {
        const int r = find(i);
        auto it = std::find(roots.begin(), roots.end(), r);
        if (it == roots.end()) {
            roots.push_back(r);
            merged.push_back(parts[i]);
        } else {
            const std::size_t idx = static_cast<std::size_t>(it - roots.begin());
            merged[idx] = sum(merged[idx], parts[i], tol.rank_tol);
        }
    }
    return merged;
}

inline std::optional<Subspace> split_geometric(const BLDatum& geo, const SearchBudget& budget,
                                               const Tolerances& tol) {
    if (geo.dim <= 1) return std::nullopt;
    const auto parts =
        invariant_partition(geo, budget.decompose_retries, budget.seed, tol);
    for (const auto& part : merge_linked_parts(geo, parts, tol)) {
        if (part.is_zero() || part.is_full()) continue;
        if (is_critical_pair(geo, part, orthocomplement(part), tol)) return part;
    }
    for (const auto& part : parts) {
        if (part.is_zero() || part.is_full()) continue;
        if (is_critical_pair(geo, part, orthocomplement(part), tol)) return part;
    }
    // fully degenerate spectrum (e.g. identical maps): try coordinate lines of
    // the first part's basis
    for (const auto& part : parts) {
        if (part.dim() < 2) continue;
        for (int c = 0; c < part.dim(); ++c) {
            const Subspace line =
                Subspace::from_orthonormal(part.basis().col(c));
            if (line.is_full()) continue;
            if (is_critical_pair(geo, line, orthocomplement(line), tol)) return line;
        }
    }
    return std::nullopt;
}

inline void decompose_geometric(const BLDatum& geo, const SearchBudget& budget,
                                const Tolerances& tol,
                                std::vector<std::pair<Subspace, BLDatum>>& out,
                                const Matrix& embed) {
    const auto split = split_geometric(geo, budget, tol);
    if (!split) {
        out.emplace_back(Subspace::from_span(embed, tol.rank_tol), geo);
        return;
    }
    const Subspace v = *split;
    const Subspace w = orthocomplement(v);
    decompose_geometric(restrict_datum(geo, v, tol), budget, tol, out,
                        (embed * v.basis()).eval());
    decompose_geometric(restrict_datum(geo, w, tol), budget, tol, out,
                        (embed * w.basis()).eval());
}

/// Barthe's relation for rank-one data: i and j are linked when some common
/// completion turns both v_i and v_j into bases.
inline std::vector<int> rank_one_classes(const BLDatum& d, const SearchBudget& budget,
                                         const Tolerances& tol) {
    const int m = d.map_count();
    const int n = d.dim;
    const auto vecs = rank_one_vectors(d);
    std::vector<int> parent(m);
    for (int i = 0; i < m; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    const auto is_basis = [&](const std::vector<int>& idx) {
        Matrix mm(n, static_cast<int>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) mm.col(static_cast<int>(c)) = vecs[idx[c]];
        return linalg::rank(mm, tol.rank_tol) == n;
    };

    long budget_left = budget.max_subsets;
    for (int i = 0; i < m && budget_left > 0; ++i) {
        for (int j = i + 1; j < m && budget_left > 0; ++j) {
            if (find(i) == find(j)) continue;
            // enumerate (n-1)-subsets of {0..m-1} minus {i,j}
            std::vector<int> pool;
            for (int k = 0; k < m; ++k)
                if (k != i && k != j) pool.push_back(k);
            if (static_cast<int>(pool.size()) < n - 1) continue;
            std::vector<int> comb(n - 1);
            for (int k = 0; k < n - 1; ++k) comb[k] = k;
            while (budget_left-- > 0) {
                std::vector<int> with_i, with_j;
                for (int k : comb) {
                    with_i.push_back(pool[k]);
                    with_j.push_back(pool[k]);
                }
                with_i.push_back(i);
                with_j.push_back(j);
                if (is_basis(with_i) && is_basis(with_j)) {
                    unite(i, j);
                    break;
                }
                // next combination
                int pos = n - 2;
                while (pos >= 0 && comb[pos] == static_cast<int>(pool.size()) - (n - 1) + pos)
                    --pos;
                if (pos < 0) break;
                ++comb[pos];
                for (int k = pos + 1; k < n - 1; ++k) comb[k] = comb[k - 1] + 1;
            }
        }
    }
    std::vector<int> label(m);
    for (int i = 0; i < m; ++i) label[i] = find(i);
    return label;
}

} // namespace detail

/// Splits a datum into indecomposable components. Rank-one data decompose
/// exactly through the linkage relation on the defining vectors; general
/// data are normalised to geometric form through a converged extremiser and
/// split along critical pairs found from invariant subspaces of random
/// positive combinations of the projections B_j^T B_j. A single component
/// means indecomposable-within-budget.
inline Decomposition decompose(const BLDatum& d, const SearchBudget& budget = {},
                               const Tolerances& tol = {}) {
    d.check_shapes();
    for (int j = 0; j < d.map_count(); ++j)
        if (d.exponent(j) <= 0.0)
            throw PreconditionError("decompose: exponents must be positive; drop zeros first");
    {
        const ValidationReport rep = validate_datum(d, tol);
        if (!rep.non_degenerate)
            throw PreconditionError("decompose: datum is degenerate");
    }

    Decomposition dec;
    dec.transform = EquivalenceTransform::identity(d);

    if (d.dim == 0) {
        dec.components.emplace_back(Subspace::full(0), d);
        return dec;
    }

    if (is_rank_one(d)) {
        const auto label = detail::rank_one_classes(d, budget, tol);
        std::vector<int> roots;
        for (int l : label)
            if (std::find(roots.begin(), roots.end(), l) == roots.end()) roots.push_back(l);
        if (roots.size() <= 1) {
            dec.components.emplace_back(Subspace::full(d.dim), d);
            return dec;
        }
        const auto vecs = detail::rank_one_vectors(d);
        std::vector<Subspace> spans;
        int dim_total = 0;
        for (int root : roots) {
            Matrix cols(d.dim, 0);
            for (int j = 0; j < d.map_count(); ++j)
                if (label[j] == root) {
                    cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
                    cols.col(cols.cols() - 1) = vecs[j];
                }
            spans.push_back(Subspace::from_span(cols, tol.rank_tol));
            dim_total += spans.back().dim();
        }
        if (dim_total != d.dim) {
            dec.components.emplace_back(Subspace::full(d.dim), d);
            return dec;
        }
        // component subspaces: complement of the span of all other classes
        Matrix c(d.dim, d.dim);
        std::vector<int> block_dims;
        int col = 0;
        for (std::size_t i = 0; i < spans.size(); ++i) {
            Subspace others = Subspace::zero(d.dim);
            for (std::size_t l = 0; l < spans.size(); ++l)
                if (l != i) others = sum(others, spans[l], tol.rank_tol);
            const Subspace comp = orthocomplement(others);
            block_dims.push_back(comp.dim());
            c.middleCols(col, comp.dim()) = comp.basis();
            col += comp.dim();
        }
        if (col != d.dim || !linalg::is_invertible(c, tol.rank_tol)) {
            dec.components.emplace_back(Subspace::full(d.dim), d);
            return dec;
        }
        EquivalenceTransform t;
        t.C = c;
        for (int j = 0; j < d.map_count(); ++j) t.C_list.push_back(Matrix::Identity(1, 1));
        const BLDatum transformed = apply_equivalence(d, t, tol).first;
        dec.transform = t;
        col = 0;
        for (int bd : block_dims) {
            Matrix basis = Matrix::Zero(d.dim, bd);
            for (int k = 0; k < bd; ++k) basis(col + k, k) = 1.0;
            const Subspace block = Subspace::from_orthonormal(basis);
            dec.components.emplace_back(block, restrict_datum(transformed, block, tol));
            col += bd;
        }
        return dec;
    }

    // general rank: reach a geometric representative first
    BLDatum geo = d;
    EquivalenceTransform t = EquivalenceTransform::identity(d);
    if (!is_geometric(d)) {
        SolveOptions opt;
        opt.tol = tol;
        opt.max_iter = budget.solver_max_iter;
        SolveOutcome sol;
        try {
            sol = fixed_point_solve(d, std::nullopt, opt);
        } catch (const Error&) {
            dec.components.emplace_back(Subspace::full(d.dim), d);
            return dec;
        }
        if (sol.status != SolveStatus::Converged) {
            dec.components.emplace_back(Subspace::full(d.dim), d);
            return dec;
        }
        auto normalized = normalize_to_geometric(d, *sol.extremiser, tol);
        geo = std::move(normalized.first);
        t = std::move(normalized.second);
    }

    dec.transform = t;
    detail::decompose_geometric(geo, budget, tol, dec.components,
                                Matrix::Identity(d.dim, d.dim));
    return dec;
}

enum class ExtremisabilityStatus { Extremisable, NotExtremisable, Undetermined };

struct ComponentEvidence {
    Subspace subspace;                       // in the transformed domain
    bool simple_within_budget = false;
    std::optional<CriticalReport> critical;
    SolveStatus solve_status = SolveStatus::BudgetExhausted;
};

struct ExtremisabilityVerdict {
    ExtremisabilityStatus status = ExtremisabilityStatus::Undetermined;
    std::vector<ComponentEvidence> evidence;
};

/// Decides gaussian-extremisability through the semisimplicity criterion:
/// extremisers exist exactly when every indecomposable component is simple.
/// Verdicts depending on search are tri-state; Extremisable additionally
/// requires the per-component iteration to converge.
inline ExtremisabilityVerdict classify_extremisability(const BLDatum& d,
                                                       const SearchBudget& budget = {},
                                                       const Tolerances& tol = {}) {
    d.check_shapes();
    for (int j = 0; j < d.map_count(); ++j)
        if (d.exponent(j) <= 0.0)
            throw PreconditionError(
                "classify_extremisability: exponents must be positive; drop zeros first");
    const double lhs = d.dim, rhs = d.weighted_target_dim();
    if (std::abs(lhs - rhs) > 1e-9)
        throw NotApplicableError("classify_extremisability: scaling condition fails (" +
                                 std::to_string(lhs) + " vs " + std::to_string(rhs) +
                                 "), the constant is infinite");

    const Decomposition dec = decompose(d, budget, tol);
    ExtremisabilityVerdict verdict;
    bool all_simple_converged = true;
    bool some_certified_degenerate = false;
    for (const auto& [sub, comp] : dec.components) {
        ComponentEvidence ev;
        ev.subspace = sub;
        ev.critical = find_critical_subspace(comp, budget, tol);
        ev.simple_within_budget = !ev.critical.has_value();
        SolveOptions opt;
        opt.tol = tol;
        opt.max_iter = budget.solver_max_iter;
        try {
            ev.solve_status = fixed_point_solve(comp, std::nullopt, opt).status;
        } catch (const Error&) {
            ev.solve_status = SolveStatus::BudgetExhausted;
        }
        if (!(ev.simple_within_budget && ev.solve_status == SolveStatus::Converged))
            all_simple_converged = false;
        if (ev.critical && ev.solve_status == SolveStatus::Degenerated)
            some_certified_degenerate = true;
        verdict.evidence.push_back(std::move(ev));
    }
    if (all_simple_converged)
        verdict.status = ExtremisabilityStatus::Extremisable;
    else if (some_certified_degenerate)
        verdict.status = ExtremisabilityStatus::NotExtremisable;
    else
        verdict.status = ExtremisabilityStatus::Undetermined;
    return verdict;
}

/// Numerical check of the splitting BL_g(B) = BL_g(B_V) * BL_g(B_{H/V})
/// through a critical subspace.
struct FactorizationCheck {
    std::optional<double> whole;
    std::optional<double> restricted;
    std::optional<double> quotient;
    std::optional<double> relative_gap;
};

inline FactorizationCheck verify_factorization(const BLDatum& d, const CriticalReport& report,
                                               const SearchBudget& budget = {},
                                               const Tolerances& tol = {}) {
    if (std::abs(report.defect) > 0.25)
        throw PreconditionError("verify_factorization: subspace is not critical");
    SolveOptions opt;
    opt.tol = tol;
    opt.max_iter = budget.solver_max_iter;
    FactorizationCheck check;
    const auto value_of = [&](const BLDatum& datum) -> std::optional<double> {
        try {
            const SolveOutcome sol = fixed_point_solve(datum, std::nullopt, opt);
            if (sol.status == SolveStatus::Converged) return sol.blg_value;
        } catch (const Error&) {
        }
        return std::nullopt;
    };
    check.whole = value_of(d);
    check.restricted = value_of(restrict_datum(d, report.subspace, tol));
    check.quotient = value_of(quotient_datum(d, report.subspace, tol));
    if (check.whole && check.restricted && check.quotient)
        check.relative_gap =
            std::abs(*check.whole - *check.restricted * *check.quotient) / *check.whole;
    return check;
}

} // namespace bl
