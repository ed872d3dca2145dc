#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bl/subspace.hpp"
#include "bl/tolerances.hpp"

namespace bl {

/// One surjection B_j : R^n -> R^{n_j} with its exponent p_j.
struct LinearMap {
    Matrix matrix;     // n_j rows, n columns
    double exponent = 0.0;
    std::string label;
};

/// A Brascamp-Lieb datum: a common domain dimension and a list of maps
/// with nonnegative exponents. Immutable by convention; every operation
/// returns a new value.
struct BLDatum {
    int dim = 0;
    std::vector<LinearMap> maps;

    int map_count() const { return static_cast<int>(maps.size()); }
    int target_dim(int j) const { return static_cast<int>(maps[j].matrix.rows()); }

    const Matrix& map(int j) const { return maps[j].matrix; }
    double exponent(int j) const { return maps[j].exponent; }

    /// sum_j p_j n_j, the right-hand side of the scaling condition.
    double weighted_target_dim() const {
        double s = 0.0;
        for (const auto& m : maps) s += m.exponent * static_cast<double>(m.matrix.rows());
        return s;
    }

    void check_shapes() const {
        if (dim < 0) throw StructuralError("domain dimension is negative");
        for (std::size_t j = 0; j < maps.size(); ++j) {
            if (maps[j].matrix.cols() != dim)
                throw StructuralError("map " + std::to_string(j) +
                                      " has " + std::to_string(maps[j].matrix.cols()) +
                                      " columns, expected " + std::to_string(dim));
            if (!(maps[j].exponent >= 0.0) || !std::isfinite(maps[j].exponent))
                throw StructuralError("map " + std::to_string(j) +
                                      " has a negative or non-finite exponent");
        }
    }
};

inline BLDatum make_datum(int dim, std::vector<Matrix> mats, std::vector<double> exps) {
    BLDatum d;
    d.dim = dim;
    for (std::size_t j = 0; j < mats.size(); ++j)
        d.maps.push_back({std::move(mats[j]), exps[j], {}});
    d.check_shapes();
    return d;
}

/// Per-map surjectivity and common-kernel report; never mutates the datum.
struct ValidationReport {
    std::vector<int> target_ranks;
    std::vector<bool> surjective;
    int common_kernel_dim = 0;
    bool non_degenerate = false;
    bool has_zero_exponents = false;
    double rank_tol = 0.0;

    bool all_surjective() const {
        for (bool s : surjective)
            if (!s) return false;
        return true;
    }
};

inline ValidationReport validate_datum(const BLDatum& d, const Tolerances& tol = {}) {
    d.check_shapes();
    ValidationReport rep;
    rep.rank_tol = tol.rank_tol;
    Matrix stacked(0, d.dim);
    for (int j = 0; j < d.map_count(); ++j) {
        const int r = linalg::rank(d.map(j), tol.rank_tol);
        rep.target_ranks.push_back(r);
        rep.surjective.push_back(r == d.target_dim(j));
        if (d.exponent(j) == 0.0) rep.has_zero_exponents = true;
        Matrix next(stacked.rows() + d.target_dim(j), d.dim);
        next.topRows(stacked.rows()) = stacked;
        next.bottomRows(d.target_dim(j)) = d.map(j);
        stacked = std::move(next);
    }
    rep.common_kernel_dim = d.dim - linalg::rank(stacked, tol.rank_tol);
    rep.non_degenerate = rep.all_surjective() && rep.common_kernel_dim == 0;
    return rep;
}

/// Drops maps with p_j = 0. Constants are unchanged by this pass; it is
/// explicit rather than automatic so stored data keeps its shape.
inline BLDatum drop_zero_exponents(const BLDatum& d) {
    BLDatum out;
    out.dim = d.dim;
    for (const auto& m : d.maps)
        if (m.exponent != 0.0) out.maps.push_back(m);
    return out;
}

/// Restriction B_V: maps V -> B_j V expressed in orthonormal bases of V
/// and of each image B_j V. Exponents are unchanged.
inline BLDatum restrict_datum(const BLDatum& d, const Subspace& v, const Tolerances& tol = {}) {
    d.check_shapes();
    if (v.ambient_dim() != d.dim)
        throw StructuralError("restrict_datum: subspace lives in the wrong ambient space");
    if (v.is_zero())
        throw DomainError("restrict_datum: cannot restrict to the zero subspace");
    BLDatum out;
    out.dim = v.dim();
    for (const auto& m : d.maps) {
        const Subspace img = image(m.matrix, v, tol.rank_tol);
        LinearMap r;
        r.matrix = img.basis().transpose() * m.matrix * v.basis();
        r.exponent = m.exponent;
        r.label = m.label;
        out.maps.push_back(std::move(r));
    }
    return out;
}

/// Quotient B_{H/V}, realised concretely on V^perp with targets (B_j V)^perp
/// inside each H_j, following the commuting-diagram definition.
inline BLDatum quotient_datum(const BLDatum& d, const Subspace& v, const Tolerances& tol = {}) {
    d.check_shapes();
    if (v.ambient_dim() != d.dim)
        throw StructuralError("quotient_datum: subspace lives in the wrong ambient space");
    if (v.is_full())
        throw DomainError("quotient_datum: quotient by the full domain is empty");
    const Subspace w = orthocomplement(v);
    BLDatum out;
    out.dim = w.dim();
    for (const auto& m : d.maps) {
        const Subspace img = image(m.matrix, v, tol.rank_tol);
        const Subspace target = orthocomplement(img);
        LinearMap q;
        q.matrix = target.basis().transpose() * m.matrix * w.basis();
        q.exponent = m.exponent;
        q.label = m.label;
        out.maps.push_back(std::move(q));
    }
    return out;
}

/// Block-diagonal direct sum of two data with equal map counts and exponents.
inline BLDatum direct_sum(const BLDatum& a, const BLDatum& b) {
    a.check_shapes();
    b.check_shapes();
    if (a.map_count() != b.map_count())
        throw StructuralError("direct_sum: map counts differ");
    for (int j = 0; j < a.map_count(); ++j)
        if (std::abs(a.exponent(j) - b.exponent(j)) > 1e-12)
            throw StructuralError("direct_sum: exponent vectors differ");
    BLDatum out;
    out.dim = a.dim + b.dim;
    for (int j = 0; j < a.map_count(); ++j) {
        const int ra = a.target_dim(j), rb = b.target_dim(j);
        LinearMap m;
        m.matrix = Matrix::Zero(ra + rb, out.dim);
        m.matrix.topLeftCorner(ra, a.dim) = a.map(j);
        m.matrix.bottomRightCorner(rb, b.dim) = b.map(j);
        m.exponent = a.exponent(j);
        m.label = a.maps[j].label;
        out.maps.push_back(std::move(m));
    }
    return out;
}

/// Intertwining transformations C: H' -> H and C_j: H'_j -> H_j.
struct EquivalenceTransform {
    Matrix C;
    std::vector<Matrix> C_list;

    static EquivalenceTransform identity(const BLDatum& d) {
        EquivalenceTransform t;
        t.C = Matrix::Identity(d.dim, d.dim);
        for (int j = 0; j < d.map_count(); ++j)
            t.C_list.push_back(Matrix::Identity(d.target_dim(j), d.target_dim(j)));
        return t;
    }
};

/// Applying first `inner` and then `outer` equals applying the composite.
inline EquivalenceTransform compose(const EquivalenceTransform& inner,
                                    const EquivalenceTransform& outer) {
    EquivalenceTransform t;
    t.C = inner.C * outer.C;
    for (std::size_t j = 0; j < inner.C_list.size(); ++j)
        t.C_list.push_back(inner.C_list[j] * outer.C_list[j]);
    return t;
}

/// Returns the transformed datum B'_j = C_j^{-1} B_j C together with the
/// factor prod |det C_j|^{p_j} / |det C| relating every Brascamp-Lieb
/// constant of the new datum to the old one.
inline std::pair<BLDatum, double> apply_equivalence(const BLDatum& d,
                                                    const EquivalenceTransform& t,
                                                    const Tolerances& tol = {}) {
    d.check_shapes();
    if (t.C.rows() != d.dim || t.C.cols() != d.dim ||
        static_cast<int>(t.C_list.size()) != d.map_count())
        throw StructuralError("apply_equivalence: transform shapes do not match datum");
    if (!linalg::is_invertible(t.C, tol.rank_tol))
        throw InvertibilityError("apply_equivalence: C is numerically singular");
    double log_scale = -linalg::abs_logdet(t.C, tol.rank_tol);
    BLDatum out;
    out.dim = d.dim;
    for (int j = 0; j < d.map_count(); ++j) {
        const Matrix& cj = t.C_list[j];
        if (cj.rows() != d.target_dim(j) || cj.cols() != d.target_dim(j))
            throw StructuralError("apply_equivalence: C_j has the wrong shape");
        if (!linalg::is_invertible(cj, tol.rank_tol))
            throw InvertibilityError("apply_equivalence: C_j is numerically singular");
        log_scale += d.exponent(j) * linalg::abs_logdet(cj, tol.rank_tol);
        LinearMap m;
        m.matrix = cj.rows() == 0 ? Matrix(0, d.dim)
                                  : cj.partialPivLu().solve(d.map(j) * t.C).eval();
        m.exponent = d.exponent(j);
        m.label = d.maps[j].label;
        out.maps.push_back(std::move(m));
    }
    return {out, std::exp(log_scale)};
}

/// All targets one-dimensional.
inline bool is_rank_one(const BLDatum& d) {
    for (const auto& m : d.maps)
        if (m.matrix.rows() != 1) return false;
    return true;
}

} // namespace bl
