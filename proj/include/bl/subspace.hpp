#pragma once

#include <utility>

#include "bl/linalg.hpp"

namespace bl {

/// A subspace of R^n carried by an orthonormal column basis.
class Subspace {
public:
    Subspace() = default;

    /// Wraps an already orthonormal basis; checked to 1e-10.
    static Subspace from_orthonormal(Matrix basis) {
        const int k = static_cast<int>(basis.cols());
        if (k > 0) {
            const Matrix gram = basis.transpose() * basis;
            if ((gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
                throw StructuralError("Subspace basis is not orthonormal");
        }
        Subspace s;
        s.ambient_ = static_cast<int>(basis.rows());
        s.basis_ = std::move(basis);
        return s;
    }

    /// Orthonormalises the span of arbitrary columns at rank tolerance tol.
    static Subspace from_span(const Matrix& columns, double tol) {
        Subspace s;
        s.ambient_ = static_cast<int>(columns.rows());
        s.basis_ = linalg::column_space(columns, tol);
        return s;
    }

    static Subspace zero(int ambient) {
        Subspace s;
        s.ambient_ = ambient;
        s.basis_ = Matrix(ambient, 0);
        return s;
    }

    static Subspace full(int ambient) {
        Subspace s;
        s.ambient_ = ambient;
        s.basis_ = Matrix::Identity(ambient, ambient);
        return s;
    }

    static Subspace span_of(const Vector& v, double tol) {
        Matrix m(v.size(), 1);
        m.col(0) = v;
        return from_span(m, tol);
    }

    int dim() const { return static_cast<int>(basis_.cols()); }
    int ambient_dim() const { return ambient_; }
    const Matrix& basis() const { return basis_; }

    bool is_zero() const { return dim() == 0; }
    bool is_full() const { return dim() == ambient_; }

    Matrix projector() const { return basis_ * basis_.transpose(); }

private:
    Matrix basis_{0, 0};
    int ambient_ = 0;
};

inline double projector_distance(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim())
        throw StructuralError("projector_distance: ambient dimensions differ");
    return (a.projector() - b.projector()).norm();
}

/// Two subspaces are equal when their projectors are close in Frobenius norm.
inline bool approx_equal(const Subspace& a, const Subspace& b, double projector_tol = 1e-8) {
    return a.ambient_dim() == b.ambient_dim() && a.dim() == b.dim() &&
           projector_distance(a, b) < projector_tol;
}

/// Image of a subspace under a linear map, orthonormalised in the target.
inline Subspace image(const Matrix& map, const Subspace& v, double tol) {
    if (map.cols() != v.ambient_dim())
        throw StructuralError("image: map and subspace dimensions differ");
    return Subspace::from_span(map * v.basis(), tol);
}

inline Subspace sum(const Subspace& a, const Subspace& b, double tol) {
    if (a.ambient_dim() != b.ambient_dim())
        throw StructuralError("sum: ambient dimensions differ");
    Matrix joined(a.ambient_dim(), a.dim() + b.dim());
    joined.leftCols(a.dim()) = a.basis();
    joined.rightCols(b.dim()) = b.basis();
    return Subspace::from_span(joined, tol);
}

inline Subspace orthocomplement(const Subspace& v) {
    // kernel of basis^T; exact because the basis is orthonormal
    return Subspace::from_orthonormal(linalg::null_space(v.basis().transpose(), 0.5));
}

inline Subspace intersection(const Subspace& a, const Subspace& b, double tol) {
    // (A^perp + B^perp)^perp
    return orthocomplement(sum(orthocomplement(a), orthocomplement(b), tol));
}

} // namespace bl
