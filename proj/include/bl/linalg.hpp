#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "bl/errors.hpp"

namespace bl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Numerical rank: number of singular values above tol * sigma_max.
inline int rank(const Matrix& m, double tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cut = tol * sv(0);
    int r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return r;
}

/// Rank against an external reference scale instead of the matrix's own
/// largest singular value; dimension statements about images B V read the
/// scale off B itself, so a numerically tiny image counts as zero.
inline int rank_scaled(const Matrix& m, double tol, double scale) {
    if (m.rows() == 0 || m.cols() == 0 || !(scale > 0.0)) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    const double cut = tol * scale;
    int r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return r;
}

inline double opnorm(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

/// Column-space basis thresholded at tol * scale.
inline Matrix column_space_scaled(const Matrix& m, double tol, double scale) {
    if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cut = tol * scale;
    int r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of the column space, rank decided at tol.
inline Matrix column_space(const Matrix& m, double tol) {
    if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return Matrix(m.rows(), 0);
    const double cut = tol * sv(0);
    int r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of the kernel of m, rank decided at tol.
inline Matrix null_space(const Matrix& m, double tol) {
    const int n = static_cast<int>(m.cols());
    if (n == 0) return Matrix(0, 0);
    if (m.rows() == 0) return Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = (sv.size() > 0 && sv(0) > 0.0) ? tol * sv(0) : 0.0;
    int r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return svd.matrixV().rightCols(n - r);
}

inline bool is_symmetric(const Matrix& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    if (m.rows() == 0) return true;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Eigenvalues of a symmetric matrix, ascending.
inline Vector sym_eigenvalues(const Matrix& m) {
    if (m.rows() == 0) return Vector(0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Spectral norm of a symmetric matrix.
inline double sym_opnorm(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    const Vector ev = sym_eigenvalues(m);
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// log(det) for symmetric positive definite input; throws when not pd.
inline double spd_logdet(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw InvertibilityError("matrix is not positive definite");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

/// Symmetric power m^p of a symmetric positive definite matrix.
inline Matrix spd_power(const Matrix& m, double p) {
    if (m.rows() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw InvertibilityError("matrix is not positive definite");
    return es.eigenvectors() *
           es.eigenvalues().array().pow(p).matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

inline Matrix spd_inverse(const Matrix& m) {
    if (m.rows() == 0) return m;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw InvertibilityError("matrix is not positive definite");
    return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

/// lambda_max / lambda_min of a symmetric positive semi-definite matrix;
/// infinity when the smallest eigenvalue is not positive.
inline double spd_cond(const Matrix& m) {
    if (m.rows() == 0) return 1.0;
    const Vector ev = sym_eigenvalues(m);
    if (ev(0) <= 0.0) return std::numeric_limits<double>::infinity();
    return ev(ev.size() - 1) / ev(0);
}

/// log|det| of a square matrix; -inf signalled as InvertibilityError
/// when the smallest singular value is below tol * largest.
inline double abs_logdet(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) throw StructuralError("abs_logdet: matrix not square");
    if (m.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= tol * sv(0))
        throw InvertibilityError("matrix is numerically singular");
    return sv.array().log().sum();
}

inline bool is_invertible(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    if (m.rows() == 0) return true;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) > tol * sv(0);
}

} // namespace linalg
} // namespace bl
