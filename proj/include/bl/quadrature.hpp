#pragma once

#include <cmath>
#include <vector>

#include "bl/gaussian.hpp"

namespace bl {

namespace detail {

/// Tensor-product trapezoid integration of exp(-pi q(x)) over a box centred
/// at `centre` with half-width chosen from the slowest decay direction of
/// the quadratic part. `quadratic` is SPD on the domain; `shift` collects
/// the affine part: integrand = exp(-pi (x^T Q x - 2 b^T x + c)).
inline double gaussian_box_integral(const Matrix& quadratic, const Vector& linear,
                                    double constant, int points_per_axis) {
    const int n = static_cast<int>(quadratic.rows());
    if (n == 0) return std::exp(-M_PI * constant);
    const Vector ev = linalg::sym_eigenvalues(quadratic);
    if (ev(0) <= 0.0)
        throw PreconditionError("quadrature: quadratic form is not positive definite");
    // centre of mass of the gaussian
    const Vector centre = quadratic.ldlt().solve(linear);
    // tail mass of every 1d marginal below 1e-12 of the peak
    const double half_width = std::sqrt(40.0 / (M_PI * ev(0)));
    const int npts = points_per_axis;
    const double h = 2.0 * half_width / (npts - 1);

    std::vector<int> idx(n, 0);
    Vector x(n);
    double acc = 0.0;
    const long total = static_cast<long>(std::pow(static_cast<double>(npts), n));
    for (long flat = 0; flat < total; ++flat) {
        long rest = flat;
        double w = 1.0;
        for (int axis = 0; axis < n; ++axis) {
            const int i = static_cast<int>(rest % npts);
            rest /= npts;
            x(axis) = centre(axis) - half_width + h * i;
            if (i == 0 || i == npts - 1) w *= 0.5;
        }
        const double q = x.dot(quadratic * x) - 2.0 * linear.dot(x) + constant;
        acc += w * std::exp(-M_PI * q);
    }
    return acc * std::pow(h, n);
}

} // namespace detail

/// Direct numerical integration of the gaussian Brascamp-Lieb ratio
/// int prod exp(-pi <A_j B_j x, B_j x>)^{p_j} dx / prod (int gaussian_j)^{p_j}
/// on a truncated box. Independent of the determinant route; domains of
/// dimension at most 3 only.
inline double quadrature_oracle(const BLDatum& d, const GaussianInput& g,
                                int points_per_axis = 257, const Tolerances& tol = {}) {
    d.check_shapes();
    g.check_against(d);
    if (d.dim > 3)
        throw PreconditionError("quadrature_oracle: only domains of dimension <= 3 are supported");
    const Matrix m = gram_matrix(d, g);
    detail::require_singular_ok(d, m, tol.cond_max);
    const double integral =
        detail::gaussian_box_integral(m, Vector::Zero(d.dim), 0.0, points_per_axis);
    double log_denom = 0.0; // prod (det A_j)^{-p_j/2}
    for (int j = 0; j < d.map_count(); ++j)
        log_denom += -0.5 * d.exponent(j) * linalg::spd_logdet(g.A[j]);
    return integral / std::exp(log_denom);
}

/// Same ratio with each gaussian translated to B_j x - xi_j; used to probe
/// that translations never beat the centred configuration.
inline double quadrature_oracle_shifted(const BLDatum& d, const GaussianInput& g,
                                        const std::vector<Vector>& xi,
                                        int points_per_axis = 257, const Tolerances& tol = {}) {
    d.check_shapes();
    g.check_against(d);
    if (d.dim > 2)
        throw PreconditionError("quadrature_oracle_shifted: dimension <= 2 only");
    if (static_cast<int>(xi.size()) != d.map_count())
        throw StructuralError("quadrature_oracle_shifted: one shift per map required");
    const Matrix m = gram_matrix(d, g);
    detail::require_singular_ok(d, m, tol.cond_max);
    Vector linear = Vector::Zero(d.dim);
    double constant = 0.0;
    for (int j = 0; j < d.map_count(); ++j) {
        // p_j <A_j (B_j x - xi_j), B_j x - xi_j>
        linear += d.exponent(j) * d.map(j).transpose() * g.A[j] * xi[j];
        constant += d.exponent(j) * xi[j].dot(g.A[j] * xi[j]);
    }
    const double integral =
        detail::gaussian_box_integral(m, linear, constant, points_per_axis);
    double log_denom = 0.0;
    for (int j = 0; j < d.map_count(); ++j)
        log_denom += -0.5 * d.exponent(j) * linalg::spd_logdet(g.A[j]);
    return integral / std::exp(log_denom);
}

} // namespace bl
