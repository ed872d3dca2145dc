#pragma once

// Shared example data: the classical squares every suite exercises.

#include "bl/datum.hpp"
#include "bl/rng.hpp"

namespace blt {

using bl::BLDatum;
using bl::Matrix;
using bl::Vector;

/// m identity maps on R^n.
inline BLDatum holder(int n, std::vector<double> p) {
    std::vector<Matrix> mats(p.size(), Matrix::Identity(n, n));
    return bl::make_datum(n, std::move(mats), std::move(p));
}

/// Coordinate-plane projections of R^3 (kill e_j).
inline BLDatum loomis_whitney3(double p = 0.5) {
    Matrix p1(2, 3), p2(2, 3), p3(2, 3);
    p1 << 0, 1, 0, 0, 0, 1;
    p2 << 1, 0, 0, 0, 0, 1;
    p3 << 1, 0, 0, 0, 1, 0;
    return bl::make_datum(3, {p1, p2, p3}, {p, p, p});
}

/// Sharp Young datum in d = 1: x, y, x - y.
inline BLDatum young1(std::vector<double> p = {2.0 / 3, 2.0 / 3, 2.0 / 3}) {
    Matrix b1(1, 2), b2(1, 2), b3(1, 2);
    b1 << 1, 0;
    b2 << 0, 1;
    b3 << 1, -1;
    return bl::make_datum(2, {b1, b2, b3}, std::move(p));
}

/// Closed-form sharp Young constant prod ((1-p)^{1-p} / p^p)^{d/2}.
inline double young_closed_form(const std::vector<double>& p, int d = 1) {
    double prod = 1.0;
    for (double pj : p) {
        const double one_minus = 1.0 - pj;
        const double num = one_minus == 0.0 ? 1.0 : std::pow(one_minus, one_minus);
        prod *= num / std::pow(pj, pj);
    }
    return std::pow(prod, 0.5 * d);
}

/// Three unit vectors at angles 0, 120, 240 degrees; rank-one maps, p = 2/3.
inline BLDatum frame120() {
    std::vector<Matrix> mats;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * M_PI * k / 3.0;
        Matrix b(1, 2);
        b << std::cos(a), std::sin(a);
        mats.push_back(b);
    }
    return bl::make_datum(2, std::move(mats), {2.0 / 3, 2.0 / 3, 2.0 / 3});
}

/// Generic rank-one frame: m random unit vectors in R^n with p_j = n/m.
/// Simple for m > n (the uniform exponent sits strictly inside the polytope).
inline BLDatum random_frame(int n, int m, bl::Rng& rng) {
    std::vector<Matrix> mats;
    for (int j = 0; j < m; ++j) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = rng.normal();
        v.normalize();
        Matrix b(1, n);
        b = v.transpose();
        mats.push_back(b);
    }
    return bl::make_datum(n, std::move(mats), std::vector<double>(m, double(n) / m));
}

inline Matrix random_invertible(int n, bl::Rng& rng) {
    while (true) {
        Matrix c(n, n);
        for (int r = 0; r < n; ++r)
            for (int col = 0; col < n; ++col) c(r, col) = rng.normal();
        Eigen::JacobiSVD<Matrix> svd(c);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) > 0.05 * sv(0)) return c;
    }
}

} // namespace blt
