#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "bl/datum.hpp"
#include "bl/rng.hpp"

namespace bl {

/// One symmetric positive definite matrix per target space.
struct GaussianInput {
    std::vector<Matrix> A;

    int count() const { return static_cast<int>(A.size()); }

    void check_against(const BLDatum& d) const {
        if (count() != d.map_count())
            throw StructuralError("GaussianInput: wrong number of matrices");
        for (int j = 0; j < count(); ++j) {
            if (A[j].rows() != d.target_dim(j) || A[j].cols() != d.target_dim(j))
                throw StructuralError("GaussianInput: matrix " + std::to_string(j) +
                                      " has the wrong shape");
            if (!linalg::is_symmetric(A[j], 1e-12))
                throw StructuralError("GaussianInput: matrix " + std::to_string(j) +
                                      " is not symmetric");
            if (A[j].rows() > 0 && linalg::sym_eigenvalues(A[j])(0) <= 0.0)
                throw StructuralError("GaussianInput: matrix " + std::to_string(j) +
                                      " is not positive definite");
        }
    }
};

inline GaussianInput identity_input(const BLDatum& d) {
    GaussianInput g;
    for (int j = 0; j < d.map_count(); ++j)
        g.A.push_back(Matrix::Identity(d.target_dim(j), d.target_dim(j)));
    return g;
}

/// Random SPD start Q^T D Q with log-uniform spectrum in [0.1, 10].
inline GaussianInput random_input(const BLDatum& d, Rng& rng) {
    GaussianInput g;
    for (int j = 0; j < d.map_count(); ++j) {
        const int k = d.target_dim(j);
        Matrix raw(k, k);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) raw(r, c) = rng.normal();
        const Eigen::HouseholderQR<Matrix> qr(raw);
        const Matrix q = qr.householderQ();
        Vector diag(k);
        for (int i = 0; i < k; ++i) diag(i) = rng.log_uniform(0.1, 10.0);
        g.A.push_back(q * diag.asDiagonal() * q.transpose());
    }
    return g;
}

inline GaussianInput scaled(const GaussianInput& g, double lambda) {
    GaussianInput out = g;
    for (auto& a : out.A) a *= lambda;
    return out;
}

/// M = sum_j p_j B_j^T A_j B_j on the domain.
inline Matrix gram_matrix(const BLDatum& d, const GaussianInput& g) {
    Matrix m = Matrix::Zero(d.dim, d.dim);
    for (int j = 0; j < d.map_count(); ++j)
        m.noalias() += d.exponent(j) * d.map(j).transpose() * g.A[j] * d.map(j);
    return 0.5 * (m + m.transpose());
}

/// Thrown when M = sum p_j B_j^T A_j B_j is numerically singular; carries
/// the span of eigenvectors with eigenvalues below lambda_max / cond_max.
class SingularError : public Error {
public:
    SingularError(const std::string& what, Subspace null_direction)
        : Error(what), null_direction_(std::move(null_direction)) {}
    const Subspace& null_direction() const { return null_direction_; }

private:
    Subspace null_direction_;
};

namespace detail {

inline Subspace low_eigenspace(const Matrix& m, double cut) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    int k = 0;
    while (k < es.eigenvalues().size() && es.eigenvalues()(k) < cut) ++k;
    return Subspace::from_orthonormal(es.eigenvectors().leftCols(k));
}

inline void require_singular_ok(const BLDatum& d, const Matrix& m, double cond_max) {
    if (m.rows() == 0) return;
    const Vector ev = linalg::sym_eigenvalues(m);
    const double lam_max = ev(ev.size() - 1);
    if (!(lam_max > 0.0) || ev(0) <= lam_max / cond_max) {
        (void)d;
        throw SingularError("gram matrix is numerically singular",
                            low_eigenspace(m, lam_max / cond_max));
    }
}

} // namespace detail

/// BL_g(B, p; A) = ( prod det(A_j)^{p_j} / det M )^{1/2}, evaluated in logs.
inline double gaussian_functional(const BLDatum& d, const GaussianInput& g,
                                  const Tolerances& tol = {}) {
    d.check_shapes();
    g.check_against(d);
    const Matrix m = gram_matrix(d, g);
    detail::require_singular_ok(d, m, tol.cond_max);
    double log_num = 0.0;
    for (int j = 0; j < d.map_count(); ++j)
        log_num += d.exponent(j) * linalg::spd_logdet(g.A[j]);
    return std::exp(0.5 * (log_num - linalg::spd_logdet(m)));
}

/// max_j ||A_j^{-1} - B_j M^{-1} B_j^T|| / ||A_j^{-1}|| in operator norm.
/// Zero exactly at the stationary points of the gaussian functional.
inline double stationarity_residual(const BLDatum& d, const GaussianInput& g,
                                    const Tolerances& tol = {}) {
    d.check_shapes();
    g.check_against(d);
    const Matrix m = gram_matrix(d, g);
    detail::require_singular_ok(d, m, tol.cond_max);
    const Matrix minv = linalg::spd_inverse(m);
    double worst = 0.0;
    for (int j = 0; j < d.map_count(); ++j) {
        if (d.target_dim(j) == 0) continue;
        const Matrix ainv = linalg::spd_inverse(g.A[j]);
        const Matrix diff = ainv - d.map(j) * minv * d.map(j).transpose();
        worst = std::max(worst, linalg::sym_opnorm(diff) / linalg::sym_opnorm(ainv));
    }
    return worst;
}

enum class SolveStatus { Converged, Degenerated, BudgetExhausted };

struct IterationRecord {
    int iter = 0;
    double value = 0.0;
    double residual = 0.0;
    double cond = 0.0;
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::BudgetExhausted;
    std::optional<GaussianInput> extremiser;
    std::optional<double> blg_value;
    std::optional<Subspace> degeneration_subspace;
    std::vector<IterationRecord> trace;
    int iterations = 0;
    double final_residual = 0.0;
    double final_cond = 0.0;
};

struct SolveOptions {
    Tolerances tol;
    int max_iter = 10000;
    std::uint64_t seed = 0;
    bool random_start = false;
};

/// Fixed-point iteration A_j <- (B_j M^{-1} B_j^T)^{-1} with a global
/// rescale enforcing det M = 1 after every step. Its fixed points are
/// exactly the stationary gaussian inputs.
///
/// Degeneration is declared when cond(M) exceeds cond_max, or when cond(M)
/// keeps doubling across power-of-two checkpoints while the residual stays
/// above tolerance; the latter catches boundary data whose condition number
/// grows only polynomially. The reported degeneration subspace is the span
/// of eigenvectors of M below the geometric mean of its spectrum, a
/// candidate critical subspace to be adjudicated by the caller.
inline SolveOutcome fixed_point_solve(const BLDatum& d,
                                      std::optional<GaussianInput> start = std::nullopt,
                                      const SolveOptions& opt = {}) {
    d.check_shapes();
    opt.tol.validate();
    for (int j = 0; j < d.map_count(); ++j)
        if (d.exponent(j) <= 0.0)
            throw PreconditionError("fixed_point_solve: exponent p_" + std::to_string(j) +
                                    " is zero; drop zero exponents first");
    {
        const ValidationReport rep = validate_datum(d, opt.tol);
        if (!rep.non_degenerate)
            throw PreconditionError("fixed_point_solve: datum is degenerate");
    }

    GaussianInput a;
    if (start) {
        a = *start;
        a.check_against(d);
    } else if (opt.random_start) {
        Rng rng(opt.seed);
        a = random_input(d, rng);
    } else {
        a = identity_input(d);
    }

    SolveOutcome out;
    const int n = d.dim;
    if (n == 0) {
        out.status = SolveStatus::Converged;
        out.extremiser = a;
        out.blg_value = 1.0;
        return out;
    }
    const int trace_stride = std::max(1, opt.max_iter / 2048);

    double prev_cp_cond = -1.0;      // cond at the last power-of-two checkpoint
    double prev_prev_cp_cond = -1.0;
    int next_checkpoint = 512;

    for (int it = 0; it < opt.max_iter; ++it) {
        const Matrix m = gram_matrix(d, a);
        Eigen::SelfAdjointEigenSolver<Matrix> es(m);
        const Vector ev = es.eigenvalues();
        const double lam_min = ev(0), lam_max = ev(ev.size() - 1);
        const double cond = lam_min > 0.0 ? lam_max / lam_min
                                          : std::numeric_limits<double>::infinity();
        out.iterations = it;
        out.final_cond = cond;

        const double log_gm = ev.array().max(1e-300).log().mean();

        if (!(cond < opt.tol.cond_max)) {
            out.status = SolveStatus::Degenerated;
            out.degeneration_subspace = detail::low_eigenspace(m, std::exp(log_gm));
            out.final_residual = out.trace.empty() ? 0.0 : out.trace.back().residual;
            return out;
        }

        const Matrix minv = es.eigenvectors() *
                            ev.cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();

        double residual = 0.0;
        double log_num = 0.0;
        for (int j = 0; j < d.map_count(); ++j) {
            const Matrix ainv = linalg::spd_inverse(a.A[j]);
            const Matrix diff = ainv - d.map(j) * minv * d.map(j).transpose();
            if (d.target_dim(j) > 0)
                residual = std::max(residual, linalg::sym_opnorm(diff) / linalg::sym_opnorm(ainv));
            log_num += d.exponent(j) * linalg::spd_logdet(a.A[j]);
        }
        const double log_det_m = ev.array().log().sum();
        const double value = std::exp(0.5 * (log_num - log_det_m));
        out.final_residual = residual;

        if (it % trace_stride == 0)
            out.trace.push_back({it, value, residual, cond});

        if (residual <= opt.tol.stat_tol) {
            out.status = SolveStatus::Converged;
            out.extremiser = a;
            out.blg_value = gaussian_functional(d, a, opt.tol);
            if (out.trace.empty() || out.trace.back().iter != it)
                out.trace.push_back({it, value, residual, cond});
            return out;
        }

        // secondary degeneration trigger: persistent growth of cond(M)
        if (it + 1 == next_checkpoint) {
            if (prev_cp_cond > 0.0 && prev_prev_cp_cond > 0.0 &&
                cond > 4e3 &&
                cond >= 1.8 * prev_cp_cond &&
                prev_cp_cond >= 1.8 * prev_prev_cp_cond) {
                out.status = SolveStatus::Degenerated;
                out.degeneration_subspace = detail::low_eigenspace(m, std::exp(log_gm));
                return out;
            }
            prev_prev_cp_cond = prev_cp_cond;
            prev_cp_cond = cond;
            next_checkpoint *= 2;
        }

        // update step; an inversion failure here means M collapsed along
        // some direction faster than the cond threshold caught it
        try {
            GaussianInput fresh;
            for (int j = 0; j < d.map_count(); ++j) {
                const Matrix bmb = d.map(j) * minv * d.map(j).transpose();
                fresh.A.push_back(d.target_dim(j) == 0
                                      ? Matrix(0, 0)
                                      : linalg::spd_inverse(0.5 * (bmb + bmb.transpose())));
            }
            const Matrix m_new = gram_matrix(d, fresh);
            const double log_det = linalg::spd_logdet(m_new);
            const double lambda = std::exp(-log_det / n);
            for (auto& mat : fresh.A) mat *= lambda;
            a = std::move(fresh);
        } catch (const InvertibilityError&) {
            out.status = SolveStatus::Degenerated;
            out.degeneration_subspace = detail::low_eigenspace(m, std::exp(log_gm));
            return out;
        }
    }

    out.status = SolveStatus::BudgetExhausted;
    return out;
}

/// True iff every B_j B_j^T is the identity on its target and
/// sum_j p_j B_j^T B_j is the identity on the domain.
inline bool is_geometric(const BLDatum& d, double tol = 1e-9) {
    d.check_shapes();
    Matrix s = Matrix::Zero(d.dim, d.dim);
    for (int j = 0; j < d.map_count(); ++j) {
        const int nj = d.target_dim(j);
        if (nj > 0) {
            const Matrix bbt = d.map(j) * d.map(j).transpose();
            if (linalg::sym_opnorm(bbt - Matrix::Identity(nj, nj)) > tol) return false;
        }
        s.noalias() += d.exponent(j) * d.map(j).transpose() * d.map(j);
    }
    if (d.dim == 0) return true;
    return linalg::sym_opnorm(s - Matrix::Identity(d.dim, d.dim)) <= tol;
}

/// Thrown by normalize_to_geometric when the input is not stationary.
class NotExtremalError : public Error {
public:
    explicit NotExtremalError(const std::string& what) : Error(what) {}
};

/// Given a stationary gaussian input, produces the equivalent geometric
/// datum B'_j = A_j^{1/2} B_j M^{-1/2} and the intertwining transform
/// C = M^{-1/2}, C_j = A_j^{-1/2}.
inline std::pair<BLDatum, EquivalenceTransform>
normalize_to_geometric(const BLDatum& d, const GaussianInput& g, const Tolerances& tol = {}) {
    const double res = stationarity_residual(d, g, tol);
    if (res > tol.stat_tol)
        throw NotExtremalError("normalize_to_geometric: stationarity residual " +
                               std::to_string(res) + " exceeds tolerance");
    const Matrix m = gram_matrix(d, g);
    EquivalenceTransform t;
    t.C = linalg::spd_power(m, -0.5);
    for (int j = 0; j < d.map_count(); ++j)
        t.C_list.push_back(linalg::spd_power(g.A[j], -0.5));
    return {apply_equivalence(d, t, tol).first, t};
}

// ---------------------------------------------------------------------------
// Localised constant
// ---------------------------------------------------------------------------

/// Fixed positive definite gaussian weight on the domain.
struct Localizer {
    Matrix G;
};

enum class LocalizedStatus { Finite, Infinite, BudgetExhausted };

struct LocalizedOutcome {
    LocalizedStatus status = LocalizedStatus::BudgetExhausted;
    std::optional<double> constant;
    /// true when the supremum is attained at a stationary point; false when
    /// the value was read off a stalled monotone approach to the supremum
    bool attained = false;
    int iterations = 0;
};

/// Best constant K in the gaussian-weighted inequality, computed by the
/// stationarity iteration A_j <- (B_j (G+M)^{-1} B_j^T)^{-1}. The objective
/// K(A) = ( prod det A_j^{p_j} / det(G+M) )^{1/2} is tracked directly:
/// convergence of the residual or a stall of the monotone objective yields
/// Finite, unbounded growth yields Infinite.
inline LocalizedOutcome localized_constant(const BLDatum& d, const Localizer& loc,
                                           const Tolerances& tol = {}, int max_iter = 50000) {
    d.check_shapes();
    tol.validate();
    if (loc.G.rows() != d.dim || loc.G.cols() != d.dim)
        throw StructuralError("localized_constant: G has the wrong shape");
    if (d.dim > 0 &&
        (!linalg::is_symmetric(loc.G, 1e-12) || linalg::sym_eigenvalues(loc.G)(0) <= 0.0))
        throw PreconditionError("localized_constant: G must be symmetric positive definite");
    for (int j = 0; j < d.map_count(); ++j)
        if (d.exponent(j) <= 0.0)
            throw PreconditionError("localized_constant: exponents must be positive");

    LocalizedOutcome out;
    if (d.map_count() == 0) {
        out.status = LocalizedStatus::Finite;
        out.constant = std::exp(-0.5 * linalg::spd_logdet(loc.G));
        out.attained = true;
        return out;
    }

    GaussianInput a = identity_input(d);
    std::vector<double> log_objective;
    log_objective.reserve(256);
    const int window = 20;
    const double stall_tol = 1e-8;
    const double blow_up = 115.0; // log scale, ~1e50

    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        const Matrix gm = loc.G + gram_matrix(d, a);
        const Matrix gminv = linalg::spd_inverse(gm);

        double residual = 0.0;
        double log_num = 0.0;
        for (int j = 0; j < d.map_count(); ++j) {
            const Matrix ainv = linalg::spd_inverse(a.A[j]);
            const Matrix diff = ainv - d.map(j) * gminv * d.map(j).transpose();
            if (d.target_dim(j) > 0)
                residual = std::max(residual, linalg::sym_opnorm(diff) / linalg::sym_opnorm(ainv));
            log_num += d.exponent(j) * linalg::spd_logdet(a.A[j]);
        }
        const double log_k = 0.5 * (log_num - linalg::spd_logdet(gm));
        log_objective.push_back(log_k);

        if (residual <= tol.stat_tol) {
            out.status = LocalizedStatus::Finite;
            out.constant = std::exp(log_k);
            out.attained = true;
            return out;
        }
        if (log_k > blow_up) {
            out.status = LocalizedStatus::Infinite;
            return out;
        }
        if (static_cast<int>(log_objective.size()) > window) {
            const double old_val = log_objective[log_objective.size() - 1 - window];
            if (std::abs(log_k - old_val) <= stall_tol * std::max(1.0, std::abs(log_k))) {
                out.status = LocalizedStatus::Finite;
                out.constant = std::exp(log_k);
                out.attained = false;
                return out;
            }
        }

        GaussianInput fresh;
        for (int j = 0; j < d.map_count(); ++j) {
            const Matrix bmb = d.map(j) * gminv * d.map(j).transpose();
            fresh.A.push_back(d.target_dim(j) == 0
                                  ? Matrix(0, 0)
                                  : linalg::spd_inverse(0.5 * (bmb + bmb.transpose())));
        }
        a = std::move(fresh);
    }
    out.status = LocalizedStatus::BudgetExhausted;
    if (!log_objective.empty()) out.constant = std::exp(log_objective.back());
    return out;
}

} // namespace bl
