#pragma once

#include "bl/errors.hpp"

namespace bl {

/// Numerical policy shared by every analysis.
///
/// rank_tol is the relative singular-value cutoff used whenever a dimension
/// statement is decided over floating point; the remaining fields bound the
/// stationarity residual, the condition number at which an iteration is
/// declared divergent, and the projector distance under which two subspaces
/// are considered equal.
struct Tolerances {
    double rank_tol = 1e-9;
    double stat_tol = 1e-10;
    double cond_max = 1e12;
    double projector_tol = 1e-8;

    void validate() const {
        if (!(rank_tol > 0) || !(stat_tol > 0) || !(cond_max > 0) || !(projector_tol > 0))
            throw PreconditionError("Tolerances must all be strictly positive");
    }
};

} // namespace bl
