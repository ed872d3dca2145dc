#pragma once

#include <stdexcept>
#include <string>

namespace bl {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Shapes of matrices or subspaces do not fit together.
class StructuralError : public Error {
public:
    explicit StructuralError(const std::string& what) : Error(what) {}
};

/// A subspace argument is outside the admissible range (zero, full, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// A precondition documented on the operation does not hold.
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(what) {}
};

/// A matrix that must be invertible is numerically singular.
class InvertibilityError : public Error {
public:
    explicit InvertibilityError(const std::string& what) : Error(what) {}
};

/// A requested computation exceeds the configured budget.
class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& what) : Error(what) {}
};

/// Input could not be parsed against the expected schema.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

} // namespace bl
