#pragma once

#include <stdexcept>
#include <string>

namespace dpbound {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed quantity string, unknown unit token, bad file syntax.
struct ParseError : Error {
    using Error::Error;
};

/// Dimensional mismatch in quantity arithmetic, comparison or conversion.
struct DimensionError : Error {
    using Error::Error;
};

/// Value outside the physical domain of an operation (e.g. non-positive length).
struct DomainError : Error {
    using Error::Error;
};

/// Structurally invalid input (too few samples, missing metadata, unknown name).
struct InputError : Error {
    using Error::Error;
};

/// Normal-equations matrix is singular or too ill-conditioned to solve.
struct SingularFitError : Error {
    using Error::Error;
};

/// Attempt to compare or combine length bounds from different heating models.
struct ModelMismatchError : Error {
    using Error::Error;
};

/// A residual upper limit of zero excludes every length; no finite bound exists.
struct UnboundedExclusionError : Error {
    using Error::Error;
};

} // namespace dpbound
