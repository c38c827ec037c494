#pragma once

#include <stdexcept>
#include <string>

namespace kmis {

// Truncation interval carries (numerically) zero probability mass.
struct DegenerateTruncationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// All Hessian eigenvalues classified zero; Theorem-exact metric undefined.
// Callers fall back to the regularized (identity) path.
struct DegenerateHessianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// C_b estimated as zero: the closed-form optimal bandwidth diverges.
struct DegenerateBiasError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Self-normalized estimator denominator vanished (all kernel weights underflow).
struct EmptyOverlapError : std::runtime_error {
    double weight_sum;
    explicit EmptyOverlapError(const std::string& what, double sum)
        : std::runtime_error(what), weight_sum(sum) {}
};

// Training loss became non-finite.
struct TrainingDivergedError : std::runtime_error {
    int epoch;
    explicit TrainingDivergedError(const std::string& what, int at_epoch)
        : std::runtime_error(what), epoch(at_epoch) {}
};

// Every grid point of a bandwidth selection failed.
struct SelectionFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A factorization postcondition was violated (should not happen for valid inputs).
struct InternalConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace kmis
