#pragma once

#include <stdexcept>
#include <string>

namespace parrondo {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Arithmetic violation (division by zero, sqrt of a negative, invalid parse).
struct NumericError : Error {
    using Error::Error;
};

/// Eigenvalue formulas degenerate (rho outside (0,1)).
struct DegenerateSpectrumError : Error {
    using Error::Error;
};

/// A state was required to lie in the B-side of the simplex (x0 < pi0) but does not.
struct NotInDeltaBError : Error {
    using Error::Error;
};

/// Index parity or range violation in a cycle-function evaluation.
struct BadIndexError : Error {
    using Error::Error;
};

/// The smallest even n with E_n >= 0 exceeds the search cap.
struct SNotFoundError : Error {
    explicit SNotFoundError(int searched_up_to)
        : Error("no even n <= " + std::to_string(searched_up_to) +
                " with E_n >= 0; raise n_max (phi is close to 2/3)"),
          n_max(searched_up_to) {}
    int n_max;
};

/// A decisive sign test stayed ambiguous at the precision cap.
struct BoundaryAmbiguousError : Error {
    explicit BoundaryAmbiguousError(std::string which_curve)
        : Error("sign of " + which_curve + " undecidable at the precision cap"),
          curve(std::move(which_curve)) {}
    std::string curve;
};

/// Bisection endpoints have the same certified sign.
struct NoSignChangeError : Error {
    explicit NoSignChangeError(std::string which_curve)
        : Error("no sign change for " + which_curve + " on the search interval"),
          curve(std::move(which_curve)) {}
    std::string curve;
};

/// A region predicate near an internal curve could not be decided.
struct PredicateAmbiguousError : Error {
    using Error::Error;
};

/// The point lies outside the twelve-region partition (G_{4,2} < 0 or phi <= 2/3).
struct NotInPartitionError : Error {
    using Error::Error;
};

/// Vertex-absorption checks requested outside the regions they apply to.
struct WrongRegionError : Error {
    using Error::Error;
};

/// Cycle-existence sign conditions fail for the requested pattern.
struct NotACycleError : Error {
    using Error::Error;
};

/// Budget exhausted without detecting an equilibrium or a cycle.
struct UndetectedError : Error {
    using Error::Error;
};

/// Simulated behavior diverged from the analytic prediction.
struct MismatchError : Error {
    MismatchError(const std::string& what, long at_step)
        : Error(what + " (divergence at step " + std::to_string(at_step) + ")"),
          step(at_step) {}
    long step;
};

} // namespace parrondo
