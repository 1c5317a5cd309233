#pragma once

#include <stdexcept>
#include <string>

namespace nanofiber {

/// Base class for numerical failures raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No guided-mode root found inside the guidance band (n2 k0, n1 k0).
struct NoGuidedMode : Error {
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureFailure : Error {
    using Error::Error;
};

/// Green's function requested at z == z' where the propagator is ill-defined.
struct DegenerateGeometry : Error {
    using Error::Error;
};

/// A detuning fell inside the dispersive-regime guard band.
struct ResonanceError : Error {
    using Error::Error;
};

/// A bracketed root search found no sign change in its window.
struct RootNotFound : Error {
    using Error::Error;
};

/// Moment integration failed even after the step-halving retries.
struct StepTooLarge : Error {
    using Error::Error;
};

}  // namespace nanofiber
