#pragma once

#include <stdexcept>

namespace uplink {

// Base type for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument or precondition violation on a numeric interface.
struct DomainError : Error {
    using Error::Error;
};

// A point could not be placed within the attempt cap; the exclusion zones
// cannot be satisfied at the requested density.
struct PlacementInfeasible : Error {
    using Error::Error;
};

// A probability left [0,1] by more than rounding noise.
struct NumericalInstability : Error {
    using Error::Error;
};

// The requested reference mobile was denied admission.
struct NotAdmitted : Error {
    using Error::Error;
};

// A grid-driven policy was given an empty rate grid.
struct EmptyGrid : Error {
    using Error::Error;
};

// Malformed configuration file, key, or override.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace uplink
