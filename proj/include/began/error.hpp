#pragma once

#include <stdexcept>
#include <string>

namespace began {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape disagreement between operands; message names both shapes.
struct DimensionError : Error {
    using Error::Error;
};

struct ArgumentError : Error {
    using Error::Error;
};

// Non-finite value surfaced during training; message identifies the parameter
// or loss that produced it.
struct DivergenceError : Error {
    using Error::Error;
};

struct DegenerateDataError : Error {
    using Error::Error;
};

struct SearchFailureError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace began
