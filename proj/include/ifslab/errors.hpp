#pragma once

#include <stdexcept>
#include <string>

namespace ifslab {

// Base class for all library errors. Subtypes map onto the CLI's exit codes:
// config errors exit 2, numeric/internal errors exit 5.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct NonFiniteError : Error {
    using Error::Error;
};

struct DegenerateFieldError : Error {
    using Error::Error;
};

struct IndexOutOfRangeError : Error {
    using Error::Error;
};

struct DegenerateBoxError : Error {
    using Error::Error;
};

struct BudgetExceededError : Error {
    using Error::Error;
};

struct FitDegenerateError : Error {
    using Error::Error;
};

struct MissingMeanRefError : Error {
    using Error::Error;
};

struct DegenerateVarianceError : Error {
    using Error::Error;
};

struct ClipTooLargeError : Error {
    using Error::Error;
};

struct BudgetInfeasibleError : Error {
    using Error::Error;
};

struct MissingArtifactsError : Error {
    using Error::Error;
};

}  // namespace ifslab
