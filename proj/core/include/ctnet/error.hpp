#pragma once

#include <stdexcept>
#include <string>

namespace ctnet {

// Error categories map onto CLI exit codes: usage 1, io 2, numeric 3, empty-data 4.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape/dimension mismatches; the message names the offending dimension.
struct ShapeError : NumericError {
    using NumericError::NumericError;
};

}  // namespace ctnet
