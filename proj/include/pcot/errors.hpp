#pragma once

#include <stdexcept>
#include <string>

namespace pcot {

/// File / stream level failure (missing file, truncated record, ...).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A size limit documented on an operation was exceeded.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An operation produced an empty result where the contract requires a
/// non-empty one (e.g. decimation dropped every occupied cell).
struct EmptyResultError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pcot
