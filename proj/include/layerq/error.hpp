#pragma once

#include <stdexcept>
#include <string>

namespace layerq {

// Precondition violations raise std::invalid_argument. The types below cover
// the remaining failure classes the C API distinguishes.

/// A required measurement setting, element or layer is absent from the input.
class MissingDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two routes that must agree did not (e.g. circuit output vs closed form).
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace layerq
