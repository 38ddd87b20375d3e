#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isbp {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Degenerate or unobservable geometry: coincident points, rank-deficient
/// positioning systems, insufficient angle diversity for velocity.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed sample file. `offset()` is the byte position where decoding failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class InputError : public std::invalid_argument {
public:
    InputError(const std::string& what, std::size_t index)
        : std::invalid_argument(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

} // namespace isbp
