#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rnnq {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite coordinate, empty input, box outside the root cell, bad dimension.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Two input points are identical; the empty ball of either would be degenerate.
class DuplicatePoints : public Error {
public:
    DuplicatePoints(std::size_t first, std::size_t second)
        : Error("duplicate points: " + std::to_string(first) + " and " + std::to_string(second)),
          first_(first), second_(second) {}

    std::size_t first() const noexcept { return first_; }
    std::size_t second() const noexcept { return second_; }

private:
    std::size_t first_;
    std::size_t second_;
};

/// Nearest-neighbor distance below the resolution of the key grid.
class SpreadTooLarge : public Error {
public:
    using Error::Error;
};

/// Malformed or truncated serialized index.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace rnnq
