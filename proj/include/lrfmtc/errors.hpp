// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lrfmtc {

/// Invalid input: wrong shape, out-of-range parameter, bad mode index.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed file contents. `offset` is the byte (or line) position where
/// parsing stopped.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// An iterative method diverged or failed to converge.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, long iterations, double last_estimate = 0.0)
        : std::runtime_error(what), iterations_(iterations), last_estimate_(last_estimate) {}

    [[nodiscard]] long iterations() const noexcept { return iterations_; }
    [[nodiscard]] double last_estimate() const noexcept { return last_estimate_; }

private:
    long iterations_;
    double last_estimate_;
};

/// The iterate reached a state where the method is undefined, e.g. all-zero
/// complement factors giving a zero Lipschitz constant.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lrfmtc
