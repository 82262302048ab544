#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace toplora {

// Incompatible dimensions between operands.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite data where finite values are required.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rank-deficient input to QR/LQ.
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid adapter / task / experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// merge() called on a token-wise adapter.
class UnmergeableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed weight container; carries the byte offset of the defect.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Training produced a non-finite loss; carries the step where it happened.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

    long step() const { return step_; }

private:
    long step_;
};

}  // namespace toplora
