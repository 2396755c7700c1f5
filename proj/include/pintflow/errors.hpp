#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pintflow {

/// Invalid user configuration (parameter ranges, level bounds, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Programming error at an API boundary, e.g. shape mismatch.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Singular coarse solve, eigen non-convergence and similar.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem data that cannot be used (non-finite values, bad files).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the block-parallel harness when one time block fails.
class BlockFailure : public std::runtime_error {
public:
    BlockFailure(std::size_t block, const std::string& what)
        : std::runtime_error("time block " + std::to_string(block) + " failed: " + what),
          block_(block) {}
    std::size_t block() const noexcept { return block_; }

private:
    std::size_t block_;
};

}  // namespace pintflow
