#pragma once

#include <stdexcept>
#include <string>

namespace fflz {

// Bad user input (non-prime p, reducible modulus, malformed polynomial text)
// is reported with std::invalid_argument. The two types below cover failures
// that are not the caller's fault.

/// A numeric invariant (RH, functional equation, exact divisibility) failed.
class InvariantViolation : public std::runtime_error {
public:
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

/// A cache file exists but cannot be trusted (bad magic, truncated, hash mismatch).
class CacheCorruption : public std::runtime_error {
public:
    explicit CacheCorruption(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fflz
