#pragma once

#include <stdexcept>
#include <string>

namespace decouple {

// Bad input or violated model invariant (non-normalized probabilities,
// malformed configs, out-of-range parameters, ...).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Work refused because it would exceed an enumeration cap; callers should
// fall back to Monte Carlo or raise the cap.
class ResourceError : public std::runtime_error {
public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace decouple
