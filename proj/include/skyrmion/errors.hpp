#pragma once

#include <stdexcept>
#include <string>

namespace skyrmion {

/// A physics or numerical contract was violated at run time (degenerate
/// ground state, norm drift, probability bookkeeping). The CLI maps it to exit 1.
class PhysicsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown keys, unparsable values, missing files. Exit 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace skyrmion
