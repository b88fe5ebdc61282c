#pragma once

#include <stdexcept>
#include <string>

namespace driftsearch {

/// Invalid or inconsistent inputs: bad polygons, mismatched grids, bad config.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical flow integration gave up (step cap exceeded, non-finite state).
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void ensure(bool cond, const std::string& what) {
    if (!cond) throw ConfigError(what);
}

}  // namespace driftsearch
