#ifndef BIODIFF_CORE_ERRORS_HPP
#define BIODIFF_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace biodiff {

/// Bad or inconsistent configuration (file contents, parameter ranges,
/// step-ratio rules). Maps to exit code 1 at the CLI boundary.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem / stream failure. Maps to exit code 4.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Mismatched solver state, e.g. a workspace used with the wrong mesh.
/// Maps to exit code 2 together with the standard argument/domain errors.
struct state_error : std::runtime_error {
    explicit state_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace biodiff

#endif
