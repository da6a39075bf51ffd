#pragma once

/**
 * @file errors.hpp
 * @brief Exception types shared by every multispec module.
 */

#include <stdexcept>
#include <string>

namespace multispec {

/// Caller-supplied input violates an operation's precondition.
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy answer
/// (Newton divergence, lost branch, ambiguous matching, ...).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A tracked cycle came too close to having an eigenvalue equal to 1.
class parabolic_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw precondition_error(what);
}

} // namespace detail
} // namespace multispec
