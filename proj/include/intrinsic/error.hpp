#pragma once

#include <stdexcept>
#include <string>

namespace intrinsic {

/// Base for every error raised by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Input data that cannot be used: malformed files, invariant violations,
/// inconsistent event streams.
class data_error : public error
{
public:
    using error::error;
};

/// A caller passed arguments outside an operation's domain.
class invalid_input : public error
{
public:
    using error::error;
};

} // namespace intrinsic
