#pragma once

#include <stdexcept>
#include <string>

namespace vprsnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed inputs, inconsistent datasets.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// Missing, unreadable or unwritable files.
class IoError : public Error
{
public:
    using Error::Error;
};

}  // namespace vprsnn
