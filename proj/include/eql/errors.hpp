#pragma once

#include <stdexcept>

namespace eql {

/// A file exists but its content is not what the reader expects.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file or directory cannot be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace eql
