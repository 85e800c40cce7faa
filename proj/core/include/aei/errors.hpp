#pragma once

#include <stdexcept>
#include <string>

namespace aei {

/// Malformed or inconsistent input data (files, dimensions, counts).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aei
