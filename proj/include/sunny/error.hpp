#pragma once

#include <stdexcept>
#include <string>

namespace sunny {

// Single exception type for all validation and I/O failures. The CLI maps
// it to a diagnostic on stderr and a nonzero exit code.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sunny
