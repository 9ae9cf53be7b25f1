#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace sunny {

// Time allocations are kept as exact rationals of integer milliseconds so
// that a schedule's entries sum to the budget T bit-exactly. T/slots is
// generally non-terminating in decimal; doubles only appear at the API
// boundary.
using RationalMs = boost::rational<std::int64_t>;

inline double rational_ms_to_seconds(const RationalMs& ms) {
    return static_cast<double>(ms.numerator()) / static_cast<double>(ms.denominator()) / 1000.0;
}

// Round a decimal-seconds value to integer milliseconds. Input files carry
// at most millisecond precision, so this is lossless for valid inputs.
std::int64_t seconds_to_ms(double seconds);

// Shortest round-trip decimal rendering of a double (to_chars based,
// locale-independent). Used everywhere a double is printed so that output
// files are byte-stable.
std::string format_double(double value);

}  // namespace sunny
