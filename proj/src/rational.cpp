#include "sunny/rational.hpp"

#include "sunny/error.hpp"

#include <charconv>
#include <cmath>

namespace sunny {

std::int64_t seconds_to_ms(double seconds) {
    if (!std::isfinite(seconds)) {
        throw Error("non-finite time value");
    }
    return static_cast<std::int64_t>(std::llround(seconds * 1000.0));
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace sunny
