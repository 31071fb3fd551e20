#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace sea {

// Library-wide exception type. CLI catches it and maps to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void append_all(std::ostringstream&) {}
template <typename T, typename... Rest>
void append_all(std::ostringstream& os, const T& v, const Rest&... rest) {
    os << v;
    append_all(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string msg(const Args&... args) {
    std::ostringstream os;
    detail::append_all(os, args...);
    return os.str();
}

template <typename... Args>
[[noreturn]] void fail(const Args&... args) {
    throw Error(msg(args...));
}

template <typename... Args>
void require(bool cond, const Args&... args) {
    if (!cond) fail(args...);
}

}  // namespace sea
