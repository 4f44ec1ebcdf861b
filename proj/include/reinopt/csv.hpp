#ifndef REINOPT_CSV_HPP
#define REINOPT_CSV_HPP

#include <charconv>
#include <cstdint>
#include <string>

namespace reinopt::csv {

// Shortest decimal representation that round-trips, so golden CSV files are
// byte-stable across runs.
inline std::string number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::string number(std::uint64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::string number(std::int64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace reinopt::csv

#endif
