#pragma once
// Quantity parsing for CLI flags: a number with an optional unit suffix.
// Frequencies accept Hz/kHz/MHz/GHz (bare numbers are Hz); powers accept
// W/mW/uW (bare numbers are W).  Suffixes are case-sensitive to keep mW
// and MHz unambiguous.

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace omspec {

namespace detail {

inline double parse_with_suffixes(const std::string& text,
                                  const std::pair<const char*, double>* table,
                                  std::size_t n_suffixes, const char* dimension) {
    const char* s = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(s, &end);
    if (end == s)
        throw std::invalid_argument(std::string("expected a ") + dimension + ", got '" + text + "'");
    std::string suffix(end);
    // allow a space between number and unit: "277.8 mW"
    while (!suffix.empty() && suffix.front() == ' ')
        suffix.erase(suffix.begin());
    if (suffix.empty())
        return value;
    for (std::size_t i = 0; i < n_suffixes; ++i)
        if (suffix == table[i].first)
            return value * table[i].second;
    throw std::invalid_argument(std::string("unknown ") + dimension + " unit '" + suffix +
                                "' in '" + text + "'");
}

} // namespace detail

/// Parse a frequency like "12.43GHz", "-5 MHz", "7.76" (Hz) into Hz.
inline double parse_frequency(const std::string& text) {
    static constexpr std::pair<const char*, double> table[] = {
        {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    return detail::parse_with_suffixes(text, table, 4, "frequency");
}

/// Parse a power like "277.8mW", "0.301" (W) into watts.
inline double parse_power(const std::string& text) {
    static constexpr std::pair<const char*, double> table[] = {
        {"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}};
    return detail::parse_with_suffixes(text, table, 3, "power");
}

} // namespace omspec
