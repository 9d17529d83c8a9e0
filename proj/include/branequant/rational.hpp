#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace branequant {

using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.template convert_to<double>(); }
inline double to_double(double x) { return x; }

inline bool coeff_is_zero(const Rat& r) { return r.is_zero(); }
inline bool coeff_is_zero(double x) { return x == 0.0; }

/// Parse "p", "-p" or "p/q" with decimal integers.
inline Rat parse_rational(std::string_view s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string_view::npos)
            return Rat(boost::multiprecision::cpp_int(std::string(s)));
        boost::multiprecision::cpp_int num{std::string(s.substr(0, slash))};
        boost::multiprecision::cpp_int den{std::string(s.substr(slash + 1))};
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rat(num, den);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument("bad rational literal '" + std::string(s) + "'");
    }
}

/// Format as "p" or "p/q" (canonical, denominator positive).
inline std::string format_rational(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

} // namespace branequant
