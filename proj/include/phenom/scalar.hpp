#pragma once

// Scalar backends for the whole library.
//
// Every quantity of interest here is a probability, so the numeric story is
// simple: either you want exact answers (rationals, equality means equality)
// or you want speed at large n (doubles, comparisons within a fixed
// tolerance). Everything downstream is templated on the scalar type and asks
// scalar_traits<T> for the few operations whose meaning differs between the
// two worlds: tolerance, parsing, printing, exact ratios.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "phenom/errors.hpp"

namespace phenom {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <class T>
struct scalar_traits;  // only Rational and double are supported

namespace detail {

// Strict base-10 integer: optional sign, then digits only. The BigInt string
// constructor is not usable here because it honors octal and hex prefixes,
// which would silently corrupt values like "025".
inline BigInt parse_integer_base10(std::string_view text, const auto& fail) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    if (pos == text.size()) fail();
    BigInt acc(0);
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c < '0' || c > '9') fail();
        acc *= 10;
        acc += c - '0';
    }
    return negative ? BigInt(-acc) : acc;
}

// "2/3", "-1/4", "0.25", "1e-3", "41" -> exact rational.
// Decimal forms convert exactly (finite decimals are rationals).
inline Rational parse_rational(std::string_view text) {
    auto fail = [&]() -> void {
        throw parse_error("cannot parse '" + std::string(text) + "' as a rational number");
    };
    if (text.empty()) fail();

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::string_view num = text.substr(0, slash);
        std::string_view den = text.substr(slash + 1);
        if (num.empty() || den.empty()) fail();
        const BigInt n = parse_integer_base10(num, fail);
        const BigInt d = parse_integer_base10(den, fail);
        if (d == 0) fail();
        return Rational(n, d);
    }

    // Sign, integer part, optional fraction, optional exponent.
    size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string digits;
    long frac_digits = 0;
    bool any_digit = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        digits += text[pos++];
        any_digit = true;
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            digits += text[pos++];
            ++frac_digits;
            any_digit = true;
        }
    }
    if (!any_digit) fail();
    long exponent = 0;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        bool exp_neg = false;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            exp_neg = text[pos] == '-';
            ++pos;
        }
        if (pos == text.size()) fail();
        long e = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            e = e * 10 + (text[pos++] - '0');
            if (e > 1'000'000) fail();  // nonsense exponent
        }
        exponent = exp_neg ? -e : e;
    }
    if (pos != text.size()) fail();

    BigInt mantissa = parse_integer_base10(digits, fail);
    if (negative) mantissa = -mantissa;
    long net = exponent - frac_digits;
    if (net >= 0) return Rational(mantissa * pow(BigInt(10), static_cast<unsigned>(net)), 1);
    return Rational(mantissa, pow(BigInt(10), static_cast<unsigned>(-net)));
}

}  // namespace detail

template <>
struct scalar_traits<Rational> {
    static constexpr bool is_exact = true;
    static constexpr const char* backend_name = "exact";

    static Rational tolerance() { return Rational(0); }
    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }

    static Rational from_int(long long v) { return Rational(v); }
    static Rational from_ratio(const BigInt& num, const BigInt& den) { return Rational(num, den); }

    static Rational pow_ui(const Rational& base, unsigned long e) {
        using boost::multiprecision::pow;
        if (e == 0) return Rational(1);
        return Rational(pow(numerator(base), static_cast<unsigned>(e)),
                        pow(denominator(base), static_cast<unsigned>(e)));
    }

    static double to_double(const Rational& x) { return x.convert_to<double>(); }

    static Rational parse(std::string_view text) { return detail::parse_rational(text); }

    // Canonical form: "num/den", or just "num" when the denominator is 1.
    static std::string repr(const Rational& x) {
        std::string s = numerator(x).str();
        if (denominator(x) != 1) {
            s += '/';
            s += denominator(x).str();
        }
        return s;
    }
};

template <>
struct scalar_traits<double> {
    static constexpr bool is_exact = false;
    static constexpr const char* backend_name = "float";

    static double tolerance() { return 1e-12; }
    static double zero() { return 0.0; }
    static double one() { return 1.0; }

    static double from_int(long long v) { return static_cast<double>(v); }

    // Round the true ratio once, instead of rounding num and den separately.
    static double from_ratio(const BigInt& num, const BigInt& den) {
        return Rational(num, den).convert_to<double>();
    }

    static double pow_ui(double base, unsigned long e) {
        double acc = 1.0, b = base;
        while (e != 0) {
            if (e & 1) acc *= b;
            b *= b;
            e >>= 1;
        }
        return acc;
    }

    static double to_double(double x) { return x; }

    static double parse(std::string_view text) {
        double v = scalar_traits<Rational>::to_double(detail::parse_rational(text));
        if (!std::isfinite(v))
            throw parse_error("'" + std::string(text) + "' is out of range for the float backend");
        return v;
    }

    static std::string repr(double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return buf;
    }
};

template <class T>
concept backend_scalar = requires { scalar_traits<T>::backend_name; };

}  // namespace phenom
