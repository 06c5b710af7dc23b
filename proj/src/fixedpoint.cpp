// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/fixedpoint.hpp"

#include <cmath>
#include <cstdint>

namespace poimsim::fixedpoint {

namespace {

const Int256 kRawLimit = Int256(1) << 127;

Int128 pow10_128(int exponent) {
    Int128 value = 1;
    for (int i = 0; i < exponent; ++i) value *= 10;
    return value;
}

}  // namespace

const Int256& raw_limit() { return kRawLimit; }

Scale Scale::pow10(int exponent) {
    if (exponent < 1 || exponent > 18) {
        fail(Err::kScaleOutOfRange, "scale exponent must lie in [1, 18], got " + std::to_string(exponent));
    }
    return Scale{exponent};
}

Int128 Scale::value() const { return pow10_128(exponent); }

Int128 checked_raw(const Int256& value) {
    if (value >= kRawLimit || value <= -kRawLimit) {
        fail(Err::kOverflow, "value exceeds 128-bit storage bound");
    }
    return Int128(value);
}

Int128 to_fixed(double v, Scale s) {
    if (!std::isfinite(v)) fail(Err::kOverflow, "non-finite input to to_fixed");
    if (v == 0.0) return 0;

    // Decompose v = mantissa * 2^e2 exactly, then form mantissa * S * 2^e2
    // in integer arithmetic and truncate toward zero.
    int exp2 = 0;
    const double frac = std::frexp(v, &exp2);
    const auto mantissa = static_cast<std::int64_t>(std::ldexp(frac, 53));  // exact: |frac|*2^53 is integral
    const int e2 = exp2 - 53;

    Int256 scaled = Int256(mantissa) * Int256(s.value());
    if (e2 >= 0) {
        if (e2 >= 140) fail(Err::kOverflow, "to_fixed product exceeds range");
        scaled <<= e2;
    } else {
        const int shift = -e2;
        if (shift >= 256) return 0;
        const bool negative = scaled < 0;
        Int256 magnitude = negative ? Int256(-scaled) : scaled;
        magnitude >>= shift;
        scaled = negative ? Int256(-magnitude) : magnitude;
    }
    return checked_raw(scaled);
}

Int128 to_fixed_decimal(std::string_view text, Scale s) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    Int256 digits = 0;
    int frac_digits = 0;
    bool seen_dot = false;
    bool seen_digit = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c == '.') {
            if (seen_dot) fail(Err::kParseError, "multiple decimal points in '" + std::string(text) + "'");
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') {
            fail(Err::kParseError, "invalid decimal literal '" + std::string(text) + "'");
        }
        seen_digit = true;
        if (digits > (Int256(1) << 200)) fail(Err::kOverflow, "decimal literal too long");
        digits = digits * 10 + (c - '0');
        if (seen_dot) ++frac_digits;
    }
    if (!seen_digit) fail(Err::kParseError, "empty decimal literal");

    // trunc(digits * 10^(e - frac_digits)), sign applied last.
    Int256 value = digits;
    const int shift = s.exponent - frac_digits;
    if (shift >= 0) {
        for (int i = 0; i < shift; ++i) {
            value *= 10;
            if (value >= (Int256(1) << 250)) fail(Err::kOverflow, "decimal literal out of range");
        }
    } else {
        for (int i = 0; i < -shift; ++i) value /= 10;  // nonnegative, truncation exact
    }
    if (negative) value = -value;
    return checked_raw(value);
}

double from_fixed(const Int128& raw, Scale s) {
    const double numerator = raw.convert_to<double>();
    double denom = 1.0;
    for (int i = 0; i < s.exponent; ++i) denom *= 10.0;  // powers of ten <= 1e18 are exact doubles
    return numerator / denom;
}

Int256 idiv(const Int256& a, const Int256& b) {
    if (b == 0) fail(Err::kDivisionByZero, "idiv by zero");
    return a / b;  // cpp_int division truncates toward zero
}

Int128 idiv128(const Int128& a, const Int128& b) {
    if (b == 0) fail(Err::kDivisionByZero, "idiv by zero");
    return a / b;
}

Int128 mac(const Int128& acc, const Int128& w, const Int128& x, Scale s) {
    const Int256 product = Int256(w) * Int256(x);
    const Int256 sum = Int256(acc) + idiv(product, Int256(s.value()));
    return checked_raw(sum);
}

}  // namespace poimsim::fixedpoint
