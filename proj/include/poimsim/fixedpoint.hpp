// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string_view>

#include "poimsim/errors.hpp"

namespace poimsim::fixedpoint {

// Stored values are 128-bit signed integers bounded to |raw| < 2^127;
// intermediate products run in 256 bits, mirroring an EVM word.
using Int128 = boost::multiprecision::int128_t;
using Int256 = boost::multiprecision::int256_t;
using Uint256 = boost::multiprecision::uint256_t;

const Int256& raw_limit();  // 2^127

// Decimal scale S = 10^exponent with exponent in [1, 18].
struct Scale {
    int exponent{6};

    static Scale pow10(int exponent);
    Int128 value() const;

    friend bool operator==(const Scale&, const Scale&) = default;
};

struct ScaledInt {
    Int128 raw{0};
    Scale scale{};
};

// Narrow a 256-bit intermediate back to storage width; Overflow if it does
// not fit the |raw| < 2^127 bound.
Int128 checked_raw(const Int256& value);

// raw = trunc(v * S) computed exactly from the IEEE-754 value of v (the
// product is formed in integer arithmetic, never rounded before truncation).
Int128 to_fixed(double v, Scale s);

// Exact-decimal variant for text boundaries (CLI vectors, config files):
// "-0.15" at S=100 yields -15, whereas the double closest to -0.15 truncates
// to -14 under exact-product semantics.
Int128 to_fixed_decimal(std::string_view text, Scale s);

double from_fixed(const Int128& raw, Scale s);

// Truncating division toward zero (EVM SDIV semantics).
Int256 idiv(const Int256& a, const Int256& b);
Int128 idiv128(const Int128& a, const Int128& b);

// acc + idiv(w * x, S); the product is taken at 256 bits.
Int128 mac(const Int128& acc, const Int128& w, const Int128& x, Scale s);

}  // namespace poimsim::fixedpoint
