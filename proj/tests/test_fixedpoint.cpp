// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <future>

#include "poimsim/fixedpoint.hpp"
#include "poimsim/rng.hpp"

using namespace poimsim;
using fixedpoint::Int128;
using fixedpoint::Int256;
using fixedpoint::Scale;

TEST_CASE("scale bounds") {
    CHECK(Scale::pow10(1).value() == 10);
    CHECK(Scale::pow10(18).value() == Int128(1'000'000'000) * Int128(1'000'000'000));
    CHECK_THROWS_AS(Scale::pow10(0), Error);
    CHECK_THROWS_AS(Scale::pow10(19), Error);
}

TEST_CASE("to_fixed exact-product semantics") {
    CHECK(fixedpoint::to_fixed(0.5, Scale::pow10(1)) == 5);
    // trunc(0.1234567 * 1e6) on the IEEE value, frozen from an
    // arbitrary-precision recomputation.
    CHECK(fixedpoint::to_fixed(0.1234567, Scale::pow10(6)) == 123456);
    // The double nearest -0.15 sits just above it, so the exact product
    // truncates to -14; the decimal entry point sees the written literal.
    CHECK(fixedpoint::to_fixed(-0.15, Scale::pow10(2)) == -14);
    CHECK(fixedpoint::to_fixed(0.0, Scale::pow10(9)) == 0);
    CHECK(fixedpoint::to_fixed(-2.0, Scale::pow10(3)) == -2000);
    CHECK_THROWS_AS(fixedpoint::to_fixed(1e30, Scale::pow10(18)), Error);
}

TEST_CASE("to_fixed_decimal exact-decimal semantics") {
    CHECK(fixedpoint::to_fixed_decimal("0.5", Scale::pow10(1)) == 5);
    CHECK(fixedpoint::to_fixed_decimal("-0.15", Scale::pow10(2)) == -15);
    CHECK(fixedpoint::to_fixed_decimal("0.1234567", Scale::pow10(6)) == 123456);
    CHECK(fixedpoint::to_fixed_decimal("3", Scale::pow10(2)) == 300);
    CHECK(fixedpoint::to_fixed_decimal("+1.25", Scale::pow10(1)) == 12);
    CHECK_THROWS_AS(fixedpoint::to_fixed_decimal("1.2.3", Scale::pow10(1)), Error);
    CHECK_THROWS_AS(fixedpoint::to_fixed_decimal("abc", Scale::pow10(1)), Error);
}

TEST_CASE("from_fixed") {
    CHECK(fixedpoint::from_fixed(5, Scale::pow10(1)) == 0.5);
    CHECK(fixedpoint::from_fixed(0, Scale::pow10(14)) == 0.0);
    CHECK(fixedpoint::from_fixed(-15, Scale::pow10(2)) == -0.15);
}

TEST_CASE("idiv truncates toward zero") {
    CHECK(fixedpoint::idiv(7, 2) == 3);
    CHECK(fixedpoint::idiv(-7, 2) == -3);
    CHECK(fixedpoint::idiv(7, -2) == -3);
    CHECK(fixedpoint::idiv(6, 3) == 2);
    CHECK_THROWS_AS(fixedpoint::idiv(1, 0), Error);
    CHECK_THROWS_AS(fixedpoint::idiv128(1, 0), Error);
}

TEST_CASE("idiv euclidean identity, exhaustive over [-1000, 1000]") {
    for (int a = -1000; a <= 1000; ++a) {
        for (int b = -1000; b <= 1000; ++b) {
            if (b == 0) continue;
            const Int256 q = fixedpoint::idiv(a, b);
            const Int256 r = Int256(a) - q * b;
            if (!(boost::multiprecision::abs(r) < boost::multiprecision::abs(Int256(b)))) {
                FAIL("remainder bound violated at " << a << "/" << b);
            }
            if (!(r * a >= 0)) {
                FAIL("remainder sign violated at " << a << "/" << b);
            }
        }
    }
    CHECK(true);
}

TEST_CASE("mac identities") {
    const Scale s = Scale::pow10(6);
    const Int128 unit = s.value();
    CHECK(fixedpoint::mac(0, unit, unit, s) == unit);            // 1.0 * 1.0
    CHECK(fixedpoint::mac(10, 0, 123456, s) == 10);              // zero weight
    CHECK(fixedpoint::mac(0, 3 * unit, -2 * unit, s) == -6 * unit);  // oracle: trunc((3S * -2S)/S)
}

TEST_CASE("mac overflow is a hard error") {
    const Scale s = Scale::pow10(1);
    const Int128 big = (Int128(1) << 126);
    CHECK_THROWS_AS(fixedpoint::mac(big, big, 100, s), Error);
}

TEST_CASE("round trip error bounded by 1/S") {
    rng::DeterministicRng rng(2026);
    for (int trial = 0; trial < 2000; ++trial) {
        const int exponent = static_cast<int>(rng.uniform_below(18)) + 1;
        const Scale s = Scale::pow10(exponent);
        const double v = (rng.uniform() - 0.5) * 2000.0;
        const double back = fixedpoint::from_fixed(fixedpoint::to_fixed(v, s), s);
        const double tolerance = std::pow(10.0, -exponent) * (1.0 + 1e-9) + std::abs(v) * 1e-12;
        CHECK(std::abs(back - v) <= tolerance);
    }
}

TEST_CASE("mac chain is deterministic across runs and thread counts") {
    const Scale s = Scale::pow10(9);
    rng::DeterministicRng rng(7);
    std::vector<Int128> w(256);
    std::vector<Int128> x(256);
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = Int128(static_cast<std::int64_t>(rng.uniform_int(-1'000'000'000, 1'000'000'000)));
        x[i] = Int128(static_cast<std::int64_t>(rng.uniform_int(-1'000'000'000, 1'000'000'000)));
    }
    const auto run_chain = [&]() {
        Int128 acc = 0;
        for (std::size_t i = 0; i < w.size(); ++i) acc = fixedpoint::mac(acc, w[i], x[i], s);
        return acc;
    };
    const Int128 first = run_chain();
    const Int128 second = run_chain();
    CHECK(first == second);

    // Fan out over workers, reduce in index order: must be bit-identical.
    std::vector<std::future<Int128>> partials;
    const std::size_t chunk = w.size() / 4;
    for (int t = 0; t < 4; ++t) {
        partials.push_back(std::async(std::launch::async, [&, t]() {
            Int128 acc = 0;
            for (std::size_t i = static_cast<std::size_t>(t) * chunk; i < (static_cast<std::size_t>(t) + 1) * chunk;
                 ++i) {
                acc = fixedpoint::mac(acc, w[i], x[i], s);
            }
            return acc;
        }));
    }
    Int128 fanned = 0;
    for (std::future<Int128>& part : partials) fanned += part.get();
    CHECK(fanned == first);
}
