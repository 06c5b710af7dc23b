// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/keccak.hpp"

#include <cstring>

namespace poimsim::bridge {

namespace {

constexpr int kRounds = 24;
constexpr std::size_t kRateBytes = 136;  // 1600 - 2*256 bits

constexpr std::uint64_t kRoundConstants[kRounds] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

constexpr int kRotations[kRounds] = {1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14,
                                     27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44};

constexpr int kPiLane[kRounds] = {10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4,
                                  15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1};

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

void keccak_f1600(std::uint64_t state[25]) {
    std::uint64_t parity[5];
    for (int round = 0; round < kRounds; ++round) {
        // theta
        for (int i = 0; i < 5; ++i) {
            parity[i] = state[i] ^ state[i + 5] ^ state[i + 10] ^ state[i + 15] ^ state[i + 20];
        }
        for (int i = 0; i < 5; ++i) {
            const std::uint64_t t = parity[(i + 4) % 5] ^ rotl(parity[(i + 1) % 5], 1);
            for (int j = 0; j < 25; j += 5) state[j + i] ^= t;
        }
        // rho + pi
        std::uint64_t current = state[1];
        for (int i = 0; i < kRounds; ++i) {
            const int lane = kPiLane[i];
            const std::uint64_t saved = state[lane];
            state[lane] = rotl(current, kRotations[i]);
            current = saved;
        }
        // chi
        std::uint64_t row[5];
        for (int j = 0; j < 25; j += 5) {
            for (int i = 0; i < 5; ++i) row[i] = state[j + i];
            for (int i = 0; i < 5; ++i) state[j + i] ^= (~row[(i + 1) % 5]) & row[(i + 2) % 5];
        }
        // iota
        state[0] ^= kRoundConstants[round];
    }
}

}  // namespace

Hash256 keccak256(std::span<const std::uint8_t> data) {
    std::uint64_t state[25] = {};
    std::uint8_t block[kRateBytes];

    std::size_t offset = 0;
    while (data.size() - offset >= kRateBytes) {
        for (std::size_t lane = 0; lane < kRateBytes / 8; ++lane) {
            std::uint64_t word = 0;
            std::memcpy(&word, data.data() + offset + lane * 8, 8);  // little-endian host
            state[lane] ^= word;
        }
        keccak_f1600(state);
        offset += kRateBytes;
    }

    const std::size_t remaining = data.size() - offset;
    std::memset(block, 0, sizeof(block));
    if (remaining > 0) std::memcpy(block, data.data() + offset, remaining);
    block[remaining] ^= 0x01;  // Keccak domain padding
    block[kRateBytes - 1] ^= 0x80;
    for (std::size_t lane = 0; lane < kRateBytes / 8; ++lane) {
        std::uint64_t word = 0;
        std::memcpy(&word, block + lane * 8, 8);
        state[lane] ^= word;
    }
    keccak_f1600(state);

    Hash256 out;
    std::memcpy(out.data(), state, out.size());
    return out;
}

Hash256 keccak256(const std::string& text) {
    return keccak256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                   text.size()));
}

std::string to_hex(const Hash256& hash) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t byte : hash) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0x0f]);
    }
    return out;
}

}  // namespace poimsim::bridge
