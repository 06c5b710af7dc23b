// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace poimsim::bridge {

using Hash256 = std::array<std::uint8_t, 32>;

// Keccak-256 as used by the EVM (original Keccak padding 0x01, not the
// NIST SHA-3 variant).
Hash256 keccak256(std::span<const std::uint8_t> data);
Hash256 keccak256(const std::string& text);

std::string to_hex(const Hash256& hash);

}  // namespace poimsim::bridge
