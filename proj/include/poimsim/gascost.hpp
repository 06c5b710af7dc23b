// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "poimsim/inference.hpp"

namespace poimsim::gascost {

// Berlin fee schedule figures backing the per-MAC budget: one warm SLOAD,
// one CALLDATALOAD, MUL, DIV, ADD, and loop bookkeeping.
struct OpcodeBudget {
    static constexpr std::int64_t kSload = 100;
    static constexpr std::int64_t kCalldataload = 3;
    static constexpr std::int64_t kMul = 5;
    static constexpr std::int64_t kDiv = 5;
    static constexpr std::int64_t kAdd = 3;
    static constexpr std::int64_t kLoop = 8;
    static constexpr std::int64_t kRelu = 5;
    static constexpr std::int64_t kBiasInit = kSload + kAdd;                              // 103
    static constexpr std::int64_t kMac = kSload + kCalldataload + kMul + kDiv + kAdd + kLoop;  // 124
};

constexpr std::int64_t kBlockGasLimit = 30'000'000;
constexpr std::int64_t kBaseTxGas = 21'000;

struct GasReport {
    std::string model_id;
    std::int64_t analytic_gas{0};
    std::int64_t base_tx_gas{kBaseTxGas};
    std::int64_t total{0};
    bool within_block_limit{true};
    std::optional<double> usd_cost;

    // One key=value field per line.
    std::string to_text() const;
};

// 124*d + 103
std::int64_t gas_linear(std::int64_t d);

// With o = d-K+1: 124*F*o*(K+1) + 5*F*o + 103*F
std::int64_t gas_cnn(std::int64_t d, std::int64_t k, std::int64_t f);

// With d_in = ceil(d/T): 124*T*U*(d_in+U+1) + 15*T*U
std::int64_t gas_rnn(std::int64_t d, std::int64_t u, std::int64_t t);

GasReport gas_for_arch(const inference::ModelArch& arch);
GasReport gas_for_model(const inference::QuantizedModel& model);

double gas_to_usd(std::int64_t gas, double gas_price_gwei, double token_usd);

}  // namespace poimsim::gascost
