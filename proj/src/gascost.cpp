// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/gascost.hpp"

#include <algorithm>
#include <sstream>

namespace poimsim::gascost {

using inference::ArchKind;
using inference::ModelArch;
using inference::TreeNode;

std::int64_t gas_linear(std::int64_t d) {
    if (d < 1) fail(Err::kDimensionMismatch, "gas_linear requires d >= 1");
    return OpcodeBudget::kMac * d + OpcodeBudget::kBiasInit;
}

std::int64_t gas_cnn(std::int64_t d, std::int64_t k, std::int64_t f) {
    if (d < 1 || k < 1 || f < 1) fail(Err::kDimensionMismatch, "gas_cnn requires positive arguments");
    if (k > d) fail(Err::kKernelTooLarge, "kernel exceeds input dimension");
    const std::int64_t o = d - k + 1;
    return OpcodeBudget::kMac * f * o * (k + 1) + OpcodeBudget::kRelu * f * o + OpcodeBudget::kBiasInit * f;
}

std::int64_t gas_rnn(std::int64_t d, std::int64_t u, std::int64_t t) {
    if (d < 1 || u < 1 || t < 1) fail(Err::kDimensionMismatch, "gas_rnn requires positive arguments");
    const std::int64_t d_in = (d + t - 1) / t;
    return OpcodeBudget::kMac * t * u * (d_in + u + 1) + 15 * t * u;
}

namespace {

std::int64_t tree_depth(const std::vector<TreeNode>& nodes, int idx, int guard) {
    if (guard < 0) fail(Err::kMalformedTree, "tree deeper than node count");
    const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) return 0;
    return 1 + std::max(tree_depth(nodes, node.left, guard - 1), tree_depth(nodes, node.right, guard - 1));
}

std::int64_t analytic_gas(const ModelArch& arch) {
    switch (arch.kind) {
        case ArchKind::kLinear:
            return gas_linear(arch.input_dim);
        case ArchKind::kMlp: {
            // Dense layers priced as gas_linear per output unit, plus one
            // ReLU per hidden activation.
            std::int64_t gas = 0;
            std::int64_t prev = arch.input_dim;
            for (std::size_t layer = 0; layer < arch.layer_sizes.size(); ++layer) {
                const std::int64_t size = arch.layer_sizes[layer];
                gas += size * gas_linear(prev);
                if (layer + 1 < arch.layer_sizes.size()) gas += OpcodeBudget::kRelu * size;
                prev = size;
            }
            return gas;
        }
        case ArchKind::kCnn1d:
            return gas_cnn(arch.input_dim, arch.kernel, arch.filters);
        case ArchKind::kRnn:
            return gas_rnn(arch.input_dim, arch.units, arch.timesteps);
        case ArchKind::kDecisionTree: {
            // Per visited level: threshold SLOAD, feature CALLDATALOAD,
            // comparison, and branch bookkeeping; no MACs are executed.
            const std::int64_t per_level = OpcodeBudget::kSload + OpcodeBudget::kCalldataload +
                                           OpcodeBudget::kAdd + OpcodeBudget::kLoop;
            return per_level * tree_depth(arch.nodes, 0, static_cast<int>(arch.nodes.size()));
        }
    }
    fail(Err::kUnsupportedArchitecture, "unknown architecture");
}

}  // namespace

GasReport gas_for_arch(const ModelArch& arch) {
    arch.validate();
    GasReport report;
    report.model_id = arch.id();
    report.analytic_gas = analytic_gas(arch);
    report.base_tx_gas = kBaseTxGas;
    report.total = report.analytic_gas + report.base_tx_gas;
    report.within_block_limit = report.total <= kBlockGasLimit;
    return report;
}

GasReport gas_for_model(const inference::QuantizedModel& model) {
    model.validate();
    return gas_for_arch(model.arch);
}

double gas_to_usd(std::int64_t gas, double gas_price_gwei, double token_usd) {
    if (gas < 0 || gas_price_gwei < 0 || token_usd < 0) {
        fail(Err::kConfigError, "gas_to_usd requires non-negative inputs");
    }
    return static_cast<double>(gas) * gas_price_gwei * 1e-9 * token_usd;
}

std::string GasReport::to_text() const {
    std::ostringstream out;
    out << "model_id=" << model_id << '\n';
    out << "analytic_gas=" << analytic_gas << '\n';
    out << "base_tx_gas=" << base_tx_gas << '\n';
    out << "total=" << total << '\n';
    out << "within_block_limit=" << (within_block_limit ? "true" : "false") << '\n';
    if (usd_cost) out << "usd_cost=" << *usd_cost << '\n';
    return out.str();
}

}  // namespace poimsim::gascost
