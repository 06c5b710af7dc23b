// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace poimsim::inference {

using fixedpoint::checked_raw;
using fixedpoint::idiv;
using fixedpoint::mac;
using fixedpoint::to_fixed;

const char* arch_name(ArchKind kind) {
    switch (kind) {
        case ArchKind::kLinear: return "linear";
        case ArchKind::kMlp: return "mlp";
        case ArchKind::kCnn1d: return "cnn1d";
        case ArchKind::kRnn: return "rnn";
        case ArchKind::kDecisionTree: return "tree";
    }
    return "unknown";
}

ModelArch ModelArch::linear(int input_dim) {
    ModelArch arch;
    arch.kind = ArchKind::kLinear;
    arch.input_dim = input_dim;
    arch.validate();
    return arch;
}

ModelArch ModelArch::mlp(int input_dim, std::vector<int> layer_sizes) {
    ModelArch arch;
    arch.kind = ArchKind::kMlp;
    arch.input_dim = input_dim;
    arch.layer_sizes = std::move(layer_sizes);
    arch.validate();
    return arch;
}

ModelArch ModelArch::cnn1d(int input_dim, int filters, int kernel) {
    ModelArch arch;
    arch.kind = ArchKind::kCnn1d;
    arch.input_dim = input_dim;
    arch.filters = filters;
    arch.kernel = kernel;
    arch.validate();
    return arch;
}

ModelArch ModelArch::rnn(int input_dim, int units, int timesteps) {
    ModelArch arch;
    arch.kind = ArchKind::kRnn;
    arch.input_dim = input_dim;
    arch.units = units;
    arch.timesteps = timesteps;
    arch.validate();
    return arch;
}

ModelArch ModelArch::decision_tree(int input_dim, std::vector<TreeNode> nodes) {
    ModelArch arch;
    arch.kind = ArchKind::kDecisionTree;
    arch.input_dim = input_dim;
    arch.nodes = std::move(nodes);
    arch.validate();
    return arch;
}

int ModelArch::rnn_step_width() const { return (input_dim + timesteps - 1) / timesteps; }

std::size_t ModelArch::weight_count() const {
    switch (kind) {
        case ArchKind::kLinear:
            return static_cast<std::size_t>(input_dim);
        case ArchKind::kMlp: {
            std::size_t count = 0;
            int prev = input_dim;
            for (int size : layer_sizes) {
                count += static_cast<std::size_t>(prev) * static_cast<std::size_t>(size);
                prev = size;
            }
            return count;
        }
        case ArchKind::kCnn1d: {
            const std::size_t positions = static_cast<std::size_t>(input_dim - kernel + 1);
            return static_cast<std::size_t>(filters) * static_cast<std::size_t>(kernel) +
                   static_cast<std::size_t>(filters) * positions;
        }
        case ArchKind::kRnn: {
            const std::size_t u = static_cast<std::size_t>(units);
            return u * static_cast<std::size_t>(rnn_step_width()) + u * u + u;
        }
        case ArchKind::kDecisionTree:
            return nodes.size();  // one threshold slot per node
    }
    return 0;
}

std::size_t ModelArch::bias_count() const {
    switch (kind) {
        case ArchKind::kLinear:
            return 1;
        case ArchKind::kMlp: {
            std::size_t count = 0;
            for (int size : layer_sizes) count += static_cast<std::size_t>(size);
            return count;
        }
        case ArchKind::kCnn1d:
            return static_cast<std::size_t>(filters) + 1;
        case ArchKind::kRnn:
            return static_cast<std::size_t>(units) + 1;
        case ArchKind::kDecisionTree:
            return 0;
    }
    return 0;
}

void ModelArch::validate() const {
    if (input_dim < 1) fail(Err::kDimensionMismatch, "input dimension must be positive");
    switch (kind) {
        case ArchKind::kLinear:
            break;
        case ArchKind::kMlp:
            if (layer_sizes.empty()) fail(Err::kDimensionMismatch, "mlp needs at least one layer");
            if (layer_sizes.back() != 1) fail(Err::kDimensionMismatch, "mlp final layer size must be 1");
            for (int size : layer_sizes) {
                if (size < 1) fail(Err::kDimensionMismatch, "mlp layer sizes must be positive");
            }
            break;
        case ArchKind::kCnn1d:
            if (filters < 1) fail(Err::kDimensionMismatch, "cnn needs at least one filter");
            if (kernel < 1) fail(Err::kDimensionMismatch, "cnn kernel must be positive");
            if (kernel > input_dim) fail(Err::kKernelTooLarge, "kernel exceeds input dimension");
            break;
        case ArchKind::kRnn:
            if (units < 1) fail(Err::kDimensionMismatch, "rnn needs at least one unit");
            if (timesteps < 1) fail(Err::kDimensionMismatch, "rnn needs at least one timestep");
            if (timesteps > input_dim) fail(Err::kDimensionMismatch, "rnn timesteps exceed input dimension");
            break;
        case ArchKind::kDecisionTree: {
            if (nodes.empty()) fail(Err::kMalformedTree, "tree has no nodes");
            const int n = static_cast<int>(nodes.size());
            for (const TreeNode& node : nodes) {
                if (node.is_leaf()) {
                    if (node.label != 0 && node.label != 1) fail(Err::kMalformedTree, "leaf label must be 0 or 1");
                    continue;
                }
                if (node.feature >= input_dim) fail(Err::kMalformedTree, "feature index out of range");
                if (node.left < 0 || node.left >= n || node.right < 0 || node.right >= n) {
                    fail(Err::kMalformedTree, "child index out of range");
                }
            }
            // Acyclicity: children must be reachable without revisiting.
            std::vector<int> state(nodes.size(), 0);
            std::vector<int> stack{0};
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                if (state[idx] == 1) fail(Err::kMalformedTree, "tree contains a cycle");
                if (state[idx] == 2) continue;
                state[idx] = 2;
                if (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
                    const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
                    if (node.left == idx || node.right == idx) fail(Err::kMalformedTree, "node points to itself");
                    stack.push_back(node.left);
                    stack.push_back(node.right);
                }
            }
            break;
        }
    }
}

std::string ModelArch::id() const {
    switch (kind) {
        case ArchKind::kLinear:
            return "linear-d" + std::to_string(input_dim);
        case ArchKind::kMlp: {
            std::string out = "mlp-d" + std::to_string(input_dim);
            for (int size : layer_sizes) out += "x" + std::to_string(size);
            return out;
        }
        case ArchKind::kCnn1d:
            return "cnn-f" + std::to_string(filters) + "-k" + std::to_string(kernel) + "-d" +
                   std::to_string(input_dim);
        case ArchKind::kRnn:
            return "rnn-u" + std::to_string(units) + "-t" + std::to_string(timesteps) + "-d" +
                   std::to_string(input_dim);
        case ArchKind::kDecisionTree:
            return "tree-n" + std::to_string(nodes.size()) + "-d" + std::to_string(input_dim);
    }
    return "unknown";
}

void QuantizedModel::validate() const {
    arch.validate();
    if (weights.size() != arch.weight_count() || biases.size() != arch.bias_count()) {
        fail(Err::kDimensionMismatch, "parameter counts do not match architecture");
    }
    for (const Int128& w : weights) {
        if (Int256(w) >= fixedpoint::raw_limit() || Int256(w) <= -fixedpoint::raw_limit()) {
            fail(Err::kOverflow, "weight outside storage bound");
        }
    }
}

void FloatModel::validate() const {
    arch.validate();
    if (weights.size() != arch.weight_count() || biases.size() != arch.bias_count()) {
        fail(Err::kDimensionMismatch, "parameter counts do not match architecture");
    }
    for (double w : weights) {
        if (!std::isfinite(w)) fail(Err::kOverflow, "non-finite weight");
    }
    for (double b : biases) {
        if (!std::isfinite(b)) fail(Err::kOverflow, "non-finite bias");
    }
}

QuantizedModel quantize(const FloatModel& model, Scale s) {
    model.validate();
    QuantizedModel out;
    out.arch = model.arch;
    out.scale = s;
    out.weights.reserve(model.weights.size());
    out.biases.reserve(model.biases.size());
    for (double w : model.weights) out.weights.push_back(to_fixed(w, s));
    for (double b : model.biases) out.biases.push_back(to_fixed(b, s));
    return out;
}

namespace {

void require_dim(std::span<const Int128> x, int expected) {
    if (static_cast<int>(x.size()) != expected) {
        fail(Err::kDimensionMismatch, "input has " + std::to_string(x.size()) + " features, model expects " +
                                          std::to_string(expected));
    }
}

Int128 relu(const Int128& v) { return v > 0 ? v : Int128(0); }

// Conv activations a_{f,p}, filter-major; used by the forward pass and as the
// penultimate vector for output-layer training steps.
std::vector<Int128> cnn_activations(std::span<const Int128> x, const QuantizedModel& model) {
    const ModelArch& arch = model.arch;
    const int positions = arch.input_dim - arch.kernel + 1;
    std::vector<Int128> activations;
    activations.reserve(static_cast<std::size_t>(arch.filters) * static_cast<std::size_t>(positions));
    for (int f = 0; f < arch.filters; ++f) {
        for (int p = 0; p < positions; ++p) {
            Int128 acc = model.biases[static_cast<std::size_t>(f)];
            for (int k = 0; k < arch.kernel; ++k) {
                acc = mac(acc, model.weights[static_cast<std::size_t>(f * arch.kernel + k)],
                          x[static_cast<std::size_t>(p + k)], model.scale);
            }
            activations.push_back(relu(acc));
        }
    }
    return activations;
}

// Final hidden state h_T.
std::vector<Int128> rnn_final_state(std::span<const Int128> x, const QuantizedModel& model) {
    const ModelArch& arch = model.arch;
    const int width = arch.rnn_step_width();
    const int units = arch.units;
    const std::size_t wxh_off = 0;
    const std::size_t whh_off = static_cast<std::size_t>(units) * static_cast<std::size_t>(width);
    std::vector<Int128> h(static_cast<std::size_t>(units), Int128(0));
    std::vector<Int128> next(static_cast<std::size_t>(units), Int128(0));
    for (int t = 0; t < arch.timesteps; ++t) {
        for (int u = 0; u < units; ++u) {
            Int128 acc = model.biases[static_cast<std::size_t>(u)];
            for (int j = 0; j < width; ++j) {
                const int idx = t * width + j;
                const Int128 xv = idx < arch.input_dim ? x[static_cast<std::size_t>(idx)] : Int128(0);
                acc = mac(acc, model.weights[wxh_off + static_cast<std::size_t>(u * width + j)], xv, model.scale);
            }
            for (int v = 0; v < units; ++v) {
                acc = mac(acc, model.weights[whh_off + static_cast<std::size_t>(u * units + v)],
                          h[static_cast<std::size_t>(v)], model.scale);
            }
            next[static_cast<std::size_t>(u)] = relu(acc);
        }
        h.swap(next);
    }
    return h;
}

// Activations of the layer feeding the final MLP layer (the input itself
// when the network has a single layer).
std::vector<Int128> mlp_penultimate(std::span<const Int128> x, const QuantizedModel& model) {
    const ModelArch& arch = model.arch;
    std::vector<Int128> current(x.begin(), x.end());
    std::size_t w_off = 0;
    std::size_t b_off = 0;
    int prev = arch.input_dim;
    for (std::size_t layer = 0; layer + 1 < arch.layer_sizes.size(); ++layer) {
        const int size = arch.layer_sizes[layer];
        std::vector<Int128> next(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) {
            Int128 acc = model.biases[b_off + static_cast<std::size_t>(i)];
            for (int j = 0; j < prev; ++j) {
                acc = mac(acc, model.weights[w_off + static_cast<std::size_t>(i * prev + j)],
                          current[static_cast<std::size_t>(j)], model.scale);
            }
            next[static_cast<std::size_t>(i)] = relu(acc);
        }
        w_off += static_cast<std::size_t>(prev) * static_cast<std::size_t>(size);
        b_off += static_cast<std::size_t>(size);
        current = std::move(next);
        prev = size;
    }
    return current;
}

struct OutputLayerView {
    std::size_t weight_offset;  // first output-layer weight
    std::size_t weight_count;
    std::size_t bias_index;  // output bias slot
};

OutputLayerView output_layer_view(const ModelArch& arch) {
    switch (arch.kind) {
        case ArchKind::kLinear:
            return {0, static_cast<std::size_t>(arch.input_dim), 0};
        case ArchKind::kMlp: {
            std::size_t w_off = 0;
            std::size_t b_off = 0;
            int prev = arch.input_dim;
            for (std::size_t layer = 0; layer + 1 < arch.layer_sizes.size(); ++layer) {
                const int size = arch.layer_sizes[layer];
                w_off += static_cast<std::size_t>(prev) * static_cast<std::size_t>(size);
                b_off += static_cast<std::size_t>(size);
                prev = size;
            }
            return {w_off, static_cast<std::size_t>(prev), b_off};
        }
        case ArchKind::kCnn1d: {
            const std::size_t conv = static_cast<std::size_t>(arch.filters) * static_cast<std::size_t>(arch.kernel);
            const std::size_t readout =
                static_cast<std::size_t>(arch.filters) * static_cast<std::size_t>(arch.input_dim - arch.kernel + 1);
            return {conv, readout, static_cast<std::size_t>(arch.filters)};
        }
        case ArchKind::kRnn: {
            const std::size_t u = static_cast<std::size_t>(arch.units);
            const std::size_t wxh = u * static_cast<std::size_t>(arch.rnn_step_width());
            return {wxh + u * u, u, u};
        }
        case ArchKind::kDecisionTree:
            fail(Err::kUnsupportedArchitecture, "decision trees have no output layer");
    }
    fail(Err::kUnsupportedArchitecture, "unknown architecture");
}

std::vector<Int128> penultimate_activations(std::span<const Int128> x, const QuantizedModel& model) {
    switch (model.arch.kind) {
        case ArchKind::kLinear:
            return {x.begin(), x.end()};
        case ArchKind::kMlp:
            return mlp_penultimate(x, model);
        case ArchKind::kCnn1d:
            return cnn_activations(x, model);
        case ArchKind::kRnn:
            return rnn_final_state(x, model);
        case ArchKind::kDecisionTree:
            fail(Err::kUnsupportedArchitecture, "decision trees have no activations");
    }
    fail(Err::kUnsupportedArchitecture, "unknown architecture");
}

}  // namespace

Int128 forward_linear(std::span<const Int128> x, const QuantizedModel& model) {
    require_dim(x, model.arch.input_dim);
    Int128 acc = model.biases[0];
    for (int i = 0; i < model.arch.input_dim; ++i) {
        acc = mac(acc, model.weights[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)], model.scale);
    }
    return acc;
}

Int128 forward_mlp(std::span<const Int128> x, const QuantizedModel& model) {
    require_dim(x, model.arch.input_dim);
    const std::vector<Int128> hidden = mlp_penultimate(x, model);
    const OutputLayerView view = output_layer_view(model.arch);
    Int128 acc = model.biases[view.bias_index];
    for (std::size_t j = 0; j < view.weight_count; ++j) {
        acc = mac(acc, model.weights[view.weight_offset + j], hidden[j], model.scale);
    }
    return acc;
}

Int128 forward_cnn1d(std::span<const Int128> x, const QuantizedModel& model) {
    require_dim(x, model.arch.input_dim);
    const std::vector<Int128> activations = cnn_activations(x, model);
    const OutputLayerView view = output_layer_view(model.arch);
    Int128 acc = model.biases[view.bias_index];
    for (std::size_t j = 0; j < view.weight_count; ++j) {
        acc = mac(acc, model.weights[view.weight_offset + j], activations[j], model.scale);
    }
    return acc;
}

Int128 forward_rnn(std::span<const Int128> x, const QuantizedModel& model) {
    require_dim(x, model.arch.input_dim);
    const std::vector<Int128> state = rnn_final_state(x, model);
    const OutputLayerView view = output_layer_view(model.arch);
    Int128 acc = model.biases[view.bias_index];
    for (std::size_t j = 0; j < view.weight_count; ++j) {
        acc = mac(acc, model.weights[view.weight_offset + j], state[j], model.scale);
    }
    return acc;
}

Int128 forward_logit(std::span<const Int128> x, const QuantizedModel& model) {
    switch (model.arch.kind) {
        case ArchKind::kLinear: return forward_linear(x, model);
        case ArchKind::kMlp: return forward_mlp(x, model);
        case ArchKind::kCnn1d: return forward_cnn1d(x, model);
        case ArchKind::kRnn: return forward_rnn(x, model);
        case ArchKind::kDecisionTree:
            fail(Err::kUnsupportedArchitecture, "decision trees produce labels, not logits");
    }
    fail(Err::kUnsupportedArchitecture, "unknown architecture");
}

int forward_tree(std::span<const Int128> x, const QuantizedModel& model) {
    require_dim(x, model.arch.input_dim);
    const std::vector<TreeNode>& nodes = model.arch.nodes;
    std::size_t idx = 0;
    std::size_t steps = 0;
    while (true) {
        if (++steps > nodes.size()) fail(Err::kMalformedTree, "descent exceeded node count");
        const TreeNode& node = nodes[idx];
        if (node.is_leaf()) return node.label;
        const Int128& threshold = model.weights[idx];
        idx = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= threshold ? node.left
                                                                                              : node.right);
    }
}

int classify(const Int128& logit) { return logit > 0 ? 1 : 0; }

int classify_input(std::span<const Int128> x, const QuantizedModel& model) {
    if (model.arch.kind == ArchKind::kDecisionTree) return forward_tree(x, model);
    return classify(forward_logit(x, model));
}

namespace {

std::vector<double> float_penultimate(std::span<const double> x, const FloatModel& model) {
    const ModelArch& arch = model.arch;
    switch (arch.kind) {
        case ArchKind::kLinear:
            return {x.begin(), x.end()};
        case ArchKind::kMlp: {
            std::vector<double> current(x.begin(), x.end());
            std::size_t w_off = 0;
            std::size_t b_off = 0;
            int prev = arch.input_dim;
            for (std::size_t layer = 0; layer + 1 < arch.layer_sizes.size(); ++layer) {
                const int size = arch.layer_sizes[layer];
                std::vector<double> next(static_cast<std::size_t>(size));
                for (int i = 0; i < size; ++i) {
                    double acc = model.biases[b_off + static_cast<std::size_t>(i)];
                    for (int j = 0; j < prev; ++j) {
                        acc += model.weights[w_off + static_cast<std::size_t>(i * prev + j)] *
                               current[static_cast<std::size_t>(j)];
                    }
                    next[static_cast<std::size_t>(i)] = std::max(acc, 0.0);
                }
                w_off += static_cast<std::size_t>(prev) * static_cast<std::size_t>(size);
                b_off += static_cast<std::size_t>(size);
                current = std::move(next);
                prev = size;
            }
            return current;
        }
        case ArchKind::kCnn1d: {
            const int positions = arch.input_dim - arch.kernel + 1;
            std::vector<double> activations;
            activations.reserve(static_cast<std::size_t>(arch.filters) * static_cast<std::size_t>(positions));
            for (int f = 0; f < arch.filters; ++f) {
                for (int p = 0; p < positions; ++p) {
                    double acc = model.biases[static_cast<std::size_t>(f)];
                    for (int k = 0; k < arch.kernel; ++k) {
                        acc += model.weights[static_cast<std::size_t>(f * arch.kernel + k)] *
                               x[static_cast<std::size_t>(p + k)];
                    }
                    activations.push_back(std::max(acc, 0.0));
                }
            }
            return activations;
        }
        case ArchKind::kRnn: {
            const int width = arch.rnn_step_width();
            const int units = arch.units;
            const std::size_t whh_off = static_cast<std::size_t>(units) * static_cast<std::size_t>(width);
            std::vector<double> h(static_cast<std::size_t>(units), 0.0);
            std::vector<double> next(static_cast<std::size_t>(units), 0.0);
            for (int t = 0; t < arch.timesteps; ++t) {
                for (int u = 0; u < units; ++u) {
                    double acc = model.biases[static_cast<std::size_t>(u)];
                    for (int j = 0; j < width; ++j) {
                        const int idx = t * width + j;
                        const double xv = idx < arch.input_dim ? x[static_cast<std::size_t>(idx)] : 0.0;
                        acc += model.weights[static_cast<std::size_t>(u * width + j)] * xv;
                    }
                    for (int v = 0; v < units; ++v) {
                        acc += model.weights[whh_off + static_cast<std::size_t>(u * units + v)] *
                               h[static_cast<std::size_t>(v)];
                    }
                    next[static_cast<std::size_t>(u)] = std::max(acc, 0.0);
                }
                h.swap(next);
            }
            return h;
        }
        case ArchKind::kDecisionTree:
            fail(Err::kUnsupportedArchitecture, "decision trees have no activations");
    }
    fail(Err::kUnsupportedArchitecture, "unknown architecture");
}

}  // namespace

double reference_forward(std::span<const double> x, const FloatModel& model) {
    if (static_cast<int>(x.size()) != model.arch.input_dim) {
        fail(Err::kDimensionMismatch, "reference input dimension mismatch");
    }
    if (model.arch.kind == ArchKind::kDecisionTree) {
        fail(Err::kUnsupportedArchitecture, "decision trees produce labels, not logits");
    }
    const std::vector<double> hidden = float_penultimate(x, model);
    const OutputLayerView view = output_layer_view(model.arch);
    double acc = model.biases[view.bias_index];
    for (std::size_t j = 0; j < view.weight_count; ++j) {
        acc += model.weights[view.weight_offset + j] * hidden[j];
    }
    return acc;
}

int reference_classify(std::span<const double> x, const FloatModel& model) {
    if (model.arch.kind == ArchKind::kDecisionTree) {
        if (static_cast<int>(x.size()) != model.arch.input_dim) {
            fail(Err::kDimensionMismatch, "reference input dimension mismatch");
        }
        std::size_t idx = 0;
        std::size_t steps = 0;
        while (true) {
            if (++steps > model.arch.nodes.size()) fail(Err::kMalformedTree, "descent exceeded node count");
            const TreeNode& node = model.arch.nodes[idx];
            if (node.is_leaf()) return node.label;
            idx = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= model.weights[idx]
                                               ? node.left
                                               : node.right);
        }
    }
    return reference_forward(x, model) > 0.0 ? 1 : 0;
}

QuantizedModel micro_train_step(const QuantizedModel& model, std::span<const Int128> x, int label,
                                const Int128& eta_raw) {
    if (model.arch.kind == ArchKind::kDecisionTree) {
        fail(Err::kUnsupportedArchitecture, "micro training updates need a numeric output layer");
    }
    require_dim(x, model.arch.input_dim);
    if (classify_input(x, model) == label) return model;

    const Int128 direction = label == 1 ? Int128(1) : Int128(-1);
    const Int128 signed_eta = eta_raw * direction;
    const std::vector<Int128> inputs = penultimate_activations(x, model);
    const OutputLayerView view = output_layer_view(model.arch);

    QuantizedModel updated = model;
    for (std::size_t j = 0; j < view.weight_count; ++j) {
        const Int256 delta = idiv(Int256(signed_eta) * Int256(inputs[j]), Int256(model.scale.value()));
        updated.weights[view.weight_offset + j] = checked_raw(Int256(model.weights[view.weight_offset + j]) + delta);
    }
    updated.biases[view.bias_index] = checked_raw(Int256(model.biases[view.bias_index]) + Int256(signed_eta));
    updated.version = model.version + 1;
    return updated;
}

namespace {

double max_abs(std::span<const double> values) {
    double bound = 0.0;
    for (double v : values) bound = std::max(bound, std::abs(v));
    return bound;
}

struct ErrorState {
    double magnitude;  // bound on the true activation magnitude
    double error;      // bound on |fixed/S - true|
};

// One dense stage with fan_in terms: every idiv truncation contributes < 1/S,
// quantized weights and the bias are each off by < 1/S, and incoming
// activation error is amplified by the weight magnitude. ReLU is
// 1-Lipschitz, so the bound survives hidden activations unchanged.
ErrorState propagate(const ErrorState& in, int fan_in, double weight_bound, double bias_bound, double inv_s) {
    ErrorState out;
    out.error = fan_in * ((in.magnitude + in.error) * inv_s + weight_bound * in.error) + (fan_in + 1) * inv_s;
    out.magnitude = fan_in * weight_bound * in.magnitude + bias_bound;
    return out;
}

double slice_bound(const std::vector<double>& values, std::size_t offset, std::size_t count) {
    double bound = 0.0;
    for (std::size_t i = 0; i < count; ++i) bound = std::max(bound, std::abs(values[offset + i]));
    return bound;
}

}  // namespace

double truncation_error_bound(const FloatModel& model, Scale s, double input_bound) {
    model.validate();
    const ModelArch& arch = model.arch;
    const double inv_s = std::pow(10.0, -s.exponent);
    const ErrorState input{input_bound, inv_s};  // inputs are quantized once

    switch (arch.kind) {
        case ArchKind::kLinear: {
            const double wb = slice_bound(model.weights, 0, model.weights.size());
            const double bb = slice_bound(model.biases, 0, model.biases.size());
            return propagate(input, arch.input_dim, wb, bb, inv_s).error;
        }
        case ArchKind::kMlp: {
            ErrorState state = input;
            std::size_t w_off = 0;
            std::size_t b_off = 0;
            int prev = arch.input_dim;
            for (int size : arch.layer_sizes) {
                const std::size_t w_count = static_cast<std::size_t>(prev) * static_cast<std::size_t>(size);
                const double wb = slice_bound(model.weights, w_off, w_count);
                const double bb = slice_bound(model.biases, b_off, static_cast<std::size_t>(size));
                state = propagate(state, prev, wb, bb, inv_s);
                w_off += w_count;
                b_off += static_cast<std::size_t>(size);
                prev = size;
            }
            return state.error;
        }
        case ArchKind::kCnn1d: {
            const std::size_t conv_count =
                static_cast<std::size_t>(arch.filters) * static_cast<std::size_t>(arch.kernel);
            const int positions = arch.input_dim - arch.kernel + 1;
            const double conv_wb = slice_bound(model.weights, 0, conv_count);
            const double conv_bb = slice_bound(model.biases, 0, static_cast<std::size_t>(arch.filters));
            const ErrorState conv = propagate(input, arch.kernel, conv_wb, conv_bb, inv_s);
            const std::size_t readout_count =
                static_cast<std::size_t>(arch.filters) * static_cast<std::size_t>(positions);
            const double out_wb = slice_bound(model.weights, conv_count, readout_count);
            const double out_bb = std::abs(model.biases[static_cast<std::size_t>(arch.filters)]);
            return propagate(conv, static_cast<int>(readout_count), out_wb, out_bb, inv_s).error;
        }
        case ArchKind::kRnn: {
            const int width = arch.rnn_step_width();
            const int units = arch.units;
            const std::size_t wxh_count = static_cast<std::size_t>(units) * static_cast<std::size_t>(width);
            const std::size_t whh_count = static_cast<std::size_t>(units) * static_cast<std::size_t>(units);
            const double wxh = slice_bound(model.weights, 0, wxh_count);
            const double whh = slice_bound(model.weights, wxh_count, whh_count);
            const double hb = slice_bound(model.biases, 0, static_cast<std::size_t>(units));
            ErrorState hidden{0.0, 0.0};
            for (int t = 0; t < arch.timesteps; ++t) {
                ErrorState next;
                next.error = width * ((input.magnitude + input.error) * inv_s + wxh * input.error) +
                             units * ((hidden.magnitude + hidden.error) * inv_s + whh * hidden.error) +
                             (width + units + 1) * inv_s;
                next.magnitude = width * wxh * input.magnitude + units * whh * hidden.magnitude + hb;
                hidden = next;
            }
            const double out_wb = slice_bound(model.weights, wxh_count + whh_count, static_cast<std::size_t>(units));
            const double out_bb = std::abs(model.biases[static_cast<std::size_t>(units)]);
            return propagate(hidden, units, out_wb, out_bb, inv_s).error;
        }
        case ArchKind::kDecisionTree:
            fail(Err::kUnsupportedArchitecture, "error bound applies to logit architectures");
    }
    fail(Err::kUnsupportedArchitecture, "unknown architecture");
}

SignConsistencyReport sign_consistency(const FloatModel& model, Scale s,
                                       const std::vector<std::vector<double>>& validation) {
    if (validation.empty()) fail(Err::kEmptyValidationSet, "sign consistency needs validation inputs");
    double gamma = std::numeric_limits<double>::infinity();
    double input_bound = 0.0;
    for (const std::vector<double>& x : validation) {
        gamma = std::min(gamma, std::abs(reference_forward(x, model)));
        input_bound = std::max(input_bound, max_abs(x));
    }
    const double delta = truncation_error_bound(model, s, input_bound);
    return SignConsistencyReport{gamma, delta, gamma > delta};
}

int min_certified_scale_exponent(const FloatModel& model,
                                 const std::vector<std::vector<double>>& validation) {
    for (int exponent = 1; exponent <= 18; ++exponent) {
        const SignConsistencyReport report = sign_consistency(model, Scale::pow10(exponent), validation);
        if (report.holds) return exponent;
    }
    return -1;
}

}  // namespace poimsim::inference
