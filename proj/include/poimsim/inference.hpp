// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "poimsim/fixedpoint.hpp"

namespace poimsim::inference {

using fixedpoint::Int128;
using fixedpoint::Int256;
using fixedpoint::Scale;

enum class ArchKind : std::uint8_t {
    kLinear = 0,
    kMlp = 1,
    kCnn1d = 2,
    kRnn = 3,
    kDecisionTree = 4,
};

const char* arch_name(ArchKind kind);

// Decision tree node; feature == -1 marks a leaf carrying `label`.
// Internal nodes descend left iff x[feature] <= threshold (thresholds are
// stored in the model weight array, one slot per node).
struct TreeNode {
    int feature{-1};
    int left{-1};
    int right{-1};
    int label{0};

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct ModelArch {
    ArchKind kind{ArchKind::kLinear};
    int input_dim{0};
    std::vector<int> layer_sizes;  // Mlp: hidden sizes then final 1
    int filters{0};                // Cnn1d
    int kernel{0};                 // Cnn1d
    int units{0};                  // Rnn
    int timesteps{0};              // Rnn
    std::vector<TreeNode> nodes;   // DecisionTree

    static ModelArch linear(int input_dim);
    static ModelArch mlp(int input_dim, std::vector<int> layer_sizes);
    static ModelArch cnn1d(int input_dim, int filters, int kernel);
    static ModelArch rnn(int input_dim, int units, int timesteps);
    static ModelArch decision_tree(int input_dim, std::vector<TreeNode> nodes);

    // Per-step RNN input width: ceil(d / T).
    int rnn_step_width() const;

    std::size_t weight_count() const;
    std::size_t bias_count() const;
    void validate() const;
    std::string id() const;

    friend bool operator==(const ModelArch&, const ModelArch&) = default;
};

struct QuantizedModel {
    ModelArch arch;
    std::vector<Int128> weights;
    std::vector<Int128> biases;
    Scale scale{};
    std::uint64_t version{0};

    void validate() const;
    friend bool operator==(const QuantizedModel&, const QuantizedModel&) = default;
};

struct FloatModel {
    ModelArch arch;
    std::vector<double> weights;
    std::vector<double> biases;

    void validate() const;
};

struct SignConsistencyReport {
    double gamma{0.0};  // minimum |float logit| over the validation set
    double delta{0.0};  // worst-case quantization error bound at the scale
    bool holds{false};  // gamma > delta
};

QuantizedModel quantize(const FloatModel& model, Scale s);

// Fixed-point logit passes. All accumulate strictly left-to-right so results
// are bit-identical across runs. DecisionTree models have no logit; use
// forward_tree / classify_input for them.
Int128 forward_linear(std::span<const Int128> x, const QuantizedModel& model);
Int128 forward_mlp(std::span<const Int128> x, const QuantizedModel& model);
Int128 forward_cnn1d(std::span<const Int128> x, const QuantizedModel& model);
Int128 forward_rnn(std::span<const Int128> x, const QuantizedModel& model);
Int128 forward_logit(std::span<const Int128> x, const QuantizedModel& model);

int forward_tree(std::span<const Int128> x, const QuantizedModel& model);

// sign(logit): 1 if logit > 0, else 0 (zero classifies as benign).
int classify(const Int128& logit);

// Architecture-aware predicted label for a fixed-point input.
int classify_input(std::span<const Int128> x, const QuantizedModel& model);

// Float reference with the same dataflow as the fixed-point passes.
double reference_forward(std::span<const double> x, const FloatModel& model);
int reference_classify(std::span<const double> x, const FloatModel& model);

// Mistake-driven integer perceptron step. Linear models update all weights;
// deeper models update the output layer only, with the penultimate
// activations standing in for the input vector. A correctly classified
// sample returns the model unchanged.
QuantizedModel micro_train_step(const QuantizedModel& model, std::span<const Int128> x, int label,
                                const Int128& eta_raw);

// Conservative bound on |quantized logit / S - float logit| for inputs whose
// magnitude never exceeds `input_bound`, composed layer-by-layer.
double truncation_error_bound(const FloatModel& model, Scale s, double input_bound);

SignConsistencyReport sign_consistency(const FloatModel& model, Scale s,
                                       const std::vector<std::vector<double>>& validation);

// Smallest scale exponent whose gamma > delta certificate holds, or -1 if
// none in [1, 18] does.
int min_certified_scale_exponent(const FloatModel& model,
                                 const std::vector<std::vector<double>>& validation);

}  // namespace poimsim::inference
