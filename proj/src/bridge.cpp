// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace poimsim::bridge {

using fixedpoint::Int128;
using fixedpoint::Int256;
using fixedpoint::Uint256;
using inference::ArchKind;
using inference::ModelArch;
using inference::TreeNode;

namespace {

constexpr char kMagic[4] = {'P', 'I', 'M', '1'};
constexpr std::size_t kWordBytes = 32;
constexpr std::int64_t kMaxDim = 1 << 20;  // sanity cap for deserialized dimensions

void append_word(std::vector<std::uint8_t>& out, const Int256& value) {
    Uint256 u;
    if (value < 0) {
        const Uint256 magnitude(-value);
        u = ~magnitude + 1;  // two's complement mod 2^256
    } else {
        u = Uint256(value);
    }
    for (int byte = static_cast<int>(kWordBytes) - 1; byte >= 0; --byte) {
        out.push_back(static_cast<std::uint8_t>((u >> (byte * 8)) & 0xff));
    }
}

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t octet() {
        if (pos_ >= bytes_.size()) fail(Err::kMalformedBytes, "truncated byte stream");
        return bytes_[pos_++];
    }

    Int256 word() {
        if (bytes_.size() - pos_ < kWordBytes) fail(Err::kMalformedBytes, "truncated word");
        Uint256 u = 0;
        for (std::size_t i = 0; i < kWordBytes; ++i) u = (u << 8) | bytes_[pos_ + i];
        pos_ += kWordBytes;
        if ((u >> 255) != 0) {
            const Uint256 magnitude = ~u + 1;
            return -Int256(magnitude);
        }
        return Int256(u);
    }

    std::int64_t dim_word(const char* what) {
        const Int256 value = word();
        if (value < 0 || value > kMaxDim) {
            fail(Err::kMalformedBytes, std::string("implausible ") + what + " dimension");
        }
        return value.convert_to<std::int64_t>();
    }

    std::int64_t signed_small_word(const char* what) {
        const Int256 value = word();
        if (value < -kMaxDim || value > kMaxDim) {
            fail(Err::kMalformedBytes, std::string("implausible ") + what + " value");
        }
        return value.convert_to<std::int64_t>();
    }

    Int128 raw_word() {
        const Int256 value = word();
        if (value >= fixedpoint::raw_limit() || value <= -fixedpoint::raw_limit()) {
            fail(Err::kMalformedBytes, "parameter word outside 128-bit bound");
        }
        return Int128(value);
    }

    bool exhausted() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

  private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_{0};
};

std::vector<std::int64_t> arch_dims(const ModelArch& arch) {
    std::vector<std::int64_t> dims{arch.input_dim};
    switch (arch.kind) {
        case ArchKind::kLinear:
            break;
        case ArchKind::kMlp:
            dims.push_back(static_cast<std::int64_t>(arch.layer_sizes.size()));
            for (int size : arch.layer_sizes) dims.push_back(size);
            break;
        case ArchKind::kCnn1d:
            dims.push_back(arch.filters);
            dims.push_back(arch.kernel);
            break;
        case ArchKind::kRnn:
            dims.push_back(arch.units);
            dims.push_back(arch.timesteps);
            break;
        case ArchKind::kDecisionTree:
            dims.push_back(static_cast<std::int64_t>(arch.nodes.size()));
            for (const TreeNode& node : arch.nodes) {
                dims.push_back(node.feature);
                dims.push_back(node.left);
                dims.push_back(node.right);
                dims.push_back(node.label);
            }
            break;
    }
    return dims;
}

}  // namespace

std::vector<std::uint8_t> serialize(const QuantizedModel& model) {
    model.validate();
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
    append_word(out, Int256(model.version));
    out.push_back(static_cast<std::uint8_t>(model.arch.kind));
    for (std::int64_t dim : arch_dims(model.arch)) append_word(out, Int256(dim));
    out.push_back(static_cast<std::uint8_t>(model.scale.exponent));
    for (const Int128& w : model.weights) append_word(out, Int256(w));
    for (const Int128& b : model.biases) append_word(out, Int256(b));
    return out;
}

QuantizedModel deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        fail(Err::kMalformedBytes, "bad magic");
    }
    Reader reader(bytes.subspan(sizeof(kMagic)));

    const Int256 version = reader.word();
    if (version < 0 || version > Int256(std::numeric_limits<std::int64_t>::max())) {
        fail(Err::kMalformedBytes, "implausible version");
    }

    const std::uint8_t tag = reader.octet();
    if (tag > static_cast<std::uint8_t>(ArchKind::kDecisionTree)) fail(Err::kMalformedBytes, "unknown arch tag");
    const auto kind = static_cast<ArchKind>(tag);

    ModelArch arch;
    arch.kind = kind;
    arch.input_dim = static_cast<int>(reader.dim_word("input"));
    switch (kind) {
        case ArchKind::kLinear:
            break;
        case ArchKind::kMlp: {
            const std::int64_t layers = reader.dim_word("layer count");
            for (std::int64_t i = 0; i < layers; ++i) {
                arch.layer_sizes.push_back(static_cast<int>(reader.dim_word("layer size")));
            }
            break;
        }
        case ArchKind::kCnn1d:
            arch.filters = static_cast<int>(reader.dim_word("filters"));
            arch.kernel = static_cast<int>(reader.dim_word("kernel"));
            break;
        case ArchKind::kRnn:
            arch.units = static_cast<int>(reader.dim_word("units"));
            arch.timesteps = static_cast<int>(reader.dim_word("timesteps"));
            break;
        case ArchKind::kDecisionTree: {
            const std::int64_t count = reader.dim_word("node count");
            for (std::int64_t i = 0; i < count; ++i) {
                TreeNode node;
                node.feature = static_cast<int>(reader.signed_small_word("feature"));
                node.left = static_cast<int>(reader.signed_small_word("left"));
                node.right = static_cast<int>(reader.signed_small_word("right"));
                node.label = static_cast<int>(reader.signed_small_word("label"));
                arch.nodes.push_back(node);
            }
            break;
        }
    }

    const std::uint8_t exponent = reader.octet();
    if (exponent < 1 || exponent > 18) fail(Err::kMalformedBytes, "scale exponent out of range");

    QuantizedModel model;
    model.arch = arch;
    model.scale = fixedpoint::Scale::pow10(exponent);
    model.version = version.convert_to<std::uint64_t>();
    try {
        model.arch.validate();
    } catch (const Error& e) {
        fail(Err::kMalformedBytes, std::string("invalid architecture: ") + e.what());
    }
    const std::size_t weights = model.arch.weight_count();
    const std::size_t biases = model.arch.bias_count();
    if (reader.remaining() != (weights + biases) * kWordBytes) {
        fail(Err::kMalformedBytes, "parameter payload length does not match the declared dimensions");
    }
    model.weights.reserve(weights);
    model.biases.reserve(biases);
    for (std::size_t i = 0; i < weights; ++i) model.weights.push_back(reader.raw_word());
    for (std::size_t i = 0; i < biases; ++i) model.biases.push_back(reader.raw_word());
    if (!reader.exhausted()) fail(Err::kMalformedBytes, "trailing bytes after parameters");
    return model;
}

Commitment make_commitment(const QuantizedModel& model, std::uint64_t block_number) {
    return Commitment{keccak256(serialize(model)), block_number};
}

void assert_model_fields_equal(const QuantizedModel& l1, const QuantizedModel& l2) {
    if (l1.arch != l2.arch) fail(Err::kConsistencyError, "architecture mismatch after transfer");
    if (l1.scale != l2.scale) fail(Err::kConsistencyError, "scale mismatch after transfer");
    if (l1.version != l2.version) fail(Err::kConsistencyError, "version mismatch after transfer");
    if (l1.weights.size() != l2.weights.size() || l1.biases.size() != l2.biases.size()) {
        fail(Err::kConsistencyError, "parameter count mismatch after transfer");
    }
    for (std::size_t i = 0; i < l1.weights.size(); ++i) {
        if (l1.weights[i] != l2.weights[i]) {
            fail(Err::kConsistencyError, "weight " + std::to_string(i) + " mismatch after transfer");
        }
    }
    for (std::size_t i = 0; i < l1.biases.size(); ++i) {
        if (l1.biases[i] != l2.biases[i]) {
            fail(Err::kConsistencyError, "bias " + std::to_string(i) + " mismatch after transfer");
        }
    }
}

void L1InferenceContract::record_commitment(const Commitment& commitment) { commitment_ = commitment; }

TransferStatus L1InferenceContract::transfer_and_verify(std::span<const std::uint8_t> payload) {
    if (!commitment_) fail(Err::kNoCommitment, "no commitment recorded");
    if (keccak256(payload) != commitment_->hash) return TransferStatus::kRejected;
    model_ = deserialize(payload);
    return TransferStatus::kAccepted;
}

int L1InferenceContract::classify(std::span<const fixedpoint::Int128> x) const {
    if (!model_) fail(Err::kNoModelInstalled, "no model installed on L1");
    return inference::classify_input(x, *model_);
}

FloatModel to_float_model(const QuantizedModel& model) {
    FloatModel out;
    out.arch = model.arch;
    out.weights.reserve(model.weights.size());
    out.biases.reserve(model.biases.size());
    for (const Int128& w : model.weights) out.weights.push_back(fixedpoint::from_fixed(w, model.scale));
    for (const Int128& b : model.biases) out.biases.push_back(fixedpoint::from_fixed(b, model.scale));
    return out;
}

InferenceCheck L1InferenceContract::verify_inference(std::span<const double> x) const {
    if (!model_) fail(Err::kNoModelInstalled, "no model installed on L1");
    const FloatModel float_twin = to_float_model(*model_);
    const int off_chain = inference::reference_classify(x, float_twin);

    std::vector<Int128> fixed;
    fixed.reserve(x.size());
    for (double v : x) fixed.push_back(fixedpoint::to_fixed(v, model_->scale));
    const int on_chain = inference::classify_input(fixed, *model_);

    if (on_chain == off_chain) return InferenceCheck::kPass;
    if (model_->arch.kind == ArchKind::kDecisionTree) {
        // Disagreements can only stem from features inside the threshold
        // quantization margin.
        return InferenceCheck::kOutOfGuarantee;
    }
    double bound = 0.0;
    for (double v : x) bound = std::max(bound, std::abs(v));
    const double margin = inference::truncation_error_bound(float_twin, model_->scale, bound);
    const double logit = inference::reference_forward(x, float_twin);
    return std::abs(logit) <= margin ? InferenceCheck::kOutOfGuarantee : InferenceCheck::kFail;
}

std::vector<std::uint8_t> L1InferenceContract::state_bytes() const {
    std::vector<std::uint8_t> out;
    out.push_back(commitment_ ? 1 : 0);
    if (commitment_) {
        out.insert(out.end(), commitment_->hash.begin(), commitment_->hash.end());
        for (int shift = 56; shift >= 0; shift -= 8) {
            out.push_back(static_cast<std::uint8_t>(commitment_->committed_at >> shift));
        }
    }
    out.push_back(model_ ? 1 : 0);
    if (model_) {
        const std::vector<std::uint8_t> bytes = serialize(*model_);
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

poim::PoimContract init_l2(const FloatModel& initial, fixedpoint::Scale scale, const poim::TestSet& test_set,
                           const poim::ProtocolParams& params) {
    const QuantizedModel quantized = inference::quantize(initial, scale);
    poim::PoimContract contract(quantized, test_set, params);

    // Initial-state consistency: stored parameters equal the just-quantized
    // ones, stored metrics equal a fresh evaluation.
    assert_model_fields_equal(contract.model(), quantized);
    const poim::Metrics fresh = poim::evaluate(contract.model(), contract.test_set(), params.metric_scale);
    if (!(fresh == contract.metrics())) {
        fail(Err::kConsistencyError, "stored metrics differ from fresh evaluation");
    }
    return contract;
}

}  // namespace poimsim::bridge
