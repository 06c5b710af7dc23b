// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "poimsim/inference.hpp"
#include "poimsim/keccak.hpp"
#include "poimsim/poim.hpp"

namespace poimsim::bridge {

using inference::FloatModel;
using inference::QuantizedModel;

// Canonical model layout, bit-exact across platforms:
//   magic "PIM1" | version word | arch tag octet | arch dim words |
//   scale exponent octet | weight words | bias words
// where every word is a 32-octet big-endian two's-complement integer.
std::vector<std::uint8_t> serialize(const QuantizedModel& model);
QuantizedModel deserialize(std::span<const std::uint8_t> bytes);

struct Commitment {
    Hash256 hash{};
    std::uint64_t committed_at{0};

    friend bool operator==(const Commitment&, const Commitment&) = default;
};

Commitment make_commitment(const QuantizedModel& model, std::uint64_t block_number);

enum class TransferStatus { kAccepted, kRejected };

// Field-by-field parameter equality (arch, dims, scale, every weight and
// bias); raises ConsistencyError on the first mismatch.
void assert_model_fields_equal(const QuantizedModel& l1, const QuantizedModel& l2);

enum class InferenceCheck { kPass, kFail, kOutOfGuarantee };

// Static inference-side contract on the simulated L1: accepts parameter
// payloads only when their hash matches the recorded commitment.
class L1InferenceContract {
  public:
    void record_commitment(const Commitment& commitment);

    // Recompute keccak256(payload) against the recorded commitment; install
    // the parameters on a match, leave state untouched otherwise.
    TransferStatus transfer_and_verify(std::span<const std::uint8_t> payload);

    // Reconstruct the float model from the installed fixed-point parameters,
    // compare its prediction with the on-chain one for the given sample, and
    // report disagreements inside the quantization margin separately.
    InferenceCheck verify_inference(std::span<const double> x) const;

    int classify(std::span<const fixedpoint::Int128> x) const;

    const std::optional<QuantizedModel>& model() const { return model_; }
    const std::optional<Commitment>& commitment() const { return commitment_; }

    std::vector<std::uint8_t> state_bytes() const;

  private:
    std::optional<Commitment> commitment_;
    std::optional<QuantizedModel> model_;
};

// Build the float twin of a quantized model via from_fixed.
FloatModel to_float_model(const QuantizedModel& model);

// Quantize, install, evaluate, and assert that the stored parameters and
// metrics equal a fresh recomputation.
poim::PoimContract init_l2(const FloatModel& initial, fixedpoint::Scale scale, const poim::TestSet& test_set,
                           const poim::ProtocolParams& params);

}  // namespace poimsim::bridge
