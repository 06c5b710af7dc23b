// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "poimsim/fixedpoint.hpp"

namespace poimsim::dataset {

using fixedpoint::Int128;
using fixedpoint::Scale;

inline constexpr int kFeatureCount = 7;

enum class RootCause {
    kAccessControl,
    kBusinessLogic,
    kOracleManipulation,
    kUncheckedExternalCall,
    kStorageCollision,
};

const char* root_cause_name(RootCause cause);
std::optional<RootCause> root_cause_from_name(const std::string& name);

// The seven execution-visible transaction features plus labeling metadata.
// Categorical fields arrive already label-encoded as integers.
struct TxFeatureVector {
    std::int64_t gas{0};
    std::int64_t block_timestamp{0};
    std::int64_t func_selector_encoded{0};
    std::int64_t chain_id_encoded{0};
    std::int64_t sender_encoded{0};
    std::int64_t origin_encoded{0};
    std::int64_t to_encoded{0};
    std::optional<int> label;
    std::optional<std::string> attack_group_id;
    std::optional<RootCause> root_cause;

    std::array<std::int64_t, kFeatureCount> features() const;
    friend bool operator==(const TxFeatureVector&, const TxFeatureVector&) = default;
};

std::vector<TxFeatureVector> ingest(std::istream& in);
std::vector<TxFeatureVector> ingest_file(const std::string& path);
void write_csv(std::ostream& out, const std::vector<TxFeatureVector>& records);

// Train statistics; test rows are encoded with these, never their own.
struct FeatureStats {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> stddev{};
};

struct SplitDataset {
    std::vector<TxFeatureVector> train;
    std::vector<TxFeatureVector> test;
};

struct EncodedSample {
    std::vector<Int128> features;
    int label{0};
};

struct EncodedDataset {
    std::vector<EncodedSample> train;
    std::vector<EncodedSample> test;
    FeatureStats stats;
    Scale scale{};
};

// Chronological split with atomic attack groups: a group straddling the cut
// moves wholly to the side of its earliest member, which extends the train
// side past the group's last member so the temporal invariant survives.
SplitDataset temporal_split(std::vector<TxFeatureVector> records, double test_fraction);

// Z-score each feature with train-split statistics (zero-variance features
// map to zero), then convert to fixed point at the given scale.
EncodedDataset standardize_encode(const SplitDataset& split, Scale s);

std::vector<Int128> encode_features(const TxFeatureVector& record, const FeatureStats& stats, Scale s);

void write_encoded_csv(std::ostream& out, const EncodedDataset& ds);

// Two Gaussian clusters over the six non-temporal features; the per-feature
// class offset is separation standard deviations, so the cluster mean
// distance is separation times the within-cluster RMS dispersion.
// Timestamps form an interleaved clock shared by both classes.
std::vector<TxFeatureVector> synth_generate(int n_normal, int n_attack, double separation,
                                            std::uint64_t rng_seed);

}  // namespace poimsim::dataset
