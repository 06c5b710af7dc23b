// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "poimsim/rng.hpp"

namespace poimsim::dataset {

namespace {

const std::array<std::string, 10> kColumns = {
    "gas",          "block_timestamp", "func_selector_encoded", "chain_id_encoded", "sender_encoded",
    "origin_encoded", "to_encoded",     "label",                 "attack_group_id",  "root_cause",
};

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::int64_t parse_int(const std::string& field, std::size_t line_no, const std::string& column) {
    const std::string text = trim(field);
    if (text.empty()) fail(Err::kParseError, "line " + std::to_string(line_no) + ": empty " + column);
    std::size_t consumed = 0;
    std::int64_t value = 0;
    try {
        value = std::stoll(text, &consumed);
    } catch (const std::exception&) {
        fail(Err::kParseError, "line " + std::to_string(line_no) + ": non-integer " + column + " '" + text + "'");
    }
    if (consumed != text.size()) {
        fail(Err::kParseError, "line " + std::to_string(line_no) + ": non-integer " + column + " '" + text + "'");
    }
    return value;
}

}  // namespace

const char* root_cause_name(RootCause cause) {
    switch (cause) {
        case RootCause::kAccessControl: return "AccessControl";
        case RootCause::kBusinessLogic: return "BusinessLogic";
        case RootCause::kOracleManipulation: return "OracleManipulation";
        case RootCause::kUncheckedExternalCall: return "UncheckedExternalCall";
        case RootCause::kStorageCollision: return "StorageCollision";
    }
    return "Unknown";
}

std::optional<RootCause> root_cause_from_name(const std::string& name) {
    for (RootCause cause : {RootCause::kAccessControl, RootCause::kBusinessLogic, RootCause::kOracleManipulation,
                            RootCause::kUncheckedExternalCall, RootCause::kStorageCollision}) {
        if (name == root_cause_name(cause)) return cause;
    }
    return std::nullopt;
}

std::array<std::int64_t, kFeatureCount> TxFeatureVector::features() const {
    return {gas,          block_timestamp, func_selector_encoded, chain_id_encoded,
            sender_encoded, origin_encoded,  to_encoded};
}

std::vector<TxFeatureVector> ingest(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(Err::kEmptyInput, "missing header row");
    const std::vector<std::string> header = split_line(line);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index[trim(header[i])] = i;
    for (const std::string& column : kColumns) {
        if (!index.count(column)) fail(Err::kMissingColumn, "header lacks column '" + column + "'");
    }

    std::vector<TxFeatureVector> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() < header.size()) {
            fail(Err::kParseError, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(header.size()) + " fields, got " +
                                       std::to_string(fields.size()));
        }
        TxFeatureVector record;
        record.gas = parse_int(fields[index["gas"]], line_no, "gas");
        record.block_timestamp = parse_int(fields[index["block_timestamp"]], line_no, "block_timestamp");
        record.func_selector_encoded =
            parse_int(fields[index["func_selector_encoded"]], line_no, "func_selector_encoded");
        record.chain_id_encoded = parse_int(fields[index["chain_id_encoded"]], line_no, "chain_id_encoded");
        record.sender_encoded = parse_int(fields[index["sender_encoded"]], line_no, "sender_encoded");
        record.origin_encoded = parse_int(fields[index["origin_encoded"]], line_no, "origin_encoded");
        record.to_encoded = parse_int(fields[index["to_encoded"]], line_no, "to_encoded");

        const std::string label = trim(fields[index["label"]]);
        if (!label.empty()) {
            const std::int64_t value = parse_int(label, line_no, "label");
            if (value != 0 && value != 1) {
                fail(Err::kParseError, "line " + std::to_string(line_no) + ": label must be 0 or 1");
            }
            record.label = static_cast<int>(value);
        }
        const std::string group = trim(fields[index["attack_group_id"]]);
        if (!group.empty()) record.attack_group_id = group;
        const std::string cause = trim(fields[index["root_cause"]]);
        if (!cause.empty()) {
            record.root_cause = root_cause_from_name(cause);
            if (!record.root_cause) {
                fail(Err::kParseError, "line " + std::to_string(line_no) + ": unknown root_cause '" + cause + "'");
            }
        }
        if (record.attack_group_id && record.label && *record.label != 1) {
            fail(Err::kParseError, "line " + std::to_string(line_no) + ": attack group member must be labeled 1");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<TxFeatureVector> ingest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::kEmptyInput, "cannot open '" + path + "'");
    return ingest(in);
}

void write_csv(std::ostream& out, const std::vector<TxFeatureVector>& records) {
    for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const TxFeatureVector& r : records) {
        out << r.gas << ',' << r.block_timestamp << ',' << r.func_selector_encoded << ',' << r.chain_id_encoded
            << ',' << r.sender_encoded << ',' << r.origin_encoded << ',' << r.to_encoded << ',';
        if (r.label) out << *r.label;
        out << ',';
        if (r.attack_group_id) out << *r.attack_group_id;
        out << ',';
        if (r.root_cause) out << root_cause_name(*r.root_cause);
        out << '\n';
    }
}

namespace {

// Full-record ordering so the split is invariant to input shuffling.
bool record_less(const TxFeatureVector& a, const TxFeatureVector& b) {
    const auto key = [](const TxFeatureVector& r) {
        return std::tuple(r.block_timestamp, r.gas, r.func_selector_encoded, r.chain_id_encoded, r.sender_encoded,
                          r.origin_encoded, r.to_encoded, r.label.value_or(-1),
                          r.attack_group_id.value_or(std::string()));
    };
    return key(a) < key(b);
}

}  // namespace

SplitDataset temporal_split(std::vector<TxFeatureVector> records, double test_fraction) {
    if (records.empty()) fail(Err::kEmptyInput, "temporal_split needs records");
    if (test_fraction < 0.0 || test_fraction > 1.0) fail(Err::kConfigError, "test_fraction must lie in [0, 1]");
    std::sort(records.begin(), records.end(), record_less);

    const std::size_t n = records.size();
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    std::size_t cut = n - std::min(n_test, n);

    // Last index per attack group; a group whose earliest member lies before
    // the cut must end before it too, otherwise the cut advances past it.
    std::map<std::string, std::size_t> group_last;
    for (std::size_t i = 0; i < n; ++i) {
        if (records[i].attack_group_id) group_last[*records[i].attack_group_id] = i;
    }
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t i = 0; i < cut; ++i) {
            if (!records[i].attack_group_id) continue;
            const std::size_t last = group_last[*records[i].attack_group_id];
            if (last >= cut) {
                cut = last + 1;
                moved = true;
            }
        }
    }

    SplitDataset split;
    split.train.assign(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(cut));
    split.test.assign(records.begin() + static_cast<std::ptrdiff_t>(cut), records.end());
    return split;
}

std::vector<Int128> encode_features(const TxFeatureVector& record, const FeatureStats& stats, Scale s) {
    const std::array<std::int64_t, kFeatureCount> raw = record.features();
    std::vector<Int128> encoded;
    encoded.reserve(kFeatureCount);
    for (int i = 0; i < kFeatureCount; ++i) {
        const double sd = stats.stddev[static_cast<std::size_t>(i)];
        const double z = sd == 0.0 ? 0.0
                                   : (static_cast<double>(raw[static_cast<std::size_t>(i)]) -
                                      stats.mean[static_cast<std::size_t>(i)]) /
                                         sd;
        encoded.push_back(fixedpoint::to_fixed(z, s));
    }
    return encoded;
}

EncodedDataset standardize_encode(const SplitDataset& split, Scale s) {
    if (split.train.empty()) fail(Err::kEmptyTrain, "standardization needs a train split");

    EncodedDataset ds;
    ds.scale = s;
    const double n = static_cast<double>(split.train.size());
    for (int f = 0; f < kFeatureCount; ++f) {
        double sum = 0.0;
        for (const TxFeatureVector& r : split.train) {
            sum += static_cast<double>(r.features()[static_cast<std::size_t>(f)]);
        }
        const double mean = sum / n;
        double var = 0.0;
        for (const TxFeatureVector& r : split.train) {
            const double d = static_cast<double>(r.features()[static_cast<std::size_t>(f)]) - mean;
            var += d * d;
        }
        ds.stats.mean[static_cast<std::size_t>(f)] = mean;
        ds.stats.stddev[static_cast<std::size_t>(f)] = std::sqrt(var / n);
    }

    const auto encode_all = [&](const std::vector<TxFeatureVector>& rows) {
        std::vector<EncodedSample> out;
        out.reserve(rows.size());
        for (const TxFeatureVector& r : rows) {
            if (!r.label) fail(Err::kParseError, "train/test rows must be labeled");
            out.push_back(EncodedSample{encode_features(r, ds.stats, s), *r.label});
        }
        return out;
    };
    ds.train = encode_all(split.train);
    ds.test = encode_all(split.test);
    return ds;
}

void write_encoded_csv(std::ostream& out, const EncodedDataset& ds) {
    out << "split,f0,f1,f2,f3,f4,f5,f6,label\n";
    const auto emit = [&](const char* name, const std::vector<EncodedSample>& rows) {
        for (const EncodedSample& r : rows) {
            out << name;
            for (const Int128& v : r.features) out << ',' << v;
            out << ',' << r.label << '\n';
        }
    };
    emit("train", ds.train);
    emit("test", ds.test);
}

std::vector<TxFeatureVector> synth_generate(int n_normal, int n_attack, double separation,
                                            std::uint64_t rng_seed) {
    if (n_normal <= 0 || n_attack <= 0) fail(Err::kConfigError, "sample counts must be positive");
    if (separation < 0.0) fail(Err::kConfigError, "separation must be non-negative");

    rng::DeterministicRng rng(rng_seed);
    const int total = n_normal + n_attack;

    // Chronological interleave: shuffle class tags, then draw an increasing
    // clock shared by both classes.
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < n_normal; ++i) labels.push_back(0);
    for (int i = 0; i < n_attack; ++i) labels.push_back(1);
    rng.shuffle(labels);

    constexpr double kFeatureScale = 1000.0;  // integer quantization grid for the Gaussian values
    constexpr std::int64_t kEpoch = 1'600'000'000;
    std::int64_t clock = kEpoch;

    std::vector<TxFeatureVector> records;
    records.reserve(static_cast<std::size_t>(total));
    int attack_seq = 0;
    for (int i = 0; i < total; ++i) {
        const int label = labels[static_cast<std::size_t>(i)];
        const double offset = label == 1 ? separation : 0.0;
        std::array<double, 6> g{};
        for (double& v : g) v = rng.normal() + offset;

        clock += 40 + static_cast<std::int64_t>(rng.uniform_below(30));

        TxFeatureVector r;
        r.gas = static_cast<std::int64_t>(std::llround(g[0] * kFeatureScale));
        r.block_timestamp = clock;
        r.func_selector_encoded = static_cast<std::int64_t>(std::llround(g[1] * kFeatureScale));
        r.chain_id_encoded = static_cast<std::int64_t>(std::llround(g[2] * kFeatureScale));
        r.sender_encoded = static_cast<std::int64_t>(std::llround(g[3] * kFeatureScale));
        r.origin_encoded = static_cast<std::int64_t>(std::llround(g[4] * kFeatureScale));
        r.to_encoded = static_cast<std::int64_t>(std::llround(g[5] * kFeatureScale));
        r.label = label;
        if (label == 1) {
            r.attack_group_id = "atk" + std::to_string(attack_seq);
            r.root_cause = static_cast<RootCause>(attack_seq % 5);
            ++attack_seq;
        }
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace poimsim::dataset
