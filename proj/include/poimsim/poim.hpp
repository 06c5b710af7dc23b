// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "poimsim/inference.hpp"
#include "poimsim/keccak.hpp"

namespace poimsim::poim {

using fixedpoint::Int128;
using fixedpoint::Scale;
using inference::QuantizedModel;

using Token = std::int64_t;
using AccountBook = std::map<std::string, Token>;

inline constexpr std::int64_t kDefaultMetricScale = 10'000;  // basis points

// (accuracy, precision, recall, F1) as truncating integers at metric scale.
struct Metrics {
    std::int64_t acc{0};
    std::int64_t prec{0};
    std::int64_t rec{0};
    std::int64_t f1{0};

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

bool weakly_dominates(const Metrics& candidate, const Metrics& baseline);
bool strictly_improves(const Metrics& candidate, const Metrics& baseline);

Metrics metrics_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn,
                            std::int64_t metric_scale);

struct TestSample {
    std::vector<Int128> features;  // standardize-encoded at the model scale
    int label{0};

    friend bool operator==(const TestSample&, const TestSample&) = default;
};

struct TestSet {
    std::vector<TestSample> samples;
    std::uint64_t revision{0};

    // Nonempty with at least one sample of each class.
    void validate() const;
    friend bool operator==(const TestSet&, const TestSet&) = default;
};

Metrics evaluate(const QuantizedModel& model, const TestSet& test_set, std::int64_t metric_scale);

struct ProtocolParams {
    Token min_stake{1};
    Token alpha_acc{0};
    Token alpha_prec{0};
    Token alpha_rec{0};
    Token alpha_f1{0};
    std::int64_t imbalance_rho{5};
    std::uint64_t challenge_window_seconds{86'400};
    // Rollback quorum as a rational fraction of total voting power.
    std::int64_t quorum_num{1};
    std::int64_t quorum_den{2};
    Int128 eta_raw{0};
    std::size_t prior_depth{16};
    std::int64_t metric_scale{kDefaultMetricScale};
};

struct Proposal {
    std::string proposer;
    Token stake{0};
    TestSample sample;
    Int128 eta_raw{0};
    std::uint64_t submitted_at{0};
};

enum class RejectReason { kNone, kMetricDegraded, kNoImprovement, kImbalanceBlocked };

const char* reject_reason_name(RejectReason reason);

struct Decision {
    bool accepted{false};
    RejectReason reason{RejectReason::kNone};
    Metrics before;
    Metrics after;
    Token reward{0};
    bridge::Hash256 digest{};
    std::uint64_t version_after{0};
};

struct HistoryRecord {
    std::uint64_t seq{0};
    std::uint64_t time{0};
    std::string kind;    // proposal | challenge | testset | init
    std::string digest;  // hex prefix of the subject digest
    bool accepted{false};
    std::string detail;
    Metrics before;
    Metrics after;
    Token reward{0};
    Token vault_after{0};
    std::uint64_t version_after{0};

    std::string to_line() const;
};

struct Challenge {
    std::uint64_t target_version{0};
    std::uint64_t opened_at{0};
    std::uint64_t deadline{0};
    std::map<std::string, std::pair<Token, bool>> votes;  // account -> (weight, support)
};

struct TestSetChange {
    enum class Kind { kAdd, kModify, kRemove };
    Kind kind{Kind::kAdd};
    std::size_t index{0};  // Modify/Remove target
    TestSample sample;     // Add/Modify payload
};

struct PendingTestSetChange {
    std::uint64_t id{0};
    TestSetChange change;
    std::string proposer;
    std::uint64_t opened_at{0};
    std::uint64_t deadline{0};
    std::map<std::string, std::pair<Token, bool>> votes;
};

struct ChallengeOutcome {
    bool rolled_back{false};
    std::string detail;
    Metrics metrics_after;
};

// Single-writer governance state machine over one model. Token balances live
// in the caller's AccountBook (the hosting ledger); the contract only moves
// amounts between accounts and its vault.
class PoimContract {
  public:
    PoimContract(QuantizedModel initial, TestSet test_set, ProtocolParams params);

    Decision propose_update(const Proposal& proposal, std::uint64_t now, AccountBook& accounts);

    // R = s + sum_k alpha_k * (after_k - before_k), bonus clamped to vault.
    Token reward_for(Token stake, const Metrics& before, const Metrics& after) const;

    void open_challenge(std::uint64_t version, const std::string& challenger, Token stake, std::uint64_t now,
                        const AccountBook& accounts);
    void vote(std::uint64_t version, const std::string& account, Token weight, bool support, std::uint64_t now,
              const AccountBook& accounts);
    ChallengeOutcome resolve_challenge(std::uint64_t version, std::uint64_t now, AccountBook& accounts);

    std::uint64_t propose_testset_change(const TestSetChange& change, const std::string& proposer, Token stake,
                                         std::uint64_t now, const AccountBook& accounts);
    void vote_testset(std::uint64_t id, const std::string& account, Token weight, bool support, std::uint64_t now,
                      const AccountBook& accounts);
    bool resolve_testset_change(std::uint64_t id, std::uint64_t now, const AccountBook& accounts);

    const QuantizedModel& model() const { return model_; }
    const Metrics& metrics() const { return metrics_; }
    const TestSet& test_set() const { return test_set_; }
    const ProtocolParams& params() const { return params_; }
    Token vault() const { return vault_; }
    const std::vector<HistoryRecord>& history() const { return history_; }
    std::int64_t normal_count() const { return normal_count_; }
    std::int64_t attack_count() const { return attack_count_; }
    const std::vector<Challenge>& open_challenges() const { return challenges_; }

    // Token flow tallies for the conservation invariant:
    // stakes_in + clawbacks_in == refunds_out + rewards_out + vault.
    Token total_stakes_in() const { return total_stakes_in_; }
    Token total_refunds_out() const { return total_refunds_out_; }
    Token total_rewards_out() const { return total_rewards_out_; }
    Token total_clawbacks_in() const { return total_clawbacks_in_; }
    void assert_conservation() const;

    // Canonical byte image of the protocol state; history, vault, and flow
    // tallies are excluded so rejected proposals compare bit-identical.
    std::vector<std::uint8_t> core_state_bytes() const;
    // Core bytes plus vault, tallies, and history lines.
    std::vector<std::uint8_t> full_state_bytes() const;

  private:
    struct AcceptRecord {
        std::uint64_t accepted_at{0};
        std::string proposer;
        Token bonus_paid{0};
    };

    struct PriorEntry {
        QuantizedModel model;
        Metrics metrics;
        std::uint64_t installed_version{0};  // version whose acceptance displaced this state
    };

    void log(std::uint64_t time, std::string kind, const bridge::Hash256& digest, bool accepted,
             std::string detail, const Metrics& before, const Metrics& after, Token reward);
    bool quorum_reached(const std::map<std::string, std::pair<Token, bool>>& votes,
                        const AccountBook& accounts) const;
    static void require_weight(const std::string& account, Token weight, const AccountBook& accounts);

    QuantizedModel model_;
    Metrics metrics_;
    TestSet test_set_;
    ProtocolParams params_;
    Token vault_{0};
    std::vector<HistoryRecord> history_;
    std::deque<PriorEntry> prior_models_;
    std::int64_t normal_count_{0};
    std::int64_t attack_count_{0};
    std::vector<Challenge> challenges_;
    std::set<std::uint64_t> challenged_versions_;
    std::map<std::uint64_t, AcceptRecord> accept_records_;
    std::vector<PendingTestSetChange> pending_changes_;
    std::uint64_t next_change_id_{1};
    Token total_stakes_in_{0};
    Token total_refunds_out_{0};
    Token total_rewards_out_{0};
    Token total_clawbacks_in_{0};
};

bridge::Hash256 proposal_digest(const Proposal& proposal);

// Two-arm poisoning replay: a PoIm-governed model against an unfiltered one
// that applies every micro step. Both start from the same model obtained by
// perceptron passes over the seed pool.
struct StressStep {
    int step{0};
    bool adversarial{false};
    bool accepted{false};
    Metrics poim;
    Metrics unfiltered;
};

struct StressConfig {
    int steps{100};
    double adversarial_fraction{0.5};
    std::uint64_t rng_seed{1};
    Token stake{10};
    int max_bootstrap_passes{50};
};

std::vector<StressStep> stress_test(const std::vector<TestSample>& seed_pool, const TestSet& test_set,
                                    const inference::ModelArch& arch, Scale scale, const ProtocolParams& params,
                                    const StressConfig& config);

// Plain perceptron passes until the pool is fully fitted or the pass budget
// runs out; the unfiltered baseline and stress bootstrap share this.
QuantizedModel perceptron_fit(QuantizedModel model, const std::vector<TestSample>& pool, const Int128& eta_raw,
                              int max_passes);

}  // namespace poimsim::poim
