// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "poimsim/bridge.hpp"
#include "poimsim/gascost.hpp"
#include "poimsim/poim.hpp"
#include "poimsim/rng.hpp"

namespace poimsim::chainsim {

using fixedpoint::Int128;
using poim::AccountBook;
using poim::Token;

struct Event {
    std::uint64_t block{0};
    std::uint64_t time{0};
    std::string kind;
    std::string detail;

    std::string to_line() const;
};

// Append-only single-writer ledger; one transaction per block.
struct Ledger {
    std::uint64_t chain_id{1};
    std::uint64_t block_number{0};
    std::uint64_t block_timestamp{0};
    AccountBook accounts;
    std::vector<Event> events;
    std::int64_t block_gas_limit{gascost::kBlockGasLimit};

    void advance_time(std::uint64_t seconds);
    void log(std::string kind, std::string detail);
    std::vector<std::uint8_t> state_bytes() const;
};

// Transaction payloads. Proposals and governance target the L2 chain;
// inference, commitments and transfers target L1.
struct TxFund {
    std::string account;
    Token amount{0};
};
struct TxPropose {
    poim::TestSample sample;
    Token stake{0};
};
struct TxOpenChallenge {
    std::uint64_t version{0};
    Token stake{0};
};
struct TxVote {
    std::uint64_t version{0};
    Token weight{0};
    bool support{true};
};
struct TxResolveChallenge {
    std::uint64_t version{0};
};
struct TxTestsetChange {
    poim::TestSetChange change;
    Token stake{0};
};
struct TxVoteTestset {
    std::uint64_t id{0};
    Token weight{0};
    bool support{true};
};
struct TxResolveTestset {
    std::uint64_t id{0};
};
struct TxInfer {
    std::vector<Int128> x;
};
struct TxCommit {};
struct TxTransfer {};

using TxOp = std::variant<TxFund, TxPropose, TxOpenChallenge, TxVote, TxResolveChallenge, TxTestsetChange,
                          TxVoteTestset, TxResolveTestset, TxInfer, TxCommit, TxTransfer>;

struct SimTx {
    std::string sender;
    std::int64_t gas_limit{gascost::kBlockGasLimit};
    TxOp op;
};

struct Receipt {
    bool ok{false};
    std::int64_t gas_used{0};
    std::string status;  // "ok" or the failure name
    std::string detail;
};

struct BenchRow {
    int batch{0};
    double total_seconds{0.0};
    double per_sample_seconds{0.0};
};

struct Setup {
    fixedpoint::Scale scale{};
    inference::ModelArch arch;
    inference::FloatModel initial_model;  // zero model of `arch` when empty
    poim::ProtocolParams params;
    poim::TestSet test_set;
    std::vector<poim::TestSample> train_pool;
    AccountBook initial_accounts;
    std::uint64_t seed{1};
};

// Two deterministic ledgers (L2 governance, L1 inference) plus the bridged
// contracts. Transactions execute atomically: any failure restores the
// pre-transaction state and logs only the failure event.
class Simulation {
  public:
    explicit Simulation(Setup setup);

    Receipt submit(const SimTx& tx);

    // Read-only calls: identical result to a metered submit, zero gas, no
    // state change.
    int view_infer(std::span<const Int128> x) const;
    poim::Metrics view_metrics() const { return state_.governance.metrics(); }

    bridge::Hash256 state_hash() const;

    std::vector<BenchRow> throughput_bench(const std::vector<int>& batch_sizes) const;

    const Ledger& l2() const { return state_.l2; }
    const Ledger& l1() const { return state_.l1; }
    Ledger& l2() { return state_.l2; }
    Ledger& l1() { return state_.l1; }
    const poim::PoimContract& governance() const { return state_.governance; }
    const bridge::L1InferenceContract& l1_contract() const { return state_.inference; }
    const Setup& setup() const { return setup_; }
    rng::DeterministicRng& scenario_rng() { return rng_; }

  private:
    struct State {
        Ledger l2;
        Ledger l1;
        poim::PoimContract governance;
        bridge::L1InferenceContract inference;
    };

    std::int64_t execute(const SimTx& tx, std::string& detail);

    Setup setup_;
    State state_;
    rng::DeterministicRng rng_;
};

// Line-oriented scenario script; '#' starts a comment.
struct Scenario {
    struct Step {
        std::size_t line_no{0};
        std::vector<std::string> tokens;
    };
    std::vector<Step> steps;

    static Scenario parse(std::istream& in);
    static Scenario parse_file(const std::string& path);
};

struct ScenarioResult {
    std::vector<std::string> log_lines;    // deterministic per (setup, scenario)
    std::vector<std::string> bench_lines;  // wall-clock timings, report only
};

ScenarioResult run_scenario(Simulation& sim, const Scenario& scenario);

}  // namespace poimsim::chainsim
