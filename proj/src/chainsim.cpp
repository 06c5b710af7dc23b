// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/chainsim.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace poimsim::chainsim {

std::string Event::to_line() const {
    std::ostringstream out;
    out << "block=" << block << " time=" << time << " kind=" << kind << " detail=" << detail;
    return out.str();
}

void Ledger::advance_time(std::uint64_t seconds) {
    if (seconds == 0) fail(Err::kConfigError, "advance_time needs a positive duration");
    block_timestamp += seconds;
    block_number += 1;
}

void Ledger::log(std::string kind, std::string detail) {
    events.push_back(Event{block_number, block_timestamp, std::move(kind), std::move(detail)});
}

namespace {

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(value >> shift));
}

void append_string(std::vector<std::uint8_t>& out, const std::string& text) {
    append_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
}

}  // namespace

std::vector<std::uint8_t> Ledger::state_bytes() const {
    std::vector<std::uint8_t> out;
    append_u64(out, chain_id);
    append_u64(out, block_number);
    append_u64(out, block_timestamp);
    append_u64(out, static_cast<std::uint64_t>(block_gas_limit));
    append_u64(out, accounts.size());
    for (const auto& [name, balance] : accounts) {
        append_string(out, name);
        append_u64(out, static_cast<std::uint64_t>(balance));
    }
    append_u64(out, events.size());
    for (const Event& event : events) append_string(out, event.to_line());
    return out;
}

namespace {

inference::FloatModel zero_model(const inference::ModelArch& arch) {
    inference::FloatModel model;
    model.arch = arch;
    model.weights.assign(arch.weight_count(), 0.0);
    model.biases.assign(arch.bias_count(), 0.0);
    return model;
}

}  // namespace

Simulation::Simulation(Setup setup)
    : setup_(std::move(setup)),
      state_{Ledger{2, 0, 0, setup_.initial_accounts, {}, gascost::kBlockGasLimit},
             Ledger{1, 0, 0, {}, {}, gascost::kBlockGasLimit},
             bridge::init_l2(setup_.initial_model.weights.empty() ? zero_model(setup_.arch) : setup_.initial_model,
                             setup_.scale, setup_.test_set, setup_.params),
             bridge::L1InferenceContract{}},
      rng_(setup_.seed) {
    state_.l2.log("genesis", "poim contract installed, model " + setup_.arch.id());
    state_.l1.log("genesis", "inference contract deployed");
}

std::int64_t Simulation::execute(const SimTx& tx, std::string& detail) {
    const std::uint64_t now = state_.l2.block_timestamp;
    AccountBook& book = state_.l2.accounts;

    return std::visit(
        [&](const auto& op) -> std::int64_t {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, TxFund>) {
                if (op.amount < 0) fail(Err::kConfigError, "negative funding amount");
                book[op.account] += op.amount;
                detail = "funded " + op.account + " +" + std::to_string(op.amount);
                return gascost::kBaseTxGas;
            } else if constexpr (std::is_same_v<T, TxPropose>) {
                poim::Proposal proposal{tx.sender, op.stake, op.sample, setup_.params.eta_raw, now};
                const poim::Decision decision = state_.governance.propose_update(proposal, now, book);
                detail = std::string("proposal ") + (decision.accepted ? "accepted" : "rejected") + " reason=" +
                         poim::reject_reason_name(decision.reason) + " version=" +
                         std::to_string(decision.version_after);
                return gascost::kBaseTxGas;
            } else if constexpr (std::is_same_v<T, TxOpenChallenge>) {
                state_.governance.open_challenge(op.version, tx.sender, op.stake, now, book);
                detail = "challenge opened on v" + std::to_string(op.version);
                return gascost::kBaseTxGas;
            } else if constexpr (std::is_same_v<T, TxVote>) {
                state_.governance.vote(op.version, tx.sender, op.weight, op.support, now, book);
                detail = std::string("vote ") + (op.support ? "yes" : "no") + " on v" + std::to_string(op.version);
                return gascost::kBaseTxGas;
            } else if constexpr (std::is_same_v<T, TxResolveChallenge>) {
                const poim::ChallengeOutcome outcome = state_.governance.resolve_challenge(op.version, now, book);
                detail = "challenge v" + std::to_string(op.version) + ": " + outcome.detail;
                return gascost::kBaseTxGas;
            } else if constexpr (std::is_same_v<T, TxTestsetChange>) {
                const std::uint64_t id =
                    state_.governance.propose_testset_change(op.change, tx.sender, op.stake, now, book);
                detail = "testset change " + std::to_string(id) + " proposed";
                return gascost::kBaseTxGas;
            } else if constexpr (std::is_same_v<T, TxVoteTestset>) {
                state_.governance.vote_testset(op.id, tx.sender, op.weight, op.support, now, book);
                detail = std::string("testset vote ") + (op.support ? "yes" : "no") + " on change " +
                         std::to_string(op.id);
                return gascost::kBaseTxGas;
            } else if constexpr (std::is_same_v<T, TxResolveTestset>) {
                const bool approved = state_.governance.resolve_testset_change(op.id, now, book);
                detail = "testset change " + std::to_string(op.id) + (approved ? " approved" : " dismissed");
                return gascost::kBaseTxGas;
            } else if constexpr (std::is_same_v<T, TxInfer>) {
                const int label = state_.inference.classify(op.x);
                const gascost::GasReport report = gascost::gas_for_model(*state_.inference.model());
                detail = "inference label=" + std::to_string(label);
                return report.total;
            } else if constexpr (std::is_same_v<T, TxCommit>) {
                const bridge::Commitment commitment =
                    bridge::make_commitment(state_.governance.model(), state_.l1.block_number);
                state_.inference.record_commitment(commitment);
                detail = "commitment " + bridge::to_hex(commitment.hash).substr(0, 16);
                return gascost::kBaseTxGas;
            } else {
                static_assert(std::is_same_v<T, TxTransfer>);
                const std::vector<std::uint8_t> payload = bridge::serialize(state_.governance.model());
                const bridge::TransferStatus status = state_.inference.transfer_and_verify(payload);
                if (status == bridge::TransferStatus::kRejected) fail(Err::kHashMismatch, "payload hash mismatch");
                bridge::assert_model_fields_equal(*state_.inference.model(), state_.governance.model());
                detail = "transfer accepted, version " + std::to_string(state_.inference.model()->version);
                return gascost::kBaseTxGas;
            }
        },
        tx.op);
}

namespace {

bool targets_l1(const TxOp& op) {
    return std::holds_alternative<TxInfer>(op) || std::holds_alternative<TxCommit>(op) ||
           std::holds_alternative<TxTransfer>(op);
}

}  // namespace

Receipt Simulation::submit(const SimTx& tx) {
    Receipt receipt;
    if (tx.gas_limit > gascost::kBlockGasLimit) {
        receipt.status = err_name(Err::kOutOfGas);
        receipt.detail = "declared gas above block limit";
        return receipt;
    }
    if (!state_.l2.accounts.count(tx.sender)) {
        receipt.status = err_name(Err::kUnknownAccount);
        receipt.detail = "unknown sender '" + tx.sender + "'";
        return receipt;
    }

    Ledger& target = targets_l1(tx.op) ? state_.l1 : state_.l2;
    target.block_number += 1;
    target.block_timestamp += 1;

    const State snapshot = state_;
    std::string detail;
    try {
        const std::int64_t gas = execute(tx, detail);
        if (gas > tx.gas_limit) fail(Err::kOutOfGas, "metered " + std::to_string(gas) + " gas");
        receipt.ok = true;
        receipt.gas_used = gas;
        receipt.status = "ok";
        receipt.detail = detail;
        (targets_l1(tx.op) ? state_.l1 : state_.l2)
            .log("tx", "sender=" + tx.sender + " status=ok gas=" + std::to_string(gas) + " " + detail);
    } catch (const Error& e) {
        state_ = snapshot;
        receipt.ok = false;
        receipt.gas_used = 0;
        receipt.status = err_name(e.code());
        receipt.detail = e.what();
        Ledger& after = targets_l1(tx.op) ? state_.l1 : state_.l2;
        after.block_number += 1;
        after.block_timestamp += 1;
        after.log("tx_failed", "sender=" + tx.sender + " status=" + receipt.status);
    }
    return receipt;
}

int Simulation::view_infer(std::span<const Int128> x) const { return state_.inference.classify(x); }

bridge::Hash256 Simulation::state_hash() const {
    std::vector<std::uint8_t> bytes = state_.l2.state_bytes();
    const std::vector<std::uint8_t> l1 = state_.l1.state_bytes();
    bytes.insert(bytes.end(), l1.begin(), l1.end());
    const std::vector<std::uint8_t> governance = state_.governance.full_state_bytes();
    bytes.insert(bytes.end(), governance.begin(), governance.end());
    const std::vector<std::uint8_t> inference = state_.inference.state_bytes();
    bytes.insert(bytes.end(), inference.begin(), inference.end());
    return bridge::keccak256(bytes);
}

std::vector<BenchRow> Simulation::throughput_bench(const std::vector<int>& batch_sizes) const {
    if (!state_.inference.model()) fail(Err::kNoModelInstalled, "bench needs an installed L1 model");
    const std::vector<poim::TestSample>& samples = setup_.test_set.samples;
    std::vector<BenchRow> rows;
    rows.reserve(batch_sizes.size());
    for (int batch : batch_sizes) {
        if (batch < 1) fail(Err::kConfigError, "batch sizes must be positive");
        const auto start = std::chrono::steady_clock::now();
        volatile int sink = 0;
        for (int i = 0; i < batch; ++i) {
            const poim::TestSample& s = samples[static_cast<std::size_t>(i) % samples.size()];
            sink = sink + view_infer(s.features);
        }
        const auto stop = std::chrono::steady_clock::now();
        const double total = std::chrono::duration<double>(stop - start).count();
        rows.push_back(BenchRow{batch, total, total / batch});
    }
    return rows;
}

Scenario Scenario::parse(std::istream& in) {
    Scenario scenario;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream stream(line);
        std::vector<std::string> tokens;
        std::string token;
        while (stream >> token) tokens.push_back(token);
        if (tokens.empty()) continue;
        scenario.steps.push_back(Step{line_no, std::move(tokens)});
    }
    return scenario;
}

Scenario Scenario::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::kEmptyInput, "cannot open scenario '" + path + "'");
    return parse(in);
}

namespace {

std::int64_t to_int(const std::string& token, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const std::int64_t value = std::stoll(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        fail(Err::kParseError, "scenario line " + std::to_string(line_no) + ": bad integer '" + token + "'");
    }
}

double to_double(const std::string& token, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double value = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        fail(Err::kParseError, "scenario line " + std::to_string(line_no) + ": bad number '" + token + "'");
    }
}

const poim::TestSample& pool_sample(const Simulation& sim, std::int64_t index, std::size_t line_no) {
    const std::vector<poim::TestSample>& pool = sim.setup().train_pool;
    if (index < 0 || static_cast<std::size_t>(index) >= pool.size()) {
        fail(Err::kParseError, "scenario line " + std::to_string(line_no) + ": pool index out of range");
    }
    return pool[static_cast<std::size_t>(index)];
}

const poim::TestSample& test_sample(const Simulation& sim, std::int64_t index, std::size_t line_no) {
    const std::vector<poim::TestSample>& samples = sim.setup().test_set.samples;
    if (index < 0 || static_cast<std::size_t>(index) >= samples.size()) {
        fail(Err::kParseError, "scenario line " + std::to_string(line_no) + ": test index out of range");
    }
    return samples[static_cast<std::size_t>(index)];
}

void expect_tokens(const Scenario::Step& step, std::size_t count) {
    if (step.tokens.size() != count) {
        fail(Err::kParseError, "scenario line " + std::to_string(step.line_no) + ": '" + step.tokens[0] +
                                   "' expects " + std::to_string(count - 1) + " arguments");
    }
}

}  // namespace

ScenarioResult run_scenario(Simulation& sim, const Scenario& scenario) {
    ScenarioResult result;
    const auto emit_receipt = [&](const Scenario::Step& step, const Receipt& receipt) {
        std::ostringstream out;
        out << "step=" << step.line_no << " op=" << step.tokens[0] << " status=" << receipt.status
            << " gas=" << receipt.gas_used;
        if (!receipt.detail.empty()) out << " detail=" << receipt.detail;
        result.log_lines.push_back(out.str());
    };

    for (const Scenario::Step& step : scenario.steps) {
        const std::string& op = step.tokens[0];
        if (op == "advance") {
            expect_tokens(step, 2);
            const std::int64_t seconds = to_int(step.tokens[1], step.line_no);
            sim.l2().advance_time(static_cast<std::uint64_t>(seconds));
            sim.l1().advance_time(static_cast<std::uint64_t>(seconds));
            result.log_lines.push_back("step=" + std::to_string(step.line_no) + " op=advance seconds=" +
                                       std::to_string(seconds));
        } else if (op == "fund") {
            expect_tokens(step, 3);
            SimTx tx{"faucet", gascost::kBlockGasLimit,
                     TxFund{step.tokens[1], to_int(step.tokens[2], step.line_no)}};
            sim.l2().accounts.try_emplace("faucet", 0);
            emit_receipt(step, sim.submit(tx));
        } else if (op == "propose" || op == "propose-flip" || op == "propose-noise") {
            if (op == "propose-noise") expect_tokens(step, 5);
            else expect_tokens(step, 4);
            poim::TestSample sample = pool_sample(sim, to_int(step.tokens[3], step.line_no), step.line_no);
            if (op == "propose-flip") sample.label = 1 - sample.label;
            if (op == "propose-noise") {
                const double sigma = to_double(step.tokens[4], step.line_no);
                for (Int128& f : sample.features) {
                    f += fixedpoint::to_fixed(sim.scenario_rng().normal() * sigma, sim.setup().scale);
                }
            }
            SimTx tx{step.tokens[1], gascost::kBlockGasLimit,
                     TxPropose{std::move(sample), to_int(step.tokens[2], step.line_no)}};
            emit_receipt(step, sim.submit(tx));
        } else if (op == "challenge") {
            expect_tokens(step, 4);
            SimTx tx{step.tokens[1], gascost::kBlockGasLimit,
                     TxOpenChallenge{static_cast<std::uint64_t>(to_int(step.tokens[3], step.line_no)),
                                     to_int(step.tokens[2], step.line_no)}};
            emit_receipt(step, sim.submit(tx));
        } else if (op == "vote") {
            expect_tokens(step, 5);
            SimTx tx{step.tokens[1], gascost::kBlockGasLimit,
                     TxVote{static_cast<std::uint64_t>(to_int(step.tokens[4], step.line_no)),
                            to_int(step.tokens[2], step.line_no), step.tokens[3] == "yes"}};
            emit_receipt(step, sim.submit(tx));
        } else if (op == "resolve") {
            expect_tokens(step, 3);
            SimTx tx{step.tokens[1], gascost::kBlockGasLimit,
                     TxResolveChallenge{static_cast<std::uint64_t>(to_int(step.tokens[2], step.line_no))}};
            emit_receipt(step, sim.submit(tx));
        } else if (op == "testset-add" || op == "testset-remove") {
            expect_tokens(step, 4);
            poim::TestSetChange change;
            if (op == "testset-add") {
                change.kind = poim::TestSetChange::Kind::kAdd;
                change.sample = pool_sample(sim, to_int(step.tokens[3], step.line_no), step.line_no);
            } else {
                change.kind = poim::TestSetChange::Kind::kRemove;
                change.index = static_cast<std::size_t>(to_int(step.tokens[3], step.line_no));
            }
            SimTx tx{step.tokens[1], gascost::kBlockGasLimit,
                     TxTestsetChange{std::move(change), to_int(step.tokens[2], step.line_no)}};
            emit_receipt(step, sim.submit(tx));
        } else if (op == "vote-ts") {
            expect_tokens(step, 5);
            SimTx tx{step.tokens[1], gascost::kBlockGasLimit,
                     TxVoteTestset{static_cast<std::uint64_t>(to_int(step.tokens[4], step.line_no)),
                                   to_int(step.tokens[2], step.line_no), step.tokens[3] == "yes"}};
            emit_receipt(step, sim.submit(tx));
        } else if (op == "resolve-ts") {
            expect_tokens(step, 3);
            SimTx tx{step.tokens[1], gascost::kBlockGasLimit,
                     TxResolveTestset{static_cast<std::uint64_t>(to_int(step.tokens[2], step.line_no))}};
            emit_receipt(step, sim.submit(tx));
        } else if (op == "infer") {
            if (step.tokens.size() != 2 && step.tokens.size() != 3) expect_tokens(step, 2);
            const poim::TestSample& sample = test_sample(sim, to_int(step.tokens[1], step.line_no), step.line_no);
            SimTx tx{"caller", gascost::kBlockGasLimit, TxInfer{sample.features}};
            if (step.tokens.size() == 3) tx.gas_limit = to_int(step.tokens[2], step.line_no);
            sim.l2().accounts.try_emplace("caller", 0);
            emit_receipt(step, sim.submit(tx));
        } else if (op == "view-infer") {
            expect_tokens(step, 2);
            const poim::TestSample& sample = test_sample(sim, to_int(step.tokens[1], step.line_no), step.line_no);
            try {
                const int label = sim.view_infer(sample.features);
                result.log_lines.push_back("step=" + std::to_string(step.line_no) + " op=view-infer label=" +
                                           std::to_string(label) + " gas=0");
            } catch (const Error& e) {
                result.log_lines.push_back("step=" + std::to_string(step.line_no) + " op=view-infer status=" +
                                           err_name(e.code()) + " gas=0");
            }
        } else if (op == "commit") {
            expect_tokens(step, 1);
            sim.l2().accounts.try_emplace("bridge", 0);
            emit_receipt(step, sim.submit(SimTx{"bridge", gascost::kBlockGasLimit, TxCommit{}}));
        } else if (op == "transfer") {
            expect_tokens(step, 1);
            sim.l2().accounts.try_emplace("bridge", 0);
            emit_receipt(step, sim.submit(SimTx{"bridge", gascost::kBlockGasLimit, TxTransfer{}}));
        } else if (op == "stress") {
            expect_tokens(step, 3);
            poim::StressConfig config;
            config.steps = static_cast<int>(to_int(step.tokens[1], step.line_no));
            config.adversarial_fraction = to_double(step.tokens[2], step.line_no);
            config.rng_seed = sim.setup().seed;
            const std::vector<poim::StressStep> trace =
                poim::stress_test(sim.setup().train_pool, sim.setup().test_set, sim.setup().arch,
                                  sim.setup().scale, sim.setup().params, config);
            for (const poim::StressStep& row : trace) {
                std::ostringstream out;
                out << "stress step=" << row.step << " adversarial=" << row.adversarial
                    << " accepted=" << row.accepted << " poim_f1=" << row.poim.f1
                    << " unfiltered_f1=" << row.unfiltered.f1 << " poim_acc=" << row.poim.acc
                    << " unfiltered_acc=" << row.unfiltered.acc;
                result.log_lines.push_back(out.str());
            }
        } else if (op == "bench") {
            expect_tokens(step, 2);
            std::vector<int> batches;
            std::istringstream list(step.tokens[1]);
            std::string item;
            while (std::getline(list, item, ',')) batches.push_back(static_cast<int>(to_int(item, step.line_no)));
            try {
                for (const BenchRow& row : sim.throughput_bench(batches)) {
                    std::ostringstream out;
                    out << "bench batch=" << row.batch << " total_seconds=" << row.total_seconds
                        << " per_sample_seconds=" << row.per_sample_seconds;
                    result.bench_lines.push_back(out.str());
                }
            } catch (const Error& e) {
                result.bench_lines.push_back("bench status=" + std::string(err_name(e.code())));
            }
        } else {
            fail(Err::kParseError, "scenario line " + std::to_string(step.line_no) + ": unknown op '" + op + "'");
        }
    }
    return result;
}

}  // namespace poimsim::chainsim
