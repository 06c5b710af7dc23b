// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/poim.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "poimsim/rng.hpp"

namespace poimsim::poim {

using fixedpoint::idiv128;

bool weakly_dominates(const Metrics& candidate, const Metrics& baseline) {
    return candidate.acc >= baseline.acc && candidate.prec >= baseline.prec && candidate.rec >= baseline.rec &&
           candidate.f1 >= baseline.f1;
}

bool strictly_improves(const Metrics& candidate, const Metrics& baseline) {
    return candidate.acc > baseline.acc || candidate.prec > baseline.prec || candidate.rec > baseline.rec ||
           candidate.f1 > baseline.f1;
}

Metrics metrics_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn,
                            std::int64_t metric_scale) {
    const std::int64_t n = tp + fp + tn + fn;
    if (n <= 0) fail(Err::kEmptyTestSet, "metrics need at least one sample");
    Metrics m;
    m.acc = (tp + tn) * metric_scale / n;
    m.prec = tp + fp > 0 ? tp * metric_scale / (tp + fp) : 0;
    m.rec = tp + fn > 0 ? tp * metric_scale / (tp + fn) : 0;
    m.f1 = m.prec + m.rec > 0 ? 2 * m.prec * m.rec / (m.prec + m.rec) : 0;
    return m;
}

void TestSet::validate() const {
    if (samples.empty()) fail(Err::kEmptyTestSet, "test set is empty");
    bool has_normal = false;
    bool has_attack = false;
    for (const TestSample& s : samples) {
        if (s.label == 0) has_normal = true;
        else if (s.label == 1) has_attack = true;
        else fail(Err::kParseError, "test labels must be 0 or 1");
    }
    if (!has_normal || !has_attack) fail(Err::kWouldEmptyClass, "test set needs both classes");
}

Metrics evaluate(const QuantizedModel& model, const TestSet& test_set, std::int64_t metric_scale) {
    test_set.validate();
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;
    for (const TestSample& s : test_set.samples) {
        const int predicted = inference::classify_input(s.features, model);
        if (s.label == 1) {
            predicted == 1 ? ++tp : ++fn;
        } else {
            predicted == 1 ? ++fp : ++tn;
        }
    }
    return metrics_from_counts(tp, fp, tn, fn, metric_scale);
}

const char* reject_reason_name(RejectReason reason) {
    switch (reason) {
        case RejectReason::kNone: return "-";
        case RejectReason::kMetricDegraded: return "MetricDegraded";
        case RejectReason::kNoImprovement: return "NoImprovement";
        case RejectReason::kImbalanceBlocked: return "ImbalanceBlocked";
    }
    return "Unknown";
}

namespace {

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(value >> shift));
}

void append_i64(std::vector<std::uint8_t>& out, std::int64_t value) {
    append_u64(out, static_cast<std::uint64_t>(value));
}

void append_int128(std::vector<std::uint8_t>& out, const Int128& value) {
    const bool negative = value < 0;
    out.push_back(negative ? 1 : 0);
    Int128 magnitude = negative ? Int128(-value) : value;
    for (int byte = 15; byte >= 0; --byte) {
        out.push_back(static_cast<std::uint8_t>((magnitude >> (byte * 8)) & 0xff));
    }
}

void append_string(std::vector<std::uint8_t>& out, const std::string& text) {
    append_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
}

void append_metrics(std::vector<std::uint8_t>& out, const Metrics& m) {
    append_i64(out, m.acc);
    append_i64(out, m.prec);
    append_i64(out, m.rec);
    append_i64(out, m.f1);
}

void append_sample(std::vector<std::uint8_t>& out, const TestSample& s) {
    append_u64(out, s.features.size());
    for (const Int128& f : s.features) append_int128(out, f);
    append_i64(out, s.label);
}

void append_model(std::vector<std::uint8_t>& out, const QuantizedModel& model) {
    out.push_back(static_cast<std::uint8_t>(model.arch.kind));
    append_i64(out, model.arch.input_dim);
    append_u64(out, model.arch.layer_sizes.size());
    for (int s : model.arch.layer_sizes) append_i64(out, s);
    append_i64(out, model.arch.filters);
    append_i64(out, model.arch.kernel);
    append_i64(out, model.arch.units);
    append_i64(out, model.arch.timesteps);
    append_u64(out, model.arch.nodes.size());
    for (const inference::TreeNode& node : model.arch.nodes) {
        append_i64(out, node.feature);
        append_i64(out, node.left);
        append_i64(out, node.right);
        append_i64(out, node.label);
    }
    append_i64(out, model.scale.exponent);
    append_u64(out, model.version);
    append_u64(out, model.weights.size());
    for (const Int128& w : model.weights) append_int128(out, w);
    append_u64(out, model.biases.size());
    for (const Int128& b : model.biases) append_int128(out, b);
}

std::string hex_prefix(const bridge::Hash256& digest) {
    return bridge::to_hex(digest).substr(0, 16);
}

}  // namespace

bridge::Hash256 proposal_digest(const Proposal& proposal) {
    std::vector<std::uint8_t> bytes;
    append_string(bytes, proposal.proposer);
    append_i64(bytes, proposal.stake);
    append_sample(bytes, proposal.sample);
    append_int128(bytes, proposal.eta_raw);
    append_u64(bytes, proposal.submitted_at);
    return bridge::keccak256(bytes);
}

PoimContract::PoimContract(QuantizedModel initial, TestSet test_set, ProtocolParams params)
    : model_(std::move(initial)), test_set_(std::move(test_set)), params_(std::move(params)) {
    model_.validate();
    test_set_.validate();
    if (params_.quorum_den <= 0 || params_.quorum_num < 0) fail(Err::kConfigError, "bad quorum fraction");
    if (params_.metric_scale < 1) fail(Err::kConfigError, "metric scale must be positive");
    metrics_ = evaluate(model_, test_set_, params_.metric_scale);
    log(0, "init", bridge::keccak256(core_state_bytes()), true, "installed", metrics_, metrics_, 0);
}

void PoimContract::log(std::uint64_t time, std::string kind, const bridge::Hash256& digest, bool accepted,
                       std::string detail, const Metrics& before, const Metrics& after, Token reward) {
    HistoryRecord record;
    record.seq = history_.size();
    record.time = time;
    record.kind = std::move(kind);
    record.digest = hex_prefix(digest);
    record.accepted = accepted;
    record.detail = std::move(detail);
    record.before = before;
    record.after = after;
    record.reward = reward;
    record.vault_after = vault_;
    record.version_after = model_.version;
    history_.push_back(std::move(record));
}

std::string HistoryRecord::to_line() const {
    std::ostringstream out;
    out << "seq=" << seq << " time=" << time << " kind=" << kind << " digest=" << digest
        << " decision=" << (accepted ? "accepted" : "rejected") << " detail=" << detail << " acc=" << before.acc
        << '>' << after.acc << " prec=" << before.prec << '>' << after.prec << " rec=" << before.rec << '>'
        << after.rec << " f1=" << before.f1 << '>' << after.f1 << " reward=" << reward
        << " vault=" << vault_after << " version=" << version_after;
    return out.str();
}

Token PoimContract::reward_for(Token stake, const Metrics& before, const Metrics& after) const {
    Token bonus = params_.alpha_acc * (after.acc - before.acc) + params_.alpha_prec * (after.prec - before.prec) +
                  params_.alpha_rec * (after.rec - before.rec) + params_.alpha_f1 * (after.f1 - before.f1);
    bonus = std::clamp<Token>(bonus, 0, vault_);
    return stake + bonus;
}

Decision PoimContract::propose_update(const Proposal& proposal, std::uint64_t now, AccountBook& accounts) {
    if (proposal.stake < params_.min_stake) {
        fail(Err::kInsufficientStake, "stake below protocol minimum");
    }
    const auto account = accounts.find(proposal.proposer);
    if (account == accounts.end()) fail(Err::kUnknownAccount, "unknown proposer '" + proposal.proposer + "'");
    if (account->second < proposal.stake) fail(Err::kInsufficientStake, "proposer balance below stake");
    if (static_cast<int>(proposal.sample.features.size()) != model_.arch.input_dim) {
        fail(Err::kDimensionMismatch, "proposal sample dimension mismatch");
    }

    const bridge::Hash256 digest = proposal_digest(proposal);

    Decision decision;
    decision.before = metrics_;
    decision.digest = digest;

    // Class-imbalance guard: flow control, not misbehavior. The escrow and
    // refund cancel, so no balance moves.
    if (proposal.sample.label == 0 && normal_count_ >= params_.imbalance_rho * attack_count_) {
        total_stakes_in_ += proposal.stake;
        total_refunds_out_ += proposal.stake;
        decision.accepted = false;
        decision.reason = RejectReason::kImbalanceBlocked;
        decision.after = metrics_;
        decision.version_after = model_.version;
        log(now, "proposal", digest, false, reject_reason_name(decision.reason), metrics_, metrics_, 0);
        return decision;
    }

    // Evaluate before any token movement so a failed step mutates nothing.
    const QuantizedModel candidate =
        inference::micro_train_step(model_, proposal.sample.features, proposal.sample.label, proposal.eta_raw);
    const Metrics after = evaluate(candidate, test_set_, params_.metric_scale);
    decision.after = after;

    account->second -= proposal.stake;
    total_stakes_in_ += proposal.stake;

    if (weakly_dominates(after, metrics_) && strictly_improves(after, metrics_)) {
        prior_models_.push_back(PriorEntry{model_, metrics_, candidate.version});
        while (prior_models_.size() > params_.prior_depth) prior_models_.pop_front();

        const Token reward = reward_for(proposal.stake, metrics_, after);
        const Token bonus = reward - proposal.stake;
        vault_ -= bonus;
        account->second += reward;
        total_rewards_out_ += reward;

        model_ = candidate;
        metrics_ = after;
        proposal.sample.label == 0 ? ++normal_count_ : ++attack_count_;
        accept_records_[model_.version] = AcceptRecord{now, proposal.proposer, bonus};

        decision.accepted = true;
        decision.reward = reward;
        decision.version_after = model_.version;
        log(now, "proposal", digest, true, "improved", decision.before, after, reward);
    } else {
        vault_ += proposal.stake;  // slash
        decision.accepted = false;
        decision.reason = weakly_dominates(after, metrics_) ? RejectReason::kNoImprovement
                                                            : RejectReason::kMetricDegraded;
        decision.version_after = model_.version;
        log(now, "proposal", digest, false, reject_reason_name(decision.reason), decision.before, after, 0);
    }
    return decision;
}

void PoimContract::require_weight(const std::string& account, Token weight, const AccountBook& accounts) {
    if (weight <= 0) fail(Err::kInsufficientStake, "voting weight must be positive");
    const auto it = accounts.find(account);
    if (it == accounts.end()) fail(Err::kUnknownAccount, "unknown account '" + account + "'");
    if (it->second < weight) fail(Err::kInsufficientStake, "voting weight exceeds balance");
}

void PoimContract::open_challenge(std::uint64_t version, const std::string& challenger, Token stake,
                                  std::uint64_t now, const AccountBook& accounts) {
    const auto record = accept_records_.find(version);
    if (record == accept_records_.end()) fail(Err::kUnknownVersion, "version was never accepted");
    if (now > record->second.accepted_at + params_.challenge_window_seconds) {
        fail(Err::kWindowExpired, "challenge window closed");
    }
    if (challenged_versions_.count(version)) fail(Err::kDuplicateChallenge, "version already challenged");
    require_weight(challenger, stake, accounts);

    Challenge challenge;
    challenge.target_version = version;
    challenge.opened_at = now;
    challenge.deadline = now + params_.challenge_window_seconds;
    challenge.votes[challenger] = {stake, true};  // opening stake backs the rollback
    challenges_.push_back(std::move(challenge));
    challenged_versions_.insert(version);
    log(now, "challenge", bridge::keccak256("challenge-open-" + std::to_string(version)), true,
        "opened v" + std::to_string(version), metrics_, metrics_, 0);
}

void PoimContract::vote(std::uint64_t version, const std::string& account, Token weight, bool support,
                        std::uint64_t now, const AccountBook& accounts) {
    const auto it = std::find_if(challenges_.begin(), challenges_.end(),
                                 [&](const Challenge& c) { return c.target_version == version; });
    if (it == challenges_.end()) fail(Err::kUnknownVersion, "no open challenge for version");
    if (now >= it->deadline) fail(Err::kWindowExpired, "voting closed");
    if (it->votes.count(account)) fail(Err::kDoubleVote, "account already voted");
    require_weight(account, weight, accounts);
    it->votes[account] = {weight, support};
}

bool PoimContract::quorum_reached(const std::map<std::string, std::pair<Token, bool>>& votes,
                                  const AccountBook& accounts) const {
    Token yes = 0;
    Token no = 0;
    for (const auto& [account, vote] : votes) (vote.second ? yes : no) += vote.first;
    Token total_power = 0;
    for (const auto& [account, balance] : accounts) total_power += balance;
    if (yes <= no) return false;
    // yes / total >= quorum_num / quorum_den, in integers.
    return yes * params_.quorum_den >= params_.quorum_num * total_power;
}

ChallengeOutcome PoimContract::resolve_challenge(std::uint64_t version, std::uint64_t now,
                                                 AccountBook& accounts) {
    const auto it = std::find_if(challenges_.begin(), challenges_.end(),
                                 [&](const Challenge& c) { return c.target_version == version; });
    if (it == challenges_.end()) fail(Err::kUnknownVersion, "no open challenge for version");
    if (now < it->deadline) fail(Err::kDeadlineNotReached, "challenge deadline not reached");

    ChallengeOutcome outcome;
    const bool passed = quorum_reached(it->votes, accounts);
    if (passed) {
        // Revert to the state recorded just before the challenged version
        // was installed; later acceptances are discarded with it.
        std::optional<PriorEntry> target;
        while (!prior_models_.empty()) {
            PriorEntry entry = prior_models_.back();
            prior_models_.pop_back();
            if (entry.installed_version == version) {
                target = std::move(entry);
                break;
            }
            if (entry.installed_version < version) {
                prior_models_.push_back(std::move(entry));  // never installed: leave intact
                break;
            }
        }
        if (!target) {
            outcome.rolled_back = false;
            outcome.detail = "rollback_unavailable";
        } else {
            const Metrics before = metrics_;
            model_ = target->model;
            model_.version = version + 1 > model_.version ? version + 1 : model_.version + 1;
            // Reinstalled metrics are recomputed so they stay consistent with
            // the current test set revision.
            metrics_ = evaluate(model_, test_set_, params_.metric_scale);
            const AcceptRecord& record = accept_records_.at(version);
            const auto proposer = accounts.find(record.proposer);
            Token clawback = 0;
            if (proposer != accounts.end()) clawback = std::min(record.bonus_paid, proposer->second);
            if (clawback > 0) {
                proposer->second -= clawback;
                vault_ += clawback;
                total_clawbacks_in_ += clawback;
            }
            outcome.rolled_back = true;
            outcome.detail = "rolled_back v" + std::to_string(version) + " clawback=" + std::to_string(clawback);
            log(now, "challenge", bridge::keccak256("challenge-resolve-" + std::to_string(version)), true,
                outcome.detail, before, metrics_, -clawback);
        }
    } else {
        outcome.rolled_back = false;
        outcome.detail = "dismissed";
    }
    if (!outcome.rolled_back) {
        log(now, "challenge", bridge::keccak256("challenge-resolve-" + std::to_string(version)), false,
            outcome.detail, metrics_, metrics_, 0);
    }
    outcome.metrics_after = metrics_;
    challenges_.erase(it);
    return outcome;
}

namespace {

TestSet apply_change(const TestSet& base, const TestSetChange& change) {
    TestSet next = base;
    switch (change.kind) {
        case TestSetChange::Kind::kAdd:
            next.samples.push_back(change.sample);
            break;
        case TestSetChange::Kind::kModify:
            if (change.index >= next.samples.size()) fail(Err::kDimensionMismatch, "modify index out of range");
            next.samples[change.index] = change.sample;
            break;
        case TestSetChange::Kind::kRemove:
            if (change.index >= next.samples.size()) fail(Err::kDimensionMismatch, "remove index out of range");
            next.samples.erase(next.samples.begin() + static_cast<std::ptrdiff_t>(change.index));
            break;
    }
    next.revision = base.revision + 1;
    return next;
}

}  // namespace

std::uint64_t PoimContract::propose_testset_change(const TestSetChange& change, const std::string& proposer,
                                                   Token stake, std::uint64_t now, const AccountBook& accounts) {
    require_weight(proposer, stake, accounts);
    if (change.kind != TestSetChange::Kind::kRemove &&
        static_cast<int>(change.sample.features.size()) != model_.arch.input_dim) {
        fail(Err::kDimensionMismatch, "test sample dimension mismatch");
    }
    // Dry-run now so structurally invalid changes never enter voting.
    const TestSet preview = apply_change(test_set_, change);
    preview.validate();

    PendingTestSetChange pending;
    pending.id = next_change_id_++;
    pending.change = change;
    pending.proposer = proposer;
    pending.opened_at = now;
    pending.deadline = now + params_.challenge_window_seconds;
    pending.votes[proposer] = {stake, true};
    pending_changes_.push_back(std::move(pending));
    return pending_changes_.back().id;
}

void PoimContract::vote_testset(std::uint64_t id, const std::string& account, Token weight, bool support,
                                std::uint64_t now, const AccountBook& accounts) {
    const auto it = std::find_if(pending_changes_.begin(), pending_changes_.end(),
                                 [&](const PendingTestSetChange& c) { return c.id == id; });
    if (it == pending_changes_.end()) fail(Err::kUnknownVersion, "no pending change with id");
    if (now >= it->deadline) fail(Err::kWindowExpired, "voting closed");
    if (it->votes.count(account)) fail(Err::kDoubleVote, "account already voted");
    require_weight(account, weight, accounts);
    it->votes[account] = {weight, support};
}

bool PoimContract::resolve_testset_change(std::uint64_t id, std::uint64_t now, const AccountBook& accounts) {
    const auto it = std::find_if(pending_changes_.begin(), pending_changes_.end(),
                                 [&](const PendingTestSetChange& c) { return c.id == id; });
    if (it == pending_changes_.end()) fail(Err::kUnknownVersion, "no pending change with id");
    if (now < it->deadline) fail(Err::kDeadlineNotReached, "voting still open");

    const bool approved = quorum_reached(it->votes, accounts);
    if (approved) {
        const Metrics before = metrics_;
        test_set_ = apply_change(test_set_, it->change);
        test_set_.validate();
        metrics_ = evaluate(model_, test_set_, params_.metric_scale);
        log(now, "testset", bridge::keccak256("testset-" + std::to_string(id)), true,
            "revision " + std::to_string(test_set_.revision), before, metrics_, 0);
    } else {
        log(now, "testset", bridge::keccak256("testset-" + std::to_string(id)), false, "dismissed", metrics_,
            metrics_, 0);
    }
    pending_changes_.erase(it);
    return approved;
}

void PoimContract::assert_conservation() const {
    const Token lhs = total_stakes_in_ + total_clawbacks_in_;
    const Token rhs = total_refunds_out_ + total_rewards_out_ + vault_;
    if (lhs != rhs) {
        fail(Err::kConsistencyError, "vault conservation violated: in=" + std::to_string(lhs) +
                                         " out+vault=" + std::to_string(rhs));
    }
}

std::vector<std::uint8_t> PoimContract::core_state_bytes() const {
    std::vector<std::uint8_t> out;
    append_model(out, model_);
    append_metrics(out, metrics_);
    append_u64(out, test_set_.revision);
    append_u64(out, test_set_.samples.size());
    for (const TestSample& s : test_set_.samples) append_sample(out, s);
    append_i64(out, normal_count_);
    append_i64(out, attack_count_);
    append_u64(out, prior_models_.size());
    for (const PriorEntry& entry : prior_models_) {
        append_model(out, entry.model);
        append_metrics(out, entry.metrics);
        append_u64(out, entry.installed_version);
    }
    append_u64(out, challenges_.size());
    for (const Challenge& c : challenges_) {
        append_u64(out, c.target_version);
        append_u64(out, c.opened_at);
        append_u64(out, c.deadline);
        append_u64(out, c.votes.size());
        for (const auto& [account, vote] : c.votes) {
            append_string(out, account);
            append_i64(out, vote.first);
            out.push_back(vote.second ? 1 : 0);
        }
    }
    append_u64(out, pending_changes_.size());
    for (const PendingTestSetChange& p : pending_changes_) {
        append_u64(out, p.id);
        out.push_back(static_cast<std::uint8_t>(p.change.kind));
        append_u64(out, p.change.index);
        append_sample(out, p.change.sample);
        append_string(out, p.proposer);
        append_u64(out, p.opened_at);
        append_u64(out, p.deadline);
        append_u64(out, p.votes.size());
        for (const auto& [account, vote] : p.votes) {
            append_string(out, account);
            append_i64(out, vote.first);
            out.push_back(vote.second ? 1 : 0);
        }
    }
    append_u64(out, accept_records_.size());
    for (const auto& [version, record] : accept_records_) {
        append_u64(out, version);
        append_u64(out, record.accepted_at);
        append_string(out, record.proposer);
        append_i64(out, record.bonus_paid);
    }
    return out;
}

std::vector<std::uint8_t> PoimContract::full_state_bytes() const {
    std::vector<std::uint8_t> out = core_state_bytes();
    append_i64(out, vault_);
    append_i64(out, total_stakes_in_);
    append_i64(out, total_refunds_out_);
    append_i64(out, total_rewards_out_);
    append_i64(out, total_clawbacks_in_);
    append_u64(out, history_.size());
    for (const HistoryRecord& record : history_) append_string(out, record.to_line());
    return out;
}

QuantizedModel perceptron_fit(QuantizedModel model, const std::vector<TestSample>& pool, const Int128& eta_raw,
                              int max_passes) {
    for (int pass = 0; pass < max_passes; ++pass) {
        bool mistakes = false;
        for (const TestSample& s : pool) {
            const QuantizedModel next = inference::micro_train_step(model, s.features, s.label, eta_raw);
            if (next.version != model.version) {
                mistakes = true;
                model = next;
            }
        }
        if (!mistakes) break;
    }
    return model;
}

std::vector<StressStep> stress_test(const std::vector<TestSample>& seed_pool, const TestSet& test_set,
                                    const inference::ModelArch& arch, Scale scale, const ProtocolParams& params,
                                    const StressConfig& config) {
    if (seed_pool.empty()) fail(Err::kEmptyInput, "stress test needs seed samples");
    if (config.adversarial_fraction < 0.0 || config.adversarial_fraction > 1.0) {
        fail(Err::kConfigError, "adversarial_fraction must lie in [0, 1]");
    }

    QuantizedModel base;
    base.arch = arch;
    base.scale = scale;
    base.weights.assign(arch.weight_count(), Int128(0));
    base.biases.assign(arch.bias_count(), Int128(0));
    base = perceptron_fit(std::move(base), seed_pool, params.eta_raw, config.max_bootstrap_passes);

    AccountBook accounts{{"stress-proposer", std::numeric_limits<Token>::max() / 4}};
    PoimContract governed(base, test_set, params);
    QuantizedModel unfiltered = base;

    rng::DeterministicRng rng(config.rng_seed);
    std::vector<StressStep> trace;
    trace.reserve(static_cast<std::size_t>(config.steps));
    for (int step = 1; step <= config.steps; ++step) {
        TestSample sample = seed_pool[rng.uniform_below(seed_pool.size())];
        const bool adversarial = rng.uniform() < config.adversarial_fraction;
        if (adversarial) {
            if (rng.uniform() < 0.5) {
                sample.label = 1 - sample.label;  // label flip
            } else {
                for (Int128& f : sample.features) {  // feature noise, a few sigma wide
                    f += fixedpoint::to_fixed(rng.normal() * 3.0, scale);
                }
            }
        }
        Proposal proposal{"stress-proposer", config.stake, sample, params.eta_raw,
                          static_cast<std::uint64_t>(step)};
        const Decision decision = governed.propose_update(proposal, static_cast<std::uint64_t>(step), accounts);
        unfiltered = inference::micro_train_step(unfiltered, sample.features, sample.label, params.eta_raw);

        StressStep row;
        row.step = step;
        row.adversarial = adversarial;
        row.accepted = decision.accepted;
        row.poim = governed.metrics();
        row.unfiltered = evaluate(unfiltered, test_set, params.metric_scale);
        trace.push_back(row);
    }
    return trace;
}

}  // namespace poimsim::poim
