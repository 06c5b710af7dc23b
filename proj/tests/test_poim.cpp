// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "poimsim/poim.hpp"
#include "poimsim/rng.hpp"

using namespace poimsim;
using fixedpoint::Int128;
using fixedpoint::Scale;
using inference::ModelArch;
using inference::QuantizedModel;
using poim::AccountBook;
using poim::Metrics;
using poim::PoimContract;
using poim::Proposal;
using poim::ProtocolParams;
using poim::TestSample;
using poim::TestSet;
using poim::Token;

namespace {

const Scale kScale = Scale::pow10(6);
const Int128 kUnit = kScale.value();

QuantizedModel linear_model(std::vector<Int128> weights, Int128 bias) {
    QuantizedModel model;
    model.arch = ModelArch::linear(static_cast<int>(weights.size()));
    model.scale = kScale;
    model.weights = std::move(weights);
    model.biases = {bias};
    return model;
}

TestSample sample1(Int128 x, int label) { return TestSample{{x}, label}; }

// One-feature set: positives at +1, +2, negatives at -1, -2, plus a positive
// at -3 the zero model can never catch. The zero model predicts all-0.
TestSet basic_set() {
    TestSet set;
    set.samples = {sample1(kUnit, 1), sample1(2 * kUnit, 1), sample1(-kUnit, 0), sample1(-2 * kUnit, 0),
                   sample1(-3 * kUnit, 1)};
    return set;
}

ProtocolParams basic_params() {
    ProtocolParams params;
    params.min_stake = 10;
    params.eta_raw = fixedpoint::idiv128(kUnit, 2);
    params.challenge_window_seconds = 86'400;
    params.metric_scale = 10'000;
    return params;
}

}  // namespace

TEST_CASE("metric arithmetic") {
    CHECK(poim::metrics_from_counts(1, 1, 1, 1, 10'000) == Metrics{5000, 5000, 5000, 5000});
    CHECK(poim::metrics_from_counts(5, 0, 5, 0, 10'000) == Metrics{10'000, 10'000, 10'000, 10'000});
    // integer-arithmetic oracle: acc 7000, prec 7500, rec 6000,
    // f1 = trunc(2*7500*6000 / 13500) = 6666
    CHECK(poim::metrics_from_counts(3, 1, 4, 2, 10'000) == Metrics{7000, 7500, 6000, 6666});
    // zero denominators
    CHECK(poim::metrics_from_counts(0, 0, 5, 5, 10'000) == Metrics{5000, 0, 0, 0});
}

TEST_CASE("dominance predicates") {
    const Metrics base{8000, 7000, 6000, 9000};
    CHECK(poim::weakly_dominates(Metrics{8000, 7500, 6000, 9000}, base));
    CHECK(poim::strictly_improves(Metrics{8000, 7500, 6000, 9000}, base));
    CHECK_FALSE(poim::weakly_dominates(Metrics{8500, 6500, 6000, 9000}, base));  // prec degraded
    CHECK(poim::weakly_dominates(base, base));
    CHECK_FALSE(poim::strictly_improves(base, base));
}

TEST_CASE("evaluate recomputes from the model and set") {
    const TestSet set = basic_set();
    const QuantizedModel zero = linear_model({0}, 0);
    // all predicted 0: TP=0 FP=0 TN=2 FN=3
    CHECK(poim::evaluate(zero, set, 10'000) == Metrics{4000, 0, 0, 0});

    const QuantizedModel positive = linear_model({kUnit}, 0);
    // x>0 predicted 1: TP=2 FP=0 TN=2 FN=1
    CHECK(poim::evaluate(positive, set, 10'000) ==
          poim::metrics_from_counts(2, 0, 2, 1, 10'000));

    TestSet empty;
    CHECK_THROWS_AS(poim::evaluate(zero, empty, 10'000), Error);
    TestSet one_class;
    one_class.samples = {sample1(kUnit, 1)};
    CHECK_THROWS_AS(poim::evaluate(zero, one_class, 10'000), Error);
}

TEST_CASE("proposal acceptance requires weak dominance with strict improvement") {
    AccountBook book{{"alice", 1000}};
    PoimContract contract(linear_model({0}, 0), basic_set(), basic_params());
    const Metrics before = contract.metrics();

    // attack sample at +1: perceptron step pushes weights positive, catching
    // the two positive-x attacks without hurting the negatives
    const poim::Decision good =
        contract.propose_update(Proposal{"alice", 10, sample1(kUnit, 1), basic_params().eta_raw, 5}, 5, book);
    CHECK(good.accepted);
    CHECK(poim::weakly_dominates(good.after, before));
    CHECK(poim::strictly_improves(good.after, before));
    CHECK(contract.model().version == 1);
    CHECK(book["alice"] == 1000);  // stake returned, zero-alpha bonus
    CHECK(contract.metrics() == poim::evaluate(contract.model(), contract.test_set(), 10'000));

    // re-proposing the same sample: already classified, model unchanged, no
    // strict improvement -> rejected and slashed
    const poim::Decision repeat =
        contract.propose_update(Proposal{"alice", 10, sample1(kUnit, 1), basic_params().eta_raw, 6}, 6, book);
    CHECK_FALSE(repeat.accepted);
    CHECK(repeat.reason == poim::RejectReason::kNoImprovement);
    CHECK(book["alice"] == 990);
    CHECK(contract.vault() == 10);
    CHECK(contract.model().version == 1);

    // label-flipped sample degrades metrics -> rejected and slashed
    const poim::Decision poisoned =
        contract.propose_update(Proposal{"alice", 10, sample1(2 * kUnit, 0), basic_params().eta_raw, 7}, 7, book);
    CHECK_FALSE(poisoned.accepted);
    CHECK(poisoned.reason == poim::RejectReason::kMetricDegraded);
    CHECK(contract.vault() == 20);
    contract.assert_conservation();
}

TEST_CASE("rejections leave the core state bit-identical") {
    AccountBook book{{"alice", 1000}};
    PoimContract contract(linear_model({0}, 0), basic_set(), basic_params());
    contract.propose_update(Proposal{"alice", 10, sample1(kUnit, 1), basic_params().eta_raw, 1}, 1, book);

    const std::vector<std::uint8_t> before = contract.core_state_bytes();
    const poim::Decision rejected =
        contract.propose_update(Proposal{"alice", 10, sample1(2 * kUnit, 0), basic_params().eta_raw, 2}, 2, book);
    CHECK_FALSE(rejected.accepted);
    CHECK(contract.core_state_bytes() == before);
}

TEST_CASE("stake preconditions") {
    AccountBook book{{"alice", 5}, {"poor", 0}};
    PoimContract contract(linear_model({0}, 0), basic_set(), basic_params());
    CHECK_THROWS_AS(
        contract.propose_update(Proposal{"alice", 5, sample1(kUnit, 1), basic_params().eta_raw, 1}, 1, book),
        Error);  // below protocol minimum
    CHECK_THROWS_AS(
        contract.propose_update(Proposal{"poor", 10, sample1(kUnit, 1), basic_params().eta_raw, 1}, 1, book),
        Error);  // balance below stake
    CHECK_THROWS_AS(
        contract.propose_update(Proposal{"ghost", 10, sample1(kUnit, 1), basic_params().eta_raw, 1}, 1, book),
        Error);  // unknown account
}

TEST_CASE("imbalance guard blocks normal samples and refunds") {
    AccountBook book{{"alice", 1000}};
    PoimContract contract(linear_model({0}, 0), basic_set(), basic_params());
    // counts start (0,0): 0 >= 5*0, so normal samples are blocked until an
    // attack sample lands
    const poim::Decision blocked =
        contract.propose_update(Proposal{"alice", 10, sample1(-kUnit, 0), basic_params().eta_raw, 1}, 1, book);
    CHECK_FALSE(blocked.accepted);
    CHECK(blocked.reason == poim::RejectReason::kImbalanceBlocked);
    CHECK(book["alice"] == 1000);  // refunded, not slashed
    CHECK(contract.vault() == 0);
    contract.assert_conservation();
}

TEST_CASE("reward formula with clamping") {
    ProtocolParams params = basic_params();
    params.alpha_f1 = 2;
    AccountBook book{{"alice", 1000}};
    PoimContract contract(linear_model({0}, 0), basic_set(), params);

    // empty vault: bonus clamps to zero, only the stake returns
    SUBCASE("alpha zero returns exactly the stake") {
        ProtocolParams no_alpha = basic_params();
        PoimContract plain(linear_model({0}, 0), basic_set(), no_alpha);
        CHECK(plain.reward_for(100, Metrics{1, 1, 1, 1}, Metrics{2, 2, 2, 2}) == 100);
    }

    SUBCASE("formula values at fixed vault levels") {
        // fill the vault by slashing 200 (two rejected proposals)
        contract.propose_update(Proposal{"alice", 100, sample1(-kUnit, 1), params.eta_raw, 1}, 1, book);
        contract.propose_update(Proposal{"alice", 100, sample1(-kUnit, 1), params.eta_raw, 2}, 2, book);
        REQUIRE(contract.vault() == 200);
        // alpha_f1 = 2, dF1 = +50 units, vault covers it: R = 100 + 100
        CHECK(contract.reward_for(100, Metrics{0, 0, 0, 100}, Metrics{0, 0, 0, 150}) == 200);
        // bonus larger than the vault clamps to the vault
        CHECK(contract.reward_for(100, Metrics{0, 0, 0, 0}, Metrics{0, 0, 0, 10'000}) == 100 + 200);
        // negative net change never claws into the stake
        CHECK(contract.reward_for(100, Metrics{0, 0, 0, 150}, Metrics{0, 0, 0, 100}) == 100);
    }

    SUBCASE("bonus paid from the vault") {
        // fill the vault with two slashes of 50 first
        book["alice"] = 1000;
        const poim::Decision accept1 =
            contract.propose_update(Proposal{"alice", 10, sample1(kUnit, 1), params.eta_raw, 1}, 1, book);
        CHECK(accept1.accepted);
        contract.propose_update(Proposal{"alice", 50, sample1(kUnit, 1), params.eta_raw, 2}, 2, book);
        contract.propose_update(Proposal{"alice", 50, sample1(kUnit, 1), params.eta_raw, 3}, 3, book);
        CHECK(contract.vault() == 100);

        // hand-check the formula on the recorded history: R = s + 2 * dF1,
        // clamped to the vault
        const Metrics before = contract.metrics();
        const Token vault_before = contract.vault();
        const poim::Decision accept2 = contract.propose_update(
            Proposal{"alice", 10, sample1(-3 * kUnit, 1), params.eta_raw, 4}, 4, book);
        if (accept2.accepted) {
            const Token bonus_uncapped = 2 * (accept2.after.f1 - before.f1);
            const Token bonus = std::min(bonus_uncapped, vault_before);
            CHECK(accept2.reward == 10 + bonus);
            CHECK(contract.vault() == vault_before - bonus);
        }
        contract.assert_conservation();
    }
}

TEST_CASE("challenge window and duplicate rules") {
    AccountBook book{{"alice", 1000}, {"bob", 1000}};
    ProtocolParams params = basic_params();
    PoimContract contract(linear_model({0}, 0), basic_set(), params);
    const poim::Decision accepted =
        contract.propose_update(Proposal{"alice", 10, sample1(kUnit, 1), params.eta_raw, 100}, 100, book);
    REQUIRE(accepted.accepted);
    const std::uint64_t v = accepted.version_after;

    CHECK_THROWS_AS(contract.open_challenge(99, "bob", 10, 200, book), Error);  // unknown version
    // inside the window
    contract.open_challenge(v, "bob", 10, 100 + params.challenge_window_seconds / 2, book);
    // duplicate
    CHECK_THROWS_AS(contract.open_challenge(v, "bob", 10, 100 + params.challenge_window_seconds / 2, book),
                    Error);

    // window expiry on a later accepted version
    const poim::Decision second =
        contract.propose_update(Proposal{"alice", 10, sample1(-3 * kUnit, 1), params.eta_raw, 200}, 200, book);
    if (second.accepted) {
        CHECK_THROWS_AS(
            contract.open_challenge(second.version_after, "bob", 10,
                                    200 + params.challenge_window_seconds + 1, book),
            Error);
    }
}

TEST_CASE("vote rules and rollback") {
    AccountBook book{{"alice", 300}, {"bob", 400}, {"carol", 300}};
    ProtocolParams params = basic_params();
    params.alpha_f1 = 1;
    PoimContract contract(linear_model({0}, 0), basic_set(), params);

    const Metrics metrics_before = contract.metrics();
    const QuantizedModel model_before = contract.model();
    const poim::Decision accepted =
        contract.propose_update(Proposal{"alice", 10, sample1(kUnit, 1), params.eta_raw, 100}, 100, book);
    REQUIRE(accepted.accepted);
    const std::uint64_t v = accepted.version_after;

    contract.open_challenge(v, "bob", 400, 200, book);
    contract.vote(v, "carol", 200, true, 300, book);
    CHECK_THROWS_AS(contract.vote(v, "carol", 100, true, 300, book), Error);   // double vote
    CHECK_THROWS_AS(contract.vote(v, "ghost", 100, true, 300, book), Error);   // unknown voter
    CHECK_THROWS_AS(contract.vote(v, "alice", 10'000, true, 300, book), Error);  // weight above balance
    CHECK_THROWS_AS(contract.resolve_challenge(v, 300, book), Error);          // deadline not reached

    // yes = 600 of 1000 total balance -> majority and quorum met
    const poim::ChallengeOutcome outcome =
        contract.resolve_challenge(v, 200 + params.challenge_window_seconds, book);
    CHECK(outcome.rolled_back);
    CHECK(contract.model().weights == model_before.weights);
    CHECK(contract.model().version > v);  // rollback is a new version
    CHECK(contract.metrics() == metrics_before);
    // post-rollback metrics equal a fresh evaluation (re-evaluation oracle)
    CHECK(contract.metrics() == poim::evaluate(contract.model(), contract.test_set(), params.metric_scale));
    contract.assert_conservation();
}

TEST_CASE("challenge dismissed below quorum") {
    AccountBook book{{"alice", 300}, {"bob", 100}, {"idle", 600}};
    ProtocolParams params = basic_params();
    PoimContract contract(linear_model({0}, 0), basic_set(), params);
    const poim::Decision accepted =
        contract.propose_update(Proposal{"alice", 10, sample1(kUnit, 1), params.eta_raw, 100}, 100, book);
    REQUIRE(accepted.accepted);
    const QuantizedModel accepted_model = contract.model();

    // yes-stake 100 beats no-stake 0 but misses the 50% quorum of 1000
    contract.open_challenge(accepted.version_after, "bob", 100, 200, book);
    const poim::ChallengeOutcome outcome =
        contract.resolve_challenge(accepted.version_after, 200 + params.challenge_window_seconds, book);
    CHECK_FALSE(outcome.rolled_back);
    CHECK(contract.model() == accepted_model);
}

TEST_CASE("testset governance") {
    AccountBook book{{"alice", 600}, {"bob", 400}};
    ProtocolParams params = basic_params();
    PoimContract contract(linear_model({kUnit}, 0), basic_set(), params);
    const std::uint64_t revision_before = contract.test_set().revision;

    // removing the last sample of a class is rejected up front
    poim::TestSetChange drop_all_normals;
    drop_all_normals.kind = poim::TestSetChange::Kind::kRemove;
    drop_all_normals.index = 2;
    const std::uint64_t id1 = contract.propose_testset_change(drop_all_normals, "alice", 100, 10, book);
    // one normal remains, fine; removing beyond range fails
    poim::TestSetChange bad_index;
    bad_index.kind = poim::TestSetChange::Kind::kRemove;
    bad_index.index = 99;
    CHECK_THROWS_AS(contract.propose_testset_change(bad_index, "alice", 100, 10, book), Error);

    contract.vote_testset(id1, "bob", 400, true, 20, book);
    const bool approved = contract.resolve_testset_change(id1, 10 + params.challenge_window_seconds, book);
    CHECK(approved);
    CHECK(contract.test_set().revision == revision_before + 1);
    CHECK(contract.test_set().samples.size() == 4);
    // metrics recomputed against the new set
    CHECK(contract.metrics() == poim::evaluate(contract.model(), contract.test_set(), params.metric_scale));

    // now only one normal sample remains; removing it would empty the class
    poim::TestSetChange drop_last_normal;
    drop_last_normal.kind = poim::TestSetChange::Kind::kRemove;
    drop_last_normal.index = 2;
    CHECK_THROWS_AS(contract.propose_testset_change(drop_last_normal, "alice", 100, 50, book), Error);

    // adding an attack sample through the same flow
    poim::TestSetChange add;
    add.kind = poim::TestSetChange::Kind::kAdd;
    add.sample = sample1(5 * kUnit, 1);
    const std::uint64_t id2 = contract.propose_testset_change(add, "alice", 600, 60, book);
    CHECK(contract.resolve_testset_change(id2, 60 + params.challenge_window_seconds, book));
    CHECK(contract.test_set().samples.size() == 5);
    CHECK(contract.metrics() == poim::evaluate(contract.model(), contract.test_set(), params.metric_scale));

    // modifying a sample recomputes metrics against the fresh set
    poim::TestSetChange modify;
    modify.kind = poim::TestSetChange::Kind::kModify;
    modify.index = 0;
    modify.sample = sample1(-4 * kUnit, 1);  // positive model now misses this attack
    const poim::Metrics metrics_before_modify = contract.metrics();
    const std::uint64_t id3 = contract.propose_testset_change(modify, "alice", 600, 70, book);
    CHECK(contract.resolve_testset_change(id3, 70 + params.challenge_window_seconds, book));
    CHECK(contract.test_set().samples[0] == modify.sample);
    CHECK(contract.metrics() == poim::evaluate(contract.model(), contract.test_set(), params.metric_scale));
    CHECK(contract.metrics() != metrics_before_modify);  // the miss shows up

    // dismissed changes leave the set untouched
    poim::TestSetChange dismissed;
    dismissed.kind = poim::TestSetChange::Kind::kAdd;
    dismissed.sample = sample1(kUnit, 0);
    const std::uint64_t revision_now = contract.test_set().revision;
    const std::uint64_t id4 = contract.propose_testset_change(dismissed, "bob", 1, 80, book);
    CHECK_FALSE(contract.resolve_testset_change(id4, 80 + params.challenge_window_seconds, book));
    CHECK(contract.test_set().revision == revision_now);
}

TEST_CASE("monotone dominance and immutability across random proposal streams") {
    rng::DeterministicRng rng(505);
    AccountBook book{{"prop", 1'000'000}};
    ProtocolParams params = basic_params();
    params.alpha_acc = 1;
    params.alpha_f1 = 1;

    TestSet set;
    for (int i = 0; i < 12; ++i) {
        const int label = i % 2;
        const Int128 base = label == 1 ? kUnit : -kUnit;
        set.samples.push_back(TestSample{{base + rng.uniform_int(-kUnit.convert_to<std::int64_t>() / 2,
                                                                  kUnit.convert_to<std::int64_t>() / 2),
                                          rng.uniform_int(-kUnit.convert_to<std::int64_t>(),
                                                          kUnit.convert_to<std::int64_t>())},
                                         label});
    }
    QuantizedModel model;
    model.arch = ModelArch::linear(2);
    model.scale = kScale;
    model.weights = {0, 0};
    model.biases = {0};
    PoimContract contract(model, set, params);

    Token stakes_in = 0;
    for (int step = 1; step <= 300; ++step) {
        TestSample sample;
        sample.label = static_cast<int>(rng.uniform_below(2));
        sample.features = {rng.uniform_int(-3 * kUnit.convert_to<std::int64_t>(),
                                           3 * kUnit.convert_to<std::int64_t>()),
                           rng.uniform_int(-3 * kUnit.convert_to<std::int64_t>(),
                                           3 * kUnit.convert_to<std::int64_t>())};
        if (rng.uniform() < 0.4) sample.label = 1 - sample.label;  // poison some

        const Metrics before = contract.metrics();
        const std::vector<std::uint8_t> state_before = contract.core_state_bytes();
        const poim::Decision decision = contract.propose_update(
            Proposal{"prop", 10, sample, params.eta_raw, static_cast<std::uint64_t>(step)},
            static_cast<std::uint64_t>(step), book);
        stakes_in += 10;

        if (decision.accepted) {
            REQUIRE(poim::weakly_dominates(contract.metrics(), before));
            REQUIRE(poim::strictly_improves(contract.metrics(), before));
        } else {
            REQUIRE(contract.core_state_bytes() == state_before);
            REQUIRE(contract.metrics() == before);
        }
        contract.assert_conservation();
    }
    CHECK(contract.total_stakes_in() == stakes_in);
}

TEST_CASE("identical proposal streams produce identical history") {
    const auto run = [&]() {
        AccountBook book{{"prop", 100'000}};
        ProtocolParams params = basic_params();
        PoimContract contract(linear_model({0}, 0), basic_set(), params);
        rng::DeterministicRng rng(99);
        std::vector<std::string> lines;
        for (int step = 1; step <= 60; ++step) {
            TestSample sample = sample1(rng.uniform_int(-3'000'000, 3'000'000), rng.uniform_below(2) == 0 ? 0 : 1);
            contract.propose_update(Proposal{"prop", 10, sample, params.eta_raw,
                                             static_cast<std::uint64_t>(step)},
                                    static_cast<std::uint64_t>(step), book);
        }
        for (const poim::HistoryRecord& record : contract.history()) lines.push_back(record.to_line());
        return lines;
    };
    CHECK(run() == run());
}

TEST_CASE("imbalance invariant holds across accepted updates") {
    rng::DeterministicRng rng(31);
    AccountBook book{{"prop", 1'000'000}};
    ProtocolParams params = basic_params();
    PoimContract contract(linear_model({0}, 0), basic_set(), params);
    for (int step = 1; step <= 200; ++step) {
        TestSample sample =
            sample1(rng.uniform_int(-3'000'000, 3'000'000), rng.uniform_below(2) == 0 ? 0 : 1);
        contract.propose_update(Proposal{"prop", 10, sample, params.eta_raw,
                                         static_cast<std::uint64_t>(step)},
                                static_cast<std::uint64_t>(step), book);
        CHECK(contract.normal_count() <= params.imbalance_rho * contract.attack_count());
    }
}

TEST_CASE("stress test arms") {
    const Scale scale = Scale::pow10(9);
    rng::DeterministicRng rng(61);
    std::vector<TestSample> pool;
    TestSet dtest;
    for (int i = 0; i < 50; ++i) {
        const int label = i % 2;
        std::vector<Int128> x(3);
        for (Int128& f : x) {
            f = fixedpoint::to_fixed(rng.normal() + (label == 1 ? 8.0 : 0.0), scale);
        }
        pool.push_back(TestSample{x, label});
        if (i < 30) dtest.samples.push_back(TestSample{x, label});
    }
    ProtocolParams params = basic_params();
    params.eta_raw = fixedpoint::to_fixed(0.5, scale);

    poim::StressConfig config;
    config.steps = 60;
    config.rng_seed = 77;

    SUBCASE("clean stream leaves both arms identical") {
        config.adversarial_fraction = 0.0;
        const auto trace =
            poim::stress_test(pool, dtest, ModelArch::linear(3), scale, params, config);
        REQUIRE(trace.size() == 60);
        for (const poim::StressStep& row : trace) {
            CHECK(row.poim == row.unfiltered);
            CHECK_FALSE(row.adversarial);
        }
    }

    SUBCASE("fully adversarial stream never drags the governed model down") {
        config.adversarial_fraction = 1.0;
        const auto trace =
            poim::stress_test(pool, dtest, ModelArch::linear(3), scale, params, config);
        for (std::size_t i = 1; i < trace.size(); ++i) {
            CHECK(poim::weakly_dominates(trace[i].poim, trace[i - 1].poim));
        }
    }

    SUBCASE("half-poisoned stream: governed arm ends at least as good") {
        config.adversarial_fraction = 0.5;
        const auto trace =
            poim::stress_test(pool, dtest, ModelArch::linear(3), scale, params, config);
        CHECK(trace.back().poim.f1 >= trace.back().unfiltered.f1);
        // determinism of the whole trajectory
        const auto again =
            poim::stress_test(pool, dtest, ModelArch::linear(3), scale, params, config);
        for (std::size_t i = 0; i < trace.size(); ++i) {
            CHECK(trace[i].poim == again[i].poim);
            CHECK(trace[i].unfiltered == again[i].unfiltered);
        }
    }
}
