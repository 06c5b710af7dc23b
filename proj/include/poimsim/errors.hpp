// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace poimsim {

// Failure codes shared across modules. A raised Error aborts the enclosing
// simulated transaction; the chain simulator reverts state on catch.
enum class Err {
    kOverflow,
    kDivisionByZero,
    kDimensionMismatch,
    kKernelTooLarge,
    kMalformedTree,
    kEmptyValidationSet,
    kEmptyTestSet,
    kInsufficientStake,
    kImbalanceBlocked,
    kWindowExpired,
    kUnknownVersion,
    kDeadlineNotReached,
    kDoubleVote,
    kDuplicateChallenge,
    kWouldEmptyClass,
    kMalformedBytes,
    kNoCommitment,
    kHashMismatch,
    kNoAcceptedModel,
    kNoModelInstalled,
    kOutOfGas,
    kUnknownAccount,
    kParseError,
    kMissingColumn,
    kEmptyInput,
    kEmptyTrain,
    kDegenerateInput,
    kKTooLarge,
    kSingleCluster,
    kUnsupportedArchitecture,
    kConsistencyError,
    kConfigError,
    kScaleOutOfRange,
};

const char* err_name(Err code);

class Error : public std::runtime_error {
  public:
    Error(Err code, const std::string& message)
        : std::runtime_error(std::string(err_name(code)) + ": " + message), code_(code) {}

    Err code() const noexcept { return code_; }

  private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace poimsim
