// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/errors.hpp"

namespace poimsim {

const char* err_name(Err code) {
    switch (code) {
        case Err::kOverflow: return "Overflow";
        case Err::kDivisionByZero: return "DivisionByZero";
        case Err::kDimensionMismatch: return "DimensionMismatch";
        case Err::kKernelTooLarge: return "KernelTooLarge";
        case Err::kMalformedTree: return "MalformedTree";
        case Err::kEmptyValidationSet: return "EmptyValidationSet";
        case Err::kEmptyTestSet: return "EmptyTestSet";
        case Err::kInsufficientStake: return "InsufficientStake";
        case Err::kImbalanceBlocked: return "ImbalanceBlocked";
        case Err::kWindowExpired: return "WindowExpired";
        case Err::kUnknownVersion: return "UnknownVersion";
        case Err::kDeadlineNotReached: return "DeadlineNotReached";
        case Err::kDoubleVote: return "DoubleVote";
        case Err::kDuplicateChallenge: return "DuplicateChallenge";
        case Err::kWouldEmptyClass: return "WouldEmptyClass";
        case Err::kMalformedBytes: return "MalformedBytes";
        case Err::kNoCommitment: return "NoCommitment";
        case Err::kHashMismatch: return "HashMismatch";
        case Err::kNoAcceptedModel: return "NoAcceptedModel";
        case Err::kNoModelInstalled: return "NoModelInstalled";
        case Err::kOutOfGas: return "OutOfGas";
        case Err::kUnknownAccount: return "UnknownAccount";
        case Err::kParseError: return "ParseError";
        case Err::kMissingColumn: return "MissingColumn";
        case Err::kEmptyInput: return "EmptyInput";
        case Err::kEmptyTrain: return "EmptyTrain";
        case Err::kDegenerateInput: return "DegenerateInput";
        case Err::kKTooLarge: return "KTooLarge";
        case Err::kSingleCluster: return "SingleCluster";
        case Err::kUnsupportedArchitecture: return "UnsupportedArchitecture";
        case Err::kConsistencyError: return "ConsistencyError";
        case Err::kConfigError: return "ConfigError";
        case Err::kScaleOutOfRange: return "ScaleOutOfRange";
    }
    return "Unknown";
}

}  // namespace poimsim
