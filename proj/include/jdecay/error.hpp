// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace jdecay {

enum class ErrorCode {
    InvalidModel,
    NonPositiveWeight,
    IndexOutOfWindow,
    NearSingular,
    OutsideGap,
    OutsideHalfLine,
    BadEpsilon,
    DeltaTooLarge,
    BetaTooLarge,
    NotUnbounded,
    UnverifiedTail,
    Overflow,
    DegenerateBasis,
    LayoutOverlap,
    OnBlockSpectrum,
    PhaseNotFound,
    MissingColumn,
    InvalidConfig,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace jdecay
