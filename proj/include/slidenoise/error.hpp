#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slidenoise {

enum class Errc {
    NonAttracting,
    BadNoise,
    BadTime,
    QuadratureFailure,
    OutOfDomain,
    NotAttracting,
    OnManifold,
    SlidingExit,
    StepFailure,
    NoPeriodFound,
    TooFewSamples,
    InsufficientOscillations,
    Empty,
    Config,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::NonAttracting: return "NonAttracting";
        case Errc::BadNoise: return "BadNoise";
        case Errc::BadTime: return "BadTime";
        case Errc::QuadratureFailure: return "QuadratureFailure";
        case Errc::OutOfDomain: return "OutOfDomain";
        case Errc::NotAttracting: return "NotAttracting";
        case Errc::OnManifold: return "OnManifold";
        case Errc::SlidingExit: return "SlidingExit";
        case Errc::StepFailure: return "StepFailure";
        case Errc::NoPeriodFound: return "NoPeriodFound";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::InsufficientOscillations: return "InsufficientOscillations";
        case Errc::Empty: return "Empty";
        case Errc::Config: return "Config";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace slidenoise
