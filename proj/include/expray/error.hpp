#pragma once

#include <stdexcept>
#include <string>

namespace expray {

enum class Errc {
    EntryOverflow,
    UndecidedAtHorizon,
    OnBoundary,
    BranchCut,
    DepthExceeded,
    PotentialTooSmall,
    NoConvergence,
    SmallDerivative,
    DomainError,
    TooCloseToBase,
    Undersampled,
    MissingDerivatives,
    OnHalfLine,
    ParseError,
};

const char* errc_name(Errc c);

/// Domain error carrying a machine-readable code. CLI maps these to exit 1.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::EntryOverflow: return "EntryOverflow";
        case Errc::UndecidedAtHorizon: return "UndecidedAtHorizon";
        case Errc::OnBoundary: return "OnBoundary";
        case Errc::BranchCut: return "BranchCut";
        case Errc::DepthExceeded: return "DepthExceeded";
        case Errc::PotentialTooSmall: return "PotentialTooSmall";
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::SmallDerivative: return "SmallDerivative";
        case Errc::DomainError: return "DomainError";
        case Errc::TooCloseToBase: return "TooCloseToBase";
        case Errc::Undersampled: return "Undersampled";
        case Errc::MissingDerivatives: return "MissingDerivatives";
        case Errc::OnHalfLine: return "OnHalfLine";
        case Errc::ParseError: return "ParseError";
    }
    return "Error";
}

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace expray
