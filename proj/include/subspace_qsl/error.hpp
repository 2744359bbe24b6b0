#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace subspace_qsl {

enum class ErrorKind {
    NotSquare,
    NotHermitian,
    DimensionMismatch,
    EigensolverFailure,
    SvdFailure,
    RankDeficient,
    InvalidFrame,
    InvalidProjector,
    NotUnitVector,
    ZeroSubspace,
    NumericalInconsistency,
    InvalidTheta,
    NonpositiveHorizon,
    InvalidArgument,
    ZeroDispersion,
    ZeroMeanExcess,
    ZeroSpeed,
    ZeroWidth,
    OptimizerDidNotConverge,
    DegenerateLevels,
    ParseError,
    ValidationError,
    IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EigensolverFailure: return "EigensolverFailure";
    case ErrorKind::SvdFailure: return "SvdFailure";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::InvalidFrame: return "InvalidFrame";
    case ErrorKind::InvalidProjector: return "InvalidProjector";
    case ErrorKind::NotUnitVector: return "NotUnitVector";
    case ErrorKind::ZeroSubspace: return "ZeroSubspace";
    case ErrorKind::NumericalInconsistency: return "NumericalInconsistency";
    case ErrorKind::InvalidTheta: return "InvalidTheta";
    case ErrorKind::NonpositiveHorizon: return "NonpositiveHorizon";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ZeroDispersion: return "ZeroDispersion";
    case ErrorKind::ZeroMeanExcess: return "ZeroMeanExcess";
    case ErrorKind::ZeroSpeed: return "ZeroSpeed";
    case ErrorKind::ZeroWidth: return "ZeroWidth";
    case ErrorKind::OptimizerDidNotConverge: return "OptimizerDidNotConverge";
    case ErrorKind::DegenerateLevels: return "DegenerateLevels";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable kind and, where meaningful, the
/// offending magnitude (an asymmetry norm, a residual, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::optional<double> value = std::nullopt)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), value_(value)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<double> value() const noexcept { return value_; }

private:
    ErrorKind kind_;
    std::optional<double> value_;
};

} // namespace subspace_qsl
