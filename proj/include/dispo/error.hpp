#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dispo {

enum class ErrorKind {
    MalformedRow,
    SchemaError,
    DuplicateAsset,
    ZeroLeverage,
    EmptyDataset,
    MissingPrice,
    InvalidBinWidth,
    EmptySample,
    EmptyGroup,
    InvalidProfile,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedRow: return "MalformedRow";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::DuplicateAsset: return "DuplicateAsset";
        case ErrorKind::ZeroLeverage: return "ZeroLeverage";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::MissingPrice: return "MissingPrice";
        case ErrorKind::InvalidBinWidth: return "InvalidBinWidth";
        case ErrorKind::EmptySample: return "EmptySample";
        case ErrorKind::EmptyGroup: return "EmptyGroup";
        case ErrorKind::InvalidProfile: return "InvalidProfile";
        case ErrorKind::Io: return "IoError";
    }
    return "Unknown";
}

// All library failures surface as this type. what() is a single line of the
// form "<Kind>: <detail>" so the CLI can print it verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
          kind_(kind),
          detail_(detail) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

// One rejected input row. `line` is 1-based and counts the header.
struct RowError {
    std::size_t line = 0;
    std::string reason;
};

inline Error malformed_row(const RowError& e) {
    return Error(ErrorKind::MalformedRow, "line " + std::to_string(e.line) + ": " + e.reason);
}

}  // namespace dispo
