#pragma once

#include <stdexcept>
#include <string>

namespace dramdse {

// Every failure raised by the library carries one of these kinds so the CLI
// can map it onto an exit code.
enum class ErrorKind {
    InvalidConfig,
    EmptyTrace,
    AddressOverflow,
    ParseError,
    IndexOutOfRange,
    LengthMismatch,
    ShapeMismatch,
    NonFinite,
    SubspaceTooLarge,
    DegenerateColumn,
    BudgetZero,
    IncompleteAction,
    MismatchedCells,
    ConfigError,
    IoError,
};

inline const char* to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::EmptyTrace: return "EmptyTrace";
    case ErrorKind::AddressOverflow: return "AddressOverflow";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SubspaceTooLarge: return "SubspaceTooLarge";
    case ErrorKind::DegenerateColumn: return "DegenerateColumn";
    case ErrorKind::BudgetZero: return "BudgetZero";
    case ErrorKind::IncompleteAction: return "IncompleteAction";
    case ErrorKind::MismatchedCells: return "MismatchedCells";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

    ErrorKind kind() const noexcept { return kind_; }
    // what() without the kind prefix
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

} // namespace dramdse
