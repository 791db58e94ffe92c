#pragma once

#include <stdexcept>
#include <string>

namespace splx {

enum class ErrorKind {
    Shape,
    Domain,
    DegenerateInput,
    DegenerateSpectrum,
    Config,
    Format,
    Truncation,
    UnsupportedShape,
    Io,
    Order,
    Schema,
    EmptyFamily,
    IncompleteRecord,
};

inline const char *to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Shape: return "ShapeError";
        case ErrorKind::Domain: return "DomainError";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::Format: return "FormatError";
        case ErrorKind::Truncation: return "TruncationError";
        case ErrorKind::UnsupportedShape: return "UnsupportedShape";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::Order: return "OrderError";
        case ErrorKind::Schema: return "SchemaError";
        case ErrorKind::EmptyFamily: return "EmptyFamily";
        case ErrorKind::IncompleteRecord: return "IncompleteRecord";
    }
    return "Error";
}

/// Base class for every error raised by the library. `kind()` lets callers
/// (the CLI in particular) map failures onto exit codes without RTTI games.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

template<ErrorKind K>
class KindedError : public Error {
public:
    explicit KindedError(const std::string &what) : Error(K, what) {}
};

using ShapeError = KindedError<ErrorKind::Shape>;
using DomainError = KindedError<ErrorKind::Domain>;
using DegenerateInput = KindedError<ErrorKind::DegenerateInput>;
using DegenerateSpectrum = KindedError<ErrorKind::DegenerateSpectrum>;
using ConfigError = KindedError<ErrorKind::Config>;
using FormatError = KindedError<ErrorKind::Format>;
using TruncationError = KindedError<ErrorKind::Truncation>;
using UnsupportedShape = KindedError<ErrorKind::UnsupportedShape>;
using IoError = KindedError<ErrorKind::Io>;
using OrderError = KindedError<ErrorKind::Order>;
using EmptyFamily = KindedError<ErrorKind::EmptyFamily>;
using IncompleteRecord = KindedError<ErrorKind::IncompleteRecord>;

/// Manifest validation failure; carries the JSON path of the offending field.
class SchemaError : public Error {
public:
    SchemaError(std::string field_path, const std::string &what)
        : Error(ErrorKind::Schema, field_path + ": " + what), field_path_(std::move(field_path)) {}

    const std::string &field_path() const noexcept { return field_path_; }

private:
    std::string field_path_;
};

}  // namespace splx
