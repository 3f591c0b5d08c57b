#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bridgewatch {

enum class Errc {
    MalformedLine,
    MissingField,
    OutOfRangeValue,
    SchemaViolation,
    MissingFile,
    ValidationFailed,
    InvalidAudio,
    InsufficientPupilData,
    DegenerateCalibration,
    WindowTooSmall,
    InvalidWeights,
    EventOutsideSession,
    InvalidLexicon,
    ChecklistEventMismatch,
    EmptyReference,
    ClipTooShort,
    MissingBaseline,
    InvalidScenario,
    SchemaMismatch,
    UnknownSection,
    UnknownChart,
    CatalogMismatch,
    AdapterUnavailable,
    AdapterTimeout,
    MalformedAdapterResponse,
    OutOfRangeScore,
};

const char* errc_name(Errc code);

// Every failure the library reports on bad input is an Error. Anything else
// escaping the library is a bug.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Raised by the line-oriented parsers. line_no is 1-based; 0 means the whole
// document (single-JSON files).
class ParseError : public Error {
public:
    ParseError(Errc code, std::size_t line_no, std::string reason);

    std::size_t line_no() const noexcept { return line_no_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_no_;
    std::string reason_;
};

}  // namespace bridgewatch
