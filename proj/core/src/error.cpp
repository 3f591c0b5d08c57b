#include "bridgewatch/error.hpp"

#include <fmt/format.h>

namespace bridgewatch {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::MalformedLine:            return "MalformedLine";
        case Errc::MissingField:             return "MissingField";
        case Errc::OutOfRangeValue:          return "OutOfRangeValue";
        case Errc::SchemaViolation:          return "SchemaViolation";
        case Errc::MissingFile:              return "MissingFile";
        case Errc::ValidationFailed:         return "ValidationFailed";
        case Errc::InvalidAudio:             return "InvalidAudio";
        case Errc::InsufficientPupilData:    return "InsufficientPupilData";
        case Errc::DegenerateCalibration:    return "DegenerateCalibration";
        case Errc::WindowTooSmall:           return "WindowTooSmall";
        case Errc::InvalidWeights:           return "InvalidWeights";
        case Errc::EventOutsideSession:      return "EventOutsideSession";
        case Errc::InvalidLexicon:           return "InvalidLexicon";
        case Errc::ChecklistEventMismatch:   return "ChecklistEventMismatch";
        case Errc::EmptyReference:           return "EmptyReference";
        case Errc::ClipTooShort:             return "ClipTooShort";
        case Errc::MissingBaseline:          return "MissingBaseline";
        case Errc::InvalidScenario:          return "InvalidScenario";
        case Errc::SchemaMismatch:           return "SchemaMismatch";
        case Errc::UnknownSection:           return "UnknownSection";
        case Errc::UnknownChart:             return "UnknownChart";
        case Errc::CatalogMismatch:          return "CatalogMismatch";
        case Errc::AdapterUnavailable:       return "AdapterUnavailable";
        case Errc::AdapterTimeout:           return "AdapterTimeout";
        case Errc::MalformedAdapterResponse: return "MalformedAdapterResponse";
        case Errc::OutOfRangeScore:          return "OutOfRangeScore";
    }
    return "Unknown";
}

ParseError::ParseError(Errc code, std::size_t line_no, std::string reason)
    : Error(code, line_no > 0
                      ? fmt::format("{} at line {}: {}", errc_name(code), line_no, reason)
                      : fmt::format("{}: {}", errc_name(code), reason)),
      line_no_(line_no),
      reason_(std::move(reason)) {}

}  // namespace bridgewatch
