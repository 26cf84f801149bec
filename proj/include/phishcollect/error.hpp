#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phishcollect {

// Errors that abort one operation. Per-sample fetch and capture failures are
// not exceptions; they are recorded as values (see fetch.hpp, snapshot.hpp).
enum class Errc {
    MissingUrlElement,
    InvalidUrl,
    MissingUrlColumn,
    EmptyFeed,
    UnresolvableReference,
    SampleExists,
    IoFailure,
    CorruptManifest,
    MissingHtml,
    SingleClassMatrix,
    SchemaMismatch,
    InvalidMatrix,
    InvalidArgument,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::MissingUrlElement: return "MissingUrlElement";
        case Errc::InvalidUrl: return "InvalidUrl";
        case Errc::MissingUrlColumn: return "MissingUrlColumn";
        case Errc::EmptyFeed: return "EmptyFeed";
        case Errc::UnresolvableReference: return "UnresolvableReference";
        case Errc::SampleExists: return "SampleExists";
        case Errc::IoFailure: return "IoFailure";
        case Errc::CorruptManifest: return "CorruptManifest";
        case Errc::MissingHtml: return "MissingHtml";
        case Errc::SingleClassMatrix: return "SingleClassMatrix";
        case Errc::SchemaMismatch: return "SchemaMismatch";
        case Errc::InvalidMatrix: return "InvalidMatrix";
        case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace phishcollect
