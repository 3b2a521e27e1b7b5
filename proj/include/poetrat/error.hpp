#pragma once

#include <stdexcept>
#include <string>

namespace poetrat {

enum class Errc {
    MalformedRecord,
    DuplicateId,
    Io,
    DuplicatePoemText,
    NotFound,
    Transport,
    EmptyCompletion,
    ExemplarCount,
    UnparseableChoice,
    UnparseableScore,
    LengthMismatch,
    EmptyInput,
    DegenerateInput,
    ConfigError,
    ViewUnavailable,
    Contract,
};

const char* errc_name(Errc code);

/// Library-wide exception type. `transient()` marks transport failures
/// that a retry policy is allowed to re-attempt (HTTP 429/5xx class).
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message, bool transient = false)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code),
          transient_(transient) {}

    Errc code() const noexcept { return code_; }
    bool transient() const noexcept { return transient_; }

private:
    Errc code_;
    bool transient_;
};

}  // namespace poetrat
