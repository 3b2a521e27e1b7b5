#include "poetrat/error.hpp"

namespace poetrat {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::MalformedRecord: return "MalformedRecord";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::Io: return "Io";
        case Errc::DuplicatePoemText: return "DuplicatePoemText";
        case Errc::NotFound: return "NotFound";
        case Errc::Transport: return "Transport";
        case Errc::EmptyCompletion: return "EmptyCompletion";
        case Errc::ExemplarCount: return "ExemplarCount";
        case Errc::UnparseableChoice: return "UnparseableChoice";
        case Errc::UnparseableScore: return "UnparseableScore";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::DegenerateInput: return "DegenerateInput";
        case Errc::ConfigError: return "ConfigError";
        case Errc::ViewUnavailable: return "ViewUnavailable";
        case Errc::Contract: return "Contract";
    }
    return "Unknown";
}

}  // namespace poetrat
