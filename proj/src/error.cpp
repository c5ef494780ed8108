#include "hwqa/error.hpp"

namespace hwqa {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::EmptyCorpus: return "empty-corpus";
        case ErrorKind::Indexing: return "indexing";
        case ErrorKind::DegenerateDocument: return "degenerate-document";
        case ErrorKind::Transport: return "transport";
        case ErrorKind::ProviderContract: return "provider-contract";
        case ErrorKind::Format: return "format";
        case ErrorKind::Coverage: return "coverage";
        case ErrorKind::Configuration: return "configuration";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::Alignment: return "alignment";
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

namespace {

std::string describe_missing(const std::vector<std::size_t>& missing, const std::string& what) {
    std::string msg = what + " (missing ids:";
    for (std::size_t id : missing) {
        msg += ' ';
        msg += std::to_string(id);
    }
    msg += ')';
    return msg;
}

}  // namespace

CoverageError::CoverageError(std::vector<std::size_t> missing, const std::string& what)
    : Error(ErrorKind::Coverage, describe_missing(missing, what)), missing_(std::move(missing)) {}

}  // namespace hwqa
