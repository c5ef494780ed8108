#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hwqa {

enum class ErrorKind {
    Parse,
    Schema,
    EmptyCorpus,
    Indexing,
    DegenerateDocument,
    Transport,
    ProviderContract,
    Format,
    Coverage,
    Configuration,
    DimensionMismatch,
    Alignment,
    Usage,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t byte_offset, const std::string& what)
        : Error(ErrorKind::Parse, what + " (at byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

// `path` is a JSON pointer style location, e.g. "/data/0/paragraphs/3/qas/1/answers".
class SchemaError : public Error {
public:
    SchemaError(std::string path, const std::string& what)
        : Error(ErrorKind::Schema, path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class CoverageError : public Error {
public:
    CoverageError(std::vector<std::size_t> missing, const std::string& what);

    const std::vector<std::size_t>& missing_ids() const noexcept { return missing_; }

private:
    std::vector<std::size_t> missing_;
};

class TransportError : public Error {
public:
    TransportError(std::string endpoint, int attempts, int last_status, const std::string& what)
        : Error(ErrorKind::Transport, endpoint + ": " + what + " after " +
                                          std::to_string(attempts) + " attempt(s)"),
          endpoint_(std::move(endpoint)), attempts_(attempts), last_status_(last_status) {}

    const std::string& endpoint() const noexcept { return endpoint_; }
    int attempts() const noexcept { return attempts_; }
    // HTTP status of the final attempt; 0 when no response was received.
    int last_status() const noexcept { return last_status_; }

private:
    std::string endpoint_;
    int attempts_;
    int last_status_;
};

}  // namespace hwqa
