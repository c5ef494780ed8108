#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hwqa {

enum class StemmerKind { Porter, None };

struct PreprocessConfig {
    bool remove_stopwords = true;
    StemmerKind stemmer = StemmerKind::Porter;

    bool operator==(const PreprocessConfig&) const = default;
};

struct ProcessedText {
    std::vector<std::string> tokens;
    std::size_t source_len_chars = 0;

    bool operator==(const ProcessedText&) const = default;
};

using StopwordSet = std::set<std::string, std::less<>>;

// Version tag of the shipped English list; bump on any edit.
inline constexpr std::string_view kStopwordListVersion = "en-1";

const StopwordSet& default_stopwords();

// NFC-normalize, lowercase ASCII, split on every maximal run of characters
// outside [A-Za-z0-9]. Non-ASCII code points are boundaries.
std::vector<std::string> tokenize(std::string_view text);

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordSet& stopwords = default_stopwords());

std::vector<std::string> stem(const std::vector<std::string>& tokens,
                              StemmerKind kind = StemmerKind::Porter);

ProcessedText preprocess(std::string_view text, const PreprocessConfig& cfg = {});

std::string to_string(StemmerKind kind);
StemmerKind stemmer_from_string(std::string_view name);

}  // namespace hwqa
