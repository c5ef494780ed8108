#include "hwqa/text.hpp"

#include "hwqa/error.hpp"
#include "hwqa/porter.hpp"
#include "hwqa/unicode.hpp"

namespace hwqa {

std::vector<std::string> tokenize(std::string_view text) {
    const std::string normalized = unicode::nfc(text);
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch : normalized) {
        const auto c = static_cast<unsigned char>(ch);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordSet& stopwords) {
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!stopwords.contains(t)) {
            kept.push_back(t);
        }
    }
    return kept;
}

std::vector<std::string> stem(const std::vector<std::string>& tokens, StemmerKind kind) {
    if (kind == StemmerKind::None) {
        return tokens;
    }
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        out.push_back(porter::stem(t));
    }
    return out;
}

ProcessedText preprocess(std::string_view text, const PreprocessConfig& cfg) {
    ProcessedText out;
    for (const char ch : unicode::nfc(text)) {
        // count code points: every byte that is not a UTF-8 continuation byte
        if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) {
            ++out.source_len_chars;
        }
    }
    std::vector<std::string> tokens = tokenize(text);
    if (cfg.remove_stopwords) {
        tokens = remove_stopwords(tokens);
    }
    out.tokens = stem(tokens, cfg.stemmer);
    return out;
}

std::string to_string(StemmerKind kind) { return kind == StemmerKind::Porter ? "porter" : "none"; }

StemmerKind stemmer_from_string(std::string_view name) {
    if (name == "porter") return StemmerKind::Porter;
    if (name == "none") return StemmerKind::None;
    throw Error(ErrorKind::Configuration, "unknown stemmer '" + std::string(name) + "' (expected porter|none)");
}

}  // namespace hwqa
