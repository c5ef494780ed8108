#include "hwqa/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "hwqa/error.hpp"

namespace hwqa::unicode {

std::string nfc(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) {
        throw Error(ErrorKind::Configuration, std::string("ICU NFC unavailable: ") + u_errorName(status));
    }
    const auto source = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    if (normalizer->isNormalized(source, status) && U_SUCCESS(status)) {
        std::string out;
        source.toUTF8String(out);
        return out;
    }
    status = U_ZERO_ERROR;
    const icu::UnicodeString normalized = normalizer->normalize(source, status);
    if (U_FAILURE(status)) {
        throw Error(ErrorKind::Parse, std::string("NFC normalization failed: ") + u_errorName(status));
    }
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

}  // namespace hwqa::unicode

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace hwqa::unicode {

std::string lower(std::string_view utf8) {
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    s.toLower(icu::Locale::getRoot());
    std::string out;
    s.toUTF8String(out);
    return out;
}

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

std::size_t codepoint_count(std::string_view utf8) {
    std::size_t n = 0;
    for (const char c : utf8) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::optional<std::string_view> codepoint_slice(std::string_view utf8, std::size_t begin, std::size_t end) {
    if (begin > end) return std::nullopt;
    std::size_t cp = 0;
    std::optional<std::size_t> byte_begin;
    std::optional<std::size_t> byte_end;
    for (std::size_t i = 0; i <= utf8.size(); ++i) {
        const bool boundary = i == utf8.size() || (static_cast<unsigned char>(utf8[i]) & 0xC0) != 0x80;
        if (!boundary) continue;
        if (cp == begin) byte_begin = i;
        if (cp == end) {
            byte_end = i;
            break;
        }
        ++cp;
    }
    if (!byte_begin || !byte_end) return std::nullopt;
    return utf8.substr(*byte_begin, *byte_end - *byte_begin);
}

}  // namespace hwqa::unicode
