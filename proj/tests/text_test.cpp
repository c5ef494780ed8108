#include <gtest/gtest.h>

#include "hwqa/text.hpp"

using namespace hwqa;
using Tokens = std::vector<std::string>;

TEST(Tokenize, SplitsOnNonAlphanumerics) {
    EXPECT_EQ(tokenize("What is the role of teachers in education?"),
              (Tokens{"what", "is", "the", "role", "of", "teachers", "in", "education"}));
    EXPECT_EQ(tokenize(""), Tokens{});
    EXPECT_EQ(tokenize("CIA's budget\xE2\x80\x94" "1997"), (Tokens{"cia", "s", "budget", "1997"}));
}

TEST(Tokenize, NonAsciiIsBoundary) {
    EXPECT_EQ(tokenize("na\xC3\xAFve caf\xC3\xA9"), (Tokens{"na", "ve", "caf"}));
    EXPECT_EQ(tokenize("  \t\n "), Tokens{});
}

TEST(Stopwords, RemovesListedWords) {
    EXPECT_EQ(remove_stopwords({"what", "is", "the", "role"}), Tokens{"role"});
    EXPECT_EQ(remove_stopwords({}), Tokens{});
}

TEST(Stopwords, EmptySetIsIdentity) {
    const Tokens in{"what", "is", "the", "role"};
    EXPECT_EQ(remove_stopwords(in, StopwordSet{}), in);
}

TEST(Stopwords, ListIsLowercaseAlnum) {
    for (const auto& w : default_stopwords()) {
        EXPECT_EQ(tokenize(w), Tokens{w}) << w;
    }
}

TEST(Stem, PorterExamples) {
    EXPECT_EQ(stem({"teachers"}), Tokens{"teacher"});
    EXPECT_EQ(stem({"education"}), Tokens{"educ"});
    EXPECT_EQ(stem({"a"}), Tokens{"a"});
    EXPECT_EQ(stem({"teachers"}, StemmerKind::None), Tokens{"teachers"});
}

TEST(Preprocess, ComposesStages) {
    const ProcessedText p = preprocess("What is the role of teachers in education?");
    EXPECT_EQ(p.tokens, (Tokens{"role", "teacher", "educ"}));
    EXPECT_EQ(p.source_len_chars, 42u);
    EXPECT_EQ(preprocess("").tokens, Tokens{});
}

TEST(Preprocess, ConfigurableStages) {
    PreprocessConfig raw{false, StemmerKind::None};
    EXPECT_EQ(preprocess("The teachers", raw).tokens, (Tokens{"the", "teachers"}));
}

TEST(Preprocess, Deterministic) {
    const std::string s = "Chloroplasts divide to form new pyrenoids, or be produced de novo.";
    EXPECT_EQ(preprocess(s), preprocess(s));
}

TEST(Preprocess, StemmerNames) {
    EXPECT_EQ(stemmer_from_string(to_string(StemmerKind::Porter)), StemmerKind::Porter);
    EXPECT_EQ(stemmer_from_string(to_string(StemmerKind::None)), StemmerKind::None);
    EXPECT_ANY_THROW(stemmer_from_string("lancaster"));
}
