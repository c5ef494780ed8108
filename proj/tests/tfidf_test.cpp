#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hwqa/error.hpp"
#include "hwqa/tfidf.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace hwqa;
using Tokens = std::vector<std::string>;

namespace {

std::vector<ProcessedText> as_processed(const std::vector<Tokens>& docs) {
    std::vector<ProcessedText> out;
    for (const auto& d : docs) out.push_back({d, 0});
    return out;
}

}  // namespace

TEST(TermFrequency, Examples) {
    const Tokens doc{"a", "b", "a"};
    EXPECT_DOUBLE_EQ(term_frequency("a", doc), 2.0 / 3.0);
    EXPECT_EQ(term_frequency("z", doc), 0.0);
    EXPECT_EQ(term_frequency("a", Tokens{"a"}), 1.0);
}

TEST(TermFrequency, EmptyDocumentIsDegenerate) {
    try {
        term_frequency("a", Tokens{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateDocument);
    }
}

TEST(InverseDocumentFrequency, Examples) {
    const std::vector<Tokens> corpus{{"a", "b"}, {"a", "c"}, {"a"}};
    EXPECT_NEAR(inverse_document_frequency("b", corpus), 0.405465, 1e-6);
    EXPECT_NEAR(inverse_document_frequency("a", corpus), -0.287682, 1e-6);
    EXPECT_NEAR(inverse_document_frequency("zzz", corpus), 1.098612, 1e-6);
    EXPECT_THROW(inverse_document_frequency("a", std::vector<Tokens>{}), Error);
}

TEST(Fit, TwoDocumentExample) {
    const auto index = fit(as_processed({{"a", "b"}, {"a"}}));
    ASSERT_EQ(index.n_docs(), 2u);
    ASSERT_EQ(index.n_terms(), 2u);
    EXPECT_EQ(index.vocab().find("a"), 0u);
    EXPECT_EQ(index.vocab().find("b"), 1u);
    EXPECT_NEAR(index.weight(0, 0), 0.5 * std::log(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(index.weight(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(index.weight(1, 0), std::log(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(index.weight(0, 0), -0.2027, 1e-4);
    EXPECT_NEAR(index.weight(1, 0), -0.4055, 1e-4);
}

TEST(Fit, SingleDocument) {
    const auto index = fit(as_processed({{"x"}}));
    EXPECT_EQ(index.n_docs(), 1u);
    EXPECT_EQ(index.n_terms(), 1u);
    EXPECT_NEAR(index.weight(0, 0), -0.6931, 1e-4);
}

TEST(Fit, EmptyDocumentNamesId) {
    try {
        fit(as_processed({{"a"}, {}, {"b"}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Indexing);
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
}

TEST(Fit, NormalizedRowsHaveUnitLength) {
    const auto index = fit(as_processed({{"a", "b", "b"}, {"c"}, {"a", "c", "d"}}));
    for (std::size_t d = 0; d < index.n_docs(); ++d) {
        double sq = 0.0;
        for (const auto& e : index.normalized_row(d)) sq += e.weight * e.weight;
        if (index.row_norm(d) > 0.0) EXPECT_NEAR(sq, 1.0, 1e-12);
    }
}

TEST(TransformQuery, UsesFittedIdf) {
    const auto index = fit(as_processed({{"a", "b"}, {"a"}}));
    const auto q = transform_query(index, {{"a"}, 1});
    ASSERT_EQ(q.entries.size(), 1u);
    EXPECT_EQ(q.entries[0].column, 0u);
    EXPECT_NEAR(q.entries[0].weight, std::log(2.0 / 3.0), 1e-12);
    EXPECT_FALSE(q.all_oov);
}

TEST(TransformQuery, OutOfVocabulary) {
    const auto index = fit(as_processed({{"a", "b"}, {"a"}}));
    const auto q = transform_query(index, {{"zzz"}, 3});
    EXPECT_TRUE(q.empty());
    EXPECT_TRUE(q.all_oov);
    EXPECT_EQ(index.cosine(q, 0), 0.0);
}

TEST(TransformQuery, DocumentCopyIsParallelToRow) {
    const auto index = fit(as_processed({{"a", "b", "b"}, {"c", "a"}, {"d"}}));
    const auto q = transform_query(index, {{"b", "a", "b"}, 0});
    EXPECT_NEAR(index.cosine(q, 0), 1.0, 1e-12);
}

TEST(Fit, MatchesBruteForceOnRandomCorpora) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto docs = hwqa::testing::random_token_corpus(rng, 2 + trial % 9, 20, 15);
        const auto index = fit(as_processed(docs));
        const auto oracle = hwqa::testing::oracle_tfidf(docs);
        ASSERT_EQ(index.vocab().terms(), oracle.vocab);
        for (std::size_t d = 0; d < docs.size(); ++d) {
            for (std::size_t t = 0; t < oracle.vocab.size(); ++t) {
                EXPECT_NEAR(index.weight(d, t), oracle.rows[d][t], 1e-9);
            }
        }
    }
}

TEST(IndexPersistence, RoundTripIsExact) {
    std::mt19937_64 rng(11);
    const auto docs = hwqa::testing::random_token_corpus(rng, 30, 40, 20);
    const auto index = fit(as_processed(docs), {false, StemmerKind::None});
    hwqa::testing::TempDir tmp;
    save_index(index, tmp.file("index.json"));
    const auto loaded = load_index(tmp.file("index.json"));
    EXPECT_EQ(loaded.vocab().terms(), index.vocab().terms());
    EXPECT_EQ(loaded.row_ptr(), index.row_ptr());
    EXPECT_EQ(loaded.col_idx(), index.col_idx());
    EXPECT_EQ(loaded.values(), index.values());
    EXPECT_EQ(loaded.preprocess_config(), index.preprocess_config());
}

TEST(IndexPersistence, RejectsUnknownFormatVersion) {
    const auto index = fit(as_processed({{"a"}}));
    auto j = index_to_json(index);
    j["format_version"] = 99;
    EXPECT_THROW(index_from_json(j), Error);
}
