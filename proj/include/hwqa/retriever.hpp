#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwqa/embedding.hpp"
#include "hwqa/tfidf.hpp"

namespace hwqa {

struct ScoreTriple {
    DocId doc_id = 0;
    double s_tfidf = 0.0;
    double s_transformer = 0.0;
    double s_ensemble = 0.0;

    bool operator==(const ScoreTriple&) const = default;
};

struct RetrievalResult {
    std::string query_id;
    std::string query;
    // Descending s_ensemble, ties by ascending doc_id.
    std::vector<ScoreTriple> top;
    std::size_t n_requested = 0;
    // The query had no in-vocabulary terms; s_tfidf is 0 for every document.
    bool tfidf_all_oov = false;

    bool operator==(const RetrievalResult&) const = default;
};

struct RetrieverConfig {
    double w_tfidf = 0.6;
    double w_transformer = 0.4;
    std::size_t n = 5;
    // Send the preprocessed query (tokens joined by spaces) to the encoder
    // instead of the raw text.
    bool embed_preprocessed = false;

    // Throws ErrorKind::Configuration unless both weights are >= 0, they sum
    // to 1 (within 1e-9) and n >= 1.
    void validate() const;
    nlohmann::json to_json() const;

    double combine(double s_tfidf, double s_transformer) const noexcept {
        return w_tfidf * s_tfidf + w_transformer * s_transformer;
    }
};

// Everything needed to score a query: the fitted index plus, when the
// transformer weight is nonzero, the context embeddings and a query encoder.
struct RetrievalInputs {
    const TfIdfIndex* index = nullptr;
    const EmbeddingMatrix* embeddings = nullptr;
    EmbeddingProvider* provider = nullptr;
};

// Text sent to the encoder for `query` under `cfg`.
std::string encoder_input(const std::string& query, const RetrieverConfig& cfg, const PreprocessConfig& pp);

// Scores every document. `query_embedding` may be empty when the
// transformer channel is off (weight 0 and no embeddings supplied).
std::vector<ScoreTriple> score_all(const SparseQueryVector& query_tfidf, std::span<const double> query_embedding,
                                   const RetrievalInputs& inputs, const RetrieverConfig& cfg);

std::vector<ScoreTriple> score_all(const std::string& query, const RetrievalInputs& inputs,
                                   const RetrieverConfig& cfg);

RetrievalResult top_n(std::vector<ScoreTriple> scores, std::size_t n);

RetrievalResult retrieve(const std::string& query, const RetrievalInputs& inputs, const RetrieverConfig& cfg);

struct Query {
    std::string id;
    std::string text;
};

// Batch retrieval: one encoder call for all queries, scoring parallelized
// across queries. Output order follows `queries`.
std::vector<RetrievalResult> retrieve_all(const std::vector<Query>& queries, const RetrievalInputs& inputs,
                                          const RetrieverConfig& cfg, std::size_t jobs = 1);

nlohmann::json to_json(const RetrievalResult& result);

}  // namespace hwqa
