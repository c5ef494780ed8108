#include "hwqa/retriever.hpp"

#include <algorithm>
#include <cmath>

#include "hwqa/error.hpp"
#include "hwqa/parallel.hpp"

namespace hwqa {

namespace {

bool ranks_before(const ScoreTriple& a, const ScoreTriple& b) {
    if (a.s_ensemble != b.s_ensemble) return a.s_ensemble > b.s_ensemble;
    return a.doc_id < b.doc_id;
}

bool transformer_channel_on(const RetrievalInputs& inputs, const RetrieverConfig& cfg) {
    return cfg.w_transformer > 0.0 || inputs.embeddings != nullptr;
}

void check_inputs(const RetrievalInputs& inputs, const RetrieverConfig& cfg) {
    cfg.validate();
    if (inputs.index == nullptr) {
        throw Error(ErrorKind::Configuration, "retrieval requires a fitted TF-IDF index");
    }
    if (!transformer_channel_on(inputs, cfg)) return;
    if (inputs.embeddings == nullptr || inputs.provider == nullptr) {
        throw Error(ErrorKind::Configuration,
                    "transformer weight is nonzero but no context embeddings or query encoder were supplied");
    }
    const auto& emb = *inputs.embeddings;
    if (emb.rows() != inputs.index->n_docs()) {
        throw Error(ErrorKind::Configuration, "index covers " + std::to_string(inputs.index->n_docs()) +
                                                  " documents but embeddings cover " + std::to_string(emb.rows()));
    }
    for (std::size_t i = 0; i < emb.rows(); ++i) {
        if (emb.doc_ids()[i] != i) {
            throw Error(ErrorKind::Configuration, "embedding row " + std::to_string(i) + " is for document " +
                                                      std::to_string(emb.doc_ids()[i]) + ", index and embeddings are misaligned");
        }
    }
}

}  // namespace

void RetrieverConfig::validate() const {
    if (!(w_tfidf >= 0.0) || !(w_transformer >= 0.0)) {
        throw Error(ErrorKind::Configuration, "retriever weights must be non-negative");
    }
    if (std::abs(w_tfidf + w_transformer - 1.0) > 1e-9) {
        throw Error(ErrorKind::Configuration, "retriever weights must sum to 1 (got " +
                                                  std::to_string(w_tfidf) + " + " + std::to_string(w_transformer) + ")");
    }
    if (n < 1) throw Error(ErrorKind::Configuration, "top-n must be >= 1");
}

nlohmann::json RetrieverConfig::to_json() const {
    return {{"w_tfidf", w_tfidf}, {"w_transformer", w_transformer}, {"n", n}, {"embed_preprocessed", embed_preprocessed}};
}

std::string encoder_input(const std::string& query, const RetrieverConfig& cfg, const PreprocessConfig& pp) {
    if (!cfg.embed_preprocessed) return query;
    std::string joined;
    for (const auto& t : preprocess(query, pp).tokens) {
        if (!joined.empty()) joined.push_back(' ');
        joined += t;
    }
    return joined;
}

std::vector<ScoreTriple> score_all(const SparseQueryVector& query_tfidf, std::span<const double> query_embedding,
                                   const RetrievalInputs& inputs, const RetrieverConfig& cfg) {
    check_inputs(inputs, cfg);
    const bool dense = transformer_channel_on(inputs, cfg);
    if (dense && query_embedding.size() != inputs.embeddings->dim()) {
        throw Error(ErrorKind::DimensionMismatch, "query embedding has dimension " +
                                                      std::to_string(query_embedding.size()) + ", contexts have " +
                                                      std::to_string(inputs.embeddings->dim()));
    }
    const std::size_t n = inputs.index->n_docs();
    std::vector<ScoreTriple> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        ScoreTriple& s = scores[i];
        s.doc_id = i;
        s.s_tfidf = inputs.index->cosine(query_tfidf, i);
        s.s_transformer = dense ? cosine(query_embedding, inputs.embeddings->row(i)) : 0.0;
        s.s_ensemble = cfg.combine(s.s_tfidf, s.s_transformer);
    }
    return scores;
}

std::vector<ScoreTriple> score_all(const std::string& query, const RetrievalInputs& inputs,
                                   const RetrieverConfig& cfg) {
    check_inputs(inputs, cfg);
    const PreprocessConfig& pp = inputs.index->preprocess_config();
    const SparseQueryVector q = transform_query(*inputs.index, preprocess(query, pp));
    Vector e;
    if (transformer_channel_on(inputs, cfg)) {
        const std::vector<std::string> text{encoder_input(query, cfg, pp)};
        auto out = inputs.provider->embed(text);
        if (out.size() != 1) throw Error(ErrorKind::ProviderContract, "encoder returned no vector for the query");
        e = std::move(out.front());
    }
    return score_all(q, e, inputs, cfg);
}

RetrievalResult top_n(std::vector<ScoreTriple> scores, std::size_t n) {
    if (n < 1) throw Error(ErrorKind::Configuration, "top-n must be >= 1");
    RetrievalResult result;
    result.n_requested = n;
    const std::size_t k = std::min(n, scores.size());
    std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(k), scores.end(), ranks_before);
    scores.resize(k);
    result.top = std::move(scores);
    return result;
}

RetrievalResult retrieve(const std::string& query, const RetrievalInputs& inputs, const RetrieverConfig& cfg) {
    return retrieve_all({Query{"", query}}, inputs, cfg, 1).front();
}

std::vector<RetrievalResult> retrieve_all(const std::vector<Query>& queries, const RetrievalInputs& inputs,
                                          const RetrieverConfig& cfg, std::size_t jobs) {
    check_inputs(inputs, cfg);
    const PreprocessConfig& pp = inputs.index->preprocess_config();
    const bool dense = transformer_channel_on(inputs, cfg);

    std::vector<Vector> query_embeddings;
    if (dense && !queries.empty()) {
        std::vector<std::string> texts;
        texts.reserve(queries.size());
        for (const auto& q : queries) texts.push_back(encoder_input(q.text, cfg, pp));
        query_embeddings = inputs.provider->embed(texts);
        if (query_embeddings.size() != queries.size()) {
            throw Error(ErrorKind::ProviderContract, "encoder returned " + std::to_string(query_embeddings.size()) +
                                                         " vectors for " + std::to_string(queries.size()) + " queries");
        }
    }

    std::vector<RetrievalResult> results(queries.size());
    parallel_for(queries.size(), jobs, [&](std::size_t i) {
        const SparseQueryVector q = transform_query(*inputs.index, preprocess(queries[i].text, pp));
        std::span<const double> e;
        if (dense) e = query_embeddings[i];
        RetrievalResult r = top_n(score_all(q, e, inputs, cfg), cfg.n);
        r.query_id = queries[i].id;
        r.query = queries[i].text;
        r.tfidf_all_oov = q.entries.empty();
        results[i] = std::move(r);
    });
    return results;
}

nlohmann::json to_json(const RetrievalResult& result) {
    nlohmann::json top = nlohmann::json::array();
    for (const auto& s : result.top) {
        top.push_back({{"doc_id", s.doc_id},
                       {"s_tfidf", s.s_tfidf},
                       {"s_transformer", s.s_transformer},
                       {"s_ensemble", s.s_ensemble}});
    }
    nlohmann::json j = {{"query", result.query}, {"top", std::move(top)}};
    if (!result.query_id.empty()) j["query_id"] = result.query_id;
    if (result.tfidf_all_oov) j["tfidf_all_oov"] = true;
    return j;
}

}  // namespace hwqa
