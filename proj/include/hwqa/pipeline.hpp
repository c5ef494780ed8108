#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwqa/config.hpp"
#include "hwqa/corpus.hpp"
#include "hwqa/embedding.hpp"
#include "hwqa/evaluation.hpp"
#include "hwqa/reader.hpp"
#include "hwqa/retriever.hpp"
#include "hwqa/tfidf.hpp"

namespace hwqa {

// A dataset together with the TF-IDF index fitted over its documents.
struct IndexedCorpus {
    Dataset dataset;
    TfIdfIndex index;
};

IndexedCorpus build_indexed_corpus(const Dataset& dataset, const PreprocessConfig& preprocess);

// Writes <dir>/index.json and <dir>/corpus.json, creating dir if needed.
void save_indexed_corpus(const IndexedCorpus& corpus, const std::string& dir);
// Accepts the directory written above or a path to its index.json.
IndexedCorpus load_indexed_corpus(const std::string& path);

// Throws ErrorKind::Configuration unless both datasets hold the same documents.
void require_same_documents(const Dataset& expected, const Dataset& actual);

// Index plus the dense channel, ready to answer queries.
struct RetrievalStack {
    const TfIdfIndex* index = nullptr;
    std::optional<EmbeddingMatrix> embeddings;
    std::unique_ptr<EmbeddingProvider> provider;

    RetrievalInputs inputs() const;
};

// Loads cfg.embeddings when set, otherwise embeds the corpus through
// cfg.embedding_provider. The dense channel is skipped entirely when the
// transformer weight is 0 and no embedding file is given.
RetrievalStack make_retrieval_stack(const RunConfig& cfg, const TfIdfIndex& index, const std::vector<Document>& corpus);

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& cfg);

std::vector<Query> dataset_queries(const Dataset& dataset);

std::vector<RetrievalResult> run_retrieval(const Dataset& dataset, const RetrievalStack& stack,
                                           const RetrieverConfig& cfg, std::size_t jobs);

ReaderEnsemble make_ensemble(const std::vector<std::string>& reader_specs, std::size_t k);

// contexts[i] are the passages read for dataset.items[i].
std::vector<EnsemblePrediction> run_readers(ReaderEnsemble& ensemble, const Dataset& dataset,
                                            const std::vector<std::vector<std::string>>& contexts, std::size_t jobs);

// Contexts from each question's top `depth` retrieved documents.
std::vector<std::vector<std::string>> retrieved_contexts(const Dataset& dataset,
                                                         const std::vector<RetrievalResult>& results,
                                                         std::size_t depth);
// Each question's gold document, for reader-only evaluation.
std::vector<std::vector<std::string>> gold_contexts(const Dataset& dataset);

// {"tool","version","kind","generated_at","config"} header shared by reports.
nlohmann::json report_envelope(const std::string& kind, const RunConfig& cfg);

struct EndToEndRun {
    std::vector<RetrievalResult> retrieval;
    std::vector<EnsemblePrediction> predictions;
    RetrieverReport retriever_report;
    ReaderReport reader_report;
    nlohmann::json report;
};

// Ingest, index, retrieve, read and evaluate. When cfg.out_dir is set,
// writes report.json, predictions.jsonl, retrieval.jsonl and per_question.csv there.
EndToEndRun run_end_to_end(RunConfig cfg);

// Retriever ablation rows: TF-IDF; TF-IDF + preprocessing;
// TF-IDF + preprocessing + ST.
nlohmann::json retriever_ablation(const Dataset& dataset, const RunConfig& base);

// Reader ablation rows over the first reader, then the full ensemble.
nlohmann::json reader_ablation(const Dataset& dataset, const RunConfig& base);

nlohmann::json merged_report(const RetrieverReport& retriever, const ReaderReport& reader);

}  // namespace hwqa
