#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hwqa/text.hpp"

namespace hwqa {

struct SparseEntry {
    std::size_t column = 0;
    double weight = 0.0;

    bool operator==(const SparseEntry&) const = default;
};

class Vocabulary {
public:
    Vocabulary() = default;
    // `terms` must be strictly increasing in byte order.
    explicit Vocabulary(std::vector<std::string> terms);

    std::optional<std::size_t> find(std::string_view term) const;
    const std::string& term(std::size_t column) const { return terms_.at(column); }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Query in the fitted term space. `entries` hold the unnormalized
// TF(t, q') * idf[t] weights, columns strictly increasing.
struct SparseQueryVector {
    std::vector<SparseEntry> entries;
    double norm = 0.0;
    // Set when the query had tokens but none were in the vocabulary.
    bool all_oov = false;

    bool empty() const noexcept { return entries.empty(); }
    std::vector<SparseEntry> normalized() const;
};

// TF-IDF document-term matrix in compressed sparse row form. Stored values
// are the raw TF(t,d) * IDF(t,D) weights; per-row L2 norms are kept so that
// cosine similarity is a sparse dot product divided by two norms.
class TfIdfIndex {
public:
    static constexpr int kFormatVersion = 1;

    TfIdfIndex(Vocabulary vocab, std::vector<double> idf, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx, std::vector<double> values,
               PreprocessConfig preprocess);

    const Vocabulary& vocab() const noexcept { return vocab_; }
    std::span<const double> idf() const noexcept { return idf_; }
    std::size_t n_docs() const noexcept { return row_ptr_.size() - 1; }
    std::size_t n_terms() const noexcept { return vocab_.size(); }
    const PreprocessConfig& preprocess_config() const noexcept { return preprocess_; }

    std::span<const std::size_t> row_columns(std::size_t doc) const;
    std::span<const double> row_values(std::size_t doc) const;
    double row_norm(std::size_t doc) const { return row_norms_.at(doc); }
    // Raw (unnormalized) weight; zero for absent entries.
    double weight(std::size_t doc, std::size_t column) const;
    std::vector<SparseEntry> normalized_row(std::size_t doc) const;

    // cos(q, row_doc); 0 when either vector has zero norm.
    double cosine(const SparseQueryVector& query, std::size_t doc) const;

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    Vocabulary vocab_;
    std::vector<double> idf_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
    std::vector<double> row_norms_;
    PreprocessConfig preprocess_;
};

// f_{t,d} / sum_t' f_{t',d}. Throws ErrorKind::DegenerateDocument on an empty document.
double term_frequency(std::string_view term, std::span<const std::string> doc_tokens);

// ln(N / (1 + df(t))). Throws ErrorKind::EmptyCorpus when N == 0.
double inverse_document_frequency(std::string_view term,
                                  std::span<const std::vector<std::string>> corpus_tokens);

// `preprocess` is recorded in the index so queries can be processed the same way.
TfIdfIndex fit(std::span<const ProcessedText> corpus, const PreprocessConfig& preprocess = {});

SparseQueryVector transform_query(const TfIdfIndex& index, const ProcessedText& query);

nlohmann::json index_to_json(const TfIdfIndex& index);
TfIdfIndex index_from_json(const nlohmann::json& j);
void save_index(const TfIdfIndex& index, const std::string& path);
TfIdfIndex load_index(const std::string& path);

}  // namespace hwqa
