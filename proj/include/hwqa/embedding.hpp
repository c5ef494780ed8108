#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hwqa/corpus.hpp"
#include "hwqa/http.hpp"

namespace hwqa {

using Vector = std::vector<double>;

// n x d dense matrix, one row per document. Rows are stored L2-normalized;
// the original norms are kept alongside. All-zero rows stay zero (norm 0).
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    // Throws ErrorKind::DimensionMismatch if rows disagree in length or if
    // doc_ids and rows differ in count, ErrorKind::Format if dim would be 0.
    EmbeddingMatrix(std::vector<Vector> rows, std::vector<DocId> doc_ids, std::string provider_tag);

    std::size_t rows() const noexcept { return rows_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const std::string& provider_tag() const noexcept { return provider_tag_; }
    const std::vector<DocId>& doc_ids() const noexcept { return doc_ids_; }

    std::span<const double> row(std::size_t i) const { return rows_.at(i); }
    double original_norm(std::size_t i) const { return norms_.at(i); }
    // Row rescaled to its original norm.
    Vector original_row(std::size_t i) const;

private:
    std::vector<Vector> rows_;
    std::vector<double> norms_;
    std::vector<DocId> doc_ids_;
    std::size_t dim_ = 0;
    std::string provider_tag_;
};

// u.v / (|u| |v|), 0.0 when either norm is zero. Throws DimensionMismatch.
double cosine(std::span<const double> u, std::span<const double> v);

// Deterministic stand-in for a sentence encoder. For h = FNV-1a-64 of the
// NFC UTF-8 bytes, component k is 2 * u_k - 1 where u_k is the top 53 bits of
// splitmix64(h + (k + 1) * 0x9E3779B97F4A7C15) scaled by 2^-53; the vector is
// then divided by its L2 norm. See docs/stub_embedding.md.
Vector stub_embed(std::string_view text, std::size_t dim);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    // One vector per text, in input order.
    virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
    // Model identity recorded with the vectors.
    virtual std::string tag() const = 0;
    virtual std::string kind() const = 0;
};

class StubEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit StubEmbeddingProvider(std::size_t dim);

    std::vector<Vector> embed(std::span<const std::string> texts) override;
    std::string tag() const override { return "stub:dim=" + std::to_string(dim_); }
    std::string kind() const override { return "stub"; }
    std::size_t dim() const noexcept { return dim_; }

private:
    std::size_t dim_;
};

struct HttpEmbeddingOptions {
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 4;
    http::RetryPolicy retry;
};

// Client for POST /v1/embed: {"texts": [...]} -> {"model", "dim", "vectors"}.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(std::string base_url, HttpEmbeddingOptions options = {});

    std::vector<Vector> embed(std::span<const std::string> texts) override;
    std::string tag() const override;
    std::string kind() const override { return "http"; }

private:
    std::vector<Vector> embed_batch(std::span<const std::string> texts);

    std::string base_url_;
    HttpEmbeddingOptions options_;
    mutable std::mutex tag_mutex_;
    std::string model_tag_;
};

// Text -> vector lookup backed by an embedding file whose rows carry a
// "text" field. Unknown texts raise a CoverageError-style ProviderContract error.
class FileEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit FileEmbeddingProvider(const std::string& path);

    std::vector<Vector> embed(std::span<const std::string> texts) override;
    std::string tag() const override { return model_; }
    std::string kind() const override { return "file"; }

private:
    std::unordered_map<std::string, Vector> table_;
    std::string model_;
};

// Parses "stub:dim=64", "http://host:port" or "file:<path>".
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& spec,
                                                           const HttpEmbeddingOptions& http_options = {});

// Embeds each text through the provider. Doc ids default to 0..n-1.
// Throws ErrorKind::ProviderContract on an empty batch or inconsistent dims.
EmbeddingMatrix embed_texts(EmbeddingProvider& provider, std::span<const std::string> texts);
EmbeddingMatrix embed_corpus(EmbeddingProvider& provider, const std::vector<Document>& corpus);

// JSON Lines: manifest {"dim", "model", "count"}, then {"id", "vector"} rows.
// Rows are aligned to corpus ids; missing ids throw CoverageError, extra ids
// are ignored with a warning.
EmbeddingMatrix load_embeddings(const std::string& path, const std::vector<Document>& corpus);
void save_embeddings(const EmbeddingMatrix& matrix, const std::string& path,
                     const std::vector<Document>* corpus = nullptr);

}  // namespace hwqa
