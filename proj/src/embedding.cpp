#include "hwqa/embedding.hpp"

#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <fstream>
#include <set>

#include "hwqa/error.hpp"
#include "hwqa/log.hpp"
#include "hwqa/unicode.hpp"

namespace hwqa {

namespace {

double l2(std::span<const double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return std::sqrt(sq);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Vector parse_vector(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array()) throw Error(ErrorKind::Format, where + ": vector must be an array");
    Vector v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw Error(ErrorKind::Format, where + ": vector entries must be numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<Vector> rows, std::vector<DocId> doc_ids,
                                 std::string provider_tag)
    : doc_ids_(std::move(doc_ids)), provider_tag_(std::move(provider_tag)) {
    if (rows.size() != doc_ids_.size()) {
        throw Error(ErrorKind::DimensionMismatch, "embedding rows and doc ids differ in count");
    }
    if (!rows.empty()) {
        dim_ = rows.front().size();
        if (dim_ == 0) throw Error(ErrorKind::Format, "embedding dimension must be >= 1");
    }
    rows_.reserve(rows.size());
    norms_.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Vector& r = rows[i];
        if (r.size() != dim_) {
            throw Error(ErrorKind::DimensionMismatch, "embedding row " + std::to_string(i) + " has dimension " +
                                                          std::to_string(r.size()) + ", expected " +
                                                          std::to_string(dim_));
        }
        const double norm = l2(r);
        if (norm > 0.0) {
            for (double& x : r) x /= norm;
        }
        norms_.push_back(norm);
        rows_.push_back(std::move(r));
    }
}

Vector EmbeddingMatrix::original_row(std::size_t i) const {
    Vector out(rows_.at(i));
    for (double& x : out) x *= norms_[i];
    return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw Error(ErrorKind::DimensionMismatch, "cosine of vectors with dimensions " + std::to_string(u.size()) +
                                                      " and " + std::to_string(v.size()));
    }
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) return 0.0;
    return dot / (std::sqrt(uu) * std::sqrt(vv));
}

Vector stub_embed(std::string_view text, std::size_t dim) {
    if (dim == 0) throw Error(ErrorKind::Configuration, "stub embedding dimension must be >= 1");
    const std::uint64_t h = fnv1a64(unicode::nfc(text));
    Vector v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const std::uint64_t z = splitmix64(h + (static_cast<std::uint64_t>(k) + 1) * 0x9e3779b97f4a7c15ULL);
        const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;
        v[k] = 2.0 * unit - 1.0;
    }
    const double norm = l2(v);
    if (norm == 0.0) {
        v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

StubEmbeddingProvider::StubEmbeddingProvider(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw Error(ErrorKind::Configuration, "stub embedding dimension must be >= 1");
}

std::vector<Vector> StubEmbeddingProvider::embed(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(stub_embed(t, dim_));
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, HttpEmbeddingOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    if (options_.batch_size == 0) options_.batch_size = 1;
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

std::string HttpEmbeddingProvider::tag() const {
    std::lock_guard lock(tag_mutex_);
    return model_tag_.empty() ? "http:" + base_url_ : model_tag_;
}

std::vector<Vector> HttpEmbeddingProvider::embed_batch(std::span<const std::string> texts) {
    nlohmann::json req = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    const nlohmann::json resp = http::post_json(base_url_, "/v1/embed", req, options_.retry);
    if (!resp.is_object() || !resp.contains("vectors") || !resp["vectors"].is_array()) {
        throw Error(ErrorKind::ProviderContract, base_url_ + "/v1/embed: response lacks a 'vectors' array");
    }
    const auto& vectors = resp["vectors"];
    if (vectors.size() != texts.size()) {
        throw Error(ErrorKind::ProviderContract, base_url_ + "/v1/embed: returned " +
                                                     std::to_string(vectors.size()) + " vectors for " +
                                                     std::to_string(texts.size()) + " texts");
    }
    std::optional<std::size_t> declared_dim;
    if (auto d = resp.find("dim"); d != resp.end() && d->is_number_unsigned()) declared_dim = d->get<std::size_t>();
    std::vector<Vector> out;
    out.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        Vector v = parse_vector(vectors[i], base_url_ + "/v1/embed vector " + std::to_string(i));
        if (declared_dim && v.size() != *declared_dim) {
            throw Error(ErrorKind::ProviderContract, base_url_ + "/v1/embed: vector " + std::to_string(i) +
                                                         " disagrees with declared dim");
        }
        out.push_back(std::move(v));
    }
    if (auto m = resp.find("model"); m != resp.end() && m->is_string()) {
        std::lock_guard lock(tag_mutex_);
        if (!model_tag_.empty() && model_tag_ != m->get<std::string>()) {
            throw Error(ErrorKind::ProviderContract, base_url_ + "/v1/embed: model identity changed mid-run");
        }
        model_tag_ = m->get<std::string>();
    }
    return out;
}

std::vector<Vector> HttpEmbeddingProvider::embed(std::span<const std::string> texts) {
    std::vector<std::span<const std::string>> batches;
    for (std::size_t start = 0; start < texts.size(); start += options_.batch_size) {
        batches.push_back(texts.subspan(start, std::min(options_.batch_size, texts.size() - start)));
    }
    std::vector<std::vector<Vector>> results(batches.size());
    // bounded in-flight window; results land in their batch slot
    for (std::size_t wave = 0; wave < batches.size(); wave += options_.max_in_flight) {
        const std::size_t end = std::min(batches.size(), wave + options_.max_in_flight);
        std::vector<std::future<std::vector<Vector>>> pending;
        for (std::size_t b = wave; b < end; ++b) {
            pending.push_back(std::async(std::launch::async, [this, batch = batches[b]] { return embed_batch(batch); }));
        }
        for (std::size_t b = wave; b < end; ++b) results[b] = pending[b - wave].get();
    }
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (auto& r : results) {
        for (auto& v : r) out.push_back(std::move(v));
    }
    return out;
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open embedding file " + path);
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> dim;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(e.byte, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!dim) {
            dim = j.at("dim").get<std::size_t>();
            model_ = j.value("model", std::string("file:") + path);
            continue;
        }
        if (!j.contains("text")) continue;
        Vector v = parse_vector(j.at("vector"), path + ":" + std::to_string(line_no));
        if (v.size() != *dim) throw Error(ErrorKind::Format, path + ":" + std::to_string(line_no) + ": dimension mismatch");
        table_.emplace(unicode::nfc(j["text"].get<std::string>()), std::move(v));
    }
    if (!dim) throw Error(ErrorKind::Format, path + ": missing manifest line");
}

std::vector<Vector> FileEmbeddingProvider::embed(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto it = table_.find(unicode::nfc(t));
        if (it == table_.end()) {
            throw Error(ErrorKind::ProviderContract, "file embedding provider has no vector for text \"" +
                                                         t.substr(0, 60) + "\"");
        }
        out.push_back(it->second);
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& spec,
                                                           const HttpEmbeddingOptions& http_options) {
    if (spec.rfind("stub", 0) == 0) {
        std::size_t dim = 64;
        const auto colon = spec.find(':');
        if (colon != std::string::npos) {
            const std::string args = spec.substr(colon + 1);
            if (args.rfind("dim=", 0) != 0) {
                throw Error(ErrorKind::Configuration, "stub provider expects 'stub:dim=<n>', got '" + spec + "'");
            }
            try {
                dim = std::stoul(args.substr(4));
            } catch (const std::exception&) {
                throw Error(ErrorKind::Configuration, "bad stub dimension in '" + spec + "'");
            }
        } else if (spec != "stub") {
            throw Error(ErrorKind::Configuration, "unknown embedding provider '" + spec + "'");
        }
        return std::make_unique<StubEmbeddingProvider>(dim);
    }
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
        return std::make_unique<HttpEmbeddingProvider>(spec, http_options);
    }
    if (spec.rfind("file:", 0) == 0) {
        return std::make_unique<FileEmbeddingProvider>(spec.substr(5));
    }
    throw Error(ErrorKind::Configuration, "unknown embedding provider '" + spec +
                                              "' (expected stub:dim=N, http://host:port or file:<path>)");
}

EmbeddingMatrix embed_texts(EmbeddingProvider& provider, std::span<const std::string> texts) {
    if (texts.empty()) throw Error(ErrorKind::ProviderContract, "embed_texts called with no texts");
    std::vector<Vector> rows = provider.embed(texts);
    if (rows.size() != texts.size()) {
        throw Error(ErrorKind::ProviderContract, "provider returned " + std::to_string(rows.size()) +
                                                     " vectors for " + std::to_string(texts.size()) + " texts");
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) {
            throw Error(ErrorKind::ProviderContract, "provider returned vectors of differing dimension (" +
                                                         std::to_string(rows[0].size()) + " vs " +
                                                         std::to_string(rows[i].size()) + ")");
        }
    }
    std::vector<DocId> ids(rows.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return EmbeddingMatrix(std::move(rows), std::move(ids), provider.tag());
}

EmbeddingMatrix embed_corpus(EmbeddingProvider& provider, const std::vector<Document>& corpus) {
    const auto texts = document_texts(corpus);
    EmbeddingMatrix m = embed_texts(provider, texts);
    std::vector<Vector> rows;
    std::vector<DocId> ids;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        rows.push_back(m.original_row(i));
        ids.push_back(corpus[i].id);
    }
    return EmbeddingMatrix(std::move(rows), std::move(ids), m.provider_tag());
}

EmbeddingMatrix load_embeddings(const std::string& path, const std::vector<Document>& corpus) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open embedding file " + path);

    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> dim;
    std::string model;
    std::map<DocId, Vector> by_id;
    std::set<DocId> extra;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(e.byte, where + ": " + e.what());
        }
        if (!dim) {
            if (!j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
                throw Error(ErrorKind::Format, where + ": manifest must carry a positive integer 'dim'");
            }
            dim = j["dim"].get<std::size_t>();
            model = j.value("model", std::string("file:") + path);
            continue;
        }
        if (!j.contains("id") || !j["id"].is_number_unsigned()) {
            throw Error(ErrorKind::Format, where + ": row must carry a non-negative integer 'id'");
        }
        const DocId id = j["id"].get<DocId>();
        Vector v = parse_vector(j.value("vector", nlohmann::json()), where);
        if (v.size() != *dim) {
            throw Error(ErrorKind::Format, where + ": vector has dimension " + std::to_string(v.size()) +
                                               ", manifest declares " + std::to_string(*dim));
        }
        if (id >= corpus.size()) {
            extra.insert(id);
            continue;
        }
        by_id[id] = std::move(v);
    }
    if (!dim) throw Error(ErrorKind::Format, path + ": missing manifest line");
    if (!extra.empty()) {
        log::warn(path + ": ignoring " + std::to_string(extra.size()) + " row(s) for ids outside the corpus");
    }

    std::vector<std::size_t> missing;
    std::vector<Vector> rows;
    std::vector<DocId> ids;
    for (const auto& doc : corpus) {
        auto it = by_id.find(doc.id);
        if (it == by_id.end()) {
            missing.push_back(doc.id);
            continue;
        }
        rows.push_back(std::move(it->second));
        ids.push_back(doc.id);
    }
    if (!missing.empty()) throw CoverageError(std::move(missing), path + ": embedding file does not cover the corpus");
    return EmbeddingMatrix(std::move(rows), std::move(ids), model);
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::string& path, const std::vector<Document>* corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write embedding file " + path);
    out << nlohmann::json{{"dim", matrix.dim()}, {"model", matrix.provider_tag()}, {"count", matrix.rows()}}.dump()
        << '\n';
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        nlohmann::json row = {{"id", matrix.doc_ids()[i]}, {"vector", matrix.original_row(i)}};
        if (corpus != nullptr && matrix.doc_ids()[i] < corpus->size()) {
            row["text"] = (*corpus)[matrix.doc_ids()[i]].text;
        }
        out << row.dump() << '\n';
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace hwqa
