#include "hwqa/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hwqa/error.hpp"

namespace hwqa {

namespace {

double l2_norm(std::span<const double> values) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    return std::sqrt(sq);
}

std::map<std::string, std::size_t, std::less<>> count_terms(std::span<const std::string> tokens) {
    std::map<std::string, std::size_t, std::less<>> counts;
    for (const auto& t : tokens) ++counts[t];
    return counts;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i > 0 && !(terms_[i - 1] < terms_[i])) {
            throw Error(ErrorKind::Format, "vocabulary terms must be strictly increasing: '" +
                                               terms_[i - 1] + "' then '" + terms_[i] + "'");
        }
        index_.emplace(terms_[i], i);
    }
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<SparseEntry> SparseQueryVector::normalized() const {
    std::vector<SparseEntry> out = entries;
    if (norm > 0.0) {
        for (auto& e : out) e.weight /= norm;
    }
    return out;
}

TfIdfIndex::TfIdfIndex(Vocabulary vocab, std::vector<double> idf, std::vector<std::size_t> row_ptr,
                       std::vector<std::size_t> col_idx, std::vector<double> values,
                       PreprocessConfig preprocess)
    : vocab_(std::move(vocab)),
      idf_(std::move(idf)),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)),
      preprocess_(preprocess) {
    if (idf_.size() != vocab_.size()) {
        throw Error(ErrorKind::Format, "idf length does not match vocabulary size");
    }
    if (row_ptr_.empty() || row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
        col_idx_.size() != values_.size()) {
        throw Error(ErrorKind::Format, "inconsistent CSR arrays");
    }
    row_norms_.reserve(n_docs());
    for (std::size_t d = 0; d < n_docs(); ++d) {
        if (row_ptr_[d] > row_ptr_[d + 1]) {
            throw Error(ErrorKind::Format, "row_ptr is not monotone at row " + std::to_string(d));
        }
        for (std::size_t k = row_ptr_[d]; k < row_ptr_[d + 1]; ++k) {
            if (col_idx_[k] >= vocab_.size() || (k > row_ptr_[d] && col_idx_[k] <= col_idx_[k - 1])) {
                throw Error(ErrorKind::Format, "bad column index in row " + std::to_string(d));
            }
        }
        row_norms_.push_back(l2_norm(row_values(d)));
    }
}

std::span<const std::size_t> TfIdfIndex::row_columns(std::size_t doc) const {
    return std::span<const std::size_t>(col_idx_).subspan(row_ptr_.at(doc), row_ptr_.at(doc + 1) - row_ptr_[doc]);
}

std::span<const double> TfIdfIndex::row_values(std::size_t doc) const {
    return std::span<const double>(values_).subspan(row_ptr_.at(doc), row_ptr_.at(doc + 1) - row_ptr_[doc]);
}

double TfIdfIndex::weight(std::size_t doc, std::size_t column) const {
    const auto cols = row_columns(doc);
    auto it = std::lower_bound(cols.begin(), cols.end(), column);
    if (it == cols.end() || *it != column) return 0.0;
    return row_values(doc)[static_cast<std::size_t>(it - cols.begin())];
}

std::vector<SparseEntry> TfIdfIndex::normalized_row(std::size_t doc) const {
    const auto cols = row_columns(doc);
    const auto vals = row_values(doc);
    const double norm = row_norms_.at(doc);
    std::vector<SparseEntry> out;
    out.reserve(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.push_back({cols[k], norm > 0.0 ? vals[k] / norm : 0.0});
    }
    return out;
}

double TfIdfIndex::cosine(const SparseQueryVector& query, std::size_t doc) const {
    const double dnorm = row_norms_.at(doc);
    if (query.norm == 0.0 || dnorm == 0.0) return 0.0;
    const auto cols = row_columns(doc);
    const auto vals = row_values(doc);
    double dot = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < query.entries.size() && j < cols.size()) {
        if (query.entries[i].column < cols[j]) {
            ++i;
        } else if (cols[j] < query.entries[i].column) {
            ++j;
        } else {
            dot += query.entries[i].weight * vals[j];
            ++i;
            ++j;
        }
    }
    return dot / (query.norm * dnorm);
}

double term_frequency(std::string_view term, std::span<const std::string> doc_tokens) {
    if (doc_tokens.empty()) {
        throw Error(ErrorKind::DegenerateDocument, "term frequency of an empty document");
    }
    const auto count = std::count(doc_tokens.begin(), doc_tokens.end(), term);
    return static_cast<double>(count) / static_cast<double>(doc_tokens.size());
}

double inverse_document_frequency(std::string_view term,
                                  std::span<const std::vector<std::string>> corpus_tokens) {
    if (corpus_tokens.empty()) {
        throw Error(ErrorKind::EmptyCorpus, "inverse document frequency over an empty corpus");
    }
    std::size_t df = 0;
    for (const auto& doc : corpus_tokens) {
        if (std::find(doc.begin(), doc.end(), term) != doc.end()) ++df;
    }
    return std::log(static_cast<double>(corpus_tokens.size()) / static_cast<double>(1 + df));
}

TfIdfIndex fit(std::span<const ProcessedText> corpus, const PreprocessConfig& preprocess) {
    if (corpus.empty()) {
        throw Error(ErrorKind::EmptyCorpus, "cannot fit TF-IDF on an empty corpus");
    }

    std::vector<std::map<std::string, std::size_t, std::less<>>> counts;
    counts.reserve(corpus.size());
    std::set<std::string, std::less<>> terms;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        if (corpus[d].tokens.empty()) {
            throw Error(ErrorKind::Indexing,
                        "document " + std::to_string(d) + " has no tokens after preprocessing");
        }
        counts.push_back(count_terms(corpus[d].tokens));
        for (const auto& [t, _] : counts.back()) terms.insert(t);
    }

    Vocabulary vocab(std::vector<std::string>(terms.begin(), terms.end()));
    std::vector<std::size_t> df(vocab.size(), 0);
    for (const auto& c : counts) {
        for (const auto& [t, _] : c) ++df[*vocab.find(t)];
    }

    const auto n = static_cast<double>(corpus.size());
    std::vector<double> idf(vocab.size());
    for (std::size_t j = 0; j < idf.size(); ++j) {
        idf[j] = std::log(n / static_cast<double>(1 + df[j]));
    }

    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const auto total = static_cast<double>(corpus[d].tokens.size());
        // map iteration is lexicographic, hence column-ascending
        for (const auto& [t, f] : counts[d]) {
            const std::size_t col = *vocab.find(t);
            col_idx.push_back(col);
            values.push_back(static_cast<double>(f) / total * idf[col]);
        }
        row_ptr.push_back(col_idx.size());
    }
    return TfIdfIndex(std::move(vocab), std::move(idf), std::move(row_ptr), std::move(col_idx),
                      std::move(values), preprocess);
}

SparseQueryVector transform_query(const TfIdfIndex& index, const ProcessedText& query) {
    SparseQueryVector out;
    if (query.tokens.empty()) return out;

    const auto counts = count_terms(query.tokens);
    const auto total = static_cast<double>(query.tokens.size());
    for (const auto& [t, f] : counts) {
        if (auto col = index.vocab().find(t)) {
            out.entries.push_back({*col, static_cast<double>(f) / total * index.idf()[*col]});
        }
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
    out.all_oov = out.entries.empty();
    double sq = 0.0;
    for (const auto& e : out.entries) sq += e.weight * e.weight;
    out.norm = std::sqrt(sq);
    return out;
}

nlohmann::json index_to_json(const TfIdfIndex& index) {
    const auto& pp = index.preprocess_config();
    return {
        {"format_version", TfIdfIndex::kFormatVersion},
        {"kind", "tfidf"},
        {"preprocess",
         {{"stopwords", pp.remove_stopwords ? "on" : "off"},
          {"stopword_list", std::string(kStopwordListVersion)},
          {"stemmer", to_string(pp.stemmer)}}},
        {"n_docs", index.n_docs()},
        {"vocab", index.vocab().terms()},
        {"idf", std::vector<double>(index.idf().begin(), index.idf().end())},
        {"csr", {{"row_ptr", index.row_ptr()}, {"col_idx", index.col_idx()}, {"values", index.values()}}},
    };
}

TfIdfIndex index_from_json(const nlohmann::json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != TfIdfIndex::kFormatVersion) {
            throw Error(ErrorKind::Format, "unsupported index format_version " + std::to_string(version));
        }
        PreprocessConfig pp;
        const auto& p = j.at("preprocess");
        pp.remove_stopwords = p.at("stopwords").get<std::string>() == "on";
        pp.stemmer = stemmer_from_string(p.at("stemmer").get<std::string>());
        if (pp.remove_stopwords && p.value("stopword_list", std::string()) != kStopwordListVersion) {
            throw Error(ErrorKind::Format, "index was built with a different stopword list version");
        }
        TfIdfIndex index(Vocabulary(j.at("vocab").get<std::vector<std::string>>()),
                         j.at("idf").get<std::vector<double>>(),
                         j.at("csr").at("row_ptr").get<std::vector<std::size_t>>(),
                         j.at("csr").at("col_idx").get<std::vector<std::size_t>>(),
                         j.at("csr").at("values").get<std::vector<double>>(), pp);
        if (index.n_docs() != j.at("n_docs").get<std::size_t>()) {
            throw Error(ErrorKind::Format, "n_docs does not match CSR row count");
        }
        return index;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Format, std::string("malformed index file: ") + e.what());
    }
}

void save_index(const TfIdfIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write index " + path);
    out << index_to_json(index).dump() << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

TfIdfIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open index " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.byte, e.what());
    }
    return index_from_json(j);
}

}  // namespace hwqa
