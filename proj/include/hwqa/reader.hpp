#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwqa/http.hpp"

namespace hwqa {

struct ReaderAnswer {
    std::string text;
    // Code point offsets into the context, end exclusive.
    std::size_t start_char = 0;
    std::size_t end_char = 0;
    // Joint span probability, P_start(i) * P_end(j) inside the model.
    double score = 0.0;
    std::string model_id;

    bool operator==(const ReaderAnswer&) const = default;
};

// One extractive QA model behind the reader service contract.
class Reader {
public:
    virtual ~Reader() = default;

    // Raw model output; use query_reader() for validated answers.
    virtual std::vector<ReaderAnswer> answer(const std::string& question, const std::string& context,
                                             std::size_t k) = 0;
    virtual std::string id() const = 0;
};

// Returns the first `tokens` whitespace-delimited tokens of the context,
// starting at token `skip`, with a fixed score. Empty contexts yield nothing.
class StubReader final : public Reader {
public:
    struct Options {
        std::string id = "stub";
        std::size_t tokens = 3;
        std::size_t skip = 0;
        double score = 0.9;
    };

    StubReader() : StubReader(Options{}) {}
    explicit StubReader(Options options) : options_(std::move(options)) {}

    std::vector<ReaderAnswer> answer(const std::string& question, const std::string& context,
                                     std::size_t k) override;
    std::string id() const override { return options_.id; }

private:
    Options options_;
};

// Client for POST /v1/answer.
class HttpReader final : public Reader {
public:
    explicit HttpReader(std::string base_url, http::RetryPolicy retry = {});

    std::vector<ReaderAnswer> answer(const std::string& question, const std::string& context,
                                     std::size_t k) override;
    std::string id() const override;

private:
    std::string base_url_;
    http::RetryPolicy retry_;
    mutable std::mutex id_mutex_;
    std::string model_id_;
};

// Parses "stub", "stub:id=m1:tokens=3:skip=0:score=0.9" or "http://host:port".
std::unique_ptr<Reader> make_reader(const std::string& spec, const http::RetryPolicy& retry = {});

// Validated answers: at most k, descending score, scores in [0,1],
// end > start, and context[start:end] == text. Contract violations throw
// ErrorKind::ProviderContract; transport failures propagate as TransportError.
std::vector<ReaderAnswer> query_reader(Reader& reader, const std::string& question, const std::string& context,
                                       std::size_t k);

// Lowercase, strip ASCII punctuation, drop the articles a/an/the as whole
// tokens, collapse whitespace.
std::string normalize_answer(std::string_view text);

struct Candidate {
    std::string normalized_text;
    double best_score = 0.0;
    std::vector<std::string> contributing_models;  // sorted, unique

    bool operator==(const Candidate&) const = default;
};

struct EnsemblePrediction {
    std::string question_id;
    std::map<std::string, std::vector<ReaderAnswer>> per_model;
    // model id -> failure message, for models that did not respond.
    std::map<std::string, std::string> failed_models;
    // Union of normalized answers, ordered by normalized text.
    std::vector<Candidate> candidates;

    std::vector<std::string> candidate_texts() const;
};

// A_1 u A_2 u ... keyed by normalized text. Throws ErrorKind::Configuration on an empty map.
EnsemblePrediction ensemble_union(const std::map<std::string, std::vector<ReaderAnswer>>& per_model,
                                  std::string question_id = {});

// Max best_score, then most contributors, then smallest normalized text.
// Returns "" when there are no candidates.
std::string select_primary(const EnsemblePrediction& prediction);

struct EnsembleOptions {
    // Answers kept per model.
    std::size_t k = 1;
};

// Fans a question out to every reader concurrently and merges the answers.
class ReaderEnsemble {
public:
    ReaderEnsemble(std::vector<std::unique_ptr<Reader>> readers, EnsembleOptions options = {});

    // Each model reads every context; its answers across contexts are pooled
    // and the best k kept. Models that fail are recorded, not fatal.
    EnsemblePrediction predict(const std::string& question_id, const std::string& question,
                               const std::vector<std::string>& contexts);

    std::size_t size() const noexcept { return readers_.size(); }
    std::vector<std::string> model_ids() const;
    const EnsembleOptions& options() const noexcept { return options_; }

private:
    std::vector<std::unique_ptr<Reader>> readers_;
    EnsembleOptions options_;
};

nlohmann::json to_json(const ReaderAnswer& a);
nlohmann::json to_json(const EnsemblePrediction& p);
EnsemblePrediction prediction_from_json(const nlohmann::json& j);

void save_predictions(const std::vector<EnsemblePrediction>& predictions, const std::string& path);
std::vector<EnsemblePrediction> load_predictions(const std::string& path);

}  // namespace hwqa
