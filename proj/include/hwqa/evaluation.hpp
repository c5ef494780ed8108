#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwqa/corpus.hpp"
#include "hwqa/reader.hpp"
#include "hwqa/retriever.hpp"

namespace hwqa {

inline constexpr double kDefaultSimilarThreshold = 0.5;

enum class Category { Correct, Similar, Incorrect };

const char* to_string(Category c) noexcept;

// 1 iff some candidate and some gold answer normalize to the same string.
int exact_match(const std::vector<std::string>& candidates, const std::vector<std::string>& gold_answers);

// SQuAD token F1 over normalized whitespace tokens with multiset overlap.
// Both empty -> 1, exactly one empty -> 0.
double token_f1(std::string_view prediction, std::string_view gold);

// Max token_f1 over (candidate, gold) pairs; 0 with no candidates.
double question_f1(const std::vector<std::string>& candidates, const std::vector<std::string>& gold_answers);

// Fraction of questions whose gold doc is among the first k retrieved.
// Throws ErrorKind::Alignment if the lists differ in length.
double top_k_accuracy(const std::vector<RetrievalResult>& results, const std::vector<DocId>& gold_doc_ids,
                      std::size_t k);

// Correct on exact match, Similar when question_f1 >= threshold, else
// Incorrect. Throws ErrorKind::Configuration unless threshold is in (0, 1].
Category categorize(const std::vector<std::string>& candidates, const std::vector<std::string>& gold_answers,
                    double similar_threshold);

struct RetrieverReport {
    std::size_t n_questions = 0;
    std::map<std::size_t, double> top_k_accuracy;
    struct Row {
        std::string question_id;
        std::optional<std::size_t> hit_rank;  // 1-based
    };
    std::vector<Row> rows;

    // count of questions by hit rank; key 0 means "not retrieved"
    std::map<std::size_t, std::size_t> hit_rank_histogram() const;
};

RetrieverReport evaluate_retriever(const Dataset& dataset, const std::vector<RetrievalResult>& results);

struct CategoryCounts {
    std::size_t correct = 0;
    std::size_t similar = 0;
    std::size_t incorrect = 0;

    std::size_t total() const noexcept { return correct + similar + incorrect; }
    bool operator==(const CategoryCounts&) const = default;
};

struct ReaderReport {
    std::size_t n_questions = 0;
    // any-match over the ensemble union
    double em = 0.0;
    double f1 = 0.0;
    // scoring only select_primary()'s answer
    double em_primary = 0.0;
    double f1_primary = 0.0;
    CategoryCounts counts;
    double similar_threshold = kDefaultSimilarThreshold;
    std::size_t missing_predictions = 0;
    // model id -> number of questions on which it failed
    std::map<std::string, std::size_t> model_failures;

    struct Row {
        std::string question_id;
        int em = 0;
        double f1 = 0.0;
        int em_primary = 0;
        Category category = Category::Incorrect;
        std::string primary;
    };
    std::vector<Row> rows;
};

// Predictions are matched to items by question_id; items without a
// prediction count as Incorrect and are reported in missing_predictions.
ReaderReport evaluate_reader(const Dataset& dataset, const std::vector<EnsemblePrediction>& predictions,
                             double similar_threshold = kDefaultSimilarThreshold);

nlohmann::json to_json(const RetrieverReport& r);
nlohmann::json to_json(const ReaderReport& r);

// Per-question CSV: question_id,hit_rank,em,f1,category. Either report may
// be absent; missing columns are left empty.
std::string per_question_csv(const Dataset& dataset, const RetrieverReport* retriever, const ReaderReport* reader);

}  // namespace hwqa
