#include "hwqa/evaluation.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "hwqa/error.hpp"
#include "hwqa/log.hpp"

namespace hwqa {

namespace {

std::vector<std::string> split_tokens(const std::string& normalized) {
    std::vector<std::string> out;
    std::istringstream in(normalized);
    for (std::string t; in >> t;) out.push_back(std::move(t));
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed << v;
    return out.str();
}

}  // namespace

const char* to_string(Category c) noexcept {
    switch (c) {
        case Category::Correct: return "correct";
        case Category::Similar: return "similar";
        case Category::Incorrect: return "incorrect";
    }
    return "incorrect";
}

int exact_match(const std::vector<std::string>& candidates, const std::vector<std::string>& gold_answers) {
    for (const auto& g : gold_answers) {
        const std::string gold = normalize_answer(g);
        for (const auto& c : candidates) {
            if (normalize_answer(c) == gold) return 1;
        }
    }
    return 0;
}

double token_f1(std::string_view prediction, std::string_view gold) {
    const auto pred_tokens = split_tokens(normalize_answer(prediction));
    const auto gold_tokens = split_tokens(normalize_answer(gold));
    if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
    if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;

    std::unordered_map<std::string, std::size_t> gold_counts;
    for (const auto& t : gold_tokens) ++gold_counts[t];
    std::size_t overlap = 0;
    for (const auto& t : pred_tokens) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(pred_tokens.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold_tokens.size());
    return 2.0 * precision * recall / (precision + recall);
}

double question_f1(const std::vector<std::string>& candidates, const std::vector<std::string>& gold_answers) {
    double best = 0.0;
    for (const auto& c : candidates) {
        for (const auto& g : gold_answers) best = std::max(best, token_f1(c, g));
    }
    return best;
}

double top_k_accuracy(const std::vector<RetrievalResult>& results, const std::vector<DocId>& gold_doc_ids,
                      std::size_t k) {
    if (results.size() != gold_doc_ids.size()) {
        throw Error(ErrorKind::Alignment, std::to_string(results.size()) + " retrieval results for " +
                                              std::to_string(gold_doc_ids.size()) + " gold documents");
    }
    if (k < 1) throw Error(ErrorKind::Configuration, "k must be >= 1");
    if (results.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& top = results[i].top;
        const std::size_t depth = std::min(k, top.size());
        for (std::size_t r = 0; r < depth; ++r) {
            if (top[r].doc_id == gold_doc_ids[i]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

Category categorize(const std::vector<std::string>& candidates, const std::vector<std::string>& gold_answers,
                    double similar_threshold) {
    if (!(similar_threshold > 0.0 && similar_threshold <= 1.0)) {
        throw Error(ErrorKind::Configuration, "similar threshold must lie in (0, 1]");
    }
    if (exact_match(candidates, gold_answers) == 1) return Category::Correct;
    if (question_f1(candidates, gold_answers) >= similar_threshold) return Category::Similar;
    return Category::Incorrect;
}

std::map<std::size_t, std::size_t> RetrieverReport::hit_rank_histogram() const {
    std::map<std::size_t, std::size_t> h;
    for (const auto& r : rows) ++h[r.hit_rank.value_or(0)];
    return h;
}

RetrieverReport evaluate_retriever(const Dataset& dataset, const std::vector<RetrievalResult>& results) {
    if (dataset.items.empty()) throw Error(ErrorKind::EmptyCorpus, "cannot evaluate retrieval on an empty dataset");
    if (results.size() != dataset.items.size()) {
        throw Error(ErrorKind::Alignment, std::to_string(results.size()) + " retrieval results for " +
                                              std::to_string(dataset.items.size()) + " questions");
    }
    RetrieverReport report;
    report.n_questions = dataset.items.size();
    std::vector<DocId> gold;
    std::size_t depth = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& item = dataset.items[i];
        if (!results[i].query_id.empty() && results[i].query_id != item.question_id) {
            throw Error(ErrorKind::Alignment, "retrieval result " + std::to_string(i) + " is for question '" +
                                                  results[i].query_id + "', expected '" + item.question_id + "'");
        }
        gold.push_back(item.gold_doc_id);
        RetrieverReport::Row row{item.question_id, std::nullopt};
        for (std::size_t r = 0; r < results[i].top.size(); ++r) {
            if (results[i].top[r].doc_id == item.gold_doc_id) {
                row.hit_rank = r + 1;
                break;
            }
        }
        report.rows.push_back(std::move(row));
        depth = std::max(depth, results[i].n_requested);
    }
    if (depth < 5) log::warn("retrieval depth " + std::to_string(depth) + " < 5; top-5 accuracy is truncated");
    for (std::size_t k : {1, 3, 5, 10, 20}) {
        if (k == 1 || k == 5 || k <= depth) report.top_k_accuracy[k] = top_k_accuracy(results, gold, k);
    }
    return report;
}

ReaderReport evaluate_reader(const Dataset& dataset, const std::vector<EnsemblePrediction>& predictions,
                             double similar_threshold) {
    if (!(similar_threshold > 0.0 && similar_threshold <= 1.0)) {
        throw Error(ErrorKind::Configuration, "similar threshold must lie in (0, 1]");
    }
    std::unordered_map<std::string, const EnsemblePrediction*> by_id;
    for (const auto& p : predictions) by_id.emplace(p.question_id, &p);

    ReaderReport report;
    report.n_questions = dataset.items.size();
    report.similar_threshold = similar_threshold;
    double em_sum = 0.0;
    double f1_sum = 0.0;
    double em_primary_sum = 0.0;
    double f1_primary_sum = 0.0;
    for (const auto& item : dataset.items) {
        ReaderReport::Row row;
        row.question_id = item.question_id;
        auto it = by_id.find(item.question_id);
        if (it == by_id.end()) {
            ++report.missing_predictions;
        } else {
            const EnsemblePrediction& p = *it->second;
            for (const auto& [model, _] : p.failed_models) ++report.model_failures[model];
            const auto candidates = p.candidate_texts();
            row.em = exact_match(candidates, item.gold_answers);
            row.f1 = question_f1(candidates, item.gold_answers);
            row.category = categorize(candidates, item.gold_answers, similar_threshold);
            row.primary = select_primary(p);
            if (!p.candidates.empty()) {
                row.em_primary = exact_match({row.primary}, item.gold_answers);
                f1_primary_sum += question_f1({row.primary}, item.gold_answers);
            }
        }
        em_sum += row.em;
        f1_sum += row.f1;
        em_primary_sum += row.em_primary;
        switch (row.category) {
            case Category::Correct: ++report.counts.correct; break;
            case Category::Similar: ++report.counts.similar; break;
            case Category::Incorrect: ++report.counts.incorrect; break;
        }
        report.rows.push_back(std::move(row));
    }
    if (report.missing_predictions > 0) {
        log::warn(std::to_string(report.missing_predictions) + " question(s) had no prediction; counted as incorrect");
    }
    if (report.n_questions > 0) {
        const auto n = static_cast<double>(report.n_questions);
        report.em = em_sum / n;
        report.f1 = f1_sum / n;
        report.em_primary = em_primary_sum / n;
        report.f1_primary = f1_primary_sum / n;
    }
    return report;
}

nlohmann::json to_json(const RetrieverReport& r) {
    nlohmann::json topk = nlohmann::json::object();
    for (const auto& [k, acc] : r.top_k_accuracy) topk[std::to_string(k)] = acc;
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [rank, count] : r.hit_rank_histogram()) hist[rank == 0 ? "none" : std::to_string(rank)] = count;
    return {{"n", r.n_questions},
            {"top1", r.top_k_accuracy.at(1)},
            {"top5", r.top_k_accuracy.at(5)},
            {"top_k", std::move(topk)},
            {"hit_rank_histogram", std::move(hist)}};
}

nlohmann::json to_json(const ReaderReport& r) {
    nlohmann::json j = {{"n", r.n_questions},
                        {"em", r.em},
                        {"f1", r.f1},
                        {"em_primary", r.em_primary},
                        {"f1_primary", r.f1_primary},
                        {"counts", {{"correct", r.counts.correct}, {"similar", r.counts.similar}, {"incorrect", r.counts.incorrect}}},
                        {"threshold", r.similar_threshold},
                        {"missing_predictions", r.missing_predictions}};
    j["model_failures"] = r.model_failures;
    return j;
}

std::string per_question_csv(const Dataset& dataset, const RetrieverReport* retriever, const ReaderReport* reader) {
    std::ostringstream out;
    out << "question_id,hit_rank,em,f1,category\n";
    for (std::size_t i = 0; i < dataset.items.size(); ++i) {
        out << csv_field(dataset.items[i].question_id) << ',';
        if (retriever != nullptr && i < retriever->rows.size() && retriever->rows[i].hit_rank) {
            out << *retriever->rows[i].hit_rank;
        }
        out << ',';
        if (reader != nullptr && i < reader->rows.size()) {
            const auto& row = reader->rows[i];
            out << row.em << ',' << format_double(row.f1) << ',' << to_string(row.category);
        } else {
            out << ",,";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace hwqa
