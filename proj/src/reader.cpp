#include "hwqa/reader.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <unicode/utf8.h>

#include "hwqa/error.hpp"
#include "hwqa/unicode.hpp"

namespace hwqa {

namespace {

bool is_ascii_punct(char32_t cp) {
    return cp < 0x80 && std::string_view("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~").find(static_cast<char>(cp)) !=
                            std::string_view::npos;
}

bool answer_ranks_before(const ReaderAnswer& a, const ReaderAnswer& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.start_char < b.start_char;
}

}  // namespace

std::vector<ReaderAnswer> StubReader::answer(const std::string&, const std::string& context, std::size_t) {
    // whitespace-delimited token spans, in code points
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t cp = 0;
    bool in_token = false;
    int32_t i = 0;
    const auto len = static_cast<int32_t>(context.size());
    while (i < len) {
        UChar32 c;
        U8_NEXT(reinterpret_cast<const uint8_t*>(context.data()), i, len, c);
        const bool ws = unicode::is_whitespace(static_cast<char32_t>(c));
        if (!ws && !in_token) spans.emplace_back(cp, cp);
        if (!ws) spans.back().second = cp + 1;
        in_token = !ws;
        ++cp;
    }
    if (options_.tokens == 0 || options_.skip >= spans.size()) return {};
    const std::size_t last = std::min(spans.size(), options_.skip + options_.tokens) - 1;
    const std::size_t start = spans[options_.skip].first;
    const std::size_t end = spans[last].second;
    std::string text(unicode::codepoint_slice(context, start, end).value());
    return {ReaderAnswer{std::move(text), start, end, options_.score, options_.id}};
}

HttpReader::HttpReader(std::string base_url, http::RetryPolicy retry)
    : base_url_(std::move(base_url)), retry_(retry) {}

std::string HttpReader::id() const {
    std::lock_guard lock(id_mutex_);
    return model_id_.empty() ? base_url_ : model_id_;
}

std::vector<ReaderAnswer> HttpReader::answer(const std::string& question, const std::string& context, std::size_t k) {
    const nlohmann::json req = {{"question", question}, {"context", context}, {"top_k", k}};
    const nlohmann::json resp = http::post_json(base_url_, "/v1/answer", req, retry_);
    const std::string where = base_url_ + "/v1/answer";
    if (!resp.is_object() || !resp.contains("answers") || !resp["answers"].is_array()) {
        throw Error(ErrorKind::ProviderContract, where + ": response lacks an 'answers' array");
    }
    std::string model = id();
    if (auto m = resp.find("model"); m != resp.end() && m->is_string()) {
        model = m->get<std::string>();
        std::lock_guard lock(id_mutex_);
        model_id_ = model;
    }
    std::vector<ReaderAnswer> out;
    for (const auto& a : resp["answers"]) {
        try {
            ReaderAnswer ans;
            ans.text = a.at("text").get<std::string>();
            const auto start = a.at("start").get<long long>();
            const auto end = a.at("end").get<long long>();
            if (start < 0 || end < 0) throw Error(ErrorKind::ProviderContract, where + ": negative offset");
            ans.start_char = static_cast<std::size_t>(start);
            ans.end_char = static_cast<std::size_t>(end);
            ans.score = a.at("score").get<double>();
            ans.model_id = model;
            out.push_back(std::move(ans));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::ProviderContract, where + ": malformed answer: " + e.what());
        }
    }
    return out;
}

std::unique_ptr<Reader> make_reader(const std::string& spec, const http::RetryPolicy& retry) {
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
        return std::make_unique<HttpReader>(spec, retry);
    }
    if (spec == "stub") return std::make_unique<StubReader>();
    if (spec.rfind("stub:", 0) != 0) {
        throw Error(ErrorKind::Configuration, "unknown reader '" + spec + "' (expected stub[:opts] or http://host:port)");
    }
    StubReader::Options opts;
    std::string_view rest = std::string_view(spec).substr(5);
    while (!rest.empty()) {
        const auto sep = rest.find(':');
        const std::string_view kv = rest.substr(0, sep);
        rest = sep == std::string_view::npos ? std::string_view() : rest.substr(sep + 1);
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::Configuration, "bad stub reader option '" + std::string(kv) + "'");
        }
        const std::string key(kv.substr(0, eq));
        const std::string value(kv.substr(eq + 1));
        try {
            if (key == "id") {
                opts.id = value;
            } else if (key == "tokens") {
                opts.tokens = std::stoul(value);
            } else if (key == "skip") {
                opts.skip = std::stoul(value);
            } else if (key == "score") {
                opts.score = std::stod(value);
            } else {
                throw Error(ErrorKind::Configuration, "unknown stub reader option '" + key + "'");
            }
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Configuration, "bad value for stub reader option '" + key + "'");
        }
    }
    return std::make_unique<StubReader>(std::move(opts));
}

std::vector<ReaderAnswer> query_reader(Reader& reader, const std::string& question, const std::string& context,
                                       std::size_t k) {
    if (k < 1) throw Error(ErrorKind::Configuration, "reader top_k must be >= 1");
    std::vector<ReaderAnswer> answers = reader.answer(question, context, k);
    const std::string who = reader.id();
    for (const auto& a : answers) {
        if (!(a.score >= 0.0 && a.score <= 1.0)) {
            throw Error(ErrorKind::ProviderContract, who + ": answer score " + std::to_string(a.score) + " outside [0,1]");
        }
        if (a.end_char <= a.start_char) {
            throw Error(ErrorKind::ProviderContract, who + ": answer span end must exceed start");
        }
        const auto slice = unicode::codepoint_slice(context, a.start_char, a.end_char);
        if (!slice || *slice != a.text) {
            throw Error(ErrorKind::ProviderContract, who + ": answer offsets do not reproduce its text");
        }
    }
    if (!std::is_sorted(answers.begin(), answers.end(),
                        [](const ReaderAnswer& a, const ReaderAnswer& b) { return a.score > b.score; })) {
        throw Error(ErrorKind::ProviderContract, who + ": answers are not in descending score order");
    }
    // service ignored top_k
    if (answers.size() > k) answers.resize(k);
    return answers;
}

std::string normalize_answer(std::string_view text) {
    const std::string lowered = unicode::lower(text);
    std::vector<std::string> tokens;
    std::string current;
    int32_t i = 0;
    const auto len = static_cast<int32_t>(lowered.size());
    const auto* bytes = reinterpret_cast<const uint8_t*>(lowered.data());
    while (i < len) {
        const int32_t begin = i;
        UChar32 c;
        U8_NEXT(bytes, i, len, c);
        const auto cp = static_cast<char32_t>(c);
        if (is_ascii_punct(cp)) continue;
        if (unicode::is_whitespace(cp)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
            continue;
        }
        current.append(lowered, static_cast<std::size_t>(begin), static_cast<std::size_t>(i - begin));
    }
    if (!current.empty()) tokens.push_back(std::move(current));

    std::string out;
    for (const auto& t : tokens) {
        if (t == "a" || t == "an" || t == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

std::vector<std::string> EnsemblePrediction::candidate_texts() const {
    std::vector<std::string> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back(c.normalized_text);
    return out;
}

EnsemblePrediction ensemble_union(const std::map<std::string, std::vector<ReaderAnswer>>& per_model,
                                  std::string question_id) {
    if (per_model.empty()) {
        throw Error(ErrorKind::Configuration, "ensemble union needs at least one model's answers");
    }
    EnsemblePrediction p;
    p.question_id = std::move(question_id);
    p.per_model = per_model;
    std::map<std::string, Candidate> merged;
    for (const auto& [model, answers] : per_model) {
        for (const auto& a : answers) {
            const std::string key = normalize_answer(a.text);
            auto [it, inserted] = merged.try_emplace(key, Candidate{key, a.score, {model}});
            if (!inserted) {
                it->second.best_score = std::max(it->second.best_score, a.score);
                auto& models = it->second.contributing_models;
                if (std::find(models.begin(), models.end(), model) == models.end()) models.push_back(model);
            }
        }
    }
    for (auto& [_, c] : merged) {
        std::sort(c.contributing_models.begin(), c.contributing_models.end());
        p.candidates.push_back(std::move(c));
    }
    return p;
}

std::string select_primary(const EnsemblePrediction& prediction) {
    const Candidate* best = nullptr;
    for (const auto& c : prediction.candidates) {
        if (best == nullptr || c.best_score > best->best_score ||
            (c.best_score == best->best_score &&
             (c.contributing_models.size() > best->contributing_models.size() ||
              (c.contributing_models.size() == best->contributing_models.size() &&
               c.normalized_text < best->normalized_text)))) {
            best = &c;
        }
    }
    return best == nullptr ? std::string() : best->normalized_text;
}

ReaderEnsemble::ReaderEnsemble(std::vector<std::unique_ptr<Reader>> readers, EnsembleOptions options)
    : readers_(std::move(readers)), options_(options) {
    if (readers_.empty()) throw Error(ErrorKind::Configuration, "reader ensemble needs at least one reader");
    if (options_.k < 1) throw Error(ErrorKind::Configuration, "reader top_k must be >= 1");
}

std::vector<std::string> ReaderEnsemble::model_ids() const {
    std::vector<std::string> ids;
    for (const auto& r : readers_) ids.push_back(r->id());
    return ids;
}

EnsemblePrediction ReaderEnsemble::predict(const std::string& question_id, const std::string& question,
                                           const std::vector<std::string>& contexts) {
    struct Outcome {
        std::string model;
        std::vector<ReaderAnswer> answers;
        std::string failure;
        bool ok = false;
    };
    auto run_model = [&](Reader& reader) {
        Outcome o;
        try {
            for (const auto& ctx : contexts) {
                auto answers = query_reader(reader, question, ctx, options_.k);
                o.answers.insert(o.answers.end(), std::make_move_iterator(answers.begin()),
                                 std::make_move_iterator(answers.end()));
            }
            std::stable_sort(o.answers.begin(), o.answers.end(), answer_ranks_before);
            if (o.answers.size() > options_.k) o.answers.resize(options_.k);
            o.ok = true;
        } catch (const Error& e) {
            o.failure = e.what();
        }
        o.model = reader.id();
        return o;
    };

    std::vector<Outcome> outcomes;
    if (readers_.size() == 1) {
        outcomes.push_back(run_model(*readers_.front()));
    } else {
        std::vector<std::future<Outcome>> pending;
        for (auto& r : readers_) {
            pending.push_back(std::async(std::launch::async, run_model, std::ref(*r)));
        }
        for (auto& f : pending) outcomes.push_back(f.get());
    }

    std::map<std::string, std::vector<ReaderAnswer>> per_model;
    std::map<std::string, std::string> failed;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto& o = outcomes[i];
        std::string model = o.model;
        // disambiguate endpoints that report the same identity
        if (per_model.contains(model) || failed.contains(model)) model += "#" + std::to_string(i);
        if (o.ok) {
            for (auto& a : o.answers) a.model_id = model;
            per_model.emplace(model, std::move(o.answers));
        } else {
            failed.emplace(model, std::move(o.failure));
        }
    }

    EnsemblePrediction p;
    if (!per_model.empty()) {
        p = ensemble_union(per_model, question_id);
    } else {
        p.question_id = question_id;
    }
    p.failed_models = std::move(failed);
    return p;
}

nlohmann::json to_json(const ReaderAnswer& a) {
    return {{"text", a.text}, {"start", a.start_char}, {"end", a.end_char}, {"score", a.score}, {"model", a.model_id}};
}

nlohmann::json to_json(const EnsemblePrediction& p) {
    nlohmann::json per_model = nlohmann::json::object();
    for (const auto& [model, answers] : p.per_model) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& a : answers) arr.push_back(to_json(a));
        per_model[model] = std::move(arr);
    }
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& c : p.candidates) {
        candidates.push_back(
            {{"normalized_text", c.normalized_text}, {"best_score", c.best_score}, {"models", c.contributing_models}});
    }
    nlohmann::json j = {{"question_id", p.question_id}, {"per_model", std::move(per_model)},
                        {"candidates", std::move(candidates)}, {"primary", select_primary(p)}};
    if (!p.failed_models.empty()) j["failed_models"] = p.failed_models;
    return j;
}

EnsemblePrediction prediction_from_json(const nlohmann::json& j) {
    try {
        EnsemblePrediction p;
        p.question_id = j.at("question_id").get<std::string>();
        for (const auto& [model, arr] : j.at("per_model").items()) {
            std::vector<ReaderAnswer> answers;
            for (const auto& a : arr) {
                answers.push_back(ReaderAnswer{a.at("text").get<std::string>(), a.at("start").get<std::size_t>(),
                                               a.at("end").get<std::size_t>(), a.at("score").get<double>(),
                                               a.value("model", model)});
            }
            p.per_model.emplace(model, std::move(answers));
        }
        for (const auto& c : j.at("candidates")) {
            p.candidates.push_back(Candidate{c.at("normalized_text").get<std::string>(), c.at("best_score").get<double>(),
                                             c.at("models").get<std::vector<std::string>>()});
        }
        if (j.contains("failed_models")) {
            p.failed_models = j["failed_models"].get<std::map<std::string, std::string>>();
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Format, std::string("malformed prediction record: ") + e.what());
    }
}

void save_predictions(const std::vector<EnsemblePrediction>& predictions, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write predictions " + path);
    for (const auto& p : predictions) out << to_json(p).dump() << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::vector<EnsemblePrediction> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open predictions " + path);
    std::vector<EnsemblePrediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(prediction_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(e.byte, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace hwqa
