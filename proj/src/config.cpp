#include "hwqa/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hwqa/error.hpp"

namespace hwqa {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::Configuration, key + ": expected a number, got '" + v + "'");
}

std::size_t to_size(const std::string& key, const std::string& v) {
    if (!v.empty() && std::all_of(v.begin(), v.end(), [](unsigned char c) { return c >= '0' && c <= '9'; })) {
        try {
            return std::stoul(v);
        } catch (const std::exception&) {
        }
    }
    throw Error(ErrorKind::Configuration, key + ": expected a non-negative integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorKind::Configuration, key + ": expected on|off, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream in(v);
    for (std::string item; std::getline(in, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "dataset",           "index",           "embeddings",
        "predictions",       "out",             "jobs",
        "embedding.provider", "embedding.batch", "embedding.in_flight",
        "retriever.w_tfidf", "retriever.w_transformer", "retriever.n",
        "retriever.embed_preprocessed", "reader.endpoints", "reader.k",
        "reader.contexts",   "eval.similar_threshold", "preprocess.stopwords",
        "preprocess.stemmer",
    };
    return keys;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> values;
    std::istringstream in(text);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Configuration, "config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw Error(ErrorKind::Configuration, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        values[key] = trim(line.substr(eq + 1));
    }
    return values;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& values) {
    for (const auto& [key, v] : values) {
        if (key == "dataset") cfg.dataset = v;
        else if (key == "index") cfg.index = v;
        else if (key == "embeddings") cfg.embeddings = v;
        else if (key == "predictions") cfg.predictions = v;
        else if (key == "out") cfg.out_dir = v;
        else if (key == "jobs") cfg.jobs = to_size(key, v);
        else if (key == "embedding.provider") cfg.embedding_provider = v;
        else if (key == "embedding.batch") cfg.embedding_batch = to_size(key, v);
        else if (key == "embedding.in_flight") cfg.embedding_in_flight = to_size(key, v);
        else if (key == "retriever.w_tfidf") cfg.retriever.w_tfidf = to_double(key, v);
        else if (key == "retriever.w_transformer") cfg.retriever.w_transformer = to_double(key, v);
        else if (key == "retriever.n") cfg.retriever.n = to_size(key, v);
        else if (key == "retriever.embed_preprocessed") cfg.retriever.embed_preprocessed = to_bool(key, v);
        else if (key == "reader.endpoints") cfg.readers = split_list(v);
        else if (key == "reader.k") cfg.reader_k = to_size(key, v);
        else if (key == "reader.contexts") cfg.reader_contexts = to_size(key, v);
        else if (key == "eval.similar_threshold") cfg.similar_threshold = to_double(key, v);
        else if (key == "preprocess.stopwords") cfg.preprocess.remove_stopwords = to_bool(key, v);
        else if (key == "preprocess.stemmer") cfg.preprocess.stemmer = stemmer_from_string(v);
        else throw Error(ErrorKind::Configuration, "unknown config key '" + key + "'");
    }
}

void RunConfig::validate() const {
    retriever.validate();
    if (readers.size() > 3) {
        throw Error(ErrorKind::Configuration, "at most 3 reader endpoints are supported, got " + std::to_string(readers.size()));
    }
    if (reader_k < 1) throw Error(ErrorKind::Configuration, "reader.k must be >= 1");
    if (reader_contexts < 1) throw Error(ErrorKind::Configuration, "reader.contexts must be >= 1");
    if (!(similar_threshold > 0.0 && similar_threshold <= 1.0)) {
        throw Error(ErrorKind::Configuration, "eval.similar_threshold must lie in (0, 1]");
    }
    if (jobs < 1) throw Error(ErrorKind::Configuration, "jobs must be >= 1");
    if (embedding_batch < 1 || embedding_in_flight < 1) {
        throw Error(ErrorKind::Configuration, "embedding.batch and embedding.in_flight must be >= 1");
    }
}

nlohmann::json RunConfig::to_json() const {
    return {
        {"dataset", dataset},
        {"index", index},
        {"embeddings", embeddings},
        {"predictions", predictions},
        {"embedding", {{"provider", embedding_provider}, {"batch", embedding_batch}, {"in_flight", embedding_in_flight}}},
        {"retriever", retriever.to_json()},
        {"reader", {{"endpoints", readers}, {"k", reader_k}, {"contexts", reader_contexts}}},
        {"eval", {{"similar_threshold", similar_threshold}}},
        {"preprocess",
         {{"stopwords", preprocess.remove_stopwords ? "on" : "off"},
          {"stopword_list", std::string(kStopwordListVersion)},
          {"stemmer", to_string(preprocess.stemmer)}}},
        {"out", out_dir},
        {"jobs", jobs},
    };
}

}  // namespace hwqa
