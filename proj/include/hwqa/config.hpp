#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwqa/retriever.hpp"
#include "hwqa/text.hpp"

namespace hwqa {

struct RunConfig {
    std::string dataset;
    std::string index;       // index directory or index.json path
    std::string embeddings;  // embedding JSONL for the contexts
    std::string predictions;
    std::string embedding_provider = "stub:dim=64";
    std::size_t embedding_batch = 32;
    std::size_t embedding_in_flight = 4;
    RetrieverConfig retriever;
    std::vector<std::string> readers;
    std::size_t reader_k = 1;
    // retrieved contexts handed to the readers per question
    std::size_t reader_contexts = 1;
    double similar_threshold = 0.5;
    PreprocessConfig preprocess;
    std::string out_dir;
    std::size_t jobs = 1;

    // Throws ErrorKind::Configuration on the first invalid field.
    void validate() const;
    // Effective configuration, echoed into every report.
    nlohmann::json to_json() const;
};

// Plain-text key=value lines; '#' starts a comment. Unknown keys and
// malformed lines throw ErrorKind::Configuration naming the line.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

// Applies recognised keys onto `cfg`.
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& values);

// Keys accepted in config files.
const std::vector<std::string>& config_keys();

}  // namespace hwqa
