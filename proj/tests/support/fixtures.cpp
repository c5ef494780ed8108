#include "support/fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

namespace hwqa::testing {

std::string squad_json(const std::vector<SyntheticParagraph>& paragraphs, const std::string& version) {
    nlohmann::json paras = nlohmann::json::array();
    for (const auto& p : paragraphs) {
        nlohmann::json qas = nlohmann::json::array();
        for (const auto& q : p.qas) {
            nlohmann::json answers = nlohmann::json::array();
            for (const auto& a : q.answers) {
                const auto pos = p.context.find(a);
                answers.push_back({{"text", a}, {"answer_start", pos == std::string::npos ? -1 : static_cast<long>(pos)}});
            }
            qas.push_back({{"id", q.id}, {"question", q.question}, {"answers", std::move(answers)}});
        }
        paras.push_back({{"context", p.context}, {"qas", std::move(qas)}});
    }
    nlohmann::json root = {{"version", version},
                           {"data", nlohmann::json::array({{{"title", "synthetic"}, {"paragraphs", std::move(paras)}}})}};
    return root.dump();
}

std::string pseudo_word(std::size_t i) {
    static constexpr std::string_view consonants = "bdfgkmnprtvz";
    static constexpr std::string_view vowels = "aiou";
    const std::size_t base = consonants.size() * vowels.size();
    std::string w;
    for (int s = 0; s < 3; ++s) {
        const std::size_t syl = i % base;
        i /= base;
        w.push_back(consonants[syl / vowels.size()]);
        w.push_back(vowels[syl % vowels.size()]);
    }
    return w;
}

std::vector<std::vector<std::string>> random_token_corpus(std::mt19937_64& rng, std::size_t n_docs,
                                                          std::size_t vocab, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> term(0, vocab - 1);
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    std::vector<std::vector<std::string>> corpus(n_docs);
    for (auto& doc : corpus) {
        const std::size_t n = len(rng);
        for (std::size_t k = 0; k < n; ++k) doc.push_back(pseudo_word(term(rng)));
    }
    return corpus;
}

std::string planted_answer_dataset(std::size_t n_docs, std::size_t n_questions, std::uint64_t seed) {
    constexpr std::size_t kWordsPerDoc = 12;
    constexpr std::size_t kQuestionTerms = 6;
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::string>> words(n_docs);
    std::vector<SyntheticParagraph> paragraphs(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        for (std::size_t w = 0; w < kWordsPerDoc; ++w) words[d].push_back(pseudo_word(d * kWordsPerDoc + w));
        std::string ctx;
        for (const auto& w : words[d]) ctx += (ctx.empty() ? "" : " ") + w;
        paragraphs[d].context = ctx + ".";
    }
    for (std::size_t q = 0; q < n_questions; ++q) {
        const std::size_t d = q % n_docs;
        std::vector<std::string> pool(words[d].begin() + 3, words[d].end());
        std::shuffle(pool.begin(), pool.end(), rng);
        std::string question = "What is";
        for (std::size_t k = 0; k < kQuestionTerms; ++k) question += " " + pool[k];
        question += "?";
        const std::string answer = words[d][0] + " " + words[d][1] + " " + words[d][2];
        paragraphs[d].qas.push_back({"q" + std::to_string(q), question, {answer}});
    }
    return squad_json(paragraphs);
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hwqa-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace hwqa::testing
