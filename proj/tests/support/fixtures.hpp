#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace hwqa::testing {

struct SyntheticQuestion {
    std::string id;
    std::string question;
    std::vector<std::string> answers;
};

struct SyntheticParagraph {
    std::string context;
    std::vector<SyntheticQuestion> qas;
};

// SQuAD v1.1 JSON with one article holding the given paragraphs.
std::string squad_json(const std::vector<SyntheticParagraph>& paragraphs, const std::string& version = "1.1");

// Distinct pseudo-word for index i: three consonant-vowel syllables drawn
// from letters the stemmer leaves alone.
std::string pseudo_word(std::size_t i);

// Random corpus of token lists: n_docs documents, 1..max_len tokens each,
// drawn from a pool of `vocab` pseudo-words.
std::vector<std::vector<std::string>> random_token_corpus(std::mt19937_64& rng, std::size_t n_docs,
                                                          std::size_t vocab, std::size_t max_len);

// Documents with pairwise disjoint vocabularies; each question uses terms
// from its gold document only and its answer is the document's first three
// words.
std::string planted_answer_dataset(std::size_t n_docs, std::size_t n_questions, std::uint64_t seed);

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace hwqa::testing
