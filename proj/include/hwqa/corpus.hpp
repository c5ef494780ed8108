#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hwqa {

using DocId = std::size_t;

struct Document {
    DocId id = 0;
    std::string text;

    bool operator==(const Document&) const = default;
};

struct QAItem {
    std::string question_id;
    std::string question;
    std::vector<std::string> gold_answers;
    DocId gold_doc_id = 0;

    bool operator==(const QAItem&) const = default;
};

struct Dataset {
    std::vector<Document> documents;
    std::vector<QAItem> items;
    std::string split_name;
    // Non-fatal findings, e.g. a gold answer that is not a substring of its
    // context (OCR noise). Not part of equality.
    std::vector<std::string> warnings;

    bool operator==(const Dataset& other) const {
        return documents == other.documents && items == other.items &&
               split_name == other.split_name;
    }
};

// Parses SQuAD v1.1 shaped JSON (data -> paragraphs -> context / qas).
// Contexts are NFC-normalized and deduplicated in first-seen order.
// Throws ParseError on malformed JSON and SchemaError on shape violations,
// including unanswerable or empty-answer questions.
Dataset parse_squad(std::string_view utf8_json, std::string split_name = {});

Dataset load_squad_file(const std::string& path);

// Documents in id order. Throws ErrorKind::EmptyCorpus when there are none.
std::vector<Document> build_corpus(const Dataset& dataset);

// Corpus manifest: {"documents":[{"id","text"}], "items":[{...}]}.
nlohmann::json to_manifest(const Dataset& dataset);
Dataset from_manifest(const nlohmann::json& manifest);

std::vector<std::string> document_texts(const std::vector<Document>& docs);

}  // namespace hwqa
