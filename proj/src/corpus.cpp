#include "hwqa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hwqa/error.hpp"
#include "hwqa/unicode.hpp"

namespace hwqa {

namespace {

using nlohmann::json;

const json& require(const json& node, const char* key, const std::string& path) {
    if (!node.is_object()) {
        throw SchemaError(path, "expected an object");
    }
    auto it = node.find(key);
    if (it == node.end()) {
        throw SchemaError(path + "/" + key, "missing required field");
    }
    return *it;
}

const json& require_array(const json& node, const char* key, const std::string& path) {
    const json& value = require(node, key, path);
    if (!value.is_array()) {
        throw SchemaError(path + "/" + key, "expected an array");
    }
    return value;
}

std::string require_string(const json& node, const char* key, const std::string& path) {
    const json& value = require(node, key, path);
    if (!value.is_string()) {
        throw SchemaError(path + "/" + key, "expected a string");
    }
    return value.get<std::string>();
}

// SQuAD ids are strings, but some converters emit integers.
std::string require_id(const json& node, const std::string& path) {
    const json& value = require(node, "id", path);
    if (value.is_string()) {
        return value.get<std::string>();
    }
    if (value.is_number_integer()) {
        return std::to_string(value.get<long long>());
    }
    throw SchemaError(path + "/id", "expected a string or integer");
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    });
}

}  // namespace

Dataset parse_squad(std::string_view utf8_json, std::string split_name) {
    json root;
    try {
        root = json::parse(utf8_json.begin(), utf8_json.end());
    } catch (const json::parse_error& e) {
        throw ParseError(e.byte, e.what());
    }

    Dataset ds;
    ds.split_name = std::move(split_name);
    if (ds.split_name.empty() && root.is_object()) {
        if (auto v = root.find("version"); v != root.end() && v->is_string()) {
            ds.split_name = v->get<std::string>();
        }
    }

    std::unordered_map<std::string, DocId> doc_index;
    const json& data = require_array(root, "data", "");
    for (std::size_t a = 0; a < data.size(); ++a) {
        const std::string article_path = "/data/" + std::to_string(a);
        const json& paragraphs = require_array(data[a], "paragraphs", article_path);
        for (std::size_t p = 0; p < paragraphs.size(); ++p) {
            const std::string para_path = article_path + "/paragraphs/" + std::to_string(p);
            std::string context = unicode::nfc(require_string(paragraphs[p], "context", para_path));
            if (is_blank(context)) {
                throw SchemaError(para_path + "/context", "context is empty");
            }

            auto [it, inserted] = doc_index.try_emplace(context, ds.documents.size());
            if (inserted) {
                ds.documents.push_back(Document{it->second, context});
            }
            const DocId doc_id = it->second;

            const json& qas = require_array(paragraphs[p], "qas", para_path);
            for (std::size_t q = 0; q < qas.size(); ++q) {
                const std::string qa_path = para_path + "/qas/" + std::to_string(q);
                QAItem item;
                item.question_id = require_id(qas[q], qa_path);
                item.question = unicode::nfc(require_string(qas[q], "question", qa_path));
                item.gold_doc_id = doc_id;

                if (auto imp = qas[q].find("is_impossible");
                    imp != qas[q].end() && imp->is_boolean() && imp->get<bool>()) {
                    throw SchemaError(qa_path + "/is_impossible", "unanswerable questions are not supported");
                }
                const json& answers = require_array(qas[q], "answers", qa_path);
                if (answers.empty()) {
                    throw SchemaError(qa_path + "/answers", "question has no answers");
                }
                for (std::size_t k = 0; k < answers.size(); ++k) {
                    const std::string ans_path = qa_path + "/answers/" + std::to_string(k);
                    std::string text = unicode::nfc(require_string(answers[k], "text", ans_path));
                    if (is_blank(text)) {
                        throw SchemaError(ans_path + "/text", "empty answer text");
                    }
                    if (std::find(item.gold_answers.begin(), item.gold_answers.end(), text) ==
                        item.gold_answers.end()) {
                        if (context.find(text) == std::string::npos) {
                            ds.warnings.push_back(ans_path + ": answer is not a substring of its context");
                        }
                        item.gold_answers.push_back(std::move(text));
                    }
                }
                ds.items.push_back(std::move(item));
            }
        }
    }
    return ds;
}

Dataset load_squad_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open dataset " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_squad(buf.str());
}

std::vector<Document> build_corpus(const Dataset& dataset) {
    if (dataset.documents.empty()) {
        throw Error(ErrorKind::EmptyCorpus, "dataset contains no documents");
    }
    std::vector<Document> docs = dataset.documents;
    std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
    return docs;
}

nlohmann::json to_manifest(const Dataset& dataset) {
    json docs = json::array();
    for (const auto& d : build_corpus(dataset)) {
        docs.push_back({{"id", d.id}, {"text", d.text}});
    }
    json items = json::array();
    for (const auto& it : dataset.items) {
        items.push_back({{"question_id", it.question_id},
                         {"question", it.question},
                         {"gold_answers", it.gold_answers},
                         {"gold_doc_id", it.gold_doc_id}});
    }
    json out = {{"documents", std::move(docs)}, {"items", std::move(items)}};
    if (!dataset.split_name.empty()) {
        out["split_name"] = dataset.split_name;
    }
    return out;
}

Dataset from_manifest(const nlohmann::json& manifest) {
    Dataset ds;
    if (auto s = manifest.find("split_name"); s != manifest.end() && s->is_string()) {
        ds.split_name = s->get<std::string>();
    }
    const json& docs = require_array(manifest, "documents", "");
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const std::string path = "/documents/" + std::to_string(i);
        const json& id = require(docs[i], "id", path);
        if (!id.is_number_unsigned() || id.get<std::size_t>() != i) {
            throw SchemaError(path + "/id", "document ids must be contiguous from 0");
        }
        ds.documents.push_back(Document{i, require_string(docs[i], "text", path)});
    }
    const json& items = require_array(manifest, "items", "");
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string path = "/items/" + std::to_string(i);
        QAItem item;
        item.question_id = require_string(items[i], "question_id", path);
        item.question = require_string(items[i], "question", path);
        const json& golds = require_array(items[i], "gold_answers", path);
        for (const auto& g : golds) {
            item.gold_answers.push_back(g.get<std::string>());
        }
        if (item.gold_answers.empty()) {
            throw SchemaError(path + "/gold_answers", "no gold answers");
        }
        const json& gid = require(items[i], "gold_doc_id", path);
        if (!gid.is_number_unsigned() || gid.get<std::size_t>() >= ds.documents.size()) {
            throw SchemaError(path + "/gold_doc_id", "does not reference a document");
        }
        item.gold_doc_id = gid.get<std::size_t>();
        ds.items.push_back(std::move(item));
    }
    return ds;
}

std::vector<std::string> document_texts(const std::vector<Document>& docs) {
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) {
        texts.push_back(d.text);
    }
    return texts;
}

}  // namespace hwqa
