#include "hwqa/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hwqa/error.hpp"
#include "hwqa/log.hpp"
#include "hwqa/parallel.hpp"

namespace fs = std::filesystem;

namespace hwqa {

namespace {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.byte, path + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct AblationSetting {
    std::string label;
    PreprocessConfig preprocess;
    double w_tfidf;
    double w_transformer;
};

std::vector<AblationSetting> retriever_settings(const RunConfig& base) {
    const PreprocessConfig raw{false, StemmerKind::None};
    return {
        {"TF-IDF", raw, 1.0, 0.0},
        {"TF-IDF + preprocessing", base.preprocess, 1.0, 0.0},
        {"TF-IDF + preprocessing + ST", base.preprocess, base.retriever.w_tfidf, base.retriever.w_transformer},
    };
}

RunConfig with_setting(RunConfig cfg, const AblationSetting& s) {
    cfg.preprocess = s.preprocess;
    cfg.retriever.w_tfidf = s.w_tfidf;
    cfg.retriever.w_transformer = s.w_transformer;
    return cfg;
}

}  // namespace

IndexedCorpus build_indexed_corpus(const Dataset& dataset, const PreprocessConfig& preprocess) {
    const auto docs = build_corpus(dataset);
    std::vector<ProcessedText> processed;
    processed.reserve(docs.size());
    for (const auto& d : docs) processed.push_back(hwqa::preprocess(d.text, preprocess));
    return IndexedCorpus{dataset, fit(processed, preprocess)};
}

void save_indexed_corpus(const IndexedCorpus& corpus, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir + ": " + ec.message());
    save_index(corpus.index, (fs::path(dir) / "index.json").string());
    write_text(fs::path(dir) / "corpus.json", to_manifest(corpus.dataset).dump() + "\n");
}

IndexedCorpus load_indexed_corpus(const std::string& path) {
    fs::path dir = path;
    if (!fs::is_directory(dir)) dir = dir.parent_path();
    const fs::path index_path = fs::is_directory(path) ? dir / "index.json" : fs::path(path);
    Dataset ds = from_manifest(read_json_file((dir / "corpus.json").string()));
    TfIdfIndex index = load_index(index_path.string());
    if (index.n_docs() != ds.documents.size()) {
        throw Error(ErrorKind::Format, "index has " + std::to_string(index.n_docs()) + " rows but corpus manifest has " +
                                           std::to_string(ds.documents.size()) + " documents");
    }
    return IndexedCorpus{std::move(ds), std::move(index)};
}

void require_same_documents(const Dataset& expected, const Dataset& actual) {
    if (expected.documents.size() != actual.documents.size()) {
        throw Error(ErrorKind::Configuration, "dataset has " + std::to_string(actual.documents.size()) +
                                                  " documents but the index was built over " +
                                                  std::to_string(expected.documents.size()));
    }
    for (std::size_t i = 0; i < expected.documents.size(); ++i) {
        if (expected.documents[i].text != actual.documents[i].text) {
            throw Error(ErrorKind::Configuration, "document " + std::to_string(i) + " differs between dataset and index");
        }
    }
}

RetrievalInputs RetrievalStack::inputs() const {
    return RetrievalInputs{index, embeddings ? &*embeddings : nullptr, provider.get()};
}

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& cfg) {
    HttpEmbeddingOptions opts;
    opts.batch_size = cfg.embedding_batch;
    opts.max_in_flight = cfg.embedding_in_flight;
    return make_embedding_provider(cfg.embedding_provider, opts);
}

RetrievalStack make_retrieval_stack(const RunConfig& cfg, const TfIdfIndex& index, const std::vector<Document>& corpus) {
    RetrievalStack stack;
    stack.index = &index;
    if (cfg.retriever.w_transformer == 0.0 && cfg.embeddings.empty()) return stack;
    stack.provider = make_provider(cfg);
    if (!cfg.embeddings.empty()) {
        stack.embeddings = load_embeddings(cfg.embeddings, corpus);
    } else {
        stack.embeddings = embed_corpus(*stack.provider, corpus);
    }
    return stack;
}

std::vector<Query> dataset_queries(const Dataset& dataset) {
    std::vector<Query> q;
    q.reserve(dataset.items.size());
    for (const auto& item : dataset.items) q.push_back(Query{item.question_id, item.question});
    return q;
}

std::vector<RetrievalResult> run_retrieval(const Dataset& dataset, const RetrievalStack& stack,
                                           const RetrieverConfig& cfg, std::size_t jobs) {
    return retrieve_all(dataset_queries(dataset), stack.inputs(), cfg, jobs);
}

ReaderEnsemble make_ensemble(const std::vector<std::string>& reader_specs, std::size_t k) {
    std::vector<std::unique_ptr<Reader>> readers;
    for (const auto& spec : reader_specs) readers.push_back(make_reader(spec));
    return ReaderEnsemble(std::move(readers), EnsembleOptions{k});
}

std::vector<EnsemblePrediction> run_readers(ReaderEnsemble& ensemble, const Dataset& dataset,
                                            const std::vector<std::vector<std::string>>& contexts, std::size_t jobs) {
    if (contexts.size() != dataset.items.size()) {
        throw Error(ErrorKind::Alignment, "reader contexts are not aligned with questions");
    }
    std::vector<EnsemblePrediction> out(dataset.items.size());
    parallel_for(dataset.items.size(), jobs, [&](std::size_t i) {
        const auto& item = dataset.items[i];
        out[i] = ensemble.predict(item.question_id, item.question, contexts[i]);
    });
    return out;
}

std::vector<std::vector<std::string>> retrieved_contexts(const Dataset& dataset,
                                                         const std::vector<RetrievalResult>& results,
                                                         std::size_t depth) {
    std::vector<std::vector<std::string>> out;
    out.reserve(results.size());
    for (const auto& r : results) {
        std::vector<std::string> ctx;
        for (std::size_t i = 0; i < std::min(depth, r.top.size()); ++i) {
            ctx.push_back(dataset.documents.at(r.top[i].doc_id).text);
        }
        out.push_back(std::move(ctx));
    }
    return out;
}

std::vector<std::vector<std::string>> gold_contexts(const Dataset& dataset) {
    std::vector<std::vector<std::string>> out;
    out.reserve(dataset.items.size());
    for (const auto& item : dataset.items) out.push_back({dataset.documents.at(item.gold_doc_id).text});
    return out;
}

nlohmann::json report_envelope(const std::string& kind, const RunConfig& cfg) {
    return {{"tool", "hwqa"},
            {"version", HWQA_VERSION},
            {"kind", kind},
            {"generated_at", utc_timestamp()},
            {"config_echo", cfg.to_json()}};
}

nlohmann::json merged_report(const RetrieverReport& retriever, const ReaderReport& reader) {
    nlohmann::json j = to_json(reader);
    const nlohmann::json r = to_json(retriever);
    j["top1"] = r["top1"];
    j["top5"] = r["top5"];
    j["top_k"] = r["top_k"];
    j["hit_rank_histogram"] = r["hit_rank_histogram"];
    return j;
}

EndToEndRun run_end_to_end(RunConfig cfg) {
    cfg.validate();
    if (cfg.dataset.empty()) throw Error(ErrorKind::Configuration, "e2e requires a dataset");
    if (cfg.readers.empty()) throw Error(ErrorKind::Configuration, "e2e requires at least one reader endpoint");

    Dataset dataset = load_squad_file(cfg.dataset);
    for (const auto& w : dataset.warnings) log::warn(w);

    std::optional<IndexedCorpus> indexed;
    if (!cfg.index.empty()) {
        indexed = load_indexed_corpus(cfg.index);
        require_same_documents(indexed->dataset, dataset);
        cfg.preprocess = indexed->index.preprocess_config();
    } else {
        indexed = build_indexed_corpus(dataset, cfg.preprocess);
    }
    const auto corpus = build_corpus(dataset);
    const RetrievalStack stack = make_retrieval_stack(cfg, indexed->index, corpus);

    EndToEndRun run;
    run.retrieval = run_retrieval(dataset, stack, cfg.retriever, cfg.jobs);
    ReaderEnsemble ensemble = make_ensemble(cfg.readers, cfg.reader_k);
    run.predictions = run_readers(ensemble, dataset, retrieved_contexts(dataset, run.retrieval, cfg.reader_contexts), cfg.jobs);
    run.retriever_report = evaluate_retriever(dataset, run.retrieval);
    run.reader_report = evaluate_reader(dataset, run.predictions, cfg.similar_threshold);

    run.report = report_envelope("e2e", cfg);
    run.report.update(merged_report(run.retriever_report, run.reader_report));
    if (stack.embeddings) run.report["embedding_model"] = stack.embeddings->provider_tag();

    if (!cfg.out_dir.empty()) {
        const fs::path out = cfg.out_dir;
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create " + out.string() + ": " + ec.message());
        write_text(out / "report.json", run.report.dump(2) + "\n");
        save_predictions(run.predictions, (out / "predictions.jsonl").string());
        std::string lines;
        for (const auto& r : run.retrieval) lines += to_json(r).dump() + "\n";
        write_text(out / "retrieval.jsonl", lines);
        write_text(out / "per_question.csv", per_question_csv(dataset, &run.retriever_report, &run.reader_report));
    }
    return run;
}

nlohmann::json retriever_ablation(const Dataset& dataset, const RunConfig& base) {
    base.validate();
    const auto corpus = build_corpus(dataset);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& setting : retriever_settings(base)) {
        const RunConfig cfg = with_setting(base, setting);
        const IndexedCorpus indexed = build_indexed_corpus(dataset, cfg.preprocess);
        const RetrievalStack stack = make_retrieval_stack(cfg, indexed.index, corpus);
        const RetrieverReport report = evaluate_retriever(dataset, run_retrieval(dataset, stack, cfg.retriever, cfg.jobs));
        rows.push_back({{"label", setting.label},
                        {"config", cfg.to_json()},
                        {"top1", report.top_k_accuracy.at(1)},
                        {"top5", report.top_k_accuracy.at(5)},
                        {"n", report.n_questions}});
    }
    nlohmann::json out = report_envelope("retriever-ablation", base);
    out["columns"] = {"label", "top5", "top1"};
    out["rows"] = std::move(rows);
    return out;
}

nlohmann::json reader_ablation(const Dataset& dataset, const RunConfig& base) {
    base.validate();
    if (base.readers.empty()) throw Error(ErrorKind::Configuration, "reader ablation requires at least one reader");
    const auto corpus = build_corpus(dataset);

    struct Row {
        AblationSetting setting;
        std::vector<std::string> readers;
        std::string reader_label;
    };
    std::vector<Row> plan;
    const std::string single = base.readers.front();
    for (const auto& s : retriever_settings(base)) plan.push_back({s, {single}, "reader[0]"});
    if (base.readers.size() > 1) plan.push_back({retriever_settings(base).back(), base.readers, "ensemble"});

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : plan) {
        RunConfig cfg = with_setting(base, row.setting);
        cfg.readers = row.readers;
        const IndexedCorpus indexed = build_indexed_corpus(dataset, cfg.preprocess);
        const RetrievalStack stack = make_retrieval_stack(cfg, indexed.index, corpus);
        const auto retrieval = run_retrieval(dataset, stack, cfg.retriever, cfg.jobs);
        ReaderEnsemble ensemble = make_ensemble(cfg.readers, cfg.reader_k);
        const auto predictions =
            run_readers(ensemble, dataset, retrieved_contexts(dataset, retrieval, cfg.reader_contexts), cfg.jobs);
        const RetrieverReport rr = evaluate_retriever(dataset, retrieval);
        const ReaderReport rd = evaluate_reader(dataset, predictions, cfg.similar_threshold);
        rows.push_back({{"label", row.setting.label + " + " + row.reader_label},
                        {"config", cfg.to_json()},
                        {"top5", rr.top_k_accuracy.at(5)},
                        {"f1", rd.f1},
                        {"em", rd.em},
                        {"em_primary", rd.em_primary},
                        {"counts", {{"correct", rd.counts.correct}, {"similar", rd.counts.similar}, {"incorrect", rd.counts.incorrect}}},
                        {"n", rd.n_questions}});
    }
    nlohmann::json out = report_envelope("reader-ablation", base);
    out["columns"] = {"label", "f1", "em"};
    out["rows"] = std::move(rows);
    return out;
}

}  // namespace hwqa
