#include "hwqa/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "hwqa/error.hpp"
#include "hwqa/log.hpp"
#include "hwqa/pipeline.hpp"

namespace hwqa::cli {

namespace {

// Flag values keyed by config key, so flags and config files share one
// parser. Flags are applied after the config file.
class Flags {
public:
    CLI::Option* bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        return app->add_option_function<std::string>(
            flag, [this, key](const std::string& v) { values_[key] = v; }, help);
    }

    void bind_list(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option_function<std::vector<std::string>>(
            flag,
            [this, key](const std::vector<std::string>& v) {
                std::string joined;
                for (const auto& s : v) joined += (joined.empty() ? "" : ",") + s;
                values_[key] = joined;
            },
            help);
    }

    void bind_switch(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_flag_callback(flag, [this, key] { values_[key] = "on"; }, help);
    }

    void add_config(CLI::App* app) {
        app->add_option("--config", config_path_, "key=value config file; flags override it");
        bind(app, "--jobs", "jobs", "worker threads");
    }

    bool has(const std::string& key) const { return values_.contains(key) || file_values_.contains(key); }

    RunConfig resolve() {
        RunConfig cfg;
        if (!config_path_.empty()) {
            file_values_ = read_config_file(config_path_);
            apply_config(cfg, file_values_);
        }
        apply_config(cfg, values_);
        cfg.validate();
        return cfg;
    }

private:
    std::string config_path_;
    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> file_values_;
};

void add_retriever_flags(CLI::App* app, Flags& flags) {
    flags.bind(app, "--top-n", "retriever.n", "documents to retrieve per query");
    flags.bind(app, "--w-tfidf", "retriever.w_tfidf", "weight of the TF-IDF cosine");
    flags.bind(app, "--w-transformer", "retriever.w_transformer", "weight of the embedding cosine");
    flags.bind_switch(app, "--embed-preprocessed", "retriever.embed_preprocessed",
                      "encode the preprocessed query instead of the raw text");
    flags.bind(app, "--embeddings", "embeddings", "context embedding JSONL");
    flags.bind(app, "--embedding-provider", "embedding.provider", "stub:dim=N | http://host:port | file:<path>");
    flags.bind(app, "--embedding-batch", "embedding.batch", "texts per embedding request");
    flags.bind(app, "--embedding-in-flight", "embedding.in_flight", "concurrent embedding requests");
}

void add_preprocess_flags(CLI::App* app, Flags& flags) {
    flags.bind(app, "--stopwords", "preprocess.stopwords", "on|off");
    flags.bind(app, "--stemmer", "preprocess.stemmer", "porter|none");
}

void add_reader_flags(CLI::App* app, Flags& flags) {
    flags.bind_list(app, "--reader", "reader.endpoints", "reader endpoint (stub[:opts] or http://host:port), up to 3");
    flags.bind(app, "--reader-k", "reader.k", "answers kept per model");
    flags.bind(app, "--reader-contexts", "reader.contexts", "retrieved contexts read per question");
    flags.bind(app, "--similar-threshold", "eval.similar_threshold", "question F1 at or above which a miss is 'similar'");
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << text;
}

Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw Error(ErrorKind::Usage, "--dataset is required");
    Dataset ds = load_squad_file(cfg.dataset);
    for (const auto& w : ds.warnings) log::warn(w);
    return ds;
}

// Index from --index when given, otherwise fitted over the dataset.
IndexedCorpus index_for(RunConfig& cfg, const std::optional<Dataset>& dataset) {
    if (!cfg.index.empty()) {
        IndexedCorpus ic = load_indexed_corpus(cfg.index);
        if (dataset) {
            require_same_documents(ic.dataset, *dataset);
            ic.dataset = *dataset;
        }
        cfg.preprocess = ic.index.preprocess_config();
        return ic;
    }
    if (!dataset) throw Error(ErrorKind::Usage, "either --index or --dataset is required");
    return build_indexed_corpus(*dataset, cfg.preprocess);
}

// With an embedding file and no explicit provider, reuse the file's model
// tag as the query encoder when it names one we can construct.
void default_provider_from_embeddings(RunConfig& cfg, const Flags& flags) {
    if (flags.has("embedding.provider") || cfg.embeddings.empty()) return;
    std::ifstream in(cfg.embeddings);
    std::string first;
    if (!in || !std::getline(in, first)) return;
    try {
        const auto manifest = nlohmann::json::parse(first);
        const std::string model = manifest.value("model", std::string());
        if (model.rfind("stub", 0) == 0 || model.rfind("http", 0) == 0) cfg.embedding_provider = model;
    } catch (const nlohmann::json::exception&) {
    }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto previous_sink = log::set_sink([&err](log::Level level, const std::string& message) {
        err << (level == log::Level::Warning ? "warning: " : "") << message << '\n';
    });
    struct RestoreSink {
        log::Sink sink;
        ~RestoreSink() { log::set_sink(std::move(sink)); }
    } restore{std::move(previous_sink)};

    CLI::App app{"Hybrid TF-IDF + embedding retrieval and reader-ensemble QA evaluation", "hwqa"};
    app.set_version_flag("--version", HWQA_VERSION);
    app.require_subcommand(1);
    Flags flags;

    auto* ingest = app.add_subcommand("ingest", "parse a SQuAD dataset into a corpus manifest");
    std::string ingest_out;
    flags.add_config(ingest);
    flags.bind(ingest, "--dataset", "dataset", "SQuAD v1.1 JSON");
    ingest->add_option("--out", ingest_out, "manifest path (default: stdout)");

    auto* index = app.add_subcommand("index", "TF-IDF index operations");
    index->require_subcommand(1);
    auto* index_build = index->add_subcommand("build", "fit the TF-IDF index over a dataset");
    flags.add_config(index_build);
    flags.bind(index_build, "--dataset", "dataset", "SQuAD v1.1 JSON");
    flags.bind(index_build, "--out", "index", "output directory")->required();
    add_preprocess_flags(index_build, flags);

    auto* embed = app.add_subcommand("embed", "embed the corpus contexts through a provider");
    std::string embed_out;
    flags.add_config(embed);
    flags.bind(embed, "--dataset", "dataset", "SQuAD v1.1 JSON");
    flags.bind(embed, "--index", "index", "index directory (its corpus is embedded)");
    flags.bind(embed, "--embedding-provider", "embedding.provider", "stub:dim=N | http://host:port | file:<path>");
    flags.bind(embed, "--embedding-batch", "embedding.batch", "texts per embedding request");
    flags.bind(embed, "--embedding-in-flight", "embedding.in_flight", "concurrent embedding requests");
    embed->add_option("--out", embed_out, "embedding JSONL to write")->required();

    auto* retrieve_cmd = app.add_subcommand("retrieve", "rank corpus documents for one query");
    std::string query;
    flags.add_config(retrieve_cmd);
    flags.bind(retrieve_cmd, "--index", "index", "index directory");
    retrieve_cmd->add_option("--query", query, "query text")->required();
    add_retriever_flags(retrieve_cmd, flags);

    auto* eval_retriever = app.add_subcommand("eval-retriever", "top-k retrieval accuracy over a dataset");
    std::string retriever_csv;
    flags.add_config(eval_retriever);
    flags.bind(eval_retriever, "--dataset", "dataset", "SQuAD v1.1 JSON");
    flags.bind(eval_retriever, "--index", "index", "index directory (built from --dataset when absent)");
    add_retriever_flags(eval_retriever, flags);
    add_preprocess_flags(eval_retriever, flags);
    eval_retriever->add_option("--csv", retriever_csv, "per-question CSV path");

    auto* eval_reader = app.add_subcommand("eval-reader", "EM / F1 / categories for reader predictions");
    std::string reader_csv;
    std::string predictions_out;
    flags.add_config(eval_reader);
    flags.bind(eval_reader, "--dataset", "dataset", "SQuAD v1.1 JSON");
    flags.bind(eval_reader, "--predictions", "predictions", "prediction JSONL to score");
    add_reader_flags(eval_reader, flags);
    eval_reader->add_option("--csv", reader_csv, "per-question CSV path");
    eval_reader->add_option("--out", predictions_out, "write the readers' predictions to this JSONL");

    auto* e2e = app.add_subcommand("e2e", "retrieve, read and evaluate");
    flags.add_config(e2e);
    flags.bind(e2e, "--dataset", "dataset", "SQuAD v1.1 JSON");
    flags.bind(e2e, "--index", "index", "index directory (built from --dataset when absent)");
    flags.bind(e2e, "--out", "out", "output directory");
    add_retriever_flags(e2e, flags);
    add_preprocess_flags(e2e, flags);
    add_reader_flags(e2e, flags);

    auto* ablation = app.add_subcommand("ablation", "component ablation tables");
    ablation->require_subcommand(1);
    auto* ablation_retriever = ablation->add_subcommand("retriever", "TF-IDF / + preprocessing / + ST retrieval table");
    flags.add_config(ablation_retriever);
    flags.bind(ablation_retriever, "--dataset", "dataset", "SQuAD v1.1 JSON");
    add_retriever_flags(ablation_retriever, flags);
    add_preprocess_flags(ablation_retriever, flags);
    auto* ablation_reader = ablation->add_subcommand("reader", "single reader vs ensemble table");
    flags.add_config(ablation_reader);
    flags.bind(ablation_reader, "--dataset", "dataset", "SQuAD v1.1 JSON");
    add_retriever_flags(ablation_reader, flags);
    add_preprocess_flags(ablation_reader, flags);
    add_reader_flags(ablation_reader, flags);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << HWQA_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        RunConfig cfg = flags.resolve();

        if (*ingest) {
            const Dataset ds = load_dataset(cfg);
            const auto manifest = to_manifest(ds);
            if (ingest_out.empty()) {
                out << manifest.dump(2) << '\n';
            } else {
                write_file(ingest_out, manifest.dump() + "\n");
                out << nlohmann::json{{"documents", ds.documents.size()},
                                      {"items", ds.items.size()},
                                      {"warnings", ds.warnings.size()},
                                      {"manifest", ingest_out}}
                           .dump(2)
                    << '\n';
            }
        } else if (*index_build) {
            const Dataset ds = load_dataset(cfg);
            const IndexedCorpus ic = build_indexed_corpus(ds, cfg.preprocess);
            save_indexed_corpus(ic, cfg.index);
            nlohmann::json j = report_envelope("index", cfg);
            j["n_docs"] = ic.index.n_docs();
            j["n_terms"] = ic.index.n_terms();
            j["nnz"] = ic.index.values().size();
            out << j.dump(2) << '\n';
        } else if (*embed) {
            std::optional<Dataset> ds;
            if (!cfg.dataset.empty()) ds = load_dataset(cfg);
            const IndexedCorpus ic = index_for(cfg, ds);
            const auto corpus = build_corpus(ic.dataset);
            auto provider = make_provider(cfg);
            const EmbeddingMatrix m = embed_corpus(*provider, corpus);
            save_embeddings(m, embed_out, &corpus);
            nlohmann::json j = report_envelope("embed", cfg);
            j["rows"] = m.rows();
            j["dim"] = m.dim();
            j["model"] = m.provider_tag();
            j["out"] = embed_out;
            out << j.dump(2) << '\n';
        } else if (*retrieve_cmd) {
            if (cfg.index.empty()) throw Error(ErrorKind::Usage, "--index is required");
            default_provider_from_embeddings(cfg, flags);
            const IndexedCorpus ic = index_for(cfg, std::nullopt);
            const RetrievalStack stack = make_retrieval_stack(cfg, ic.index, build_corpus(ic.dataset));
            const RetrievalResult r = retrieve(query, stack.inputs(), cfg.retriever);
            out << to_json(r).dump(2) << '\n';
        } else if (*eval_retriever) {
            const Dataset ds = load_dataset(cfg);
            default_provider_from_embeddings(cfg, flags);
            const IndexedCorpus ic = index_for(cfg, ds);
            const RetrievalStack stack = make_retrieval_stack(cfg, ic.index, build_corpus(ds));
            const auto results = run_retrieval(ds, stack, cfg.retriever, cfg.jobs);
            const RetrieverReport report = evaluate_retriever(ds, results);
            nlohmann::json j = report_envelope("eval-retriever", cfg);
            j.update(to_json(report));
            if (stack.embeddings) j["embedding_model"] = stack.embeddings->provider_tag();
            if (!retriever_csv.empty()) write_file(retriever_csv, per_question_csv(ds, &report, nullptr));
            out << j.dump(2) << '\n';
        } else if (*eval_reader) {
            const Dataset ds = load_dataset(cfg);
            std::vector<EnsemblePrediction> predictions;
            if (!cfg.predictions.empty()) {
                predictions = load_predictions(cfg.predictions);
            } else if (!cfg.readers.empty()) {
                ReaderEnsemble ensemble = make_ensemble(cfg.readers, cfg.reader_k);
                predictions = run_readers(ensemble, ds, gold_contexts(ds), cfg.jobs);
                if (!predictions_out.empty()) save_predictions(predictions, predictions_out);
            } else {
                throw Error(ErrorKind::Usage, "eval-reader needs --predictions or at least one --reader");
            }
            const ReaderReport report = evaluate_reader(ds, predictions, cfg.similar_threshold);
            nlohmann::json j = report_envelope("eval-reader", cfg);
            j.update(to_json(report));
            if (!reader_csv.empty()) write_file(reader_csv, per_question_csv(ds, nullptr, &report));
            out << j.dump(2) << '\n';
        } else if (*e2e) {
            default_provider_from_embeddings(cfg, flags);
            const EndToEndRun run = run_end_to_end(cfg);
            out << run.report.dump(2) << '\n';
        } else if (*ablation_retriever) {
            const Dataset ds = load_dataset(cfg);
            default_provider_from_embeddings(cfg, flags);
            out << retriever_ablation(ds, cfg).dump(2) << '\n';
        } else if (*ablation_reader) {
            const Dataset ds = load_dataset(cfg);
            default_provider_from_embeddings(cfg, flags);
            out << reader_ablation(ds, cfg).dump(2) << '\n';
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return e.kind() == ErrorKind::Usage ? kExitUsage : kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitOk;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_command(args, std::cout, std::cerr);
}

}  // namespace hwqa::cli
