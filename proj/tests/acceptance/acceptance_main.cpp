// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Runs offline with stub providers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwqa/cli.hpp"
#include "hwqa/evaluation.hpp"
#include "hwqa/pipeline.hpp"
#include "hwqa/retriever.hpp"
#include "hwqa/tfidf.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace hwqa;
namespace ht = hwqa::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string join(const std::vector<std::string>& words) {
    std::string s;
    for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
    return s;
}

std::vector<ProcessedText> as_processed(const std::vector<std::vector<std::string>>& docs) {
    std::vector<ProcessedText> out;
    for (const auto& d : docs) out.push_back({d, 0});
    return out;
}

Outcome tfidf_oracle() {
    Outcome o;
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<std::size_t> n_docs(2, 10), vocab(1, 50);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 1000 && o.pass; ++trial) {
        const auto docs = ht::random_token_corpus(rng, n_docs(rng), vocab(rng), 30);
        const TfIdfIndex index = fit(as_processed(docs), {false, StemmerKind::None});
        const ht::DenseTfIdf m = ht::oracle_tfidf(docs);
        if (index.vocab().terms() != m.vocab || index.n_docs() != docs.size()) {
            o.fail("vocabulary or shape differs in corpus " + std::to_string(trial));
            break;
        }
        for (std::size_t d = 0; d < docs.size(); ++d) {
            for (std::size_t t = 0; t < m.vocab.size(); ++t) {
                worst = std::max(worst, std::abs(index.weight(d, t) - m.rows[d][t]));
            }
        }
    }
    const double elapsed = seconds_since(t0);
    if (worst > 1e-9) o.fail("max deviation " + std::to_string(worst));
    if (elapsed >= 10.0) o.fail("took " + std::to_string(elapsed) + " s");
    if (o.pass) {
        std::ostringstream s;
        s << "1000 corpora, max |diff| " << worst << ", " << elapsed << " s";
        o.detail = s.str();
    }
    return o;
}

Outcome retrieval_oracle() {
    Outcome o;
    std::mt19937_64 rng(2002);
    std::uniform_int_distribution<std::size_t> n_docs(2, 20), vocab(3, 40), qlen(1, 8);
    const std::vector<std::pair<double, double>> settings{{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.4}};
    std::size_t compared = 0;
    for (int q = 0; q < 500 && o.pass; ++q) {
        const std::size_t v = vocab(rng);
        const auto docs = ht::random_token_corpus(rng, n_docs(rng), v, 25);
        // a few query terms fall outside the corpus vocabulary
        auto query = ht::random_token_corpus(rng, 1, v + 5, qlen(rng)).front();
        std::vector<std::string> texts;
        std::vector<std::vector<double>> dense;
        for (const auto& d : docs) {
            texts.push_back(join(d));
            dense.push_back(stub_embed(texts.back(), 16));
        }
        const TfIdfIndex index = fit(as_processed(docs), {false, StemmerKind::None});
        StubEmbeddingProvider provider(16);
        const EmbeddingMatrix emb = embed_texts(provider, texts);
        const RetrievalInputs in{&index, &emb, &provider};
        const ht::DenseTfIdf m = ht::oracle_tfidf(docs);
        const std::string qtext = join(query);
        for (auto [wt, wd] : settings) {
            RetrieverConfig cfg;
            cfg.w_tfidf = wt;
            cfg.w_transformer = wd;
            cfg.n = docs.size();
            const RetrievalResult r = retrieve(qtext, in, cfg);
            std::vector<std::size_t> got;
            for (const auto& s : r.top) got.push_back(s.doc_id);
            const auto want = ht::oracle_ranking(m, query, dense, stub_embed(qtext, 16), wt, wd);
            ++compared;
            if (got != want) {
                o.fail("ranking differs for query " + std::to_string(q) + " at weights (" + std::to_string(wt) +
                       ", " + std::to_string(wd) + ")");
                break;
            }
        }
    }
    if (o.pass) o.detail = "500 queries x 3 weight settings, " + std::to_string(compared) + " full rankings identical";
    return o;
}

Outcome ensemble_arithmetic() {
    Outcome o;
    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> score(-1.0, 1.0);
    const RetrieverConfig cfg;
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double a = score(rng), b = score(rng);
        worst = std::max(worst, std::abs(cfg.combine(a, b) - (0.6 * a + 0.4 * b)));
    }
    // the same identity on scores produced by the full scoring path
    const auto docs = ht::random_token_corpus(rng, 20, 30, 20);
    std::vector<std::string> texts;
    for (const auto& d : docs) texts.push_back(join(d));
    const TfIdfIndex index = fit(as_processed(docs), {false, StemmerKind::None});
    StubEmbeddingProvider provider(16);
    const EmbeddingMatrix emb = embed_texts(provider, texts);
    for (const auto& s : score_all(join(docs[3]), {&index, &emb, &provider}, cfg)) {
        worst = std::max(worst, std::abs(s.s_ensemble - (0.6 * s.s_tfidf + 0.4 * s.s_transformer)));
    }
    if (worst > 1e-12) o.fail("max deviation " + std::to_string(worst));
    if (o.pass) {
        std::ostringstream s;
        s << "10000 pairs + 20 scored documents, max |diff| " << worst;
        o.detail = s.str();
    }
    return o;
}

struct GoldenCase {
    std::string prediction;
    std::string gold;
    int em;
    double f1;
};

// Expected values counted by hand on the normalized token lists.
const std::vector<GoldenCase> kGolden{
    {"facilitate student learning", "facilitate student learning", 1, 1.0},
    {"warm", "humid subtropical", 0, 0.0},
    {"divide to form new pyrenoids", "divide to form new pyrenoids or be produced de novo", 0, 2.0 / 3.0},
    {"The facilitate student learning.", "facilitate student learning", 1, 1.0},
    {"Embezzlement", "embezzlement", 1, 1.0},
    {"some of their offspring", "divide to form new pyrenoids or be produced de novo", 0, 0.0},
    {"under intense light", "along the plant cells cell wall", 0, 0.0},
    {"along the plant cells cell wall", "along the plant cells cell wall", 1, 1.0},
    {"Offences against Property Theft", "Embezzlement", 0, 0.0},
    {"", "", 1, 1.0},
    {"", "humid subtropical", 0, 0.0},
    {"a", "the", 1, 1.0},
    {"humid", "humid subtropical", 0, 2.0 / 3.0},
    {"humid subtropical climate", "humid subtropical", 0, 0.8},
    {"student learning", "facilitate student learning", 0, 0.8},
    {"cell cell", "cell wall", 0, 0.5},
    {"Humid, subtropical!", "humid subtropical", 1, 1.0},
    {"HUMID SUBTROPICAL", "humid subtropical", 1, 1.0},
    {"new pyrenoids de novo", "divide to form new pyrenoids or be produced de novo", 0, 4.0 / 7.0},
    {"form   new\tpyrenoids", "form new pyrenoids", 1, 1.0},
    {"an apple", "apple", 1, 1.0},
    {"theater", "the ater", 0, 0.0},
    {"1997", "in 1997", 0, 2.0 / 3.0},
    {"CIA's budget", "CIAs budget", 1, 1.0},
    {"x y z", "z y x", 0, 1.0},
    {"learning learning", "learning", 0, 2.0 / 3.0},
    {"teachers", "teacher", 0, 0.0},
    {"caf\xC3\xA9", "CAF\xC3\x89", 1, 1.0},
    {"a b", "b c", 0, 2.0 / 3.0},
};

Outcome metric_conformance() {
    Outcome o;
    for (std::size_t i = 0; i < kGolden.size(); ++i) {
        const auto& c = kGolden[i];
        const int em = exact_match({c.prediction}, {c.gold});
        const double f1 = token_f1(c.prediction, c.gold);
        if (em != c.em || std::abs(f1 - c.f1) > 1e-4) {
            o.fail("golden case " + std::to_string(i) + " (\"" + c.prediction + "\" vs \"" + c.gold + "\") got em=" +
                   std::to_string(em) + " f1=" + std::to_string(f1));
        }
    }
    const double pyrenoids = token_f1(kGolden[2].prediction, kGolden[2].gold);
    if (std::abs(pyrenoids - 0.6667) > 1e-4) o.fail("pyrenoids F1 " + std::to_string(pyrenoids));

    std::mt19937_64 rng(4004);
    const std::vector<std::string> words{"the", "a", "An", "humid", "subtropical", "warm", "cell", "wall,", "Cell",
                                         "pyrenoids", "de", "novo."};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(0, 5), n_cands(0, 3);
    auto phrase = [&] {
        std::vector<std::string> p;
        for (std::size_t k = len(rng); k > 0; --k) p.push_back(words[pick(rng)]);
        return join(p);
    };
    Dataset ds;
    std::vector<EnsemblePrediction> preds;
    for (int i = 0; i < 1000; ++i) {
        std::vector<std::string> cands;
        for (std::size_t k = n_cands(rng); k > 0; --k) cands.push_back(phrase());
        const std::vector<std::string> gold{phrase(), phrase()};
        if (exact_match(cands, gold) > question_f1(cands, gold)) o.fail("EM > F1 on random case " + std::to_string(i));

        const std::string qid = "r" + std::to_string(i);
        ds.documents.push_back({static_cast<DocId>(i), "doc"});
        ds.items.push_back({qid, "?", gold, static_cast<DocId>(i)});
        std::map<std::string, std::vector<ReaderAnswer>> per_model{{"m", {}}};
        for (const auto& c : cands) per_model["m"].push_back({c, 0, 1, 0.5, "m"});
        preds.push_back(ensemble_union(per_model, qid));
    }
    const ReaderReport rep = evaluate_reader(ds, preds);
    std::size_t em_sum = 0, similar = 0;
    for (const auto& row : rep.rows) {
        em_sum += static_cast<std::size_t>(row.em);
        if (row.category == Category::Similar) ++similar;
    }
    if (rep.counts.total() != ds.items.size()) o.fail("category counts do not sum to the question count");
    if (rep.counts.correct != em_sum) o.fail("correct count differs from the number of exact matches");
    if (rep.counts.similar != similar) o.fail("similar count differs from per-question rows");
    if (o.pass) {
        o.detail = std::to_string(kGolden.size()) + " golden cases, 1000 random EM<=F1 cases, counts " +
                   std::to_string(rep.counts.correct) + "+" + std::to_string(rep.counts.similar) + "+" +
                   std::to_string(rep.counts.incorrect) + "=" + std::to_string(rep.counts.total());
    }
    return o;
}

Outcome planted_end_to_end() {
    Outcome o;
    ht::TempDir tmp;
    const std::string path = tmp.file("planted.json");
    ht::write_file(path, ht::planted_answer_dataset(20, 50, 5005));

    const auto t0 = Clock::now();
    RunConfig cfg;
    cfg.dataset = path;
    cfg.embedding_provider = "stub:dim=64";
    cfg.readers = {"stub"};
    const EndToEndRun run = run_end_to_end(cfg);
    const double elapsed = seconds_since(t0);

    const auto& rr = run.retriever_report;
    const auto& rd = run.reader_report;
    if (rd.n_questions != 50 || run.retriever_report.n_questions != 50) o.fail("expected 50 questions");
    if (rr.top_k_accuracy.at(5) != 1.0) o.fail("top-5 accuracy " + std::to_string(rr.top_k_accuracy.at(5)));
    if (rr.top_k_accuracy.at(1) != 1.0) o.fail("top-1 accuracy " + std::to_string(rr.top_k_accuracy.at(1)));
    if (rd.em != 1.0) o.fail("EM " + std::to_string(rd.em));
    if (rd.f1 != 1.0) o.fail("F1 " + std::to_string(rd.f1));
    if (!(rd.counts == CategoryCounts{50, 0, 0})) {
        o.fail("counts (" + std::to_string(rd.counts.correct) + "," + std::to_string(rd.counts.similar) + "," +
               std::to_string(rd.counts.incorrect) + ")");
    }
    if (elapsed >= 5.0) o.fail("took " + std::to_string(elapsed) + " s");
    if (o.pass) {
        std::ostringstream s;
        s << "20 docs / 50 questions: top5=1 top1=1 EM=1 F1=1 counts (50,0,0), " << elapsed << " s";
        o.detail = s.str();
    }
    return o;
}

Outcome ablation_structure() {
    Outcome o;
    ht::TempDir tmp;
    const std::string path = tmp.file("planted.json");
    ht::write_file(path, ht::planted_answer_dataset(10, 20, 6006));

    auto run_cli = [&](const std::vector<std::string>& args, nlohmann::json& out) {
        std::ostringstream so, se;
        const int code = cli::run_command(args, so, se);
        if (code != 0) {
            o.fail("exit " + std::to_string(code) + ": " + se.str());
            return false;
        }
        out = nlohmann::json::parse(so.str());
        return true;
    };

    nlohmann::json t3;
    if (run_cli({"ablation", "retriever", "--dataset", path}, t3)) {
        const std::vector<std::string> labels{"TF-IDF", "TF-IDF + preprocessing", "TF-IDF + preprocessing + ST"};
        const auto& rows = t3.at("rows");
        if (rows.size() != labels.size()) o.fail("retriever table has " + std::to_string(rows.size()) + " rows");
        for (std::size_t i = 0; i < std::min(rows.size(), labels.size()); ++i) {
            const auto& row = rows[i];
            if (row.value("label", "") != labels[i]) o.fail("unexpected row label " + row.value("label", ""));
            if (!row.contains("top1") || !row.contains("top5")) o.fail("retriever row lacks top1/top5");
            if (!row.contains("config") || !row["config"].contains("retriever") || !row["config"].contains("preprocess")) {
                o.fail("retriever row lacks its configuration echo");
            }
        }
        if (o.pass) {
            const auto& c0 = rows[0]["config"];
            const auto& c1 = rows[1]["config"];
            const auto& c2 = rows[2]["config"];
            if (c0["preprocess"]["stopwords"] != "off" || c0["preprocess"]["stemmer"] != "none") {
                o.fail("TF-IDF row should disable preprocessing");
            }
            if (c1["preprocess"]["stemmer"] != "porter" || c1["retriever"]["w_transformer"] != 0.0) {
                o.fail("preprocessing row should be sparse-only with stemming");
            }
            if (c2["retriever"]["w_transformer"] != 0.4) o.fail("ST row should use the default weights");
        }
        if (!t3.contains("config_echo")) o.fail("retriever table lacks a top-level configuration echo");
    }

    nlohmann::json t4;
    if (run_cli({"ablation", "reader", "--dataset", path, "--reader", "stub", "--reader", "stub:id=second:tokens=2",
                 "--reader", "stub:id=third:tokens=1"},
                t4)) {
        const auto& rows = t4.at("rows");
        if (rows.size() < 2) o.fail("reader table has too few rows");
        for (const auto& row : rows) {
            for (const char* key : {"label", "config", "f1", "em", "counts"}) {
                if (!row.contains(key)) o.fail(std::string("reader row lacks ") + key);
            }
        }
        if (!rows.empty() && rows.back()["config"]["reader"]["endpoints"].size() != 3) {
            o.fail("last reader row should echo the three-model ensemble");
        }
        if (!t4.contains("config_echo")) o.fail("reader table lacks a top-level configuration echo");
    }
    if (o.pass) {
        o.detail = "retriever table " + std::to_string(t3["rows"].size()) + " rows, reader table " +
                   std::to_string(t4["rows"].size()) + " rows, each with config echo";
    }
    return o;
}

Outcome index_round_trip() {
    Outcome o;
    std::mt19937_64 rng(7007);
    const auto docs = ht::random_token_corpus(rng, 100, 200, 30);
    std::vector<ht::SyntheticParagraph> paragraphs;
    for (std::size_t i = 0; i < docs.size(); ++i) paragraphs.push_back({join(docs[i]) + " d" + std::to_string(i), {}});
    const Dataset dataset = parse_squad(ht::squad_json(paragraphs));

    ht::TempDir tmp;
    const IndexedCorpus built = build_indexed_corpus(dataset, {});
    save_indexed_corpus(built, tmp.file("idx"));
    const IndexedCorpus loaded = load_indexed_corpus(tmp.file("idx"));
    if (!(loaded.dataset == built.dataset)) o.fail("corpus manifest changed across save/load");

    StubEmbeddingProvider provider(32);
    const EmbeddingMatrix emb = embed_corpus(provider, build_corpus(dataset));
    RetrieverConfig cfg;
    cfg.n = docs.size();
    double worst = 0.0;
    std::size_t scored = 0;
    for (int q = 0; q < 50; ++q) {
        const std::string query = join(ht::random_token_corpus(rng, 1, 220, 8).front());
        const auto a = score_all(query, {&built.index, &emb, &provider}, cfg);
        const auto b = score_all(query, {&loaded.index, &emb, &provider}, cfg);
        for (std::size_t i = 0; i < a.size(); ++i) {
            worst = std::max({worst, std::abs(a[i].s_tfidf - b[i].s_tfidf),
                              std::abs(a[i].s_ensemble - b[i].s_ensemble)});
            ++scored;
        }
    }
    if (worst > 1e-12) o.fail("max score deviation " + std::to_string(worst));
    if (o.pass) {
        std::ostringstream s;
        s << "100-doc corpus, " << scored << " scores, max |diff| " << worst;
        o.detail = s.str();
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"tfidf-oracle-equivalence", tfidf_oracle},
        {"retrieval-oracle-equivalence", retrieval_oracle},
        {"ensemble-arithmetic", ensemble_arithmetic},
        {"metric-conformance", metric_conformance},
        {"planted-answer-end-to-end", planted_end_to_end},
        {"ablation-harness-structure", ablation_structure},
        {"index-persistence-round-trip", index_round_trip},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        if (!o.pass) ++failures;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
