#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hwqa/embedding.hpp"
#include "hwqa/error.hpp"
#include "hwqa/reader.hpp"

using namespace hwqa;
using nlohmann::json;

namespace {

class FakeServer {
public:
    FakeServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

http::RetryPolicy fast_retry(int attempts = 3) {
    http::RetryPolicy p;
    p.attempts = attempts;
    p.initial_backoff = std::chrono::milliseconds(1);
    p.timeout = std::chrono::seconds(5);
    return p;
}

void reply(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

}  // namespace

TEST(EmbedContract, VectorsInRequestOrderAcrossBatches) {
    std::atomic<int> calls{0};
    FakeServer fake;
    fake.server().Post("/v1/embed", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        const json body = json::parse(req.body);
        json vectors = json::array();
        for (const auto& t : body.at("texts")) vectors.push_back(stub_embed(t.get<std::string>(), 4));
        reply(res, {{"model", "fake-st"}, {"dim", 4}, {"vectors", vectors}});
    });
    HttpEmbeddingProvider p(fake.url(), {2, 3, fast_retry()});
    std::vector<std::string> texts;
    for (int i = 0; i < 7; ++i) texts.push_back("text " + std::to_string(i));
    const auto m = embed_texts(p, texts);
    EXPECT_EQ(calls.load(), 4);
    EXPECT_EQ(p.tag(), "fake-st");
    ASSERT_EQ(m.rows(), 7u);
    for (std::size_t i = 0; i < 7; ++i) {
        const Vector want = stub_embed(texts[i], 4);
        for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(m.row(i)[k], want[k], 1e-15);
    }
}

TEST(EmbedContract, DimensionMismatchIsContractError) {
    FakeServer fake;
    fake.server().Post("/v1/embed", [&](const httplib::Request&, httplib::Response& res) {
        reply(res, {{"model", "m"}, {"dim", 2}, {"vectors", {{1.0, 0.0}, {1.0, 0.0, 0.0}}}});
    });
    HttpEmbeddingProvider p(fake.url(), {32, 1, fast_retry()});
    const std::vector<std::string> texts{"a", "b"};
    try {
        p.embed(texts);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ProviderContract);
    }
}

TEST(EmbedContract, WrongVectorCountIsContractError) {
    FakeServer fake;
    fake.server().Post("/v1/embed", [&](const httplib::Request&, httplib::Response& res) {
        reply(res, {{"model", "m"}, {"dim", 2}, {"vectors", {{1.0, 0.0}}}});
    });
    HttpEmbeddingProvider p(fake.url(), {32, 1, fast_retry()});
    const std::vector<std::string> texts{"a", "b"};
    EXPECT_THROW(p.embed(texts), Error);
}

TEST(EmbedContract, ServerErrorsAreRetried) {
    std::atomic<int> calls{0};
    FakeServer fake;
    fake.server().Post("/v1/embed", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            reply(res, {{"error", "busy"}}, 503);
            return;
        }
        reply(res, {{"model", "m"}, {"dim", 1}, {"vectors", {{1.0}}}});
    });
    HttpEmbeddingProvider p(fake.url(), {32, 1, fast_retry(3)});
    const std::vector<std::string> texts{"a"};
    EXPECT_EQ(p.embed(texts).size(), 1u);
    EXPECT_EQ(calls.load(), 3);
}

TEST(EmbedContract, PersistentFailureIsTransportError) {
    std::atomic<int> calls{0};
    FakeServer fake;
    fake.server().Post("/v1/embed", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        reply(res, {{"error", "model failure"}}, 500);
    });
    HttpEmbeddingProvider p(fake.url(), {32, 1, fast_retry(2)});
    const std::vector<std::string> texts{"a"};
    try {
        p.embed(texts);
        FAIL();
    } catch (const TransportError& e) {
        EXPECT_EQ(e.attempts(), 2);
        EXPECT_EQ(e.last_status(), 500);
    }
    EXPECT_EQ(calls.load(), 2);
}

TEST(EmbedContract, ClientErrorIsNotRetried) {
    std::atomic<int> calls{0};
    FakeServer fake;
    fake.server().Post("/v1/embed", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        reply(res, {{"error", "batch too large"}}, 413);
    });
    HttpEmbeddingProvider p(fake.url(), {32, 1, fast_retry(3)});
    const std::vector<std::string> texts{"a"};
    EXPECT_THROW(p.embed(texts), TransportError);
    EXPECT_EQ(calls.load(), 1);
}

TEST(EmbedContract, UnreachableEndpoint) {
    HttpEmbeddingProvider p("http://127.0.0.1:1", {32, 1, fast_retry(2)});
    const std::vector<std::string> texts{"a"};
    try {
        p.embed(texts);
        FAIL();
    } catch (const TransportError& e) {
        EXPECT_EQ(e.attempts(), 2);
        EXPECT_EQ(e.last_status(), 0);
    }
}

TEST(AnswerContract, ParsesAnswersAndModelId) {
    FakeServer fake;
    fake.server().Post("/v1/answer", [&](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        EXPECT_EQ(body.at("question"), "What do chloroplasts contain?");
        EXPECT_EQ(body.at("top_k"), 2);
        reply(res, {{"model", "roberta-hw"},
                    {"answers",
                     {{{"text", "pyrenoids"}, {"start", 21}, {"end", 30}, {"score", 0.8}},
                      {{"text", "carbon"}, {"start", 49}, {"end", 55}, {"score", 0.1}}}}});
    });
    HttpReader r(fake.url(), fast_retry());
    const auto a = query_reader(r, "What do chloroplasts contain?",
                                "Chloroplasts contain pyrenoids which concentrate carbon.", 2);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].text, "pyrenoids");
    EXPECT_EQ(a[0].model_id, "roberta-hw");
    EXPECT_EQ(r.id(), "roberta-hw");
}

TEST(AnswerContract, ScoreAboveOneIsContractError) {
    FakeServer fake;
    fake.server().Post("/v1/answer", [&](const httplib::Request&, httplib::Response& res) {
        reply(res, {{"model", "m"}, {"answers", {{{"text", "ab"}, {"start", 0}, {"end", 2}, {"score", 1.2}}}}});
    });
    HttpReader r(fake.url(), fast_retry());
    try {
        query_reader(r, "q", "ab cd", 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ProviderContract);
    }
}

TEST(AnswerContract, MalformedBodyIsContractError) {
    FakeServer fake;
    fake.server().Post("/v1/answer", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json", "text/plain");
    });
    HttpReader r(fake.url(), fast_retry());
    try {
        r.answer("q", "ctx", 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ProviderContract);
    }
}

TEST(AnswerContract, EnsembleSurvivesOneDeadEndpoint) {
    FakeServer fake;
    fake.server().Post("/v1/answer", [&](const httplib::Request&, httplib::Response& res) {
        reply(res, {{"model", "live"}, {"answers", {{{"text", "ab"}, {"start", 0}, {"end", 2}, {"score", 0.7}}}}});
    });
    std::vector<std::unique_ptr<Reader>> readers;
    readers.push_back(std::make_unique<HttpReader>(fake.url(), fast_retry(1)));
    readers.push_back(std::make_unique<HttpReader>("http://127.0.0.1:1", fast_retry(1)));
    ReaderEnsemble e(std::move(readers));
    const auto p = e.predict("q", "question", {"ab cd"});
    EXPECT_EQ(p.failed_models.size(), 1u);
    EXPECT_EQ(p.candidate_texts(), std::vector<std::string>{"ab"});
}
