#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tricon/embed_client.hpp"
#include "tricon/error.hpp"
#include "tricon/model.hpp"

using namespace tricon;
using nlohmann::json;

namespace {

class LocalServer {
public:
    LocalServer() = default;
    ~LocalServer() { stop(); }

    httplib::Server& server() { return server_; }

    std::string start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return "http://127.0.0.1:" + std::to_string(port_);
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

constexpr std::size_t kDim = 8;

// Unit vector from a bag of character codes; deterministic per text.
std::vector<double> embed(const std::string& text) {
    std::vector<double> v(kDim, 0.0);
    for (unsigned char c : text) v[c % kDim] += 1.0;
    v[0] += 1e-3;
    double n = 0.0;
    for (double x : v) n += x * x;
    for (double& x : v) x /= std::sqrt(n);
    return v;
}

std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void embed_handler(const httplib::Request& req, httplib::Response& res, std::atomic<int>& calls,
                   std::atomic<std::size_t>& largest) {
    ++calls;
    const auto body = json::parse(req.body);
    const auto texts = body.at("texts").get<std::vector<std::string>>();
    largest = std::max<std::size_t>(largest, texts.size());
    json out;
    out["dim"] = kDim;
    out["vectors"] = json::array();
    for (const auto& t : texts) {
        if (body.at("granularity") == "sentence") {
            out["vectors"].push_back(embed(t));
        } else {
            json toks = json::array();
            for (const auto& w : words(t)) toks.push_back(embed(w));
            out["vectors"].push_back(toks);
        }
    }
    res.set_content(out.dump(), "application/json");
}

}  // namespace

TEST(EmbedClient, SentenceOrderAndBatching) {
    LocalServer srv;
    std::atomic<int> calls{0};
    std::atomic<std::size_t> largest{0};
    srv.server().Post("/embed", [&](const httplib::Request& q, httplib::Response& r) { embed_handler(q, r, calls, largest); });
    ServiceEmbeddingProvider p(srv.start());
    EXPECT_EQ(p.dimension(), 0u);

    for (std::size_t n : {1u, 17u, 256u, 600u}) {
        std::vector<std::string> texts;
        for (std::size_t i = 0; i < n; ++i) texts.push_back("text number " + std::to_string(i));
        calls = 0;
        const auto vs = p.sentence_vectors(texts);
        ASSERT_EQ(vs.size(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(vs[i], embed(texts[i]));
        EXPECT_EQ(calls.load(), static_cast<int>((n + 255) / 256));
    }
    EXPECT_LE(largest.load(), ServiceEmbeddingProvider::kMaxBatch);
    EXPECT_EQ(p.dimension(), kDim);
}

TEST(EmbedClient, TokensAndMeasures) {
    LocalServer srv;
    std::atomic<int> calls{0};
    std::atomic<std::size_t> largest{0};
    srv.server().Post("/embed", [&](const httplib::Request& q, httplib::Response& r) { embed_handler(q, r, calls, largest); });
    ServiceEmbeddingProvider p(srv.start());
    const auto toks = p.token_vectors("red apple pie");
    ASSERT_EQ(toks.size(), 3u);
    EXPECT_EQ(toks[1], embed("apple"));

    EmbeddingMeasures m(p);
    EXPECT_NEAR(m.short_text("a red apple", "a red apple"), 1.0, 1e-6);
    EXPECT_NEAR(m.long_text("a red apple", "a red apple"), 1.0, 1e-6);
    const double s = m.short_text("a red apple", "completely other words");
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
}

TEST(EmbedClient, ProtocolViolations) {
    LocalServer srv;
    std::atomic<int> mode{0};
    srv.server().Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
        const auto n = json::parse(req.body).at("texts").size();
        json out;
        out["dim"] = 2;
        out["vectors"] = json::array();
        switch (mode.load()) {
            case 0:  // not unit norm
                for (std::size_t i = 0; i < n; ++i) out["vectors"].push_back({1.0, 1.0});
                break;
            case 1:  // one vector short
                for (std::size_t i = 0; i + 1 < n; ++i) out["vectors"].push_back({1.0, 0.0});
                break;
            case 2:  // dimension mismatch
                for (std::size_t i = 0; i < n; ++i) out["vectors"].push_back({1.0, 0.0, 0.0});
                break;
            case 3:
                res.status = 500;
                return;
            default:
                res.set_content("not json", "application/json");
                return;
        }
        res.set_content(out.dump(), "application/json");
    });
    ServiceEmbeddingProvider p(srv.start());
    for (int m = 0; m < 5; ++m) {
        mode = m;
        try {
            p.sentence_vector("hello");
            ADD_FAILURE() << "mode " << m;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::ProviderUnavailable) << "mode " << m;
        }
    }
}

TEST(EmbedClient, Unreachable) {
    LocalServer srv;
    const auto url = srv.start();
    srv.stop();
    ServiceEmbeddingProvider p(url, std::chrono::milliseconds(500));
    try {
        p.sentence_vector("x");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ProviderUnavailable);
    }
}

TEST(HttpModel, Endpoints) {
    LocalServer srv;
    srv.server().Post("/generate", [](const httplib::Request& req, httplib::Response& res) {
        const auto b = json::parse(req.body);
        json out{{"text", "Instruction: about " + b.at("image").get<std::string>() + " Answer: yes"}, {"type", "choice"}};
        res.set_content(out.dump(), "application/json");
    });
    srv.server().Post("/answer", [](const httplib::Request& req, httplib::Response& res) {
        res.set_content(json{{"text", "ans:" + json::parse(req.body).at("prompt").get<std::string>()}}.dump(),
                        "application/json");
    });
    srv.server().Post("/question", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"text":"Instruction: what?"})", "application/json");
    });
    HttpModel m(srv.start());
    const auto g = m.generate("a.jpg", "p");
    EXPECT_EQ(g.text, "Instruction: about a.jpg Answer: yes");
    EXPECT_EQ(g.declared_type, QaType::Choice);
    EXPECT_EQ(m.answer("a.jpg", "Why?"), "ans:Why?");
    EXPECT_EQ(m.question("a.jpg", "x"), "Instruction: what?");
}

TEST(HttpModel, RetriesThenSucceeds) {
    LocalServer srv;
    std::atomic<int> calls{0};
    srv.server().Post("/answer", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"text":"ok"})", "application/json");
    });
    HttpModel m(srv.start(), {3, std::chrono::milliseconds(5), std::chrono::seconds(5)});
    EXPECT_EQ(m.answer("a", "b"), "ok");
    EXPECT_EQ(calls.load(), 3);
}

TEST(HttpModel, GivesUpAfterRetries) {
    LocalServer srv;
    std::atomic<int> calls{0};
    srv.server().Post("/answer", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 500;
    });
    HttpModel m(srv.start(), {3, std::chrono::milliseconds(1), std::chrono::seconds(5)});
    try {
        m.answer("a", "b");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ModelError);
    }
    EXPECT_EQ(calls.load(), 4);
}
