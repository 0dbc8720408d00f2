#include "tricon/embed_client.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "tricon/error.hpp"

namespace tricon {

struct ServiceEmbeddingProvider::Client {
    explicit Client(const std::string& url) : http(url) {}
    httplib::Client http;
};

namespace {

Vector to_unit_vector(const nlohmann::json& j, std::size_t dim) {
    if (!j.is_array()) throw Error(Errc::ProviderUnavailable, "vector is not an array");
    Vector v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw Error(Errc::ProviderUnavailable, "non-numeric vector entry");
        v.push_back(x.get<double>());
    }
    if (v.size() != dim) throw Error(Errc::ProviderUnavailable, "vector length does not match dim");
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (std::abs(std::sqrt(sq) - 1.0) > ServiceEmbeddingProvider::kNormTolerance) {
        throw Error(Errc::ProviderUnavailable, "service returned a vector that is not unit-norm");
    }
    return v;
}

}  // namespace

ServiceEmbeddingProvider::ServiceEmbeddingProvider(std::string base_url, std::chrono::milliseconds timeout)
    : client_(std::make_unique<Client>(base_url)) {
    client_->http.set_connection_timeout(timeout);
    client_->http.set_read_timeout(timeout);
    client_->http.set_write_timeout(timeout);
}

ServiceEmbeddingProvider::~ServiceEmbeddingProvider() = default;

namespace {

nlohmann::json post_embed(httplib::Client& http, std::span<const std::string> texts, const char* granularity) {
    nlohmann::json body;
    body["texts"] = nlohmann::json::array();
    for (const auto& t : texts) body["texts"].push_back(t);
    body["granularity"] = granularity;
    auto res = http.Post("/embed", body.dump(), "application/json");
    if (!res) {
        throw Error(Errc::ProviderUnavailable, "embedding service unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(Errc::ProviderUnavailable, "embedding service returned HTTP " + std::to_string(res->status));
    }
    try {
        auto j = nlohmann::json::parse(res->body);
        if (!j.contains("dim") || !j.contains("vectors") || !j["vectors"].is_array()) {
            throw Error(Errc::ProviderUnavailable, "embedding response lacks dim/vectors");
        }
        if (j["vectors"].size() != texts.size()) {
            throw Error(Errc::ProviderUnavailable, "embedding response has wrong vector count");
        }
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ProviderUnavailable, std::string("bad embedding response: ") + e.what());
    }
}

}  // namespace

std::vector<Vector> ServiceEmbeddingProvider::sentence_vectors(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    std::lock_guard lock(mutex_);
    for (std::size_t start = 0; start < texts.size(); start += kMaxBatch) {
        const auto chunk = texts.subspan(start, std::min(kMaxBatch, texts.size() - start));
        const auto j = post_embed(client_->http, chunk, "sentence");
        dim_ = j["dim"].get<std::size_t>();
        for (const auto& v : j["vectors"]) out.push_back(to_unit_vector(v, dim_));
    }
    return out;
}

std::vector<std::vector<Vector>> ServiceEmbeddingProvider::token_vector_batches(std::span<const std::string> texts) {
    std::vector<std::vector<Vector>> out;
    out.reserve(texts.size());
    std::lock_guard lock(mutex_);
    for (std::size_t start = 0; start < texts.size(); start += kMaxBatch) {
        const auto chunk = texts.subspan(start, std::min(kMaxBatch, texts.size() - start));
        const auto j = post_embed(client_->http, chunk, "token");
        dim_ = j["dim"].get<std::size_t>();
        for (const auto& per_text : j["vectors"]) {
            if (!per_text.is_array()) throw Error(Errc::ProviderUnavailable, "token vectors must be a list");
            std::vector<Vector> tokens;
            for (const auto& v : per_text) tokens.push_back(to_unit_vector(v, dim_));
            out.push_back(std::move(tokens));
        }
    }
    return out;
}

Vector ServiceEmbeddingProvider::sentence_vector(std::string_view text) {
    const std::string one(text);
    return sentence_vectors(std::span(&one, 1)).front();
}

std::vector<Vector> ServiceEmbeddingProvider::token_vectors(std::string_view text) {
    const std::string one(text);
    return token_vector_batches(std::span(&one, 1)).front();
}

}  // namespace tricon
