#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <span>
#include <string>

#include "tricon/similarity.hpp"

namespace tricon {

/// EmbeddingProvider backed by a remote encoder service.
///
/// Wire protocol: POST {base_url}/embed with
///   {"texts": [...], "granularity": "sentence" | "token"}
/// answered by
///   {"dim": D, "vectors": [...]}
/// where "vectors" holds one vector per text (sentence) or one list of token
/// vectors per text (token). Every vector is re-checked for unit norm.
/// Transport or protocol failures throw Error{ProviderUnavailable}.
class ServiceEmbeddingProvider final : public EmbeddingProvider {
public:
    /// Largest batch the service accepts per request.
    static constexpr std::size_t kMaxBatch = 256;
    static constexpr double kNormTolerance = 1e-6;

    explicit ServiceEmbeddingProvider(std::string base_url,
                                      std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ~ServiceEmbeddingProvider() override;

    Vector sentence_vector(std::string_view text) override;
    std::vector<Vector> token_vectors(std::string_view text) override;

    std::vector<Vector> sentence_vectors(std::span<const std::string> texts);
    std::vector<std::vector<Vector>> token_vector_batches(std::span<const std::string> texts);

    /// Dimension reported by the last response, 0 before any call.
    std::size_t dimension() const noexcept { return dim_; }

    // Calls are serialized internally; the HTTP client is not re-entrant.
    bool thread_safe() const noexcept override { return true; }

private:
    struct Client;
    std::unique_ptr<Client> client_;
    std::mutex mutex_;
    std::size_t dim_ = 0;
};

}  // namespace tricon
