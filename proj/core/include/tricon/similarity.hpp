#pragma once

#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tricon/types.hpp"

namespace tricon {

/// Similarity values live in [0,1]; 1 means identical under the measure.
using Similarity = double;
using Vector = std::vector<double>;

/// Lowercases, splits on whitespace and punctuation (ASCII plus the common
/// Unicode separator/punctuation blocks) and drops empty tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Cosine of term-frequency vectors. Both empty -> 1, one empty -> 0.
Similarity lexical_similarity(std::string_view a, std::string_view b);

/// Trim, lowercase, collapse internal whitespace, strip trailing periods.
std::string normalize_for_match(std::string_view text);

/// 1 if the normalized texts are equal, else 0.
Similarity exact_match(std::string_view a, std::string_view b);

/// Intersection over union. Two zero-area boxes score 1 only when equal.
Similarity iou(const BoundingBox& a, const BoundingBox& b) noexcept;

double cosine(std::span<const double> a, std::span<const double> b) noexcept;

/// Source of unit-norm sentence and token vectors.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual Vector sentence_vector(std::string_view text) = 0;
    virtual std::vector<Vector> token_vectors(std::string_view text) = 0;

    /// When false, callers must serialize access (see EmbeddingMeasures).
    virtual bool thread_safe() const noexcept { return true; }
};

/// max(0, cosine) of the provider's sentence vectors.
Similarity embedding_similarity(std::string_view a, std::string_view b, EmbeddingProvider& provider);

/// Greedy-matching F1 over token vectors: each token is matched to its most
/// similar counterpart (cosines clamped to [0,1]); recall averages over the
/// reference, precision over the candidate. Throws Error{EmptyText}.
Similarity greedy_match_f1(std::string_view cand, std::string_view ref, EmbeddingProvider& provider);
Similarity greedy_match_f1(std::span<const Vector> cand, std::span<const Vector> ref);

/// Greedy-matching F1 where token similarity is identity (one-hot vectors).
Similarity greedy_match_f1_tokens(std::span<const std::string> cand, std::span<const std::string> ref);

/// Texts with more tokens than this count as long.
inline constexpr std::size_t kLongTextTokens = 25;

/// The short-text and long-text measures used by consistency scoring.
/// Empty inputs are handled here for every backend: both empty -> 1,
/// exactly one empty -> 0.
class TextMeasures {
public:
    virtual ~TextMeasures() = default;

    Similarity short_text(std::string_view a, std::string_view b);
    Similarity long_text(std::string_view a, std::string_view b);
    virtual std::string_view name() const noexcept = 0;

protected:
    virtual Similarity short_impl(std::string_view a, std::string_view b) = 0;
    virtual Similarity long_impl(std::string_view a, std::string_view b) = 0;
};

/// Self-contained backend: TF cosine for short texts, token-identity greedy
/// F1 for long texts.
class LexicalMeasures final : public TextMeasures {
public:
    std::string_view name() const noexcept override { return "lexical"; }

protected:
    Similarity short_impl(std::string_view a, std::string_view b) override;
    Similarity long_impl(std::string_view a, std::string_view b) override;
};

/// Provider-backed backend: sentence cosine for short texts, greedy-matching
/// F1 over token vectors for long texts.
class EmbeddingMeasures final : public TextMeasures {
public:
    explicit EmbeddingMeasures(EmbeddingProvider& provider) : provider_(provider) {}
    std::string_view name() const noexcept override { return "service"; }

protected:
    Similarity short_impl(std::string_view a, std::string_view b) override;
    Similarity long_impl(std::string_view a, std::string_view b) override;

private:
    EmbeddingProvider& provider_;
    std::mutex mutex_;
};

}  // namespace tricon
