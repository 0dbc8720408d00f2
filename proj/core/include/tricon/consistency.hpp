#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tricon/similarity.hpp"
#include "tricon/templates.hpp"
#include "tricon/types.hpp"

namespace tricon {

/// The model's re-predictions for one triplet: the question given
/// image + answer, and the answer given image + question. A failed side
/// carries an empty text and scores 0.
struct Reconstruction {
    std::string triplet_id;
    std::string q_prime;
    std::string a_prime;
    bool q_failed = false;
    bool a_failed = false;

    bool failed() const noexcept { return q_failed || a_failed; }
    friend bool operator==(const Reconstruction&, const Reconstruction&) = default;
};

struct ReconstructionPrompts {
    std::string for_a_prime;  ///< the bare question
    std::string for_q_prime;  ///< "<IA->Q template> Answer: <answer>"
};

struct ComponentSimilarities {
    std::optional<Similarity> sim_q;
    std::optional<Similarity> sim_a;
    bool box_parse_failed = false;
};

struct ScoredTriplet {
    Triplet triplet;
    Reconstruction reconstruction;
    std::optional<Similarity> sim_q;
    std::optional<Similarity> sim_a;
    double score = 0.0;
    bool flagged = false;  ///< box parse failure or failed reconstruction

    friend bool operator==(const ScoredTriplet&, const ScoredTriplet&) = default;
};

/// Template choice is a pure function of (triplet id, seed).
ReconstructionPrompts reconstruction_prompts(const Triplet& t, std::uint64_t seed,
                                             const TemplateCatalog& catalog = default_catalog());

/// Per-category dispatch of the component measures. All text passes through
/// strip_template first. Choice and Caption compare answers only.
ComponentSimilarities component_similarities(const Triplet& t, const Reconstruction& r, TextMeasures& measures,
                                             const TemplateCatalog& catalog = default_catalog());

/// Geometric mean of the available components. Throws Error{NoComponents}.
double consistency_score(std::optional<Similarity> sim_q, std::optional<Similarity> sim_a);

ScoredTriplet score_triplet(const Triplet& t, const Reconstruction& r, TextMeasures& measures,
                            const TemplateCatalog& catalog = default_catalog());

/// Scores record i against reconstruction i on up to `workers` threads.
/// Output order equals input order. Throws Error{InvalidArgument} when the
/// sequences differ in length or ids do not line up.
std::vector<ScoredTriplet> score_all(std::span<const Triplet> triplets, std::span<const Reconstruction> recons,
                                     TextMeasures& measures, std::size_t workers = 1,
                                     const TemplateCatalog& catalog = default_catalog());

struct FilterResult {
    std::vector<ScoredTriplet> retained;
    std::vector<ScoredTriplet> excluded;
};

/// Cut size for a pool of n records: ceil(p * n), robust to the binary
/// representation of decimal fractions (0.7 * 10 is 7, not 8).
std::size_t top_count(double fraction, std::size_t n) noexcept;

/// Keeps the top `fraction` of each category (or of the whole set when
/// per_type is false) by descending score, ties to the earlier input
/// position. Both outputs are in canonical order: category, descending
/// score, input position. Throws Error{InvalidArgument} unless 0 < p <= 1.
FilterResult filter_top(std::span<const ScoredTriplet> scored, double fraction, bool per_type);

/// Splits a scored set by an explicit keep mask; canonical order on both sides.
FilterResult partition_by(std::span<const ScoredTriplet> scored, const std::vector<bool>& keep);

/// Exact-equality variant: keeps records whose reconstructions reproduce
/// every compared side (normalized, templates stripped). Failed
/// reconstructions are never kept.
FilterResult filter_exact(std::span<const ScoredTriplet> scored, const TemplateCatalog& catalog = default_catalog());

/// Sorts into canonical order; `positions[i]` is the input position of scored[i].
void canonical_sort(std::vector<ScoredTriplet>& scored, std::vector<std::size_t>& positions);

// Scored-record JSONL: triplet keys, then q_prime, a_prime, sim_q, sim_a,
// score. Absent components are null.
void write_scored(std::span<const ScoredTriplet> records, std::ostream& out);
void write_scored(std::span<const ScoredTriplet> records, const std::filesystem::path& path);
std::vector<ScoredTriplet> read_scored(std::istream& in);
std::vector<ScoredTriplet> read_scored(const std::filesystem::path& path);

/// Reconstructed JSONL: triplet keys plus q_prime and a_prime (null marks a
/// failed reconstruction).
struct ReconstructedSet {
    std::vector<Triplet> triplets;
    std::vector<Reconstruction> reconstructions;
};
ReconstructedSet read_reconstructed(std::istream& in);
ReconstructedSet read_reconstructed(const std::filesystem::path& path);
void write_reconstructed(std::span<const Triplet> triplets, std::span<const Reconstruction> recons,
                         std::ostream& out);

}  // namespace tricon
