#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tricon/consistency.hpp"
#include "tricon/model.hpp"
#include "tricon/similarity.hpp"
#include "tricon/types.hpp"

namespace tricon {

struct LoopConfig {
    std::size_t rounds = 1;
    double filter_fraction = 0.2;
    bool per_type = true;
    /// Keep only exact reconstructions instead of the top fraction.
    bool exact = false;
    std::uint64_t seed = 42;
    /// One manifest per round, or a single manifest split evenly into
    /// `rounds` contiguous partitions.
    std::vector<std::filesystem::path> unlabeled_manifests;
    std::filesystem::path seed_dataset;
    /// Bound on in-flight model requests and scoring threads.
    std::size_t workers = 8;
    /// When set, each round writes round-<k>/{synthetic,scored,filtered,merged}.jsonl
    /// and report.json here.
    std::filesystem::path out_dir;
};

/// Throws Error{ConfigError}.
void validate(const LoopConfig& config);

struct ScoreSummary {
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};

struct RoundReport {
    std::size_t round = 0;
    std::size_t images = 0;
    std::size_t generated = 0;
    std::size_t generation_failures = 0;
    std::size_t heuristic_typed = 0;
    std::size_t reconstruction_failures = 0;
    std::size_t box_parse_failures = 0;
    std::size_t retained = 0;
    std::map<QaType, std::size_t> retained_per_type;
    std::optional<ScoreSummary> scores;
    std::size_t merged = 0;
};

std::string to_json(const RoundReport& report);

/// Category guess for generated pairs without a declared type: a box on one
/// side -> Region; yes/no/true/false or a lone option letter -> Choice; a
/// caption instruction -> Caption; an answer longer than kLongTextTokens ->
/// VisualChat; otherwise VQA.
QaType infer_qa_type(std::string_view question, std::string_view answer);

struct GenerationResult {
    std::vector<Triplet> triplets;
    std::size_t failures = 0;
    std::size_t heuristic_typed = 0;
};

/// One triplet per image (ids "r<round>-<index>"). Images whose generation
/// fails or does not parse into a valid triplet are skipped and counted.
GenerationResult generate_synthetic(ModelInterface& model, std::span<const std::string> image_refs,
                                    std::uint64_t seed, std::size_t round = 1, std::size_t workers = 1,
                                    const TemplateCatalog& catalog = default_catalog());

/// a_prime = model.answer(image, Q); q_prime = model.question(image,
/// "<template> Answer: A"), unwrapped from "Instruction:" when present.
/// ModelError marks that side failed; the run continues.
std::vector<Reconstruction> reconstruct(ModelInterface& model, std::span<const Triplet> triplets,
                                        std::uint64_t seed, std::size_t workers = 1,
                                        const TemplateCatalog& catalog = default_catalog());

struct RoundResult {
    std::vector<Triplet> synthetic;
    std::vector<ScoredTriplet> scored;  ///< input order
    FilterResult filter;                ///< canonical order
    std::vector<Triplet> merged;        ///< base dataset, then retained records
    RoundReport report;
};

/// generate -> reconstruct -> score -> filter -> merge. Records with a failed
/// reconstruction are scored (and reported) but never retained.
/// Throws Error{DuplicateId} when a retained id collides with the base set.
RoundResult run_round(ModelInterface& model, std::span<const Triplet> base_dataset,
                      std::span<const std::string> image_refs, const LoopConfig& config, std::size_t round,
                      TextMeasures& measures, const TemplateCatalog& catalog = default_catalog());

/// Image refs for each round, per LoopConfig::unlabeled_manifests.
std::vector<std::vector<std::string>> manifest_partitions(const LoopConfig& config);

using ModelFactory = std::function<std::unique_ptr<ModelInterface>(std::size_t round)>;

/// Runs config.rounds rounds; round k merges into round k-1's merged set
/// (the seed dataset for k = 1). Throws Error{SeedDatasetError} when the
/// seed dataset cannot be read.
std::vector<RoundReport> iterate(const ModelFactory& factory, const LoopConfig& config, TextMeasures& measures,
                                 const TemplateCatalog& catalog = default_catalog());

}  // namespace tricon
