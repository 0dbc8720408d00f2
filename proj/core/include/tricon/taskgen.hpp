#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tricon/templates.hpp"
#include "tricon/types.hpp"

namespace tricon {

/// Fractions of the corpus rendered as each task: question and answer both
/// masked (I2QA), only the question (IA2Q), only the answer (IQ2A).
struct MaskRatios {
    double p_both = 0.5;
    double p_q = 0.2;
    double p_a = 0.3;
};

/// Throws Error{InvalidRatios} unless every entry is >= 0 and they sum to 1
/// within 1e-9.
void validate(const MaskRatios& ratios);

/// Parses "0.5,0.2,0.3". Throws Error{InvalidRatios}.
MaskRatios parse_ratios(std::string_view text);

/// Exactly floor(p_both*n) I2QA and floor(p_q*n) IA2Q; IQ2A takes the
/// remainder. The assignment is a seeded shuffle of that multiset.
std::vector<TaskKind> assign_masks(std::size_t n, const MaskRatios& ratios, std::uint64_t seed);

TaskRecord render_record(const Triplet& t, TaskKind kind, std::uint64_t seed,
                         const TemplateCatalog& catalog = default_catalog());

/// assign_masks + render_record over a whole seed corpus, in input order.
std::vector<TaskRecord> build_task_corpus(std::span<const Triplet> seed_dataset, const MaskRatios& ratios,
                                          std::uint64_t seed, const TemplateCatalog& catalog = default_catalog());

struct ParsedOutput {
    std::optional<std::string> question;
    std::optional<std::string> answer;
};

/// Splits "Instruction: <Q> Answer: <A>" style text. Throws
/// Error{UnparseableOutput} when neither marker is present.
ParsedOutput parse_marked_output(std::string_view text);

/// Parses a record's target in the marker format.
ParsedOutput invert_record(const TaskRecord& rec);

}  // namespace tricon
