#include "tricon/taskgen.hpp"

#include <charconv>
#include <cmath>
#include <random>

#include "tricon/error.hpp"
#include "tricon/hash.hpp"

namespace tricon {
namespace {

constexpr std::string_view kInstructionMarker = "Instruction:";
constexpr std::string_view kAnswerMarker = "Answer:";

std::size_t floor_count(double fraction, std::size_t n) {
    // Tolerates decimal fractions that are slightly low in binary (0.29 * 100).
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) * (1.0 + 1e-12)));
}

}  // namespace

void validate(const MaskRatios& r) {
    for (double p : {r.p_both, r.p_q, r.p_a}) {
        if (!std::isfinite(p) || p < 0.0) throw Error(Errc::InvalidRatios, "mask ratios must be non-negative");
    }
    if (std::abs(r.p_both + r.p_q + r.p_a - 1.0) > 1e-9) {
        throw Error(Errc::InvalidRatios, "mask ratios must sum to 1");
    }
}

MaskRatios parse_ratios(std::string_view text) {
    double v[3];
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
        const auto end = k < 2 ? text.find(',', pos) : text.size();
        if (end == std::string_view::npos) throw Error(Errc::InvalidRatios, "expected three comma-separated ratios");
        const auto field = trim(text.substr(pos, end - pos));
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v[k]);
        if (ec != std::errc{} || ptr != field.data() + field.size()) {
            throw Error(Errc::InvalidRatios, "bad ratio '" + std::string(field) + "'");
        }
        pos = end + 1;
    }
    MaskRatios r{v[0], v[1], v[2]};
    validate(r);
    return r;
}

std::vector<TaskKind> assign_masks(std::size_t n, const MaskRatios& ratios, std::uint64_t seed) {
    validate(ratios);
    const std::size_t n_both = floor_count(ratios.p_both, n);
    const std::size_t n_q = std::min(floor_count(ratios.p_q, n), n - n_both);
    std::vector<TaskKind> kinds;
    kinds.reserve(n);
    kinds.insert(kinds.end(), n_both, TaskKind::I2QA);
    kinds.insert(kinds.end(), n_q, TaskKind::IA2Q);
    kinds.insert(kinds.end(), n - n_both - n_q, TaskKind::IQ2A);
    // Fisher-Yates with an explicit generator so the permutation does not
    // depend on the standard library's shuffle implementation.
    std::mt19937_64 rng(splitmix64(seed));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(kinds[i - 1], kinds[j]);
    }
    return kinds;
}

TaskRecord render_record(const Triplet& t, TaskKind kind, std::uint64_t seed, const TemplateCatalog& catalog) {
    TaskRecord rec;
    rec.id = t.id;
    rec.image_ref = t.image_ref;
    rec.task_kind = kind;
    rec.system_prompt = catalog.system_prompt;
    switch (kind) {
        case TaskKind::IQ2A:
            rec.user_prompt = t.question;
            rec.target = t.answer;
            break;
        case TaskKind::I2QA:
            rec.user_prompt = catalog.i2qa_prompts[seeded_pick(t.id, seed, catalog.i2qa_prompts.size())];
            rec.target = "Instruction: " + t.question + " Answer: " + t.answer;
            break;
        case TaskKind::IA2Q:
            rec.user_prompt = catalog.ia2q_prompts[seeded_pick(t.id, seed, catalog.ia2q_prompts.size())] +
                              " Answer: " + t.answer;
            rec.target = "Instruction: " + t.question;
            break;
    }
    return rec;
}

std::vector<TaskRecord> build_task_corpus(std::span<const Triplet> seed_dataset, const MaskRatios& ratios,
                                          std::uint64_t seed, const TemplateCatalog& catalog) {
    const auto kinds = assign_masks(seed_dataset.size(), ratios, seed);
    std::vector<TaskRecord> out;
    out.reserve(seed_dataset.size());
    for (std::size_t i = 0; i < seed_dataset.size(); ++i) {
        out.push_back(render_record(seed_dataset[i], kinds[i], seed, catalog));
    }
    return out;
}

ParsedOutput parse_marked_output(std::string_view text) {
    const auto ins = text.find(kInstructionMarker);
    const auto search_from = ins == std::string_view::npos ? 0 : ins + kInstructionMarker.size();
    const auto ans = text.find(kAnswerMarker, search_from);
    if (ins == std::string_view::npos && ans == std::string_view::npos) {
        throw Error(Errc::UnparseableOutput, "output has neither an Instruction: nor an Answer: marker");
    }
    ParsedOutput out;
    if (ins != std::string_view::npos) {
        const auto end = ans == std::string_view::npos ? text.size() : ans;
        out.question = std::string(trim(text.substr(search_from, end - search_from)));
    }
    if (ans != std::string_view::npos) {
        out.answer = std::string(trim(text.substr(ans + kAnswerMarker.size())));
    }
    return out;
}

ParsedOutput invert_record(const TaskRecord& rec) {
    return parse_marked_output(rec.target);
}

}  // namespace tricon
