#include "tricon/refine.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "tricon/bbox.hpp"
#include "tricon/error.hpp"
#include "tricon/hash.hpp"
#include "tricon/parallel.hpp"
#include "tricon/record_io.hpp"
#include "tricon/taskgen.hpp"

namespace tricon {

void validate(const LoopConfig& c) {
    if (c.rounds < 1) throw Error(Errc::ConfigError, "rounds must be >= 1");
    if (!(c.filter_fraction > 0.0 && c.filter_fraction <= 1.0)) {
        throw Error(Errc::ConfigError, "filter fraction must lie in (0, 1]");
    }
    if (c.workers < 1) throw Error(Errc::ConfigError, "workers must be >= 1");
    if (c.unlabeled_manifests.empty()) throw Error(Errc::ConfigError, "no unlabeled manifest given");
    if (c.unlabeled_manifests.size() != 1 && c.unlabeled_manifests.size() != c.rounds) {
        throw Error(Errc::ConfigError, "give one manifest, or one manifest per round");
    }
}

std::string to_json(const RoundReport& r) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["images"] = r.images;
    j["generated"] = r.generated;
    j["generation_failures"] = r.generation_failures;
    j["heuristic_typed"] = r.heuristic_typed;
    j["reconstruction_failures"] = r.reconstruction_failures;
    j["box_parse_failures"] = r.box_parse_failures;
    j["retained"] = r.retained;
    nlohmann::ordered_json per_type = nlohmann::ordered_json::object();
    for (auto type : kAllQaTypes) {
        auto it = r.retained_per_type.find(type);
        per_type[std::string(to_string(type))] = it == r.retained_per_type.end() ? 0 : it->second;
    }
    j["retained_per_type"] = per_type;
    if (r.scores) {
        j["score_min"] = r.scores->min;
        j["score_median"] = r.scores->median;
        j["score_max"] = r.scores->max;
    } else {
        j["score_min"] = nullptr;
        j["score_median"] = nullptr;
        j["score_max"] = nullptr;
    }
    j["merged"] = r.merged;
    return j.dump();
}

QaType infer_qa_type(std::string_view question, std::string_view answer) {
    const bool q_box = try_parse_bbox(question).has_value();
    const bool a_box = try_parse_bbox(answer).has_value();
    if (q_box != a_box) return QaType::Region;
    const auto a = normalize_for_match(answer);
    if (a == "yes" || a == "no" || a == "true" || a == "false") return QaType::Choice;
    if (a.size() == 1 && a[0] >= 'a' && a[0] <= 'f') return QaType::Choice;
    if (question.find("caption") != std::string_view::npos) return QaType::Caption;
    if (tokenize(answer).size() > kLongTextTokens) return QaType::VisualChat;
    return QaType::VQA;
}

GenerationResult generate_synthetic(ModelInterface& model, std::span<const std::string> image_refs,
                                    std::uint64_t seed, std::size_t round, std::size_t workers,
                                    const TemplateCatalog& catalog) {
    struct Slot {
        std::optional<Triplet> triplet;
        bool heuristic = false;
    };
    std::vector<Slot> slots(image_refs.size());
    parallel_for(image_refs.size(), workers, [&](std::size_t i) {
        const auto& image = image_refs[i];
        const auto& prompts = catalog.i2qa_prompts;
        const auto& prompt = prompts[seeded_pick(image, seed, prompts.size())];
        try {
            const auto out = model.generate(image, prompt);
            const auto parsed = parse_marked_output(out.text);
            if (!parsed.question || !parsed.answer) return;
            Triplet t;
            t.id = "r" + std::to_string(round) + "-" + std::to_string(i);
            t.image_ref = image;
            t.question = *parsed.question;
            t.answer = *parsed.answer;
            if (out.declared_type) {
                t.qa_type = *out.declared_type;
            } else {
                t.qa_type = infer_qa_type(t.question, t.answer);
                slots[i].heuristic = true;
            }
            validate(t);
            slots[i].triplet = std::move(t);
        } catch (const Error& e) {
            if (e.code() != Errc::ModelError && e.code() != Errc::UnparseableOutput &&
                e.code() != Errc::MalformedRecord) {
                throw;
            }
        }
    });
    GenerationResult result;
    for (auto& slot : slots) {
        if (!slot.triplet) {
            ++result.failures;
            continue;
        }
        if (slot.heuristic) ++result.heuristic_typed;
        result.triplets.push_back(std::move(*slot.triplet));
    }
    return result;
}

std::vector<Reconstruction> reconstruct(ModelInterface& model, std::span<const Triplet> triplets,
                                        std::uint64_t seed, std::size_t workers, const TemplateCatalog& catalog) {
    std::vector<Reconstruction> out(triplets.size());
    parallel_for(triplets.size(), workers, [&](std::size_t i) {
        const auto& t = triplets[i];
        const auto prompts = reconstruction_prompts(t, seed, catalog);
        auto& r = out[i];
        r.triplet_id = t.id;
        try {
            r.a_prime = std::string(trim(model.answer(t.image_ref, prompts.for_a_prime)));
        } catch (const Error& e) {
            if (e.code() != Errc::ModelError) throw;
            r.a_failed = true;
        }
        try {
            const auto raw = model.question(t.image_ref, prompts.for_q_prime);
            r.q_prime = std::string(trim(raw));
            if (raw.find("Instruction:") != std::string::npos) {
                if (auto q = parse_marked_output(raw).question) r.q_prime = *q;
            }
        } catch (const Error& e) {
            if (e.code() != Errc::ModelError) throw;
            r.q_failed = true;
        }
    });
    return out;
}

namespace {

ScoreSummary summarize(std::vector<double> scores) {
    std::sort(scores.begin(), scores.end());
    const auto n = scores.size();
    ScoreSummary s;
    s.min = scores.front();
    s.max = scores.back();
    s.median = n % 2 == 1 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
    return s;
}

}  // namespace

RoundResult run_round(ModelInterface& model, std::span<const Triplet> base_dataset,
                      std::span<const std::string> image_refs, const LoopConfig& config, std::size_t round,
                      TextMeasures& measures, const TemplateCatalog& catalog) {
    RoundResult result;
    auto& report = result.report;
    report.round = round;
    report.images = image_refs.size();

    auto gen = generate_synthetic(model, image_refs, config.seed, round, config.workers, catalog);
    report.generated = gen.triplets.size();
    report.generation_failures = gen.failures;
    report.heuristic_typed = gen.heuristic_typed;
    result.synthetic = std::move(gen.triplets);

    const auto recons = reconstruct(model, result.synthetic, config.seed, config.workers, catalog);
    result.scored = score_all(result.synthetic, recons, measures, config.workers, catalog);

    std::vector<ScoredTriplet> eligible;
    std::vector<std::size_t> eligible_pos;
    for (std::size_t i = 0; i < result.scored.size(); ++i) {
        const auto& s = result.scored[i];
        if (s.reconstruction.failed()) {
            ++report.reconstruction_failures;
            continue;
        }
        eligible.push_back(s);
        eligible_pos.push_back(i);
    }
    for (const auto& s : result.scored) {
        if (s.flagged && !s.reconstruction.failed()) ++report.box_parse_failures;
    }

    const auto picked = config.exact ? filter_exact(eligible, catalog)
                                     : filter_top(eligible, config.filter_fraction, config.per_type);
    std::unordered_set<std::string> kept_ids;
    for (const auto& s : picked.retained) kept_ids.insert(s.triplet.id);
    std::vector<bool> keep(result.scored.size(), false);
    for (std::size_t i = 0; i < result.scored.size(); ++i) keep[i] = kept_ids.count(result.scored[i].triplet.id) > 0;
    result.filter = partition_by(result.scored, keep);

    std::unordered_set<std::string> ids;
    result.merged.assign(base_dataset.begin(), base_dataset.end());
    for (const auto& t : result.merged) ids.insert(t.id);
    for (const auto& s : result.filter.retained) {
        if (!ids.insert(s.triplet.id).second) {
            throw Error(Errc::DuplicateId, "synthetic id '" + s.triplet.id + "' collides with the base dataset");
        }
        result.merged.push_back(s.triplet);
        ++report.retained_per_type[s.triplet.qa_type];
    }
    report.retained = result.filter.retained.size();
    report.merged = result.merged.size();

    if (!result.scored.empty()) {
        std::vector<double> scores;
        scores.reserve(result.scored.size());
        for (const auto& s : result.scored) scores.push_back(s.score);
        report.scores = summarize(std::move(scores));
    }
    return result;
}

std::vector<std::vector<std::string>> manifest_partitions(const LoopConfig& config) {
    validate(config);
    std::vector<std::vector<std::string>> parts;
    if (config.unlabeled_manifests.size() == config.rounds) {
        for (const auto& path : config.unlabeled_manifests) parts.push_back(read_lines(path));
        return parts;
    }
    const auto all = read_lines(config.unlabeled_manifests.front());
    const std::size_t k = config.rounds;
    std::size_t start = 0;
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t size = all.size() / k + (r < all.size() % k ? 1 : 0);
        parts.emplace_back(all.begin() + static_cast<std::ptrdiff_t>(start),
                           all.begin() + static_cast<std::ptrdiff_t>(start + size));
        start += size;
    }
    return parts;
}

namespace {

void write_round_files(const std::filesystem::path& dir, const RoundResult& r) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    write_triplets(r.synthetic, dir / "synthetic.jsonl");
    write_scored(r.scored, dir / "scored.jsonl");
    std::vector<Triplet> filtered;
    filtered.reserve(r.filter.retained.size());
    for (const auto& s : r.filter.retained) filtered.push_back(s.triplet);
    write_triplets(filtered, dir / "filtered.jsonl");
    write_triplets(r.merged, dir / "merged.jsonl");
    auto out = open_output(dir / "report.json");
    out << to_json(r.report) << '\n';
    if (!out) throw Error(Errc::IoFailure, "write failure on report.json");
}

}  // namespace

std::vector<RoundReport> iterate(const ModelFactory& factory, const LoopConfig& config, TextMeasures& measures,
                                 const TemplateCatalog& catalog) {
    const auto partitions = manifest_partitions(config);
    std::vector<Triplet> base;
    try {
        base = read_triplets(config.seed_dataset);
    } catch (const Error& e) {
        throw Error(Errc::SeedDatasetError, e.what());
    }
    std::vector<RoundReport> reports;
    for (std::size_t k = 1; k <= config.rounds; ++k) {
        auto model = factory(k);
        if (!model) throw Error(Errc::ConfigError, "model factory returned no model for round " + std::to_string(k));
        auto result = run_round(*model, base, partitions[k - 1], config, k, measures, catalog);
        if (!config.out_dir.empty()) {
            write_round_files(config.out_dir / ("round-" + std::to_string(k)), result);
        }
        reports.push_back(result.report);
        base = std::move(result.merged);
    }
    return reports;
}

}  // namespace tricon
