#include "tricon/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "json_fields.hpp"
#include "tricon/bbox.hpp"
#include "tricon/error.hpp"
#include "tricon/hash.hpp"
#include "tricon/parallel.hpp"
#include "tricon/record_io.hpp"

namespace tricon {

using detail::ordered_json;

ReconstructionPrompts reconstruction_prompts(const Triplet& t, std::uint64_t seed, const TemplateCatalog& catalog) {
    const auto& templates = catalog.ia2q_prompts;
    const auto& chosen = templates[seeded_pick(t.id, seed, templates.size())];
    return {t.question, chosen + " Answer: " + t.answer};
}

namespace {

Similarity box_side(std::string_view original, std::string_view reconstructed, bool& failed) {
    const auto ref = try_parse_bbox(original);
    const auto got = try_parse_bbox(reconstructed);
    if (!ref || !got) {
        failed = true;
        return 0.0;
    }
    return iou(*ref, *got);
}

}  // namespace

ComponentSimilarities component_similarities(const Triplet& t, const Reconstruction& r, TextMeasures& measures,
                                             const TemplateCatalog& catalog) {
    const auto q = strip_template(t.question, t.qa_type, Side::Question, catalog);
    const auto a = strip_template(t.answer, t.qa_type, Side::Answer, catalog);
    const auto q2 = strip_template(r.q_prime, t.qa_type, Side::Question, catalog);
    const auto a2 = strip_template(r.a_prime, t.qa_type, Side::Answer, catalog);

    ComponentSimilarities out;
    switch (t.qa_type) {
        case QaType::VQA:
            out.sim_q = measures.short_text(q, q2);
            out.sim_a = measures.short_text(a, a2);
            break;
        case QaType::VisualChat:
            out.sim_q = measures.short_text(q, q2);
            out.sim_a = measures.long_text(a, a2);
            break;
        case QaType::Region: {
            bool failed = false;
            if (try_parse_bbox(q)) {
                out.sim_q = box_side(q, q2, failed);
                out.sim_a = measures.short_text(a, a2);
            } else {
                out.sim_q = measures.short_text(q, q2);
                out.sim_a = box_side(a, a2, failed);
            }
            out.box_parse_failed = failed;
            break;
        }
        case QaType::Caption:
            out.sim_a = measures.long_text(a, a2);
            break;
        case QaType::Choice:
            out.sim_a = exact_match(a, a2);
            break;
    }
    if (r.q_failed && out.sim_q) out.sim_q = 0.0;
    if (r.a_failed && out.sim_a) out.sim_a = 0.0;
    return out;
}

double consistency_score(std::optional<Similarity> sim_q, std::optional<Similarity> sim_a) {
    if (sim_q && sim_a) return std::sqrt(*sim_q * *sim_a);
    if (sim_q) return *sim_q;
    if (sim_a) return *sim_a;
    throw Error(Errc::NoComponents, "consistency score needs at least one component");
}

ScoredTriplet score_triplet(const Triplet& t, const Reconstruction& r, TextMeasures& measures,
                            const TemplateCatalog& catalog) {
    const auto sims = component_similarities(t, r, measures, catalog);
    ScoredTriplet s;
    s.triplet = t;
    s.reconstruction = r;
    s.sim_q = sims.sim_q;
    s.sim_a = sims.sim_a;
    s.score = consistency_score(sims.sim_q, sims.sim_a);
    s.flagged = sims.box_parse_failed || r.failed();
    return s;
}

std::vector<ScoredTriplet> score_all(std::span<const Triplet> triplets, std::span<const Reconstruction> recons,
                                     TextMeasures& measures, std::size_t workers, const TemplateCatalog& catalog) {
    if (triplets.size() != recons.size()) {
        throw Error(Errc::InvalidArgument, "triplet and reconstruction counts differ");
    }
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        if (!recons[i].triplet_id.empty() && recons[i].triplet_id != triplets[i].id) {
            throw Error(Errc::InvalidArgument, "reconstruction " + std::to_string(i) + " belongs to '" +
                                                   recons[i].triplet_id + "', expected '" + triplets[i].id + "'");
        }
    }
    std::vector<ScoredTriplet> out(triplets.size());
    parallel_for(triplets.size(), workers,
                 [&](std::size_t i) { out[i] = score_triplet(triplets[i], recons[i], measures, catalog); });
    return out;
}

std::size_t top_count(double fraction, std::size_t n) noexcept {
    const double exact = fraction * static_cast<double>(n);
    const auto k = static_cast<std::size_t>(std::ceil(exact * (1.0 - 1e-12)));
    return std::min(k, n);
}

void canonical_sort(std::vector<ScoredTriplet>& scored, std::vector<std::size_t>& positions) {
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ta = scored[a].triplet.qa_type, tb = scored[b].triplet.qa_type;
        if (ta != tb) return ta < tb;
        if (scored[a].score != scored[b].score) return scored[a].score > scored[b].score;
        return positions[a] < positions[b];
    });
    std::vector<ScoredTriplet> sorted;
    std::vector<std::size_t> sorted_pos;
    sorted.reserve(scored.size());
    sorted_pos.reserve(scored.size());
    for (auto i : order) {
        sorted.push_back(std::move(scored[i]));
        sorted_pos.push_back(positions[i]);
    }
    scored = std::move(sorted);
    positions = std::move(sorted_pos);
}

FilterResult partition_by(std::span<const ScoredTriplet> scored, const std::vector<bool>& keep) {
    std::vector<ScoredTriplet> retained, excluded;
    std::vector<std::size_t> rpos, epos;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (keep[i]) {
            retained.push_back(scored[i]);
            rpos.push_back(i);
        } else {
            excluded.push_back(scored[i]);
            epos.push_back(i);
        }
    }
    canonical_sort(retained, rpos);
    canonical_sort(excluded, epos);
    return {std::move(retained), std::move(excluded)};
}

FilterResult filter_top(std::span<const ScoredTriplet> scored, double fraction, bool per_type) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw Error(Errc::InvalidArgument, "filter fraction must lie in (0, 1]");
    }
    std::vector<std::vector<std::size_t>> pools(per_type ? kAllQaTypes.size() : 1);
    for (std::size_t i = 0; i < scored.size(); ++i) {
        pools[per_type ? static_cast<std::size_t>(scored[i].triplet.qa_type) : 0].push_back(i);
    }
    std::vector<bool> keep(scored.size(), false);
    for (auto& pool : pools) {
        std::stable_sort(pool.begin(), pool.end(),
                         [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });
        const auto k = top_count(fraction, pool.size());
        for (std::size_t j = 0; j < k; ++j) keep[pool[j]] = true;
    }
    return partition_by(scored, keep);
}

FilterResult filter_exact(std::span<const ScoredTriplet> scored, const TemplateCatalog& catalog) {
    std::vector<bool> keep(scored.size(), false);
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const auto& s = scored[i];
        if (s.reconstruction.failed()) continue;
        const auto type = s.triplet.qa_type;
        // Only the compared sides must reproduce; Caption and Choice ignore the question.
        const bool q_same = !s.sim_q.has_value() || exact_match(strip_template(s.triplet.question, type, Side::Question, catalog),
                                        strip_template(s.reconstruction.q_prime, type, Side::Question, catalog)) == 1.0;
        const bool a_same = exact_match(strip_template(s.triplet.answer, type, Side::Answer, catalog),
                                        strip_template(s.reconstruction.a_prime, type, Side::Answer, catalog)) == 1.0;
        keep[i] = q_same && a_same;
    }
    return partition_by(scored, keep);
}

namespace {

ordered_json optional_number(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& obj, const char* key, std::size_t line) {
    const auto& v = detail::require(obj, key, line);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) throw Error(Errc::MalformedRecord, std::string("key '") + key + "' must be a number or null", line);
    const double d = v.get<double>();
    if (!(d >= 0.0 && d <= 1.0)) throw Error(Errc::MalformedRecord, std::string("key '") + key + "' outside [0,1]", line);
    return d;
}

// Reads q_prime/a_prime; null marks a failed side.
Reconstruction reconstruction_from_json(const nlohmann::json& obj, const std::string& id, std::size_t line) {
    Reconstruction r;
    r.triplet_id = id;
    const auto& q = detail::require(obj, "q_prime", line);
    const auto& a = detail::require(obj, "a_prime", line);
    if (q.is_null()) r.q_failed = true;
    else if (q.is_string()) r.q_prime = q.get<std::string>();
    else throw Error(Errc::MalformedRecord, "q_prime must be a string or null", line);
    if (a.is_null()) r.a_failed = true;
    else if (a.is_string()) r.a_prime = a.get<std::string>();
    else throw Error(Errc::MalformedRecord, "a_prime must be a string or null", line);
    return r;
}

ordered_json reconstructed_json(const Triplet& t, const Reconstruction& r) {
    auto j = detail::triplet_to_json(t);
    j["q_prime"] = r.q_failed ? ordered_json(nullptr) : ordered_json(r.q_prime);
    j["a_prime"] = r.a_failed ? ordered_json(nullptr) : ordered_json(r.a_prime);
    return j;
}

}  // namespace

void write_scored(std::span<const ScoredTriplet> records, std::ostream& out) {
    for (const auto& s : records) {
        auto j = reconstructed_json(s.triplet, s.reconstruction);
        j["sim_q"] = optional_number(s.sim_q);
        j["sim_a"] = optional_number(s.sim_a);
        j["score"] = s.score;
        out << detail::dump_line(j) << '\n';
    }
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "write failure");
}

void write_scored(std::span<const ScoredTriplet> records, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_scored(records, out);
}

std::vector<ScoredTriplet> read_scored(std::istream& in) {
    std::vector<ScoredTriplet> out;
    std::unordered_set<std::string> seen;
    detail::for_each_json_line(in, [&](const nlohmann::json& j, std::size_t line) {
        ScoredTriplet s;
        s.triplet = detail::triplet_from_json(j, line);
        if (!seen.insert(s.triplet.id).second) {
            throw Error(Errc::DuplicateId, "duplicate id '" + s.triplet.id + "'", line);
        }
        s.reconstruction = reconstruction_from_json(j, s.triplet.id, line);
        s.sim_q = read_optional_number(j, "sim_q", line);
        s.sim_a = read_optional_number(j, "sim_a", line);
        const auto& score = detail::require(j, "score", line);
        if (!score.is_number()) throw Error(Errc::MalformedRecord, "score must be a number", line);
        s.score = score.get<double>();
        s.flagged = s.reconstruction.failed();
        out.push_back(std::move(s));
    });
    return out;
}

std::vector<ScoredTriplet> read_scored(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_scored(in);
}

ReconstructedSet read_reconstructed(std::istream& in) {
    ReconstructedSet set;
    std::unordered_set<std::string> seen;
    detail::for_each_json_line(in, [&](const nlohmann::json& j, std::size_t line) {
        auto t = detail::triplet_from_json(j, line);
        if (!seen.insert(t.id).second) throw Error(Errc::DuplicateId, "duplicate id '" + t.id + "'", line);
        set.reconstructions.push_back(reconstruction_from_json(j, t.id, line));
        set.triplets.push_back(std::move(t));
    });
    return set;
}

ReconstructedSet read_reconstructed(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_reconstructed(in);
}

void write_reconstructed(std::span<const Triplet> triplets, std::span<const Reconstruction> recons,
                         std::ostream& out) {
    if (triplets.size() != recons.size()) throw Error(Errc::InvalidArgument, "triplet and reconstruction counts differ");
    for (std::size_t i = 0; i < triplets.size(); ++i) out << detail::dump_line(reconstructed_json(triplets[i], recons[i])) << '\n';
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "write failure");
}

}  // namespace tricon
