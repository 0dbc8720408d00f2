#include "tricon/metrics.hpp"

#include <set>
#include <unordered_set>

#include <json.hpp>

#include "tricon/error.hpp"
#include "tricon/similarity.hpp"

namespace tricon {

double ttr(std::span<const std::string> texts) {
    std::unordered_set<std::string> unique;
    std::size_t total = 0;
    for (const auto& text : texts) {
        for (auto& tok : tokenize(text)) {
            unique.insert(std::move(tok));
            ++total;
        }
    }
    if (total == 0) throw Error(Errc::EmptyCorpus, "corpus has no tokens");
    return static_cast<double>(unique.size()) / static_cast<double>(total);
}

double distinct_n(std::span<const std::string> texts, std::size_t n) {
    if (n == 0) throw Error(Errc::InvalidArgument, "n-gram order must be positive");
    std::set<std::vector<std::string>> unique;
    std::size_t total = 0;
    for (const auto& text : texts) {
        const auto toks = tokenize(text);
        for (std::size_t i = 0; i + n <= toks.size(); ++i) {
            unique.emplace(toks.begin() + static_cast<std::ptrdiff_t>(i),
                           toks.begin() + static_cast<std::ptrdiff_t>(i + n));
            ++total;
        }
    }
    if (total == 0) throw Error(Errc::NoNgrams, "no text has " + std::to_string(n) + " tokens");
    return static_cast<double>(unique.size()) / static_cast<double>(total);
}

std::map<QaType, double> type_distribution(std::span<const Triplet> triplets) {
    if (triplets.empty()) throw Error(Errc::EmptyCorpus, "no records");
    std::map<QaType, std::size_t> counts;
    for (const auto& t : triplets) ++counts[t.qa_type];
    std::map<QaType, double> out;
    for (const auto& [type, c] : counts) out[type] = static_cast<double>(c) / static_cast<double>(triplets.size());
    return out;
}

std::vector<std::string> select_texts(std::span<const Triplet> triplets, TextField field) {
    std::vector<std::string> texts;
    texts.reserve(triplets.size() * (field == TextField::Both ? 2 : 1));
    for (const auto& t : triplets) {
        if (field != TextField::Answer) texts.push_back(t.question);
        if (field != TextField::Question) texts.push_back(t.answer);
    }
    return texts;
}

DiversityReport diversity_report(std::span<const Triplet> triplets, TextField field) {
    if (triplets.empty()) throw Error(Errc::EmptyCorpus, "no records");
    const auto texts = select_texts(triplets, field);
    DiversityReport r;
    r.ttr = ttr(texts);
    r.distinct_2 = distinct_n(texts, 2);
    for (const auto& t : texts) r.token_count += tokenize(t).size();
    for (const auto& t : triplets) ++r.type_histogram[t.qa_type];
    return r;
}

std::string to_json(const DiversityReport& report) {
    nlohmann::ordered_json j;
    j["ttr"] = report.ttr;
    j["distinct_2"] = report.distinct_2;
    j["token_count"] = report.token_count;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (auto type : kAllQaTypes) {
        auto it = report.type_histogram.find(type);
        hist[std::string(to_string(type))] = it == report.type_histogram.end() ? 0 : it->second;
    }
    j["type_histogram"] = hist;
    return j.dump();
}

}  // namespace tricon
