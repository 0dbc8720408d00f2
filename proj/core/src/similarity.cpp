#include "tricon/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tricon/error.hpp"

namespace tricon {
namespace {

// Decodes one UTF-8 sequence at `i`; invalid bytes decode to 0xFFFFFFFF
// and advance by one.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    constexpr char32_t kInvalid = 0xFFFFFFFF;
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) extra = 1, cp = b0 & 0x1F;
    else if ((b0 & 0xF0) == 0xE0) extra = 2, cp = b0 & 0x0F;
    else if ((b0 & 0xF8) == 0xF0) extra = 3, cp = b0 & 0x07;
    else {
        ++i;
        return kInvalid;
    }
    if (i + extra >= s.size()) {
        ++i;
        return kInvalid;
    }
    for (int k = 1; k <= extra; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += extra + 1;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t to_lower(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 32;
    if (c < 0x80) return c;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
    if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return (c % 2 == 0) ? c + 1 : c;
    if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
    if (c >= 0x410 && c <= 0x42F) return c + 32;
    if (c >= 0x400 && c <= 0x40F) return c + 80;
    return c;
}

bool is_separator(char32_t c) {
    if (c == 0xFFFFFFFF) return true;
    if (c < 0x80) {
        return c <= 0x20 || c == 0x7F || (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
               (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
    }
    if (c == 0x85 || c == 0xA0 || c == 0xD7 || c == 0xF7) return true;
    if (c >= 0xA1 && c <= 0xBF) {
        // Latin-1 punctuation and symbols; keep the letter-like and digit-like ones.
        return !(c == 0xAA || c == 0xB2 || c == 0xB3 || c == 0xB5 || c == 0xB9 || c == 0xBA ||
                 (c >= 0xBC && c <= 0xBE));
    }
    if (c == 0x1680 || (c >= 0x2000 && c <= 0x206F)) return true;  // spaces + general punctuation
    if (c >= 0x3000 && c <= 0x303F) return true;                   // CJK symbols and punctuation
    if ((c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
        (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65)) {
        return true;
    }
    return c == 0xFEFF;
}

std::string lower_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const std::size_t start = i;
        const char32_t c = decode_utf8(s, i);
        if (c == 0xFFFFFFFF) out.append(s.substr(start, i - start));
        else encode_utf8(to_lower(c), out);
    }
    return out;
}

double tf_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string_view, std::pair<double, double>> counts;
    for (const auto& t : a) counts[t].first += 1.0;
    for (const auto& t : b) counts[t].second += 1.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [_, c] : counts) {
        dot += c.first * c.second;
        na += c.first * c.first;
        nb += c.second * c.second;
    }
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

double f1(double precision, double recall) {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (std::size_t i = 0; i < text.size();) {
        const char32_t c = decode_utf8(text, i);
        if (is_separator(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            encode_utf8(to_lower(c), current);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Similarity lexical_similarity(std::string_view a, std::string_view b) {
    const auto ta = tokenize(a);
    const auto tb = tokenize(b);
    if (ta.empty() && tb.empty()) return 1.0;
    if (ta.empty() || tb.empty()) return 0.0;
    return tf_cosine(ta, tb);
}

std::string normalize_for_match(std::string_view text) {
    const std::string lowered = lower_utf8(trim(text));
    std::string out;
    out.reserve(lowered.size());
    bool space = false;
    for (char c : lowered) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    while (!out.empty() && out.back() == '.') out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

Similarity exact_match(std::string_view a, std::string_view b) {
    return normalize_for_match(a) == normalize_for_match(b) ? 1.0 : 0.0;
}

Similarity iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return a == b ? 1.0 : 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double cosine(std::span<const double> a, std::span<const double> b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

Similarity embedding_similarity(std::string_view a, std::string_view b, EmbeddingProvider& provider) {
    const auto va = provider.sentence_vector(a);
    const auto vb = provider.sentence_vector(b);
    if (va.size() != vb.size()) throw Error(Errc::ProviderUnavailable, "provider returned mismatched dimensions");
    return std::clamp(cosine(va, vb), 0.0, 1.0);
}

Similarity greedy_match_f1(std::span<const Vector> cand, std::span<const Vector> ref) {
    if (cand.empty() || ref.empty()) throw Error(Errc::EmptyText, "greedy matching needs at least one token per side");
    std::vector<double> best_for_cand(cand.size(), 0.0);
    std::vector<double> best_for_ref(ref.size(), 0.0);
    for (std::size_t i = 0; i < cand.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            const double s = std::clamp(cosine(cand[i], ref[j]), 0.0, 1.0);
            best_for_cand[i] = std::max(best_for_cand[i], s);
            best_for_ref[j] = std::max(best_for_ref[j], s);
        }
    }
    double precision = 0.0, recall = 0.0;
    for (double v : best_for_cand) precision += v;
    for (double v : best_for_ref) recall += v;
    precision /= static_cast<double>(cand.size());
    recall /= static_cast<double>(ref.size());
    return f1(precision, recall);
}

Similarity greedy_match_f1_tokens(std::span<const std::string> cand, std::span<const std::string> ref) {
    if (cand.empty() || ref.empty()) throw Error(Errc::EmptyText, "greedy matching needs at least one token per side");
    auto hit_rate = [](std::span<const std::string> from, std::span<const std::string> in) {
        std::size_t hits = 0;
        for (const auto& t : from) {
            if (std::find(in.begin(), in.end(), t) != in.end()) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(from.size());
    };
    return f1(hit_rate(cand, ref), hit_rate(ref, cand));
}

Similarity greedy_match_f1(std::string_view cand, std::string_view ref, EmbeddingProvider& provider) {
    const auto vc = provider.token_vectors(cand);
    const auto vr = provider.token_vectors(ref);
    return greedy_match_f1(vc, vr);
}

Similarity TextMeasures::short_text(std::string_view a, std::string_view b) {
    const bool ea = trim(a).empty(), eb = trim(b).empty();
    if (ea || eb) return ea && eb ? 1.0 : 0.0;
    return short_impl(a, b);
}

Similarity TextMeasures::long_text(std::string_view a, std::string_view b) {
    const bool ea = trim(a).empty(), eb = trim(b).empty();
    if (ea || eb) return ea && eb ? 1.0 : 0.0;
    return long_impl(a, b);
}

Similarity LexicalMeasures::short_impl(std::string_view a, std::string_view b) {
    return lexical_similarity(a, b);
}

Similarity LexicalMeasures::long_impl(std::string_view a, std::string_view b) {
    const auto ta = tokenize(a);
    const auto tb = tokenize(b);
    if (ta.empty() || tb.empty()) return ta.empty() && tb.empty() ? 1.0 : 0.0;
    return greedy_match_f1_tokens(ta, tb);
}

Similarity EmbeddingMeasures::short_impl(std::string_view a, std::string_view b) {
    if (provider_.thread_safe()) return embedding_similarity(a, b, provider_);
    std::lock_guard lock(mutex_);
    return embedding_similarity(a, b, provider_);
}

Similarity EmbeddingMeasures::long_impl(std::string_view a, std::string_view b) {
    auto run = [&] {
        const auto va = provider_.token_vectors(a);
        const auto vb = provider_.token_vectors(b);
        if (va.empty() || vb.empty()) return va.empty() && vb.empty() ? 1.0 : 0.0;
        return greedy_match_f1(va, vb);
    };
    if (provider_.thread_safe()) return run();
    std::lock_guard lock(mutex_);
    return run();
}

}  // namespace tricon
