#include "tricon/bbox.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "tricon/error.hpp"

namespace tricon {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void skip_space(std::string_view s, std::size_t& i) {
    while (i < s.size() && is_space(s[i])) ++i;
}

// Decimal without exponent: [+-]? (digits [. digits?] | . digits)
std::optional<double> read_decimal(std::string_view s, std::size_t& i) {
    const std::size_t start = i;
    bool negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        negative = s[i] == '-';
        ++i;
    }
    const std::size_t body = i;
    std::size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    }
    if (digits == 0) {
        i = start;
        return std::nullopt;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data() + body, s.data() + i, value);
    if (ec != std::errc{} || ptr != s.data() + i) {
        i = start;
        return std::nullopt;
    }
    return negative ? -value : value;
}

std::optional<std::array<double, 4>> read_quadruple(std::string_view s, std::size_t open) {
    std::size_t i = open + 1;
    std::array<double, 4> v{};
    for (std::size_t k = 0; k < 4; ++k) {
        skip_space(s, i);
        auto d = read_decimal(s, i);
        if (!d) return std::nullopt;
        v[k] = *d;
        skip_space(s, i);
        const char expected = k == 3 ? ']' : ',';
        if (i >= s.size() || s[i] != expected) return std::nullopt;
        ++i;
    }
    return v;
}

std::vector<std::array<double, 4>> find_quadruples(std::string_view text) {
    std::vector<std::array<double, 4>> found;
    for (std::size_t pos = text.find('['); pos != std::string_view::npos;
         pos = text.find('[', pos + 1)) {
        if (auto q = read_quadruple(text, pos)) found.push_back(*q);
    }
    return found;
}

}  // namespace

bool is_valid(const BoundingBox& b) noexcept {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    return unit(b.x1) && unit(b.y1) && unit(b.x2) && unit(b.y2) && b.x1 <= b.x2 && b.y1 <= b.y2;
}

BoundingBox parse_bbox(std::string_view text) {
    const auto found = find_quadruples(text);
    if (found.empty()) throw Error(Errc::NoBox, "no bracketed coordinate quadruple");
    if (found.size() > 1) throw Error(Errc::InvalidBox, "more than one coordinate quadruple");
    const auto& v = found.front();
    BoundingBox box{v[0], v[1], v[2], v[3]};
    if (!is_valid(box)) {
        throw Error(Errc::InvalidBox, "box must satisfy 0 <= x1 <= x2 <= 1 and 0 <= y1 <= y2 <= 1");
    }
    return box;
}

std::optional<BoundingBox> try_parse_bbox(std::string_view text) noexcept {
    try {
        return parse_bbox(text);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::string format_bbox(const BoundingBox& box) {
    std::string out = "[";
    const std::array<double, 4> v{box.x1, box.y1, box.x2, box.y2};
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        char buf[400];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v[k], std::chars_format::fixed);
        (void)ec;
        out.append(buf, ptr);
    }
    out += ']';
    return out;
}

}  // namespace tricon
