#include "tricon/templates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tricon/error.hpp"

namespace tricon {
namespace {

constexpr std::string_view kBuiltinCatalog =
#include "templates_resource.inc"
    ;

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
        throw Error(Errc::ConfigError, std::string("template catalog needs a non-empty '") + key + "' list");
    }
    std::vector<std::string> out;
    for (const auto& item : j.at(key)) out.push_back(item.get<std::string>());
    return out;
}

std::string collapse_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

}  // namespace

TemplateCatalog parse_catalog(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
        TemplateCatalog c;
        c.version = j.value("version", 0);
        c.system_prompt = j.at("system_prompt").get<std::string>();
        c.i2qa_prompts = string_list(j, "i2qa_prompts");
        c.ia2q_prompts = string_list(j, "ia2q_prompts");
        for (const auto& span : j.value("fixed_spans", nlohmann::json::array())) {
            FixedSpan f;
            f.text = span.at("text").get<std::string>();
            if (f.text.empty()) throw Error(Errc::ConfigError, "empty fixed span");
            if (span.contains("sides")) {
                const auto sides = span.at("sides").get<std::vector<std::string>>();
                f.on_question = std::find(sides.begin(), sides.end(), "question") != sides.end();
                f.on_answer = std::find(sides.begin(), sides.end(), "answer") != sides.end();
            }
            c.fixed_spans.push_back(std::move(f));
        }
        // Longest first so a span that contains another is removed whole.
        std::stable_sort(c.fixed_spans.begin(), c.fixed_spans.end(),
                         [](const FixedSpan& a, const FixedSpan& b) { return a.text.size() > b.text.size(); });
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, std::string("template catalog: ") + e.what());
    }
}

const TemplateCatalog& default_catalog() {
    static const TemplateCatalog catalog = parse_catalog(kBuiltinCatalog);
    return catalog;
}

TemplateCatalog load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open template catalog " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_catalog(buf.str());
}

std::string strip_template(std::string_view text, QaType /*type*/, Side side,
                           const TemplateCatalog& catalog) {
    std::string current(text);
    bool matched_any = false;
    // Removal and whitespace collapsing can splice a new occurrence
    // together, so run to a fixed point.
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& span : catalog.fixed_spans) {
            if (side == Side::Question ? !span.on_question : !span.on_answer) continue;
            for (auto pos = current.find(span.text); pos != std::string::npos;
                 pos = current.find(span.text, pos)) {
                current.replace(pos, span.text.size(), " ");
                changed = true;
            }
        }
        if (changed) {
            current = collapse_spaces(trim(current));
            matched_any = true;
        }
    }
    return matched_any ? current : std::string(text);
}

}  // namespace tricon
