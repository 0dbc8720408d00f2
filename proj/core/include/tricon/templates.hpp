#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tricon/types.hpp"

namespace tricon {

struct FixedSpan {
    std::string text;
    bool on_question = true;
    bool on_answer = true;
};

/// Prompt templates for the multi-task records plus the fixed instruction
/// spans that are excluded from similarity computation.
struct TemplateCatalog {
    int version = 0;
    std::string system_prompt;
    std::vector<std::string> i2qa_prompts;
    std::vector<std::string> ia2q_prompts;
    std::vector<FixedSpan> fixed_spans;
};

/// Catalog compiled in from resources/templates.json.
const TemplateCatalog& default_catalog();

/// Reads a catalog with the same schema as resources/templates.json.
/// Throws Error{IoFailure} or Error{ConfigError}.
TemplateCatalog load_catalog(const std::filesystem::path& path);
TemplateCatalog parse_catalog(std::string_view json_text);

/// Removes every exact occurrence of the catalog's fixed spans that apply to
/// `side`, collapses the whitespace left behind and trims. Idempotent.
std::string strip_template(std::string_view text, QaType type, Side side,
                           const TemplateCatalog& catalog = default_catalog());

}  // namespace tricon
