#include "tricon/types.hpp"

#include "tricon/bbox.hpp"
#include "tricon/error.hpp"

namespace tricon {

std::string_view to_string(QaType type) noexcept {
    switch (type) {
        case QaType::VQA: return "vqa";
        case QaType::VisualChat: return "visual_chat";
        case QaType::Region: return "region";
        case QaType::Caption: return "caption";
        case QaType::Choice: return "choice";
    }
    return "vqa";
}

std::optional<QaType> parse_qa_type(std::string_view tag) noexcept {
    for (auto type : kAllQaTypes) {
        if (to_string(type) == tag) return type;
    }
    return std::nullopt;
}

std::string_view to_string(TaskKind kind) noexcept {
    switch (kind) {
        case TaskKind::I2QA: return "i2qa";
        case TaskKind::IQ2A: return "iq2a";
        case TaskKind::IA2Q: return "ia2q";
    }
    return "iq2a";
}

std::optional<TaskKind> parse_task_kind(std::string_view tag) noexcept {
    for (auto kind : {TaskKind::I2QA, TaskKind::IQ2A, TaskKind::IA2Q}) {
        if (to_string(kind) == tag) return kind;
    }
    return std::nullopt;
}

std::string_view to_string(Side side) noexcept {
    return side == Side::Question ? "question" : "answer";
}

std::string_view trim(std::string_view text) noexcept {
    constexpr std::string_view ws = " \t\n\r\f\v";
    const auto first = text.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(ws);
    return text.substr(first, last - first + 1);
}

void validate(const Triplet& t, std::size_t line) {
    if (t.id.empty()) throw Error(Errc::MalformedRecord, "empty id", line);
    if (trim(t.question).empty()) {
        throw Error(Errc::MalformedRecord, "blank question in record '" + t.id + "'", line);
    }
    if (trim(t.answer).empty()) {
        throw Error(Errc::MalformedRecord, "blank answer in record '" + t.id + "'", line);
    }
    if (t.qa_type == QaType::Region) {
        const bool q_box = try_parse_bbox(t.question).has_value();
        const bool a_box = try_parse_bbox(t.answer).has_value();
        if (q_box == a_box) {
            throw Error(Errc::MalformedRecord,
                        "region record '" + t.id + "' needs a box on exactly one side", line);
        }
    }
}

}  // namespace tricon
