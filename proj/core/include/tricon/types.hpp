#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace tricon {

/// Question-answer category. Region covers both referring-expression
/// directions (description -> box, box -> description); Choice covers
/// multiple-choice and true/false.
enum class QaType { VQA, VisualChat, Region, Caption, Choice };

inline constexpr std::array<QaType, 5> kAllQaTypes{
    QaType::VQA, QaType::VisualChat, QaType::Region, QaType::Caption, QaType::Choice};

/// Wire tag ("vqa", "visual_chat", ...).
std::string_view to_string(QaType type) noexcept;
std::optional<QaType> parse_qa_type(std::string_view tag) noexcept;

enum class TaskKind { I2QA, IQ2A, IA2Q };

std::string_view to_string(TaskKind kind) noexcept;
std::optional<TaskKind> parse_task_kind(std::string_view tag) noexcept;

enum class Side { Question, Answer };

std::string_view to_string(Side side) noexcept;

struct BoundingBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double area() const noexcept { return (x2 - x1) * (y2 - y1); }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Triplet {
    std::string id;
    std::string image_ref;
    QaType qa_type = QaType::VQA;
    std::string question;
    std::string answer;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TaskRecord {
    std::string id;
    std::string image_ref;
    TaskKind task_kind = TaskKind::IQ2A;
    std::string system_prompt;
    std::string user_prompt;
    std::string target;

    friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

/// Checks the per-record invariants (non-empty id, non-blank question and
/// answer, Region box placement). Throws Error{MalformedRecord}.
void validate(const Triplet& t, std::size_t line = 0);

std::string_view trim(std::string_view text) noexcept;

}  // namespace tricon
