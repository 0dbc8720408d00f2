#include "tricon/record_io.hpp"

#include <fstream>
#include <unordered_set>

#include "json_fields.hpp"
#include "tricon/error.hpp"

namespace tricon {

using detail::ordered_json;

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
    return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto t = trim(line);
        if (!t.empty()) lines.emplace_back(t);
    }
    if (in.bad()) throw Error(Errc::IoFailure, "read failure on " + path.string());
    return lines;
}

std::vector<Triplet> read_triplets(std::istream& in) {
    std::vector<Triplet> out;
    std::unordered_set<std::string> seen;
    detail::for_each_json_line(in, [&](const nlohmann::json& j, std::size_t line) {
        auto t = detail::triplet_from_json(j, line);
        if (!seen.insert(t.id).second) throw Error(Errc::DuplicateId, "duplicate id '" + t.id + "'", line);
        out.push_back(std::move(t));
    });
    return out;
}

std::vector<Triplet> read_triplets(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_triplets(in);
}

void write_triplets(std::span<const Triplet> records, std::ostream& out) {
    for (const auto& t : records) out << detail::dump_line(detail::triplet_to_json(t)) << '\n';
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "write failure");
}

void write_triplets(std::span<const Triplet> records, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_triplets(records, out);
}

std::vector<TaskRecord> read_task_records(std::istream& in) {
    std::vector<TaskRecord> out;
    detail::for_each_json_line(in, [&](const nlohmann::json& j, std::size_t line) {
        TaskRecord r;
        r.id = detail::require_string(j, "id", line);
        r.image_ref = detail::require_string(j, "image", line);
        const auto tag = detail::require_string(j, "task", line);
        auto kind = parse_task_kind(tag);
        if (!kind) throw Error(Errc::MalformedRecord, "unknown task tag '" + tag + "'", line);
        r.task_kind = *kind;
        r.system_prompt = detail::require_string(j, "system", line);
        r.user_prompt = detail::require_string(j, "prompt", line);
        r.target = detail::require_string(j, "target", line);
        out.push_back(std::move(r));
    });
    return out;
}

void write_task_records(std::span<const TaskRecord> records, std::ostream& out) {
    for (const auto& r : records) {
        ordered_json j;
        j["id"] = r.id;
        j["image"] = r.image_ref;
        j["task"] = std::string(to_string(r.task_kind));
        j["system"] = r.system_prompt;
        j["prompt"] = r.user_prompt;
        j["target"] = r.target;
        out << detail::dump_line(j) << '\n';
    }
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "write failure");
}

void write_task_records(std::span<const TaskRecord> records, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_task_records(records, out);
}

}  // namespace tricon
