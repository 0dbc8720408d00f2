#pragma once

// Shared JSON helpers for the JSONL readers/writers. Internal header.

#include <cstddef>
#include <functional>
#include <istream>
#include <string>

#include <json.hpp>

#include "tricon/error.hpp"
#include "tricon/types.hpp"

namespace tricon::detail {

using ordered_json = nlohmann::ordered_json;

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(Errc::MalformedRecord, std::string("missing key '") + key + "'", line);
    return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
    const auto& v = require(obj, key, line);
    if (!v.is_string()) throw Error(Errc::MalformedRecord, std::string("key '") + key + "' must be a string", line);
    return v.get<std::string>();
}

inline Triplet triplet_from_json(const nlohmann::json& obj, std::size_t line) {
    if (!obj.is_object()) throw Error(Errc::MalformedRecord, "expected a JSON object", line);
    Triplet t;
    t.id = require_string(obj, "id", line);
    t.image_ref = require_string(obj, "image", line);
    const auto tag = require_string(obj, "type", line);
    auto type = parse_qa_type(tag);
    if (!type) throw Error(Errc::MalformedRecord, "unknown type tag '" + tag + "'", line);
    t.qa_type = *type;
    t.question = require_string(obj, "question", line);
    t.answer = require_string(obj, "answer", line);
    validate(t, line);
    return t;
}

inline ordered_json triplet_to_json(const Triplet& t) {
    ordered_json j;
    j["id"] = t.id;
    j["image"] = t.image_ref;
    j["type"] = std::string(to_string(t.qa_type));
    j["question"] = t.question;
    j["answer"] = t.answer;
    return j;
}

inline std::string dump_line(const ordered_json& j) {
    try {
        return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRecord, std::string("cannot serialize record: ") + e.what());
    }
}

/// Calls `fn(parsed, line_number)` for each non-blank line.
inline void for_each_json_line(std::istream& in,
                               const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::MalformedRecord, std::string("bad JSON: ") + e.what(), number);
        }
        fn(parsed, number);
    }
    if (in.bad()) throw Error(Errc::IoFailure, "read failure");
}

}  // namespace tricon::detail
