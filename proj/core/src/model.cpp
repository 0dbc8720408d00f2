#include "tricon/model.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tricon/error.hpp"
#include "tricon/record_io.hpp"

namespace tricon {

TableModel TableModel::load(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        const auto j = nlohmann::json::parse(in);
        std::map<std::string, Entry> entries;
        for (const auto& e : j.at("entries")) {
            Entry entry;
            auto text_field = [&](const char* key) -> std::optional<std::string> {
                if (!e.contains(key) || e.at(key).is_null()) return std::nullopt;
                return e.at(key).get<std::string>();
            };
            entry.generate = text_field("generate");
            entry.answer = text_field("answer");
            entry.question = text_field("question");
            if (auto tag = text_field("type")) {
                entry.type = parse_qa_type(*tag);
                if (!entry.type) throw Error(Errc::ConfigError, "unknown type tag '" + *tag + "' in model table");
            }
            const auto image = e.at("image").get<std::string>();
            if (!entries.emplace(image, std::move(entry)).second) {
                throw Error(Errc::ConfigError, "duplicate image '" + image + "' in model table");
            }
        }
        return TableModel(std::move(entries));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, "model table " + path.string() + ": " + e.what());
    }
}

const TableModel::Entry& TableModel::lookup(const std::string& image_ref) const {
    auto it = entries_.find(image_ref);
    if (it == entries_.end()) throw Error(Errc::ModelError, "no table entry for image '" + image_ref + "'");
    return it->second;
}

ModelOutput TableModel::generate(const std::string& image_ref, const std::string&) {
    const auto& e = lookup(image_ref);
    if (!e.generate) throw Error(Errc::ModelError, "no generation for image '" + image_ref + "'");
    return {*e.generate, e.type};
}

std::string TableModel::answer(const std::string& image_ref, const std::string&) {
    const auto& e = lookup(image_ref);
    if (!e.answer) throw Error(Errc::ModelError, "no answer for image '" + image_ref + "'");
    return *e.answer;
}

std::string TableModel::question(const std::string& image_ref, const std::string&) {
    const auto& e = lookup(image_ref);
    if (!e.question) throw Error(Errc::ModelError, "no question for image '" + image_ref + "'");
    return *e.question;
}

HttpModel::HttpModel(std::string base_url, Options options)
    : base_url_(std::move(base_url)), options_(options) {}

ModelOutput HttpModel::call(const char* endpoint, const std::string& image_ref, const std::string& prompt) const {
    nlohmann::json body;
    body["image"] = image_ref;
    body["prompt"] = prompt;
    const auto payload = body.dump();

    std::string last_error;
    auto delay = options_.backoff;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        // One client per call: httplib clients are not safe to share across threads.
        httplib::Client client(base_url_);
        client.set_connection_timeout(options_.timeout);
        client.set_read_timeout(options_.timeout);
        auto res = client.Post(endpoint, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(res->body);
            ModelOutput out;
            out.text = j.at("text").get<std::string>();
            if (j.contains("type") && j.at("type").is_string()) {
                out.declared_type = parse_qa_type(j.at("type").get<std::string>());
            }
            return out;
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("bad response: ") + e.what();
        }
    }
    throw Error(Errc::ModelError, std::string(endpoint) + " failed for '" + image_ref + "': " + last_error);
}

ModelOutput HttpModel::generate(const std::string& image_ref, const std::string& prompt) {
    return call("/generate", image_ref, prompt);
}

std::string HttpModel::answer(const std::string& image_ref, const std::string& prompt) {
    return call("/answer", image_ref, prompt).text;
}

std::string HttpModel::question(const std::string& image_ref, const std::string& prompt) {
    return call("/question", image_ref, prompt).text;
}

}  // namespace tricon
