#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "tricon/types.hpp"

namespace tricon {

struct ModelOutput {
    std::string text;
    std::optional<QaType> declared_type;
};

/// The generator contract the refinement loop drives. Every call either
/// returns text or throws Error{ModelError}; empty output is not used to
/// signal failure.
class ModelInterface {
public:
    virtual ~ModelInterface() = default;

    /// Image -> "Instruction: <Q> Answer: <A>" style text.
    virtual ModelOutput generate(const std::string& image_ref, const std::string& prompt) = 0;
    /// Image + question -> answer.
    virtual std::string answer(const std::string& image_ref, const std::string& prompt) = 0;
    /// Image + "<template> Answer: <A>" -> question.
    virtual std::string question(const std::string& image_ref, const std::string& prompt) = 0;
};

/// Deterministic model backed by a lookup table keyed by image_ref; used for
/// tests and dry runs. Prompts are ignored.
class TableModel final : public ModelInterface {
public:
    struct Entry {
        std::optional<std::string> generate;
        std::optional<QaType> type;
        std::optional<std::string> answer;
        std::optional<std::string> question;
    };

    TableModel() = default;
    explicit TableModel(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    /// JSON file: {"entries": [{"image": ..., "generate": ..., "type": ...,
    /// "answer": ..., "question": ...}, ...]}. Throws Error{ConfigError}.
    static TableModel load(const std::filesystem::path& path);

    void set(const std::string& image_ref, Entry entry) { entries_[image_ref] = std::move(entry); }

    ModelOutput generate(const std::string& image_ref, const std::string& prompt) override;
    std::string answer(const std::string& image_ref, const std::string& prompt) override;
    std::string question(const std::string& image_ref, const std::string& prompt) override;

private:
    const Entry& lookup(const std::string& image_ref) const;
    std::map<std::string, Entry> entries_;
};

/// Remote model endpoint. POST {base_url}/generate, /answer, /question with
/// {"image": ref, "prompt": text}; the response is {"text": ...} with an
/// optional "type" tag on /generate. Failed requests are retried with
/// exponential backoff before surfacing Error{ModelError}.
class HttpModel final : public ModelInterface {
public:
    struct Options {
        int retries = 3;
        std::chrono::milliseconds backoff{200};
        std::chrono::milliseconds timeout{std::chrono::seconds(120)};
    };

    explicit HttpModel(std::string base_url) : HttpModel(std::move(base_url), Options{}) {}
    HttpModel(std::string base_url, Options options);

    ModelOutput generate(const std::string& image_ref, const std::string& prompt) override;
    std::string answer(const std::string& image_ref, const std::string& prompt) override;
    std::string question(const std::string& image_ref, const std::string& prompt) override;

private:
    ModelOutput call(const char* endpoint, const std::string& image_ref, const std::string& prompt) const;

    std::string base_url_;
    Options options_;
};

}  // namespace tricon
