#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tricon/types.hpp"

namespace tricon {

// JSONL, one object per line, UTF-8. Triplet keys in write order:
// id, image, type, question, answer. Unknown keys are ignored on read.

/// Throws Error{MalformedRecord} (with the 1-based line number) or
/// Error{DuplicateId}. Blank lines are skipped.
std::vector<Triplet> read_triplets(std::istream& in);
std::vector<Triplet> read_triplets(const std::filesystem::path& path);

/// Throws Error{IoFailure} when the stream fails.
void write_triplets(std::span<const Triplet> records, std::ostream& out);
void write_triplets(std::span<const Triplet> records, const std::filesystem::path& path);

/// Task records: id, image, task, system, prompt, target.
std::vector<TaskRecord> read_task_records(std::istream& in);
void write_task_records(std::span<const TaskRecord> records, std::ostream& out);
void write_task_records(std::span<const TaskRecord> records, const std::filesystem::path& path);

/// Opens `path` for reading/writing or throws Error{IoFailure}.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

/// Reads every non-blank line (trailing CR removed). Throws Error{IoFailure}.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace tricon
