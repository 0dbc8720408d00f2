#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tricon/synth/config.hpp"

namespace tricon::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kIoError = 1, kValidationError = 2 };

/// Empty path means standard output.
using OutputPath = std::filesystem::path;

struct TransformOptions {
    std::filesystem::path input;
    OutputPath output;
    std::string ratios = "0.5,0.2,0.3";
    std::uint64_t seed = 42;
    std::filesystem::path templates;
};

struct BackendOptions {
    std::string text_backend = "lexical";
    std::string service_url;
};

struct ScoreOptions {
    std::filesystem::path input;
    OutputPath output;
    BackendOptions backend;
    std::size_t workers = 1;
    std::filesystem::path templates;
};

struct FilterOptions {
    std::filesystem::path input;
    OutputPath output;
    std::filesystem::path excluded;
    double top = 0.2;
    bool per_type = true;
    bool exact = false;
    std::filesystem::path templates;
};

struct StatsOptions {
    std::filesystem::path input;
    OutputPath output;
    std::string field = "both";
};

struct SynthOptions {
    synth::SynthConfig config;
    OutputPath output;
};

struct LoopOptions {
    std::filesystem::path seed_dataset;
    std::vector<std::filesystem::path> manifests;
    std::size_t rounds = 1;
    double top = 0.2;
    bool per_type = true;
    bool exact = false;
    std::filesystem::path model_table;
    std::string model_url;
    BackendOptions backend;
    std::size_t workers = 8;
    std::uint64_t seed = 42;
    std::filesystem::path out_dir;
    std::filesystem::path templates;
};

// Each command reports diagnostics on `err` and returns an ExitCode.
int run_transform(const TransformOptions& o, std::ostream& out, std::ostream& err);
int run_score(const ScoreOptions& o, std::ostream& out, std::ostream& err);
int run_filter(const FilterOptions& o, std::ostream& out, std::ostream& err);
int run_stats(const StatsOptions& o, std::ostream& out, std::ostream& err);
int run_synth(const SynthOptions& o, std::ostream& out, std::ostream& err);
int run_loop(const LoopOptions& o, std::ostream& out, std::ostream& err);

/// Builds the full command-line interface and dispatches.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tricon::cli
