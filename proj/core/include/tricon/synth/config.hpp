#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace tricon::synth {

enum class NllReduction {
    Mean,  ///< mean over samples and dimensions
    Sum,   ///< sum over dimensions, mean over samples
};

std::string_view to_string(NllReduction r) noexcept;

/// Self-training lab settings. Defaults reproduce the reference experiment.
struct SynthConfig {
    std::size_t d = 50;
    std::size_t n_lab = 1900;
    std::size_t n_unl = 4900;
    std::size_t n_test = 1000;
    double x_scale = 1.0;
    double noise_scale = 0.6;
    std::vector<std::size_t> hidden{128, 128};
    double lr = 1e-3;
    std::size_t batch = 128;
    std::size_t epochs = 50;
    double keep_frac = 0.4;
    std::size_t rounds = 3;
    std::uint64_t rng_seed = 42;

    NllReduction nll_reduction = NllReduction::Mean;
    /// Re-select and re-label the pseudo-labeled set from the full unlabeled
    /// pool every round instead of accumulating.
    bool relabel = false;
    /// Continue from the previous round's parameters instead of a fresh init.
    bool warm_start = false;
};

/// Throws Error{ConfigError}.
void validate(const SynthConfig& config);

/// JSON object whose keys mirror the SynthConfig field names; missing keys
/// keep their defaults. Throws Error{ConfigError} or Error{IoFailure}.
SynthConfig load_config(const std::filesystem::path& path, SynthConfig base = {});
SynthConfig parse_config(std::string_view json_text, SynthConfig base = {});

}  // namespace tricon::synth
