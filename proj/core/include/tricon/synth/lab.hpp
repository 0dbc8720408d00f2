#pragma once

#include <string>
#include <vector>

#include "tricon/synth/config.hpp"
#include "tricon/synth/data.hpp"
#include "tricon/synth/net.hpp"

namespace tricon::synth {

struct SynthMetrics {
    double nll = 0.0;
    double mse = 0.0;
    double r2 = 0.0;
};

/// NLL, per-entry MSE and R^2 averaged uniformly over output dimensions.
/// A zero-variance dimension scores 1 if its residual is also 0, else 0.
/// Throws Error{EmptyTestSet}.
SynthMetrics evaluate(const NetParams& params, const Matrix& x_test, const Matrix& y_test,
                      NllReduction reduction = NllReduction::Mean);
SynthMetrics evaluate_prediction(const Matrix& x, const Matrix& mu, const Matrix& b,
                                 NllReduction reduction = NllReduction::Mean);

/// Indices (ascending) of the floor(keep_frac * n) samples with the smallest
/// mean predicted scale; ties go to the lower index.
std::vector<std::size_t> confidence_select(const NetParams& params, const Matrix& y_unl, double keep_frac);
std::vector<std::size_t> confidence_select(const Matrix& predicted_scale, double keep_frac);

/// Baseline on labeled data, then `rounds` rounds of confidence-gated
/// pseudo-labeling and retraining. Returns rounds + 1 rows.
std::vector<SynthMetrics> self_refine(const SynthConfig& config);
std::vector<SynthMetrics> self_refine(const SynthConfig& config, const SynthDataset& data);

/// {"round":k,"nll":...,"mse":...,"r2":...}
std::string to_json(std::size_t round, const SynthMetrics& m);

}  // namespace tricon::synth
