#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "tricon/synth/config.hpp"

namespace tricon::synth {

/// Row-per-sample matrices.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Seeded generator with explicit sampling formulas, so a seed maps to the
/// same numbers regardless of the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Laplace(0, scale) by inverse CDF.
    double laplace(double scale);
    /// Standard normal by Box-Muller.
    double normal();
    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct SynthDataset {
    Matrix phi;  ///< d x d mixing matrix
    Matrix x_lab, y_lab;
    Matrix y_unl;
    Matrix x_test, y_test;
};

/// Y = X Phi^T + N with Laplace X and N. Phi is standard normal and is
/// resampled until sigma_min / sigma_max >= 1e-6 (Error{RankFailure} after
/// 10 draws).
SynthDataset gen_data(const SynthConfig& config);

}  // namespace tricon::synth
