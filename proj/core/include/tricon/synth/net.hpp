#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tricon/synth/data.hpp"

namespace tricon::synth {

/// Floor added to the positive scale output.
inline constexpr double kScaleFloor = 1e-3;

struct Layer {
    Matrix weight;  ///< out x in
    Eigen::RowVectorXd bias;
};

/// MLP d -> hidden... -> 2d with ReLU between layers. The first d outputs
/// are the location mu, the last d pass through softplus + kScaleFloor to
/// give the Laplace scale b.
struct NetParams {
    std::size_t dim = 0;
    std::vector<Layer> layers;

    std::size_t parameter_count() const noexcept;
};

/// Weights and biases uniform in +-1/sqrt(fan_in).
NetParams init_params(std::size_t dim, std::span<const std::size_t> hidden, std::uint64_t seed);
NetParams zero_params(std::size_t dim, std::span<const std::size_t> hidden);

double softplus(double u) noexcept;
double sigmoid(double u) noexcept;

struct Prediction {
    Matrix mu;
    Matrix b;
};

/// Throws Error{ShapeMismatch} when y has the wrong column count.
Prediction forward(const NetParams& params, const Matrix& y);

/// Laplace negative log-likelihood, log(2b) + |x - mu| / b, reduced per
/// `reduction`. Throws Error{NonPositiveScale} or Error{ShapeMismatch}.
double laplace_nll(const Matrix& x, const Matrix& mu, const Matrix& b,
                   NllReduction reduction = NllReduction::Mean);

/// Loss of the network on (x, y) and, when `grad` is non-null, its exact
/// gradient (same layout as params). `mask`, when given, has x's shape and
/// zeroes the corresponding loss terms; the normalizer is unchanged.
double loss_and_grad(const NetParams& params, const Matrix& x, const Matrix& y, NetParams* grad,
                     NllReduction reduction = NllReduction::Mean, const Matrix* mask = nullptr);

struct TrainOptions {
    double lr = 1e-3;
    std::size_t batch = 128;
    std::size_t epochs = 50;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t shuffle_seed = 0;
    NllReduction reduction = NllReduction::Mean;
};

/// Minibatch Adam on the Laplace NLL with a seeded shuffle per epoch.
/// `epoch_losses`, when given, receives the mean training loss per epoch.
/// Throws Error{Divergence} on a non-finite loss.
NetParams train(NetParams params, const Matrix& x, const Matrix& y, const TrainOptions& options,
                std::vector<double>* epoch_losses = nullptr);

/// Largest relative error |g_a - g_f| / max(|g_a|, |g_f|, 1e-8) between the
/// analytic gradient and central differences with step h, evaluated in
/// extended precision. Loss terms with |x - mu| < 1e-4 are masked out;
/// coordinates whose perturbation flips a ReLU or |.| branch are skipped.
double grad_check(const NetParams& params, const Matrix& x, const Matrix& y, double h = 1e-5,
                  NllReduction reduction = NllReduction::Mean);

}  // namespace tricon::synth
