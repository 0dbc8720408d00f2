#include "tricon/synth/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tricon/error.hpp"

namespace tricon::synth {

std::size_t NetParams::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

namespace {

std::vector<std::size_t> widths(std::size_t dim, std::span<const std::size_t> hidden) {
    std::vector<std::size_t> w;
    w.push_back(dim);
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(2 * dim);
    return w;
}

// Intermediate values of one forward pass, kept for the backward pass.
struct Trace {
    std::vector<Matrix> inputs;       // input to each layer
    std::vector<Matrix> pre;          // pre-activation of each hidden layer
    Matrix out;                       // raw network output (n x 2d)
};

Trace run(const NetParams& p, const Matrix& y) {
    if (static_cast<std::size_t>(y.cols()) != p.dim) {
        throw Error(Errc::ShapeMismatch, "input has " + std::to_string(y.cols()) + " columns, expected " +
                                             std::to_string(p.dim));
    }
    Trace t;
    Matrix act = y;
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        const auto& l = p.layers[k];
        // Coefficient-wise product: each row is summed in the same order
        // whatever the batch size, so row outputs do not depend on batching.
        Matrix z = act.lazyProduct(l.weight.transpose());
        z.rowwise() += l.bias;
        t.inputs.push_back(std::move(act));
        if (k + 1 == p.layers.size()) {
            t.out = std::move(z);
        } else {
            act = z.cwiseMax(0.0);
            t.pre.push_back(std::move(z));
        }
    }
    return t;
}

Matrix scale_of(const Matrix& raw) {
    return raw.unaryExpr([](double u) { return softplus(u) + kScaleFloor; });
}

double normalizer(Eigen::Index n, Eigen::Index d, NllReduction r) {
    return r == NllReduction::Mean ? 1.0 / static_cast<double>(n * d) : 1.0 / static_cast<double>(n);
}

}  // namespace

NetParams init_params(std::size_t dim, std::span<const std::size_t> hidden, std::uint64_t seed) {
    Rng rng(seed);
    const auto w = widths(dim, hidden);
    NetParams p;
    p.dim = dim;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(w[k]));
        Layer l;
        l.weight.resize(static_cast<Eigen::Index>(w[k + 1]), static_cast<Eigen::Index>(w[k]));
        l.bias.resize(static_cast<Eigen::Index>(w[k + 1]));
        for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = bound * (2.0 * rng.uniform() - 1.0);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = bound * (2.0 * rng.uniform() - 1.0);
        p.layers.push_back(std::move(l));
    }
    return p;
}

NetParams zero_params(std::size_t dim, std::span<const std::size_t> hidden) {
    const auto w = widths(dim, hidden);
    NetParams p;
    p.dim = dim;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        Layer l;
        l.weight = Matrix::Zero(static_cast<Eigen::Index>(w[k + 1]), static_cast<Eigen::Index>(w[k]));
        l.bias = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(w[k + 1]));
        p.layers.push_back(std::move(l));
    }
    return p;
}

double softplus(double u) noexcept {
    return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

double sigmoid(double u) noexcept {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

Prediction forward(const NetParams& params, const Matrix& y) {
    const auto t = run(params, y);
    const auto d = static_cast<Eigen::Index>(params.dim);
    return {t.out.leftCols(d), scale_of(t.out.rightCols(d))};
}

double laplace_nll(const Matrix& x, const Matrix& mu, const Matrix& b, NllReduction reduction) {
    if (x.rows() != mu.rows() || x.cols() != mu.cols() || x.rows() != b.rows() || x.cols() != b.cols()) {
        throw Error(Errc::ShapeMismatch, "x, mu and b must have the same shape");
    }
    if (x.size() == 0) throw Error(Errc::ShapeMismatch, "empty input");
    if (!(b.array() > 0.0).all()) throw Error(Errc::NonPositiveScale, "Laplace scale must be positive");
    const double total = ((2.0 * b.array()).log() + (x - mu).array().abs() / b.array()).sum();
    return total * normalizer(x.rows(), x.cols(), reduction);
}

double loss_and_grad(const NetParams& params, const Matrix& x, const Matrix& y, NetParams* grad,
                     NllReduction reduction, const Matrix* mask) {
    const auto t = run(params, y);
    const auto d = static_cast<Eigen::Index>(params.dim);
    if (x.rows() != y.rows() || x.cols() != d) throw Error(Errc::ShapeMismatch, "x must be n x d matching y");
    const Matrix raw = t.out.rightCols(d);
    const Matrix mu = t.out.leftCols(d);
    const Matrix b = scale_of(raw);
    const Matrix r = x - mu;
    const double scale = normalizer(x.rows(), d, reduction);

    Eigen::ArrayXXd terms = (2.0 * b.array()).log() + r.array().abs() / b.array();
    if (mask) terms *= mask->array();
    const double loss = terms.sum() * scale;
    if (!grad) return loss;

    Eigen::ArrayXXd d_mu = -r.array().sign() / b.array() * scale;
    Eigen::ArrayXXd d_b = (1.0 / b.array() - r.array().abs() / b.array().square()) * scale;
    if (mask) {
        d_mu *= mask->array();
        d_b *= mask->array();
    }
    Matrix d_out(x.rows(), 2 * d);
    d_out.leftCols(d) = d_mu.matrix();
    d_out.rightCols(d) = (d_b * raw.array().unaryExpr([](double u) { return sigmoid(u); })).matrix();

    grad->dim = params.dim;
    grad->layers.resize(params.layers.size());
    Matrix delta = std::move(d_out);
    for (std::size_t k = params.layers.size(); k-- > 0;) {
        auto& g = grad->layers[k];
        g.weight = delta.transpose() * t.inputs[k];
        g.bias = delta.colwise().sum();
        if (k == 0) break;
        Matrix back = delta * params.layers[k].weight;
        delta = (t.pre[k - 1].array() > 0.0).select(back.array(), 0.0).matrix();
    }
    return loss;
}

namespace {

template <class Fn>
void for_each_tensor(NetParams& p, Fn&& fn) {
    for (auto& l : p.layers) {
        fn(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
        fn(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
}

std::vector<double*> flat_view(NetParams& p) {
    std::vector<double*> out;
    for_each_tensor(p, [&](double* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(data + i);
    });
    return out;
}

}  // namespace

NetParams train(NetParams params, const Matrix& x, const Matrix& y, const TrainOptions& o,
                std::vector<double>* epoch_losses) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0) throw Error(Errc::InvalidArgument, "training set is empty");
    if (static_cast<std::size_t>(y.rows()) != n) throw Error(Errc::ShapeMismatch, "x and y row counts differ");
    if (o.batch == 0) throw Error(Errc::InvalidArgument, "batch size must be positive");

    NetParams m = params;
    for_each_tensor(m, [](double* data, std::size_t count) { std::fill(data, data + count, 0.0); });
    NetParams v = m;
    NetParams g;

    Rng rng(o.shuffle_seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto d = x.cols();
    std::uint64_t step = 0;
    double b1_pow = 1.0, b2_pow = 1.0;

    for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += o.batch) {
            const std::size_t rows = std::min(o.batch, n - start);
            Matrix xb(static_cast<Eigen::Index>(rows), d), yb(static_cast<Eigen::Index>(rows), y.cols());
            for (std::size_t r = 0; r < rows; ++r) {
                xb.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(order[start + r]));
                yb.row(static_cast<Eigen::Index>(r)) = y.row(static_cast<Eigen::Index>(order[start + r]));
            }
            const double loss = loss_and_grad(params, xb, yb, &g, o.reduction);
            if (!std::isfinite(loss)) {
                throw Error(Errc::Divergence, "non-finite loss at epoch " + std::to_string(epoch));
            }
            epoch_loss += loss * static_cast<double>(rows);

            ++step;
            b1_pow *= o.beta1;
            b2_pow *= o.beta2;
            const double c1 = 1.0 - b1_pow, c2 = 1.0 - b2_pow;
            for (std::size_t k = 0; k < params.layers.size(); ++k) {
                auto update = [&](auto& p, auto& gm, auto& mm, auto& vm) {
                    mm = o.beta1 * mm + (1.0 - o.beta1) * gm;
                    vm = o.beta2 * vm + (1.0 - o.beta2) * gm.cwiseProduct(gm);
                    p.array() -= o.lr * (mm.array() / c1) / ((vm.array() / c2).sqrt() + o.eps);
                };
                update(params.layers[k].weight, g.layers[k].weight, m.layers[k].weight, v.layers[k].weight);
                update(params.layers[k].bias, g.layers[k].bias, m.layers[k].bias, v.layers[k].bias);
            }
        }
        if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(n));
    }
    return params;
}

namespace {

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Extended-precision copy of the network for the finite differences, so a
// one-ulp wobble of a double loss is not read as a gradient.
struct Probe {
    std::vector<MatrixL> weight;
    std::vector<MatrixL> bias;

    explicit Probe(const NetParams& p) {
        for (const auto& l : p.layers) {
            weight.push_back(l.weight.cast<long double>());
            bias.push_back(l.bias.cast<long double>());
        }
    }

    std::vector<long double*> coords() {
        std::vector<long double*> out;
        for (std::size_t k = 0; k < weight.size(); ++k) {
            for (Eigen::Index i = 0; i < weight[k].size(); ++i) out.push_back(weight[k].data() + i);
            for (Eigen::Index i = 0; i < bias[k].size(); ++i) out.push_back(bias[k].data() + i);
        }
        return out;
    }

    // Masked loss; `bits` receives the ReLU on/off pattern of every hidden
    // unit plus the sign of every residual.
    long double loss(const MatrixL& x, const MatrixL& y, const MatrixL& mask, long double scale,
                     std::vector<bool>& bits) const {
        bits.clear();
        MatrixL act = y;
        for (std::size_t k = 0; k < weight.size(); ++k) {
            MatrixL z = act * weight[k].transpose();
            z.rowwise() += bias[k].row(0);
            if (k + 1 == weight.size()) {
                act = std::move(z);
                break;
            }
            for (Eigen::Index i = 0; i < z.size(); ++i) bits.push_back(z.data()[i] > 0.0L);
            act = z.cwiseMax(0.0L);
        }
        const Eigen::Index d = x.cols();
        long double total = 0.0L;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                const long double r = x(i, j) - act(i, j);
                bits.push_back(r > 0.0L);
                const long double u = act(i, j + d);
                const long double sp = u > 0.0L ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
                const long double b = sp + static_cast<long double>(kScaleFloor);
                total += mask(i, j) * (std::log(2.0L * b) + std::abs(r) / b);
            }
        }
        return total * scale;
    }
};

}  // namespace

double grad_check(const NetParams& params, const Matrix& x, const Matrix& y, double h, NllReduction reduction) {
    const auto pred = forward(params, y);
    const Matrix mask = ((x - pred.mu).array().abs() >= 1e-4).cast<double>().matrix();

    NetParams analytic;
    loss_and_grad(params, x, y, &analytic, reduction, &mask);
    auto grads = flat_view(analytic);

    Probe probe(params);
    const MatrixL xl = x.cast<long double>(), yl = y.cast<long double>(), ml = mask.cast<long double>();
    const long double scale = normalizer(x.rows(), x.cols(), reduction);
    std::vector<bool> base_pattern, pattern;
    probe.loss(xl, yl, ml, scale, base_pattern);

    auto coords = probe.coords();
    double worst = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const long double saved = *coords[i];
        *coords[i] = saved + h;
        const long double up = probe.loss(xl, yl, ml, scale, pattern);
        const bool up_same = pattern == base_pattern;
        *coords[i] = saved - h;
        const long double down = probe.loss(xl, yl, ml, scale, pattern);
        const bool down_same = pattern == base_pattern;
        *coords[i] = saved;
        if (!up_same || !down_same) continue;
        const double numeric = static_cast<double>((up - down) / (2.0L * h));
        const double a = *grads[i];
        const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace tricon::synth
