#include "tricon/synth/lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tricon/error.hpp"
#include "tricon/hash.hpp"

namespace tricon::synth {

SynthMetrics evaluate_prediction(const Matrix& x, const Matrix& mu, const Matrix& b, NllReduction reduction) {
    if (x.rows() == 0) throw Error(Errc::EmptyTestSet, "test split is empty");
    SynthMetrics m;
    m.nll = laplace_nll(x, mu, b, reduction);
    const Matrix residual = x - mu;
    m.mse = residual.squaredNorm() / static_cast<double>(x.size());

    const Eigen::RowVectorXd mean = x.colwise().mean();
    double r2_sum = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double ss_res = residual.col(j).squaredNorm();
        const double ss_tot = (x.col(j).array() - mean(j)).square().sum();
        if (ss_tot > 0.0) r2_sum += 1.0 - ss_res / ss_tot;
        else r2_sum += ss_res == 0.0 ? 1.0 : 0.0;
    }
    m.r2 = r2_sum / static_cast<double>(x.cols());
    return m;
}

SynthMetrics evaluate(const NetParams& params, const Matrix& x_test, const Matrix& y_test, NllReduction reduction) {
    if (x_test.rows() == 0) throw Error(Errc::EmptyTestSet, "test split is empty");
    const auto pred = forward(params, y_test);
    return evaluate_prediction(x_test, pred.mu, pred.b, reduction);
}

std::vector<std::size_t> confidence_select(const Matrix& predicted_scale, double keep_frac) {
    if (!(keep_frac > 0.0 && keep_frac <= 1.0)) throw Error(Errc::InvalidArgument, "keep_frac must lie in (0, 1]");
    const auto n = static_cast<std::size_t>(predicted_scale.rows());
    const Eigen::VectorXd conf = predicted_scale.rowwise().mean();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return conf(static_cast<Eigen::Index>(a)) < conf(static_cast<Eigen::Index>(b)); });
    const auto k = static_cast<std::size_t>(std::floor(keep_frac * static_cast<double>(n) * (1.0 + 1e-12)));
    order.resize(std::min(k, n));
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::size_t> confidence_select(const NetParams& params, const Matrix& y_unl, double keep_frac) {
    return confidence_select(forward(params, y_unl).b, keep_frac);
}

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

}  // namespace

std::vector<SynthMetrics> self_refine(const SynthConfig& config) {
    return self_refine(config, gen_data(config));
}

std::vector<SynthMetrics> self_refine(const SynthConfig& config, const SynthDataset& data) {
    validate(config);
    // Each round draws its own init. Reusing the teacher's init lets the
    // student reproduce the pseudo-labels almost exactly and collapses b.
    auto init_seed = [&](std::size_t round) { return splitmix64(config.rng_seed ^ 0x696e6974ULL ^ (round << 32)); };
    TrainOptions opts;
    opts.lr = config.lr;
    opts.batch = config.batch;
    opts.epochs = config.epochs;
    opts.reduction = config.nll_reduction;

    auto fit = [&](NetParams start, const Matrix& x, const Matrix& y, std::size_t round) {
        opts.shuffle_seed = splitmix64(config.rng_seed ^ 0x73687566ULL ^ (round << 32));
        return train(std::move(start), x, y, opts);
    };
    auto params = fit(init_params(config.d, config.hidden, init_seed(0)), data.x_lab, data.y_lab, 0);
    std::vector<SynthMetrics> history{evaluate(params, data.x_test, data.y_test, config.nll_reduction)};

    Matrix x_train = data.x_lab;
    Matrix y_train = data.y_lab;
    std::vector<std::size_t> pool(static_cast<std::size_t>(data.y_unl.rows()));
    std::iota(pool.begin(), pool.end(), std::size_t{0});

    for (std::size_t round = 1; round <= config.rounds; ++round) {
        if (config.relabel) {
            const auto pred = forward(params, data.y_unl);
            const auto picked = confidence_select(pred.b, config.keep_frac);
            x_train = stack(data.x_lab, gather_rows(pred.mu, picked));
            y_train = stack(data.y_lab, gather_rows(data.y_unl, picked));
        } else if (!pool.empty()) {
            const Matrix y_pool = gather_rows(data.y_unl, pool);
            const auto pred = forward(params, y_pool);
            const auto picked = confidence_select(pred.b, config.keep_frac);
            std::vector<std::size_t> chosen;
            chosen.reserve(picked.size());
            for (auto i : picked) chosen.push_back(pool[i]);
            x_train = stack(x_train, gather_rows(pred.mu, picked));
            y_train = stack(y_train, gather_rows(data.y_unl, chosen));
            std::vector<std::size_t> rest;
            std::set_difference(pool.begin(), pool.end(), chosen.begin(), chosen.end(), std::back_inserter(rest));
            pool = std::move(rest);
        }
        auto start = config.warm_start ? params : init_params(config.d, config.hidden, init_seed(round));
        params = fit(std::move(start), x_train, y_train, round);
        history.push_back(evaluate(params, data.x_test, data.y_test, config.nll_reduction));
    }
    return history;
}

std::string to_json(std::size_t round, const SynthMetrics& m) {
    nlohmann::ordered_json j;
    j["round"] = round;
    j["nll"] = m.nll;
    j["mse"] = m.mse;
    j["r2"] = m.r2;
    return j.dump();
}

}  // namespace tricon::synth
