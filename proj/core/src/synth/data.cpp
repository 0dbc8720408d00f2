#include "tricon/synth/data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "tricon/error.hpp"
#include "tricon/hash.hpp"

namespace tricon::synth {

std::string_view to_string(NllReduction r) noexcept {
    return r == NllReduction::Mean ? "mean" : "sum";
}

void validate(const SynthConfig& c) {
    auto fail = [](const std::string& what) { throw Error(Errc::ConfigError, what); };
    if (c.d < 1) fail("d must be >= 1");
    if (c.n_lab < 1 || c.n_unl < 1 || c.n_test < 1) fail("split sizes must be >= 1");
    if (c.hidden.empty()) fail("at least one hidden layer is required");
    for (auto w : c.hidden) {
        if (w < 1) fail("hidden widths must be >= 1");
    }
    if (!(c.keep_frac > 0.0 && c.keep_frac <= 1.0)) fail("keep_frac must lie in (0, 1]");
    if (!(c.x_scale > 0.0)) fail("x_scale must be positive");
    if (!(c.noise_scale >= 0.0)) fail("noise_scale must be non-negative");
    if (!(c.lr >= 0.0)) fail("lr must be non-negative");
    if (c.batch < 1) fail("batch must be >= 1");
}

SynthConfig parse_config(std::string_view json_text, SynthConfig c) {
    try {
        const auto j = nlohmann::json::parse(json_text);
        if (!j.is_object()) throw Error(Errc::ConfigError, "synth config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "d") c.d = value.get<std::size_t>();
            else if (key == "n_lab") c.n_lab = value.get<std::size_t>();
            else if (key == "n_unl") c.n_unl = value.get<std::size_t>();
            else if (key == "n_test") c.n_test = value.get<std::size_t>();
            else if (key == "x_scale") c.x_scale = value.get<double>();
            else if (key == "noise_scale") c.noise_scale = value.get<double>();
            else if (key == "hidden") c.hidden = value.get<std::vector<std::size_t>>();
            else if (key == "lr") c.lr = value.get<double>();
            else if (key == "batch") c.batch = value.get<std::size_t>();
            else if (key == "epochs") c.epochs = value.get<std::size_t>();
            else if (key == "keep_frac") c.keep_frac = value.get<double>();
            else if (key == "rounds") c.rounds = value.get<std::size_t>();
            else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
            else if (key == "relabel") c.relabel = value.get<bool>();
            else if (key == "warm_start") c.warm_start = value.get<bool>();
            else if (key == "nll_reduction") {
                const auto r = value.get<std::string>();
                if (r == "mean") c.nll_reduction = NllReduction::Mean;
                else if (r == "sum") c.nll_reduction = NllReduction::Sum;
                else throw Error(Errc::ConfigError, "nll_reduction must be 'mean' or 'sum'");
            } else {
                throw Error(Errc::ConfigError, "unknown synth config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, std::string("synth config: ") + e.what());
    }
    validate(c);
    return c;
}

SynthConfig load_config(const std::filesystem::path& path, SynthConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(base));
}

double Rng::laplace(double scale) {
    if (scale == 0.0) return 0.0;
    // u in (-1/2, 1/2); the endpoint -1/2 is excluded to keep log finite.
    double u = uniform() - 0.5;
    while (u == -0.5) u = uniform() - 0.5;
    const double sign = u < 0.0 ? -1.0 : 1.0;
    return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

namespace {

Matrix laplace_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.laplace(scale);
    return m;
}

}  // namespace

SynthDataset gen_data(const SynthConfig& config) {
    validate(config);
    Rng rng(splitmix64(config.rng_seed));
    const auto d = static_cast<Eigen::Index>(config.d);

    SynthDataset data;
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
        data.phi.resize(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) data.phi(i, j) = rng.normal();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(data.phi);
        const auto& s = svd.singularValues();
        ok = s(0) > 0.0 && s(d - 1) / s(0) >= 1e-6;
    }
    if (!ok) throw Error(Errc::RankFailure, "mixing matrix stayed rank-deficient after 10 draws");

    auto observe = [&](const Matrix& x) -> Matrix {
        const Matrix noise = laplace_matrix(rng, static_cast<std::size_t>(x.rows()), config.d, config.noise_scale);
        return x * data.phi.transpose() + noise;
    };
    data.x_lab = laplace_matrix(rng, config.n_lab, config.d, config.x_scale);
    data.y_lab = observe(data.x_lab);
    const Matrix x_unl = laplace_matrix(rng, config.n_unl, config.d, config.x_scale);
    data.y_unl = observe(x_unl);
    data.x_test = laplace_matrix(rng, config.n_test, config.d, config.x_scale);
    data.y_test = observe(data.x_test);
    return data;
}

}  // namespace tricon::synth
