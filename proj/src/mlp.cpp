#include "liverpanel/mlp.hpp"

#include <cmath>

#include "liverpanel/errors.hpp"
#include "liverpanel/rng.hpp"

namespace liverpanel {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_config(const TrainConfig& cfg) {
    if (cfg.hidden < 1) throw ConfigError("hidden width must be >= 1");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
}

// Exact constancy tests: a constant column has rounding-dust variance when
// its value is not representable, and dividing by that dust would blow up
// the standardized inputs.
bool constant_feature(const Dataset& d, int f) {
    const double first = d.feature_row(0)[f];
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (d.feature_row(i)[f] != first) return false;
    }
    return true;
}

bool constant_target(const Dataset& d) {
    const double first = d.target_value(0);
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (d.target_value(i) != first) return false;
    }
    return true;
}

}  // namespace

std::vector<double> MlpWeights::flatten() const {
    std::vector<double> flat;
    flat.reserve(count());
    flat.insert(flat.end(), w1.begin(), w1.end());
    flat.insert(flat.end(), b1.begin(), b1.end());
    flat.insert(flat.end(), w2.begin(), w2.end());
    flat.push_back(b2);
    return flat;
}

MlpWeights MlpWeights::unflatten(int hidden, std::span<const double> flat) {
    MlpWeights w;
    w.hidden = hidden;
    const std::size_t h = static_cast<std::size_t>(hidden);
    w.w1.assign(flat.begin(), flat.begin() + 3 * h);
    w.b1.assign(flat.begin() + 3 * h, flat.begin() + 4 * h);
    w.w2.assign(flat.begin() + 4 * h, flat.begin() + 5 * h);
    w.b2 = flat[5 * h];
    return w;
}

MlpWeights init_weights(int hidden, std::uint64_t seed) {
    MlpWeights w;
    w.hidden = hidden;
    rng::Engine gen(seed);
    auto draw = [&gen] { return rng::uniform(gen, -0.5, 0.5); };
    w.w1.resize(static_cast<std::size_t>(hidden) * 3);
    for (double& v : w.w1) v = draw();
    w.b1.resize(hidden);
    for (double& v : w.b1) v = draw();
    w.w2.resize(hidden);
    for (double& v : w.w2) v = draw();
    w.b2 = draw();
    return w;
}

double mlp_forward(const MlpWeights& w, const FeatureVector& x) {
    double out = w.b2;
    for (int j = 0; j < w.hidden; ++j) {
        const double z = w.b1[j] + w.w1[j * 3 + 0] * x[0] + w.w1[j * 3 + 1] * x[1] +
                         w.w1[j * 3 + 2] * x[2];
        out += w.w2[j] * sigmoid(z);
    }
    return out;
}

LossAndGradient batch_gradient(const MlpWeights& w, const MlpBatch& batch) {
    const std::size_t n = batch.x.size();
    LossAndGradient result;
    result.gradient.hidden = w.hidden;
    result.gradient.w1.assign(w.w1.size(), 0.0);
    result.gradient.b1.assign(w.b1.size(), 0.0);
    result.gradient.w2.assign(w.w2.size(), 0.0);

    std::vector<double> h(w.hidden);
    for (std::size_t k = 0; k < n; ++k) {
        const FeatureVector& x = batch.x[k];
        double out = w.b2;
        for (int j = 0; j < w.hidden; ++j) {
            const double z = w.b1[j] + w.w1[j * 3 + 0] * x[0] + w.w1[j * 3 + 1] * x[1] +
                             w.w1[j * 3 + 2] * x[2];
            h[j] = sigmoid(z);
            out += w.w2[j] * h[j];
        }
        const double residual = out - batch.y[k];
        result.loss += residual * residual;
        const double g = 2.0 * residual / static_cast<double>(n);
        result.gradient.b2 += g;
        for (int j = 0; j < w.hidden; ++j) {
            result.gradient.w2[j] += g * h[j];
            const double delta = g * w.w2[j] * h[j] * (1.0 - h[j]);
            result.gradient.b1[j] += delta;
            result.gradient.w1[j * 3 + 0] += delta * x[0];
            result.gradient.w1[j * 3 + 1] += delta * x[1];
            result.gradient.w1[j * 3 + 2] += delta * x[2];
        }
    }
    result.loss /= static_cast<double>(n);
    return result;
}

MlpWeights train(MlpWeights w, const MlpBatch& batch, const TrainConfig& cfg) {
    check_config(cfg);
    if (batch.x.empty() || batch.x.size() != batch.y.size()) {
        throw Error("training batch is empty or misaligned");
    }

    std::vector<double> velocity(w.count(), 0.0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        LossAndGradient lg = batch_gradient(w, batch);
        if (!std::isfinite(lg.loss)) throw DivergedLoss(static_cast<std::size_t>(epoch));
        const std::vector<double> grad = lg.gradient.flatten();
        std::vector<double> flat = w.flatten();
        for (std::size_t i = 0; i < flat.size(); ++i) {
            velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * grad[i];
            flat[i] += velocity[i];
        }
        w = MlpWeights::unflatten(cfg.hidden, flat);
    }
    return w;
}

double MlpModel::predict(const FeatureVector& x) const {
    FeatureVector z;
    for (int f = 0; f < 3; ++f) z[f] = (x[f] - x_mean[f]) / x_scale[f];
    return mlp_forward(weights, z) * y_scale + y_mean;
}

MlpModel fit_mlp(const Dataset& d, const TrainConfig& cfg) {
    check_config(cfg);
    const std::size_t n = d.size();
    if (n < 2) throw DatasetTooSmall("MLP training needs at least 2 records");

    MlpModel model;
    for (int f = 0; f < 3; ++f) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += d.feature_row(i)[f];
        model.x_mean[f] = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = d.feature_row(i)[f] - model.x_mean[f];
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        model.x_scale[f] = constant_feature(d, f) || !(sd > 0.0) ? 1.0 : sd;
    }
    {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += d.target_value(i);
        model.y_mean = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = d.target_value(i) - model.y_mean;
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (constant_target(d) || !(sd > 0.0)) throw DegenerateTarget();
        model.y_scale = sd;
    }

    MlpBatch batch;
    batch.x.resize(n);
    batch.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureVector x = d.feature_row(i);
        for (int f = 0; f < 3; ++f) batch.x[i][f] = (x[f] - model.x_mean[f]) / model.x_scale[f];
        batch.y[i] = (d.target_value(i) - model.y_mean) / model.y_scale;
    }

    model.weights = train(init_weights(cfg.hidden, cfg.seed), batch, cfg);
    model.final_loss = batch_gradient(model.weights, batch).loss;
    if (!std::isfinite(model.final_loss)) {
        throw DivergedLoss(static_cast<std::size_t>(cfg.epochs));
    }
    return model;
}

MlpRegressor::MlpRegressor(TrainConfig cfg) : cfg_(cfg) {}

void MlpRegressor::fit(const Dataset& d) { model_ = fit_mlp(d, cfg_); }

}  // namespace liverpanel
