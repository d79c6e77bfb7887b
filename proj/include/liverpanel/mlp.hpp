#ifndef LIVERPANEL_MLP_HPP
#define LIVERPANEL_MLP_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "liverpanel/regressor.hpp"

namespace liverpanel {

// 3 -> hidden -> 1 network, logistic hidden units, linear output. Weights are
// flattened in a fixed order (w1 row-major by hidden unit, b1, w2, b2); the
// initializer draws in exactly that order.
struct MlpWeights {
    int hidden = 0;
    std::vector<double> w1;  // hidden x 3, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;

    std::size_t count() const { return static_cast<std::size_t>(hidden) * 5 + 1; }
    std::vector<double> flatten() const;
    static MlpWeights unflatten(int hidden, std::span<const double> flat);
};

using MlpGradient = MlpWeights;

struct TrainConfig {
    int hidden = 8;
    int epochs = 500;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
};

// Training batch in standardized space.
struct MlpBatch {
    std::vector<FeatureVector> x;
    std::vector<double> y;
};

MlpWeights init_weights(int hidden, std::uint64_t seed);  // uniform [-0.5, 0.5]

double mlp_forward(const MlpWeights& w, const FeatureVector& x);

// Batch MSE and its analytic gradient in one pass.
struct LossAndGradient {
    double loss = 0.0;
    MlpGradient gradient;
};
LossAndGradient batch_gradient(const MlpWeights& w, const MlpBatch& batch);

// Full-batch gradient descent with momentum from the given starting point.
// Throws DivergedLoss the first epoch the loss is non-finite.
MlpWeights train(MlpWeights w, const MlpBatch& batch, const TrainConfig& cfg);

struct MlpModel {
    MlpWeights weights;
    FeatureVector x_mean{};
    FeatureVector x_scale{};
    double y_mean = 0.0;
    double y_scale = 1.0;
    double final_loss = 0.0;  // standardized-space MSE after the last epoch

    double predict(const FeatureVector& x) const;
};

MlpModel fit_mlp(const Dataset& d, const TrainConfig& cfg);

class MlpRegressor final : public Regressor {
public:
    explicit MlpRegressor(TrainConfig cfg = {});
    void fit(const Dataset& d) override;
    double predict(const FeatureVector& x) const override { return model_.predict(x); }
    const std::string& name() const override { return name_; }
    const MlpModel& model() const { return model_; }

private:
    TrainConfig cfg_;
    MlpModel model_;
    std::string name_ = "MLP";
};

}  // namespace liverpanel

#endif
