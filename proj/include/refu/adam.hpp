// Adam with bias correction. Moment buffers mirror the network's layer
// shapes; the step is serial and deterministic.
#pragma once

#include <cmath>

#include "refu/mlp.hpp"

namespace refu {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamState {
public:
    AdamState() = default;
    AdamState(const Mlp& net, AdamConfig cfg) : cfg_(cfg) {
        mW_.init_like(net.layers());
        vW_.init_like(net.layers());
    }

    const AdamConfig& config() const { return cfg_; }
    AdamConfig& config() { return cfg_; }
    long step_count() const { return step_; }

    void step(Mlp& net, const MlpGrads& grads) {
        auto& layers = net.layers();
        if (grads.dW.size() != layers.size())
            throw Error("AdamState::step: gradient shape mismatch");
        ++step_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, double(step_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, double(step_));
        for (std::size_t l = 0; l < layers.size(); ++l) {
            if (grads.dW[l].rows() != layers[l].W.rows() ||
                grads.dW[l].cols() != layers[l].W.cols())
                throw Error("AdamState::step: gradient shape mismatch");
            update(layers[l].W, grads.dW[l], mW_.dW[l], vW_.dW[l], c1, c2);
            update(layers[l].b, grads.db[l], mW_.db[l], vW_.db[l], c1, c2);
        }
    }

    // serialization hooks
    MlpGrads& first_moments() { return mW_; }
    MlpGrads& second_moments() { return vW_; }
    const MlpGrads& first_moments() const { return mW_; }
    const MlpGrads& second_moments() const { return vW_; }
    void set_step_count(long s) { step_ = s; }

private:
    template <class M, class G>
    void update(M& param, const G& grad, G& m, G& v, double c1, double c2) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
        param.array() -=
            cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
    }

    AdamConfig cfg_;
    long step_ = 0;
    MlpGrads mW_, vW_;  // first/second moments, stored in gradient layout
};

}  // namespace refu
