// The learned body SDF f(x, beta, theta): network construction, the training
// loss (value regression + surface-normal matching + Eikonal), the trainer
// with bit-exact checkpoint resume, MAE/MRE evaluation, and the SdfEngine
// adapter used by the collision-handling layer.
#pragma once

#include <memory>
#include <sstream>

#include "refu/adam.hpp"
#include "refu/checkpoint.hpp"
#include "refu/sdf_samples.hpp"
#include "refu/sdf_engine.hpp"

namespace refu {

struct SdfNetConfig {
    int hidden_layers = 4;    // paper preset: 9
    int hidden_width = 256;   // paper preset: 1024
    double softplus_beta = 100.0;
    int skip_layer = 2;       // layer receiving [hidden; input], paper: 4th of 9
    int conditioning_dim = 0; // dim(beta) + dim(theta)
    double lambda_value = 2.0;
    double lambda_surface_grad = 1.0;
    double lambda_eikonal = 0.1;
    int bodies_per_batch = 32;
    int points_per_body = 4000;

    void validate() const {
        if (skip_layer >= hidden_layers || skip_layer < 1)
            throw Error("SdfNetConfig: skip layer must lie inside the hidden stack");
        if (lambda_value <= 0 || lambda_surface_grad <= 0 || lambda_eikonal <= 0)
            throw Error("SdfNetConfig: loss weights must be positive");
    }
};

inline Mlp make_sdf_net(const SdfNetConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    std::vector<int> hidden(cfg.hidden_layers, cfg.hidden_width);
    Mlp net(3 + cfg.conditioning_dim, hidden, 1, Activation::Softplus, cfg.skip_layer,
            cfg.softplus_beta);
    net.init_weights(rng);
    return net;
}

// one assembled batch: columns are samples, inputs carry [x; conditioning]
struct SdfBatch {
    MatrixXd inputs;               // (3 + c) x B
    VectorXd targets;              // ground-truth signed distances
    MatrixXd normals;              // 3 x B, valid where is_surface
    std::vector<char> is_surface;  // I_S mask; everything else is I_E

    int size() const { return int(targets.size()); }
};

inline SdfBatch assemble_sdf_batch(const std::vector<SdfSample>& samples,
                                   const std::vector<VectorXd>& conditioning_by_body) {
    if (samples.empty()) throw Error("assemble_sdf_batch: empty batch");
    const int c = conditioning_by_body.empty() ? 0 : int(conditioning_by_body.front().size());
    SdfBatch b;
    b.inputs.resize(3 + c, int(samples.size()));
    b.targets.resize(int(samples.size()));
    b.normals = MatrixXd::Zero(3, int(samples.size()));
    b.is_surface.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        b.inputs.block(0, int(i), 3, 1) = s.point;
        if (c > 0) {
            const auto& cond = conditioning_by_body.at(std::size_t(s.body_id));
            if (int(cond.size()) != c) throw Error("assemble_sdf_batch: conditioning width");
            b.inputs.block(3, int(i), c, 1) = cond;
        }
        b.targets[int(i)] = s.value;
        b.is_surface[i] = s.has_normal ? 1 : 0;
        if (s.has_normal) b.normals.col(int(i)) = s.normal;
    }
    return b;
}

struct SdfLossTerms {
    double total = 0.0;
    double value = 0.0;         // Lv: mean |f - s| over all samples
    double surface_grad = 0.0;  // Lsg: mean ||grad f - n|| over surface samples
    double eikonal = 0.0;       // Lse: mean (||grad f|| - 1)^2 over the rest
    bool eikonal_empty = false; // no off-surface samples; term contributed 0
};

// loss and (optionally) exact weight gradients through the nested
// differentiation path
inline SdfLossTerms sdf_loss(const Mlp& net, const SdfBatch& batch, const SdfNetConfig& cfg,
                             MlpGrads* grads = nullptr) {
    const int n = batch.size();
    if (n == 0) throw Error("sdf_loss: empty batch");
    int n_surface = 0;
    for (char m : batch.is_surface) n_surface += m;
    const int n_off = n - n_surface;

    ForwardCache cache;
    const MatrixXd f = net.forward(batch.inputs, &cache);
    MatrixXd input_grads;
    net.backward(cache, MatrixXd::Ones(1, n), nullptr, &input_grads);

    SdfLossTerms terms;
    terms.eikonal_empty = n_off == 0;
    MatrixXd value_bar = MatrixXd::Zero(1, n);
    MatrixXd tangent = MatrixXd::Zero(batch.inputs.rows(), n);
    for (int i = 0; i < n; ++i) {
        const double resid = f(0, i) - batch.targets[i];
        terms.value += std::abs(resid);
        const double sgn = resid > 0.0 ? 1.0 : (resid < 0.0 ? -1.0 : 0.0);
        value_bar(0, i) = cfg.lambda_value * sgn / double(n);

        const Vec3 g = input_grads.col(i).head<3>();
        if (batch.is_surface[i]) {
            const Vec3 diff = g - Vec3(batch.normals.col(i));
            const double len = diff.norm();
            terms.surface_grad += len;
            if (len > 1e-12)
                tangent.col(i).head<3>() =
                    cfg.lambda_surface_grad / double(n_surface) * diff / len;
        } else {
            const double gnorm = g.norm();
            terms.eikonal += (gnorm - 1.0) * (gnorm - 1.0);
            if (gnorm > 1e-12)
                tangent.col(i).head<3>() =
                    cfg.lambda_eikonal / double(n_off) * 2.0 * (gnorm - 1.0) * g / gnorm;
        }
    }
    terms.value /= double(n);
    if (n_surface > 0) terms.surface_grad /= double(n_surface);
    if (n_off > 0) terms.eikonal /= double(n_off);
    terms.total = cfg.lambda_value * terms.value + cfg.lambda_surface_grad * terms.surface_grad +
                  cfg.lambda_eikonal * terms.eikonal;

    if (grads) {
        JvpCache jcache;
        net.jvp(cache, tangent, &jcache);
        net.backward_over_jvp(cache, jcache, value_bar, MatrixXd::Ones(1, n), grads, nullptr);
    }
    return terms;
}

struct SdfEvalResult {
    double mae = 0.0;
    double mre_pct = 0.0;
    int mre_excluded = 0;  // samples with |s| < 1e-6, skipped in MRE
};

inline SdfEvalResult evaluate_sdf(const Mlp& net, const SdfBatch& batch) {
    const MatrixXd f = net.forward(batch.inputs);
    SdfEvalResult r;
    int mre_count = 0;
    for (int i = 0; i < batch.size(); ++i) {
        const double err = std::abs(f(0, i) - batch.targets[i]);
        r.mae += err;
        if (std::abs(batch.targets[i]) < 1e-6) {
            ++r.mre_excluded;
        } else {
            r.mre_pct += err / std::abs(batch.targets[i]) * 100.0;
            ++mre_count;
        }
    }
    r.mae /= double(batch.size());
    if (mre_count > 0) r.mre_pct /= double(mre_count);
    return r;
}

// learned engine: values straight from the net, gradients normalized (the
// approximate field need not satisfy the Eikonal property), curvature exact
class NeuralSdf : public SdfEngine {
public:
    NeuralSdf(const Mlp& net, VectorXd conditioning)
        : net_(&net), conditioning_(std::move(conditioning)) {
        if (net.input_dim() != 3 + int(conditioning_.size()))
            throw Error("NeuralSdf: conditioning width does not match the net");
    }

    SignedDistanceResult query(const Vec3& q) const override {
        std::vector<SignedDistanceResult> out;
        query_batch({q}, out);
        return out.front();
    }

    void query_batch(const std::vector<Vec3>& points,
                     std::vector<SignedDistanceResult>& out) const override {
        const MatrixXd x = pack(points);
        ForwardCache cache;
        const MatrixXd f = net_->forward(x, &cache);
        MatrixXd grads;
        net_->backward(cache, MatrixXd::Ones(1, int(points.size())), nullptr, &grads);
        out.resize(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            auto& r = out[i];
            r.value = f(0, int(i));
            r.raw_gradient = grads.col(int(i)).head<3>();
            const double len = r.raw_gradient.norm();
            if (len < 1e-9) {
                r.gradient = Vec3::Zero();
                r.degenerate_gradient = true;
            } else {
                r.gradient = r.raw_gradient / len;
            }
        }
    }

    void hessian_vp_batch(const std::vector<Vec3>& points, const std::vector<Vec3>& tangents,
                          std::vector<Vec3>& out) const override {
        if (points.size() != tangents.size()) throw Error("hessian_vp_batch: size mismatch");
        const MatrixXd x = pack(points);
        MatrixXd v = MatrixXd::Zero(x.rows(), x.cols());
        for (std::size_t i = 0; i < tangents.size(); ++i)
            v.col(int(i)).head<3>() = tangents[i];
        ForwardCache cache;
        net_->forward(x, &cache);
        JvpCache jcache;
        net_->jvp(cache, v, &jcache);
        MatrixXd xbar;
        net_->backward_over_jvp(cache, jcache, MatrixXd::Zero(1, x.cols()),
                                MatrixXd::Ones(1, x.cols()), nullptr, &xbar);
        out.resize(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = xbar.col(int(i)).head<3>();
    }

    bool has_curvature() const override { return true; }

    const Mlp& net() const { return *net_; }
    const VectorXd& conditioning() const { return conditioning_; }

private:
    MatrixXd pack(const std::vector<Vec3>& points) const {
        MatrixXd x(3 + conditioning_.size(), int(points.size()));
        for (std::size_t i = 0; i < points.size(); ++i) {
            x.block(0, int(i), 3, 1) = points[i];
            if (conditioning_.size() > 0)
                x.block(3, int(i), conditioning_.size(), 1) = conditioning_;
        }
        return x;
    }

    const Mlp* net_;
    VectorXd conditioning_;
};

}  // namespace refu
