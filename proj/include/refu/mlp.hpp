// Dense multilayer perceptron with batched evaluation (samples are matrix
// columns), reverse-mode weight/input gradients, forward-mode directional
// derivatives, and reverse-mode through the forward-mode pass. The last of
// these gives exact weight gradients of expressions containing the input
// gradient of the network (Eikonal and normal-matching terms) and exact
// Hessian-vector products without a full second-order tape.
//
// Conventions: ReLU'(0) = 0, Softplus is evaluated in log1p-stable form.
#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "refu/core.hpp"

namespace refu {

enum class Activation { Identity, Relu, Softplus };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Softplus: return "softplus";
    }
    return "identity";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "relu") return Activation::Relu;
    if (s == "softplus") return Activation::Softplus;
    throw Error("unknown activation: " + s);
}

inline double softplus(double z, double beta) {
    const double bz = beta * z;
    if (bz > 0.0) return z + std::log1p(std::exp(-bz)) / beta;
    return std::log1p(std::exp(bz)) / beta;
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct DenseLayer {
    MatrixXd W;  // out x in
    VectorXd b;
    Activation act = Activation::Identity;
    double softplus_beta = 100.0;

    int out_dim() const { return int(W.rows()); }
    int in_dim() const { return int(W.cols()); }
};

struct MlpGrads {
    std::vector<MatrixXd> dW;
    std::vector<VectorXd> db;

    void init_like(const std::vector<DenseLayer>& layers) {
        dW.clear();
        db.clear();
        for (const auto& l : layers) {
            dW.emplace_back(MatrixXd::Zero(l.W.rows(), l.W.cols()));
            db.emplace_back(VectorXd::Zero(l.b.size()));
        }
    }
    void set_zero() {
        for (auto& m : dW) m.setZero();
        for (auto& v : db) v.setZero();
    }
    void add(const MlpGrads& o, double scale = 1.0) {
        for (std::size_t i = 0; i < dW.size(); ++i) {
            dW[i] += scale * o.dW[i];
            db[i] += scale * o.db[i];
        }
    }
    void scale(double s) {
        for (auto& m : dW) m *= s;
        for (auto& v : db) v *= s;
    }
};

struct ForwardCache {
    MatrixXd input;             // d x B
    std::vector<MatrixXd> pre;  // z_l
    std::vector<MatrixXd> post; // act(z_l)
};

struct JvpCache {
    MatrixXd tangent;            // d x B
    std::vector<MatrixXd> tpre;  // tz_l
    std::vector<MatrixXd> tpost; // act'(z_l) .* tz_l
};

class Mlp {
public:
    Mlp() = default;

    // hidden activations share `act`; the output layer is linear
    Mlp(int input_dim, const std::vector<int>& hidden, int output_dim, Activation act,
        int skip_layer = -1, double softplus_beta = 100.0)
        : input_dim_(input_dim), skip_layer_(skip_layer) {
        if (input_dim <= 0 || output_dim <= 0) throw Error("Mlp: nonpositive dimension");
        if (skip_layer == 0) throw Error("Mlp: skip at the input layer is meaningless");
        if (skip_layer >= int(hidden.size()) + 1)
            throw Error("Mlp: skip layer index exceeds layer count");
        int prev = input_dim;
        for (std::size_t i = 0; i < hidden.size() + 1; ++i) {
            const bool last = i == hidden.size();
            const int out = last ? output_dim : hidden[i];
            const int in = int(i) == skip_layer ? prev + input_dim : prev;
            DenseLayer layer;
            layer.W = MatrixXd::Zero(out, in);
            layer.b = VectorXd::Zero(out);
            layer.act = last ? Activation::Identity : act;
            layer.softplus_beta = softplus_beta;
            layers_.push_back(std::move(layer));
            prev = out;
        }
    }

    int input_dim() const { return input_dim_; }
    int output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }
    int skip_layer() const { return skip_layer_; }
    int layer_count() const { return int(layers_.size()); }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.W.size() + l.b.size();
        return n;
    }

    // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
    void init_weights(std::mt19937_64& rng) {
        for (auto& l : layers_) {
            const double bound = 1.0 / std::sqrt(double(l.in_dim()));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (int i = 0; i < l.W.rows(); ++i)
                for (int j = 0; j < l.W.cols(); ++j) l.W(i, j) = dist(rng);
            for (int i = 0; i < l.b.size(); ++i) l.b(i) = dist(rng);
        }
    }

    MatrixXd forward(const MatrixXd& x, ForwardCache* cache = nullptr) const {
        if (x.rows() != input_dim_)
            throw Error("Mlp::forward: input has " + std::to_string(x.rows()) +
                        " rows, expected " + std::to_string(input_dim_));
        if (cache) {
            cache->input = x;
            cache->pre.resize(layers_.size());
            cache->post.resize(layers_.size());
        }
        MatrixXd cur = x;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& layer = layers_[l];
            MatrixXd z;
            if (int(l) == skip_layer_) {
                MatrixXd joined(cur.rows() + x.rows(), x.cols());
                joined << cur, x;
                z = layer.W * joined;
            } else {
                z = layer.W * cur;
            }
            z.colwise() += layer.b;
            MatrixXd a = apply_act(layer, z);
            if (cache) {
                cache->pre[l] = z;
                cache->post[l] = a;
            }
            cur = std::move(a);
        }
        return cur;
    }

    // Reverse mode. Adds weight gradients into `grads` (when given) and the
    // input cotangent into `input_bar` (when given).
    void backward(const ForwardCache& cache, const MatrixXd& out_bar, MlpGrads* grads,
                  MatrixXd* input_bar) const {
        if (cache.pre.empty()) throw Error("Mlp::backward: missing forward cache");
        MatrixXd abar = out_bar;
        MatrixXd xbar = MatrixXd::Zero(cache.input.rows(), cache.input.cols());
        for (int l = int(layers_.size()) - 1; l >= 0; --l) {
            const auto& layer = layers_[l];
            const MatrixXd zbar = abar.cwiseProduct(act_deriv(layer, cache.pre[l]));
            if (grads) {
                accumulate_weight_grad(l, zbar, cache, *grads);
                grads->db[l] += zbar.rowwise().sum();
            }
            const MatrixXd ibar = layer.W.transpose() * zbar;
            route_input_cotangent(l, ibar, abar, xbar);
        }
        if (input_bar) *input_bar = std::move(xbar);
    }

    // Forward-mode directional derivative with per-column tangents.
    MatrixXd jvp(const ForwardCache& cache, const MatrixXd& tangent, JvpCache* jcache = nullptr) const {
        if (cache.pre.empty()) throw Error("Mlp::jvp: missing forward cache");
        if (jcache) {
            jcache->tangent = tangent;
            jcache->tpre.resize(layers_.size());
            jcache->tpost.resize(layers_.size());
        }
        MatrixXd tcur = tangent;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& layer = layers_[l];
            MatrixXd tz;
            if (int(l) == skip_layer_) {
                MatrixXd joined(tcur.rows() + tangent.rows(), tangent.cols());
                joined << tcur, tangent;
                tz = layer.W * joined;
            } else {
                tz = layer.W * tcur;
            }
            MatrixXd ta = tz.cwiseProduct(act_deriv(layer, cache.pre[l]));
            if (jcache) {
                jcache->tpre[l] = tz;
                jcache->tpost[l] = ta;
            }
            tcur = std::move(ta);
        }
        return tcur;
    }

    // Reverse mode through forward(x) and jvp(x, tangent) jointly: given
    // cotangents of the primal output and of the tangent output, accumulates
    // exact weight gradients and the primal input cotangent. The tangent is
    // treated as a constant. Requires both caches.
    void backward_over_jvp(const ForwardCache& cache, const JvpCache& jcache,
                           const MatrixXd& out_bar, const MatrixXd& tangent_out_bar,
                           MlpGrads* grads, MatrixXd* input_bar) const {
        if (cache.pre.empty() || jcache.tpre.empty())
            throw Error("Mlp::backward_over_jvp: missing cache");
        MatrixXd abar = out_bar;
        MatrixXd tbar = tangent_out_bar;
        MatrixXd xbar = MatrixXd::Zero(cache.input.rows(), cache.input.cols());
        for (int l = int(layers_.size()) - 1; l >= 0; --l) {
            const auto& layer = layers_[l];
            const MatrixXd s1 = act_deriv(layer, cache.pre[l]);
            // zbar collects the primal chain plus the curvature of the
            // activation acting on the tangent chain
            MatrixXd zbar = abar.cwiseProduct(s1);
            if (layer.act != Activation::Identity && layer.act != Activation::Relu)
                zbar += act_second_deriv(layer, cache.pre[l])
                            .cwiseProduct(jcache.tpre[l])
                            .cwiseProduct(tbar);
            const MatrixXd tzbar = tbar.cwiseProduct(s1);
            if (grads) {
                accumulate_weight_grad(l, zbar, cache, *grads);
                accumulate_weight_grad_tangent(l, tzbar, jcache, *grads);
                grads->db[l] += zbar.rowwise().sum();
            }
            const MatrixXd ibar = layer.W.transpose() * zbar;
            const MatrixXd tibar = layer.W.transpose() * tzbar;
            route_input_cotangent(l, ibar, abar, xbar);
            route_tangent_cotangent(l, tibar, tbar);
        }
        if (input_bar) *input_bar = std::move(xbar);
    }

private:
    MatrixXd apply_act(const DenseLayer& layer, const MatrixXd& z) const {
        switch (layer.act) {
            case Activation::Identity: return z;
            case Activation::Relu: return z.cwiseMax(0.0);
            case Activation::Softplus: {
                const double beta = layer.softplus_beta;
                return z.unaryExpr([beta](double v) { return softplus(v, beta); });
            }
        }
        return z;
    }

    MatrixXd act_deriv(const DenseLayer& layer, const MatrixXd& z) const {
        switch (layer.act) {
            case Activation::Identity: return MatrixXd::Ones(z.rows(), z.cols());
            case Activation::Relu:
                return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
            case Activation::Softplus: {
                const double beta = layer.softplus_beta;
                return z.unaryExpr([beta](double v) { return sigmoid(beta * v); });
            }
        }
        return MatrixXd::Ones(z.rows(), z.cols());
    }

    MatrixXd act_second_deriv(const DenseLayer& layer, const MatrixXd& z) const {
        switch (layer.act) {
            case Activation::Identity:
            case Activation::Relu: return MatrixXd::Zero(z.rows(), z.cols());
            case Activation::Softplus: {
                const double beta = layer.softplus_beta;
                return z.unaryExpr([beta](double v) {
                    const double s = sigmoid(beta * v);
                    return beta * s * (1.0 - s);
                });
            }
        }
        return MatrixXd::Zero(z.rows(), z.cols());
    }

    void accumulate_weight_grad(int l, const MatrixXd& zbar, const ForwardCache& cache,
                                MlpGrads& grads) const {
        if (l == skip_layer_) {
            const MatrixXd& prev = l == 0 ? cache.input : cache.post[l - 1];
            grads.dW[l].leftCols(prev.rows()) += zbar * prev.transpose();
            grads.dW[l].rightCols(cache.input.rows()) += zbar * cache.input.transpose();
        } else {
            const MatrixXd& in = l == 0 ? cache.input : cache.post[l - 1];
            grads.dW[l] += zbar * in.transpose();
        }
    }

    void accumulate_weight_grad_tangent(int l, const MatrixXd& tzbar, const JvpCache& jcache,
                                        MlpGrads& grads) const {
        if (l == skip_layer_) {
            const MatrixXd& prev = l == 0 ? jcache.tangent : jcache.tpost[l - 1];
            grads.dW[l].leftCols(prev.rows()) += tzbar * prev.transpose();
            grads.dW[l].rightCols(jcache.tangent.rows()) += tzbar * jcache.tangent.transpose();
        } else {
            const MatrixXd& tin = l == 0 ? jcache.tangent : jcache.tpost[l - 1];
            grads.dW[l] += tzbar * tin.transpose();
        }
    }

    void route_input_cotangent(int l, const MatrixXd& ibar, MatrixXd& abar, MatrixXd& xbar) const {
        if (l == skip_layer_) {
            const int prev_rows = int(ibar.rows()) - input_dim_;
            abar = ibar.topRows(prev_rows);
            xbar += ibar.bottomRows(input_dim_);
        } else if (l == 0) {
            xbar += ibar;
        } else {
            abar = ibar;
        }
    }

    void route_tangent_cotangent(int l, const MatrixXd& tibar, MatrixXd& tbar) const {
        if (l == skip_layer_) {
            tbar = tibar.topRows(int(tibar.rows()) - input_dim_);
        } else if (l != 0) {
            tbar = tibar;
        }
    }

    int input_dim_ = 0;
    int skip_layer_ = -1;
    std::vector<DenseLayer> layers_;
};

}  // namespace refu
