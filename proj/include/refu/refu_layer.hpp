// The repulsive-force unit: for every garment vertex with negative body-SDF
// value, displace it along the normalized SDF gradient by alpha * f(x). The
// scale alpha is either fixed at 1 or predicted per vertex from a global
// garment latent and the vertex's SDF value; its range is [1, inf) when the
// engine is exact (every penetrating vertex lands outside) and [0, inf) when
// the engine is approximate. The whole layer is differentiable: backward
// produces cotangents for the input positions and for the h/k/g networks,
// treating the engine's value and gradient as functions of x (the exact
// engine contributes no curvature term).
#pragma once

#include <memory>

#include "refu/adam.hpp"
#include "refu/body_state.hpp"
#include "refu/mlp.hpp"
#include "refu/sdf_engine.hpp"

namespace refu {

enum class ScaleMode { Fixed, Predicted };
enum class RangeMode { Accurate, Approximate };
enum class AlphaVariant { PerVertex, SharedLatent, SdfOnly };
enum class SdfMode { Exact, Neural, Hybrid };

inline const char* sdf_mode_name(SdfMode m) {
    switch (m) {
        case SdfMode::Exact: return "acc";
        case SdfMode::Neural: return "approx";
        case SdfMode::Hybrid: return "hybrid";
    }
    return "acc";
}

struct RefuConfig {
    int global_latent_width = 64;  // M, paper preset 1024
    int vertex_latent_width = 10;  // D
    int h_hidden_width = 64;       // width of h's three hidden layers, paper 1024
    int g_hidden_width = 10;       // width of g's two hidden layers
    ScaleMode scale_mode = ScaleMode::Predicted;
    RangeMode range_mode = RangeMode::Accurate;
    AlphaVariant variant = AlphaVariant::PerVertex;
    SdfMode sdf_mode = SdfMode::Exact;
    int garment_vertex_count = 0;  // N, binds k's output width
    int shared_latent_width = 0;   // D' for the shared-latent variant; 0 = auto-match
    int sdf_only_width = 0;        // hidden width of the SDF-only variant; 0 = auto-match
    double gradient_guard = 1e-9;  // |grad f| below this leaves the vertex unmoved

    void validate() const {
        if (scale_mode == ScaleMode::Predicted && garment_vertex_count <= 0)
            throw Error("RefuConfig: predicted scale needs a bound garment vertex count");
    }
};

// h, k, g from the paper's scale predictor. For the shared-latent variant k
// maps to one latent of width D'; for the SDF-only variant h and k are unused.
struct AlphaNets {
    Mlp h;
    Mlp k;
    Mlp g;

    std::size_t parameter_count(AlphaVariant variant) const {
        switch (variant) {
            case AlphaVariant::PerVertex:
            case AlphaVariant::SharedLatent:
                return h.parameter_count() + k.parameter_count() + g.parameter_count();
            case AlphaVariant::SdfOnly: return g.parameter_count();
        }
        return 0;
    }
};

namespace refu_detail {

inline std::size_t main_variant_params(const RefuConfig& cfg, int feature_dim) {
    RefuConfig main = cfg;
    main.variant = AlphaVariant::PerVertex;
    const int m = cfg.global_latent_width, d = cfg.vertex_latent_width;
    const int n = cfg.garment_vertex_count, hh = cfg.h_hidden_width, gh = cfg.g_hidden_width;
    std::size_t h = std::size_t(feature_dim + 1) * hh + std::size_t(hh + 1) * hh * 2 +
                    std::size_t(hh + 1) * m;
    std::size_t k = std::size_t(m + 1) * n * d;
    std::size_t g = std::size_t(d + 2) * gh + std::size_t(gh + 1) * gh + std::size_t(gh + 1);
    return h + k + g;
}

}  // namespace refu_detail

// Builds the scale-predictor stack for the configured variant. The
// alternative variants are sized to match the main variant's trainable
// parameter count within 5% so ablations compare like for like.
inline AlphaNets make_alpha_nets(RefuConfig& cfg, int feature_dim, std::mt19937_64& rng) {
    cfg.validate();
    AlphaNets nets;
    const int m = cfg.global_latent_width, d = cfg.vertex_latent_width;
    const int n = cfg.garment_vertex_count;
    const std::vector<int> h_hidden(3, cfg.h_hidden_width);
    const std::vector<int> g_hidden(2, cfg.g_hidden_width);

    switch (cfg.variant) {
        case AlphaVariant::PerVertex:
            nets.h = Mlp(feature_dim, h_hidden, m, Activation::Relu);
            nets.k = Mlp(m, {}, n * d, Activation::Relu);
            nets.g = Mlp(d + 1, g_hidden, 1, Activation::Relu);
            break;
        case AlphaVariant::SharedLatent: {
            if (cfg.shared_latent_width <= 0) {
                // params(k' + g) ~= D' * (M + 1 + gh) + const; match the main k + g
                const std::size_t main_kg = std::size_t(m + 1) * n * d +
                                            std::size_t(d + 2) * cfg.g_hidden_width +
                                            std::size_t(cfg.g_hidden_width + 1) *
                                                cfg.g_hidden_width +
                                            std::size_t(cfg.g_hidden_width + 1);
                cfg.shared_latent_width =
                    std::max(1, int(main_kg / std::size_t(m + 1 + cfg.g_hidden_width)));
            }
            const int dp = cfg.shared_latent_width;
            nets.h = Mlp(feature_dim, h_hidden, m, Activation::Relu);
            nets.k = Mlp(m, {}, dp, Activation::Relu);
            nets.g = Mlp(dp + 1, g_hidden, 1, Activation::Relu);
            break;
        }
        case AlphaVariant::SdfOnly: {
            if (cfg.sdf_only_width <= 0) {
                // g' alone carries the whole budget: params ~= W^2 + 4W + 1
                const double budget = double(refu_detail::main_variant_params(cfg, feature_dim));
                cfg.sdf_only_width = std::max(4, int(std::lround(std::sqrt(budget))));
            }
            nets.g = Mlp(1, {cfg.sdf_only_width, cfg.sdf_only_width}, 1, Activation::Relu);
            break;
        }
    }
    if (cfg.variant != AlphaVariant::SdfOnly) {
        nets.h.init_weights(rng);
        nets.k.init_weights(rng);
    }
    nets.g.init_weights(rng);
    return nets;
}

inline VectorXd global_latent(const VectorXd& features, const Mlp& h, ForwardCache* cache = nullptr) {
    return h.forward(features, cache).col(0);
}

// range enforcement: acc mode 1 + softplus, approx mode softplus (beta = 1)
inline double range_activation(double pre, RangeMode mode) {
    const double sp = softplus(pre, 1.0);
    return mode == RangeMode::Accurate ? 1.0 + sp : sp;
}
inline double range_activation_deriv(double pre) { return sigmoid(pre); }

struct ScalePrediction {
    VectorXd alpha;   // per vertex
    VectorXd preact;  // before the range activation
    ForwardCache h_cache, k_cache, g_cache;
    MatrixXd g_inputs;
};

inline ScalePrediction predict_scale(const VectorXd& features, const VectorXd& f_values,
                                     const RefuConfig& cfg, const AlphaNets& nets) {
    const int n = int(f_values.size());
    ScalePrediction out;
    switch (cfg.variant) {
        case AlphaVariant::PerVertex: {
            const VectorXd z = global_latent(features, nets.h, &out.h_cache);
            const VectorXd lat = nets.k.forward(z, &out.k_cache).col(0);
            const int d = cfg.vertex_latent_width;
            if (int(lat.size()) != n * d)
                throw Error("predict_scale: k output does not match N x D");
            out.g_inputs.resize(d + 1, n);
            for (int i = 0; i < n; ++i) {
                out.g_inputs.block(0, i, d, 1) = lat.segment(std::ptrdiff_t(i) * d, d);
                out.g_inputs(d, i) = f_values[i];
            }
            break;
        }
        case AlphaVariant::SharedLatent: {
            const VectorXd z = global_latent(features, nets.h, &out.h_cache);
            const VectorXd lat = nets.k.forward(z, &out.k_cache).col(0);
            const int dp = int(lat.size());
            out.g_inputs.resize(dp + 1, n);
            for (int i = 0; i < n; ++i) {
                out.g_inputs.block(0, i, dp, 1) = lat;
                out.g_inputs(dp, i) = f_values[i];
            }
            break;
        }
        case AlphaVariant::SdfOnly: {
            out.g_inputs.resize(1, n);
            for (int i = 0; i < n; ++i) out.g_inputs(0, i) = f_values[i];
            break;
        }
    }
    out.preact = nets.g.forward(out.g_inputs, &out.g_cache).row(0);
    out.alpha.resize(n);
    for (int i = 0; i < n; ++i) out.alpha[i] = range_activation(out.preact[i], cfg.range_mode);
    return out;
}

struct RefuOutput {
    std::vector<Vec3> positions;  // x'
    VectorXd alpha;               // 1.0 everywhere in fixed mode
    VectorXd f;                   // engine value at the input positions
    std::vector<char> moved;
    std::vector<char> degenerate_flags;  // guarded vertices, left unmoved
    // backward caches
    std::vector<SignedDistanceResult> sdf;
    std::vector<Vec3> input_positions;
    ScalePrediction scale;
    bool predicted = false;
};

inline RefuOutput apply_refu(const std::vector<Vec3>& positions, const SdfEngine& engine,
                             const VectorXd& garment_features, const RefuConfig& cfg,
                             const AlphaNets* nets) {
    const int n = int(positions.size());
    RefuOutput out;
    out.input_positions = positions;
    engine.query_batch(positions, out.sdf);
    out.f.resize(n);
    for (int i = 0; i < n; ++i) out.f[i] = out.sdf[std::size_t(i)].value;

    out.predicted = cfg.scale_mode == ScaleMode::Predicted;
    if (out.predicted) {
        if (!nets) throw Error("apply_refu: predicted scale without networks");
        out.scale = predict_scale(garment_features, out.f, cfg, *nets);
        out.alpha = out.scale.alpha;
    } else {
        out.alpha = VectorXd::Ones(n);
    }

    out.positions.resize(n);
    out.moved.assign(n, 0);
    out.degenerate_flags.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        const auto& q = out.sdf[std::size_t(i)];
        if (q.value < 0.0) {
            if (q.degenerate_gradient) {
                out.degenerate_flags[std::size_t(i)] = 1;  // Eq. 3 undefined, leave unmoved
                out.positions[std::size_t(i)] = positions[std::size_t(i)];
                continue;
            }
            const double d = out.alpha[i] * q.value;
            out.positions[std::size_t(i)] = positions[std::size_t(i)] - d * q.gradient;
            out.moved[std::size_t(i)] = 1;
        } else {
            out.positions[std::size_t(i)] = positions[std::size_t(i)];
        }
    }
    return out;
}

struct RefuCotangents {
    MatrixXd positions_bar;  // 3 x N, cotangent for the backbone output
    MlpGrads h, k, g;        // empty in fixed mode
};

// Exact reverse mode through the displacement, the gradient normalization,
// and the scale networks. The engine supplies d(grad f)/dx as Hessian-vector
// products where it can (neural); the exact engine's curvature is dropped.
inline RefuCotangents refu_backward(const RefuOutput& out, const MatrixXd& upstream,
                                    const SdfEngine& engine, const RefuConfig& cfg,
                                    const AlphaNets* nets) {
    const int n = int(out.positions.size());
    if (upstream.rows() != 3 || upstream.cols() != n)
        throw Error("refu_backward: upstream shape mismatch");
    if (out.input_positions.empty()) throw Error("refu_backward: missing forward cache");

    RefuCotangents cot;
    cot.positions_bar = upstream;  // identity path for every vertex

    VectorXd alpha_bar = VectorXd::Zero(n);
    VectorXd f_bar = VectorXd::Zero(n);
    std::vector<Vec3> rawgrad_bar(std::size_t(n), Vec3::Zero());
    std::vector<int> moved_ids;
    for (int i = 0; i < n; ++i) {
        if (!out.moved[std::size_t(i)]) continue;
        moved_ids.push_back(i);
        const auto& q = out.sdf[std::size_t(i)];
        const Vec3 w = upstream.col(i);
        const Vec3 ghat = q.gradient;
        const double gw = ghat.dot(w);
        alpha_bar[i] = -q.value * gw;
        f_bar[i] = -out.alpha[i] * gw;
        const Vec3 ghat_bar = -out.alpha[i] * q.value * w;
        const double raw_norm = q.raw_gradient.norm();
        rawgrad_bar[std::size_t(i)] = (ghat_bar - ghat * ghat.dot(ghat_bar)) / raw_norm;
    }

    if (out.predicted && nets) {
        // alpha_i = range(g(...)); push the cotangent through g, k, h
        MatrixXd pre_bar = MatrixXd::Zero(1, n);
        for (int i : moved_ids)
            pre_bar(0, i) = alpha_bar[i] * range_activation_deriv(out.scale.preact[i]);
        cot.g.init_like(nets->g.layers());
        MatrixXd g_in_bar;
        nets->g.backward(out.scale.g_cache, pre_bar, &cot.g, &g_in_bar);
        const int f_row = int(g_in_bar.rows()) - 1;
        for (int i = 0; i < n; ++i) f_bar[i] += g_in_bar(f_row, i);

        if (cfg.variant != AlphaVariant::SdfOnly) {
            MatrixXd k_out_bar;
            if (cfg.variant == AlphaVariant::PerVertex) {
                const int d = cfg.vertex_latent_width;
                k_out_bar = MatrixXd::Zero(std::ptrdiff_t(n) * d, 1);
                for (int i = 0; i < n; ++i)
                    k_out_bar.block(std::ptrdiff_t(i) * d, 0, d, 1) = g_in_bar.block(0, i, d, 1);
            } else {
                // one shared latent feeds every column
                k_out_bar = g_in_bar.topRows(f_row).rowwise().sum();
            }
            cot.k.init_like(nets->k.layers());
            MatrixXd z_bar;
            nets->k.backward(out.scale.k_cache, k_out_bar, &cot.k, &z_bar);
            cot.h.init_like(nets->h.layers());
            nets->h.backward(out.scale.h_cache, z_bar, &cot.h, nullptr);
        }
    }

    // df/dx = raw gradient; curvature of the gradient via the engine
    for (int i = 0; i < n; ++i) {
        if (out.moved[std::size_t(i)] || f_bar[i] != 0.0)
            cot.positions_bar.col(i) += f_bar[i] * out.sdf[std::size_t(i)].raw_gradient;
    }
    if (!moved_ids.empty() && engine.has_curvature()) {
        std::vector<Vec3> pts, tangents, hvp;
        pts.reserve(moved_ids.size());
        tangents.reserve(moved_ids.size());
        for (int i : moved_ids) {
            pts.push_back(out.input_positions[std::size_t(i)]);
            tangents.push_back(rawgrad_bar[std::size_t(i)]);
        }
        engine.hessian_vp_batch(pts, tangents, hvp);
        for (std::size_t k = 0; k < moved_ids.size(); ++k)
            cot.positions_bar.col(moved_ids[k]) += hvp[k];
    }
    return cot;
}

}  // namespace refu
