// Versioned JSON checkpoint container for networks and optimizer state.
// Weights are stored row-major as 64-bit doubles; nlohmann::json prints
// shortest round-trip representations, so save/load is bit-exact.
#pragma once

#include <fstream>
#include <json.hpp>
#include <string>

#include "refu/adam.hpp"
#include "refu/mlp.hpp"

namespace refu {

using nlohmann::json;

inline json mlp_to_json(const Mlp& net) {
    json j;
    j["format"] = "refu-mlp";
    j["version"] = 1;
    j["input_dim"] = net.input_dim();
    j["skip_layer"] = net.skip_layer();
    json layers = json::array();
    for (const auto& l : net.layers()) {
        json jl;
        jl["out"] = l.out_dim();
        jl["in"] = l.in_dim();
        jl["act"] = activation_name(l.act);
        jl["softplus_beta"] = l.softplus_beta;
        std::vector<double> w(l.W.size());
        for (int r = 0; r < l.W.rows(); ++r)
            for (int c = 0; c < l.W.cols(); ++c) w[std::size_t(r) * l.W.cols() + c] = l.W(r, c);
        jl["W"] = w;
        jl["b"] = std::vector<double>(l.b.data(), l.b.data() + l.b.size());
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j;
}

inline Mlp mlp_from_json(const json& j) {
    if (j.value("format", "") != "refu-mlp") throw Error("checkpoint: not a refu-mlp container");
    if (j.value("version", 0) != 1) throw Error("checkpoint: unsupported version");
    Mlp net;
    // reconstruct via a scratch network, then overwrite layer storage
    std::vector<int> hidden;
    const auto& jlayers = j.at("layers");
    for (std::size_t i = 0; i + 1 < jlayers.size(); ++i) hidden.push_back(jlayers[i].at("out"));
    const int out_dim = jlayers.back().at("out");
    const Activation act = jlayers.size() > 1
                               ? activation_from_name(jlayers[0].at("act").get<std::string>())
                               : Activation::Identity;
    const double beta = jlayers[0].value("softplus_beta", 100.0);
    net = Mlp(j.at("input_dim"), hidden, out_dim, act, j.at("skip_layer"), beta);
    auto& layers = net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& jl = jlayers[i];
        auto& l = layers[i];
        l.act = activation_from_name(jl.at("act").get<std::string>());
        l.softplus_beta = jl.value("softplus_beta", 100.0);
        const int out = jl.at("out"), in = jl.at("in");
        if (out != l.out_dim() || in != l.in_dim())
            throw Error("checkpoint: layer shape mismatch");
        const auto w = jl.at("W").get<std::vector<double>>();
        const auto b = jl.at("b").get<std::vector<double>>();
        if (int(w.size()) != out * in || int(b.size()) != out)
            throw Error("checkpoint: layer payload size mismatch");
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) l.W(r, c) = w[std::size_t(r) * in + c];
        for (int r = 0; r < out; ++r) l.b(r) = b[std::size_t(r)];
    }
    return net;
}

inline json grads_to_json(const MlpGrads& g) {
    json j = json::array();
    for (std::size_t i = 0; i < g.dW.size(); ++i) {
        json jl;
        std::vector<double> w(g.dW[i].size());
        for (int r = 0; r < g.dW[i].rows(); ++r)
            for (int c = 0; c < g.dW[i].cols(); ++c)
                w[std::size_t(r) * g.dW[i].cols() + c] = g.dW[i](r, c);
        jl["W"] = w;
        jl["b"] = std::vector<double>(g.db[i].data(), g.db[i].data() + g.db[i].size());
        j.push_back(std::move(jl));
    }
    return j;
}

inline void grads_from_json(const json& j, MlpGrads& g) {
    if (j.size() != g.dW.size()) throw Error("checkpoint: moment layout mismatch");
    for (std::size_t i = 0; i < g.dW.size(); ++i) {
        const auto w = j[i].at("W").get<std::vector<double>>();
        const auto b = j[i].at("b").get<std::vector<double>>();
        if (int(w.size()) != g.dW[i].size() || int(b.size()) != g.db[i].size())
            throw Error("checkpoint: moment payload size mismatch");
        for (int r = 0; r < g.dW[i].rows(); ++r)
            for (int c = 0; c < g.dW[i].cols(); ++c)
                g.dW[i](r, c) = w[std::size_t(r) * g.dW[i].cols() + c];
        for (int r = 0; r < g.db[i].size(); ++r) g.db[i](r) = b[std::size_t(r)];
    }
}

inline json adam_to_json(const AdamState& s) {
    json j;
    j["step"] = s.step_count();
    j["lr"] = s.config().lr;
    j["beta1"] = s.config().beta1;
    j["beta2"] = s.config().beta2;
    j["eps"] = s.config().eps;
    j["m"] = grads_to_json(s.first_moments());
    j["v"] = grads_to_json(s.second_moments());
    return j;
}

inline AdamState adam_from_json(const json& j, const Mlp& net) {
    AdamConfig cfg;
    cfg.lr = j.at("lr");
    cfg.beta1 = j.at("beta1");
    cfg.beta2 = j.at("beta2");
    cfg.eps = j.at("eps");
    AdamState s(net, cfg);
    s.set_step_count(j.at("step"));
    grads_from_json(j.at("m"), s.first_moments());
    grads_from_json(j.at("v"), s.second_moments());
    return s;
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw Error("I/O failure while writing " + path);
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error(path + ": " + e.what());
    }
    return j;
}

inline void save_mlp(const Mlp& net, const std::string& path) { save_json(mlp_to_json(net), path); }
inline Mlp load_mlp(const std::string& path) { return mlp_from_json(load_json(path)); }

}  // namespace refu
