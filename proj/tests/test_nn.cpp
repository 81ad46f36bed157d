#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "refu/adam.hpp"
#include "refu/checkpoint.hpp"
#include "refu/mlp.hpp"
#include "support/oracles.hpp"

using namespace refu;

namespace {

MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

// scalar loss sum(c .* f(X)) whose exact output cotangent is c
double weighted_output_sum(const Mlp& net, const MatrixXd& x, const MatrixXd& c) {
    return (net.forward(x).array() * c.array()).sum();
}

}  // namespace

TEST_CASE("forward: identity layer reproduces the input") {
    Mlp net(3, {}, 3, Activation::Identity);
    net.layers()[0].W = MatrixXd::Identity(3, 3);
    net.layers()[0].b.setZero();
    MatrixXd x = random_matrix(3, 5, 1);
    CHECK((net.forward(x) - x).norm() == 0.0);
}

TEST_CASE("forward: softplus stable branches") {
    CHECK(softplus(0.0, 100.0) == Catch::Approx(std::log(2.0) / 100.0).epsilon(1e-12));
    CHECK(softplus(10.0, 100.0) == Catch::Approx(10.0).margin(1e-12));
    CHECK(softplus(-10.0, 100.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(std::isfinite(softplus(1e6, 100.0)));
}

TEST_CASE("forward: dimension mismatch throws") {
    Mlp net(4, {8}, 2, Activation::Relu);
    CHECK_THROWS_AS(net.forward(MatrixXd::Zero(3, 1)), Error);
}

TEST_CASE("backward: linear net quadratic loss matches closed form") {
    // d/dW ||Wx - y||^2 = 2 (Wx - y) x^T
    Mlp net(3, {}, 2, Activation::Identity);
    net.layers()[0].W = random_matrix(2, 3, 2);
    net.layers()[0].b.setZero();
    const MatrixXd x = random_matrix(3, 1, 3);
    const MatrixXd y = random_matrix(2, 1, 4);

    ForwardCache cache;
    const MatrixXd out = net.forward(x, &cache);
    MlpGrads grads;
    grads.init_like(net.layers());
    net.backward(cache, 2.0 * (out - y), &grads, nullptr);

    const MatrixXd expect = 2.0 * (net.layers()[0].W * x - y) * x.transpose();
    CHECK((grads.dW[0] - expect).norm() < 1e-12);
}

TEST_CASE("backward: weight gradients match finite differences") {
    std::mt19937_64 rng(0);
    for (auto act : {Activation::Relu, Activation::Softplus}) {
        Mlp net(4, {16, 16, 16}, 2, act, /*skip_layer=*/2, /*softplus_beta=*/100.0);
        net.init_weights(rng);
        const MatrixXd x = random_matrix(4, 7, 10);
        const MatrixXd c = random_matrix(2, 7, 11);

        ForwardCache cache;
        net.forward(x, &cache);
        MlpGrads grads;
        grads.init_like(net.layers());
        MatrixXd xbar;
        net.backward(cache, c, &grads, &xbar);

        auto loss = [&] { return weighted_output_sum(net, x, c); };
        for (const auto& coord : oracle::sample_weight_coords(net, 6, 77)) {
            const double fd = oracle::fd_weight_derivative(net, coord, loss);
            const double an = oracle::grad_entry(grads, coord);
            CHECK(oracle::rel_err(an, fd, 1e-6) < 1e-5);
        }

        // input gradient against finite differences
        for (int r = 0; r < 4; ++r) {
            MatrixXd xp = x, xm = x;
            xp(r, 3) += 1e-6;
            xm(r, 3) -= 1e-6;
            const double fd =
                (weighted_output_sum(net, xp, c) - weighted_output_sum(net, xm, c)) / 2e-6;
            CHECK(oracle::rel_err(xbar(r, 3), fd, 1e-6) < 1e-5);
        }
    }
}

TEST_CASE("backward: relu subgradient at zero is zero") {
    Mlp net(1, {1}, 1, Activation::Relu);
    net.layers()[0].W << 1.0;
    net.layers()[0].b << 0.0;  // pre-activation exactly 0
    net.layers()[1].W << 1.0;
    net.layers()[1].b << 0.0;
    ForwardCache cache;
    net.forward(MatrixXd::Zero(1, 1), &cache);
    MatrixXd xbar;
    net.backward(cache, MatrixXd::Ones(1, 1), nullptr, &xbar);
    CHECK(xbar(0, 0) == 0.0);
}

TEST_CASE("jvp: linear map and zero tangent") {
    Mlp net(3, {}, 2, Activation::Identity);
    net.layers()[0].W = random_matrix(2, 3, 5);
    net.layers()[0].b = random_matrix(2, 1, 6).col(0);
    const MatrixXd x = random_matrix(3, 4, 7);
    ForwardCache cache;
    net.forward(x, &cache);

    const MatrixXd v = random_matrix(3, 4, 8);
    CHECK((net.jvp(cache, v) - net.layers()[0].W * v).norm() < 1e-14);
    CHECK(net.jvp(cache, MatrixXd::Zero(3, 4)).norm() == 0.0);
}

TEST_CASE("jvp matches finite differences on a random net") {
    std::mt19937_64 rng(1);
    Mlp net(5, {24, 24}, 3, Activation::Softplus, -1, 50.0);
    net.init_weights(rng);
    const MatrixXd x = random_matrix(5, 6, 20);
    const MatrixXd v = random_matrix(5, 6, 21);
    ForwardCache cache;
    net.forward(x, &cache);
    const MatrixXd jv = net.jvp(cache, v);

    const double h = 1e-6;
    const MatrixXd fd = (net.forward(x + h * v) - net.forward(x - h * v)) / (2 * h);
    for (int i = 0; i < jv.rows(); ++i)
        for (int j = 0; j < jv.cols(); ++j)
            CHECK(oracle::rel_err(jv(i, j), fd(i, j), 1e-6) < 1e-5);
}

TEST_CASE("forward-over-reverse: weight gradient of the input-gradient norm") {
    // phi(theta) = sum_i ||grad_x f(x_i)||^2 for a scalar-output net
    std::mt19937_64 rng(2);
    Mlp net(3, {16, 16}, 1, Activation::Softplus, -1, 10.0);
    net.init_weights(rng);
    const MatrixXd x = random_matrix(3, 5, 30);

    auto grad_norm_sq = [&] {
        ForwardCache cache;
        net.forward(x, &cache);
        MatrixXd g;
        net.backward(cache, MatrixXd::Ones(1, x.cols()), nullptr, &g);
        return g.squaredNorm();
    };

    ForwardCache cache;
    net.forward(x, &cache);
    MatrixXd g;
    net.backward(cache, MatrixXd::Ones(1, x.cols()), nullptr, &g);
    JvpCache jcache;
    net.jvp(cache, 2.0 * g, &jcache);
    MlpGrads grads;
    grads.init_like(net.layers());
    net.backward_over_jvp(cache, jcache, MatrixXd::Zero(1, x.cols()),
                          MatrixXd::Ones(1, x.cols()), &grads, nullptr);

    for (const auto& coord : oracle::sample_weight_coords(net, 5, 99)) {
        const double fd = oracle::fd_weight_derivative(net, coord, grad_norm_sq);
        const double an = oracle::grad_entry(grads, coord);
        CHECK(oracle::rel_err(an, fd, 1e-6) < 1e-4);
    }
}

TEST_CASE("forward-over-reverse input cotangent gives Hessian-vector products") {
    std::mt19937_64 rng(3);
    Mlp net(3, {12, 12}, 1, Activation::Softplus, -1, 10.0);
    net.init_weights(rng);
    const MatrixXd x = random_matrix(3, 1, 44);
    const MatrixXd u = random_matrix(3, 1, 45);

    ForwardCache cache;
    net.forward(x, &cache);
    JvpCache jcache;
    net.jvp(cache, u, &jcache);
    MatrixXd hu;
    net.backward_over_jvp(cache, jcache, MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1), nullptr,
                          &hu);

    // reference: FD of the input gradient along u
    auto input_grad = [&](const MatrixXd& xx) {
        ForwardCache c2;
        net.forward(xx, &c2);
        MatrixXd g;
        net.backward(c2, MatrixXd::Ones(1, 1), nullptr, &g);
        return g;
    };
    const double h = 1e-6;
    const MatrixXd fd = (input_grad(x + h * u) - input_grad(x - h * u)) / (2 * h);
    for (int i = 0; i < 3; ++i) CHECK(oracle::rel_err(hu(i, 0), fd(i, 0), 1e-6) < 1e-4);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    std::mt19937_64 rng(4);
    Mlp net(2, {4}, 1, Activation::Relu);
    net.init_weights(rng);
    const MatrixXd before = net.layers()[0].W;
    AdamState adam(net, {});
    MlpGrads zero;
    zero.init_like(net.layers());
    adam.step(net, zero);
    CHECK((net.layers()[0].W - before).norm() == 0.0);
}

TEST_CASE("adam: first step matches the hand-computed update") {
    // with bias correction the first step is -lr * g / (|g| + eps)
    Mlp net(1, {}, 1, Activation::Identity);
    net.layers()[0].W << 0.5;
    net.layers()[0].b << -0.25;
    AdamConfig cfg;
    cfg.lr = 1e-2;
    AdamState adam(net, cfg);
    MlpGrads g;
    g.init_like(net.layers());
    g.dW[0] << 3.0;
    g.db[0] << -7.0;
    adam.step(net, g);

    const double expect_w = 0.5 - cfg.lr * 3.0 / (3.0 + cfg.eps);
    CHECK(net.layers()[0].W(0, 0) == Catch::Approx(expect_w).epsilon(1e-14));
    const double expect_b = -0.25 + cfg.lr * 7.0 / (7.0 + cfg.eps);
    CHECK(net.layers()[0].b(0) == Catch::Approx(expect_b).epsilon(1e-14));
}

TEST_CASE("adam: constant gradient collapses to the sign update at every step") {
    // m_t = (1 - beta1^t) g and v_t = (1 - beta2^t) g^2, so bias correction
    // makes each step exactly -lr * g / (|g| + eps)
    Mlp net(1, {}, 1, Activation::Identity);
    net.layers()[0].W << 0.0;
    net.layers()[0].b << 0.0;
    AdamConfig cfg;
    AdamState adam(net, cfg);
    MlpGrads g;
    g.init_like(net.layers());
    g.dW[0] << 2.0;
    g.db[0] << 0.0;
    const int steps = 5;
    for (int t = 0; t < steps; ++t) adam.step(net, g);
    const double expect = -cfg.lr * steps * 2.0 / (2.0 + cfg.eps);
    CHECK(net.layers()[0].W(0, 0) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("adam: shape mismatch throws") {
    Mlp net(2, {4}, 1, Activation::Relu);
    Mlp other(2, {5}, 1, Activation::Relu);
    AdamState adam(net, {});
    MlpGrads g;
    g.init_like(other.layers());
    CHECK_THROWS_AS(adam.step(net, g), Error);
}

TEST_CASE("determinism: identical seeds give identical nets and steps") {
    auto run = [] {
        std::mt19937_64 rng(1234);
        Mlp net(3, {8, 8}, 2, Activation::Softplus);
        net.init_weights(rng);
        AdamState adam(net, {});
        const MatrixXd x = random_matrix(3, 4, 50);
        const MatrixXd c = random_matrix(2, 4, 51);
        for (int i = 0; i < 5; ++i) {
            ForwardCache cache;
            net.forward(x, &cache);
            MlpGrads grads;
            grads.init_like(net.layers());
            net.backward(cache, c, &grads, nullptr);
            adam.step(net, grads);
        }
        return net;
    };
    Mlp a = run(), b = run();
    for (int l = 0; l < a.layer_count(); ++l) {
        CHECK(a.layers()[l].W == b.layers()[l].W);
        CHECK(a.layers()[l].b == b.layers()[l].b);
    }
}

TEST_CASE("checkpoint: mlp and adam round-trip bit-exactly") {
    namespace fs = std::filesystem;
    std::mt19937_64 rng(5);
    Mlp net(4, {8, 8}, 2, Activation::Softplus, 1, 100.0);
    net.init_weights(rng);
    AdamState adam(net, {});
    MlpGrads g;
    g.init_like(net.layers());
    g.dW[0].setRandom();
    adam.step(net, g);

    const auto dir = fs::temp_directory_path() / "refu_nn_tests";
    fs::create_directories(dir);
    const auto net_path = (dir / "net.json").string();
    save_mlp(net, net_path);
    Mlp loaded = load_mlp(net_path);
    REQUIRE(loaded.layer_count() == net.layer_count());
    CHECK(loaded.skip_layer() == net.skip_layer());
    for (int l = 0; l < net.layer_count(); ++l) {
        CHECK(loaded.layers()[l].W == net.layers()[l].W);
        CHECK(loaded.layers()[l].b == net.layers()[l].b);
        CHECK(loaded.layers()[l].act == net.layers()[l].act);
    }

    save_json(adam_to_json(adam), (dir / "adam.json").string());
    AdamState adam2 = adam_from_json(load_json((dir / "adam.json").string()), loaded);
    CHECK(adam2.step_count() == adam.step_count());
    CHECK(adam2.first_moments().dW[0] == adam.first_moments().dW[0]);
    CHECK(adam2.second_moments().dW[0] == adam.second_moments().dW[0]);
}
