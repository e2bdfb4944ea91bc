#include <doctest.h>

#include <cmath>
#include <limits>

#include "began/error.hpp"
#include "began/gradcheck.hpp"
#include "began/nn.hpp"
#include "oracles.hpp"

using namespace began;

TEST_SUITE_BEGIN("nn");

TEST_CASE("init_uniform bound is sqrt(9/n_in)") {
    RngEngine rng = make_stream(1, "init");
    // n_in = 9 -> bound exactly 1
    DenseLayer nine = init_uniform(9, 16, Activation::Relu, rng);
    for (int64_t i = 0; i < nine.weight.size(); ++i) {
        CHECK(nine.weight.data()[i] >= -1.0);
        CHECK(nine.weight.data()[i] <= 1.0);
    }
    for (int64_t i = 0; i < nine.bias.size(); ++i) CHECK(nine.bias.data()[i] == 0.0);

    // n_in = 128 -> bound = sqrt(9/128)
    const double bound = std::sqrt(9.0 / 128.0);
    CHECK(bound == doctest::Approx(0.26516504294495535).epsilon(1e-12));
    DenseLayer wide = init_uniform(128, 4, Activation::None, rng);
    for (int64_t i = 0; i < wide.weight.size(); ++i) {
        CHECK(wide.weight.data()[i] >= -bound);
        CHECK(wide.weight.data()[i] <= bound);
    }
}

TEST_CASE("init_uniform is reproducible for equal seeds") {
    RngEngine a = make_stream(42, "weights");
    RngEngine b = make_stream(42, "weights");
    DenseLayer la = init_uniform(6, 5, Activation::Relu, a);
    DenseLayer lb = init_uniform(6, 5, Activation::Relu, b);
    CHECK(la.weight.values() == lb.weight.values());
    CHECK(la.bias.values() == lb.bias.values());
}

TEST_CASE("init_uniform rejects non-positive dimensions") {
    RngEngine rng = make_stream(1, "init");
    CHECK_THROWS_AS(init_uniform(0, 3, Activation::None, rng), ArgumentError);
    CHECK_THROWS_AS(init_uniform(3, -1, Activation::None, rng), ArgumentError);
}

TEST_CASE("initialization bound holds for 1e5 samples at several widths") {
    for (int n_in : {2, 32, 128}) {
        RngEngine rng = make_stream(99, "init-bound", static_cast<uint64_t>(n_in));
        const double bound = std::sqrt(9.0 / n_in);
        const int n_out = 100000 / n_in + 1;
        DenseLayer layer = init_uniform(n_in, n_out, Activation::None, rng);
        REQUIRE(layer.weight.size() >= 100000);
        for (int64_t i = 0; i < layer.weight.size(); ++i) {
            const double w = layer.weight.data()[i];
            REQUIRE(w >= -bound);
            REQUIRE(w <= bound);
        }
    }
}

TEST_CASE("zero-weight network forwards to zero") {
    Mlp net;
    net.layers.push_back({Tensor::zeros({3, 4}, true), Tensor::zeros({4}, true), Activation::Relu});
    net.layers.push_back({Tensor::zeros({4, 2}, true), Tensor::zeros({2}, true), Activation::None});
    Tensor x = Tensor::from_values({2, 3}, {1, -2, 3, 4, 5, -6});
    CHECK(net.forward(x).values() == std::vector<double>(4, 0.0));
}

TEST_CASE("identity layer passes input through") {
    Mlp net;
    net.layers.push_back({Tensor::from_values({2, 2}, {1, 0, 0, 1}, true),
                          Tensor::zeros({2}, true), Activation::None});
    Tensor x = Tensor::from_values({3, 2}, {1, 2, -3, 4, 0.5, -0.25});
    CHECK(net.forward(x).values() == x.values());
}

TEST_CASE("random 2-layer forward matches the loop oracle exactly") {
    RngEngine rng = make_stream(5, "weights");
    Mlp net = make_mlp({6, 16, 3}, Activation::Relu, rng);
    Tensor x = Tensor::zeros({4, 6});
    for (int64_t i = 0; i < x.size(); ++i) x.data()[i] = uniform(rng, -1.5, 1.5);
    const auto expected = oracles::mlp_forward_loop(net, x.values(), 4);
    const auto got = net.forward(x).values();
    REQUIRE(got.size() == expected.size());
    for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == expected[i]);
}

TEST_CASE("forward rejects mismatched input width") {
    RngEngine rng = make_stream(5, "weights");
    Mlp net = make_mlp({6, 8, 2}, Activation::Relu, rng);
    CHECK_THROWS_AS(net.forward(Tensor::zeros({3, 5})), DimensionError);
}

TEST_CASE("full forward + loss composition passes the gradient check") {
    RngEngine rng = make_stream(21, "weights");
    Mlp net = make_mlp({4, 12, 12, 3}, Activation::Relu, rng);
    Tensor target = Tensor::zeros({5, 3});
    for (int64_t i = 0; i < target.size(); ++i) target.data()[i] = uniform(rng, -1, 1);

    // check d loss / d input
    Tensor x0 = Tensor::zeros({5, 4});
    for (int64_t i = 0; i < x0.size(); ++i) x0.data()[i] = uniform(rng, -1, 1);
    auto f_input = [&](const Tensor& x) { return l2_norm(sub(net.forward(x), target)); };
    CHECK(finite_diff_check(f_input, x0, 1e-4) < 1e-4);

    // check d loss / d weight for every layer
    for (size_t li = 0; li < net.layers.size(); ++li) {
        Tensor original = net.layers[li].weight;
        auto f_weight = [&, li](const Tensor& w) {
            Mlp probe = net;
            probe.layers[li].weight = w;
            return l2_norm(sub(probe.forward(x0), target));
        };
        CHECK(finite_diff_check(f_weight, original, 1e-4) < 1e-4);
    }
}

TEST_CASE("adam leaves parameters alone on zero gradient") {
    Tensor p = Tensor::from_values({3}, {1, -2, 3}, true);
    AdamOptimizer opt({p}, {"p"}, AdamConfig{1e-3, 0.9, 0.999, 1e-8});
    {
        Tape tape;
        Tensor loss = scale(sum(p), 0.0);
        tape.backward(loss);
    }
    opt.step();
    CHECK(p.values() == std::vector<double>{1, -2, 3});
}

TEST_CASE("first adam step with unit gradient moves by about -lr") {
    Tensor p = Tensor::from_values({1}, {0.0}, true);
    AdamOptimizer opt({p}, {"p"}, AdamConfig{1e-4, 0.5, 0.999, 1e-8});
    {
        Tape tape;
        tape.backward(sum(p));  // gradient exactly 1
    }
    opt.step();
    // bias-corrected mhat / sqrt(vhat) = 1, so the update is lr / (1 + eps)
    CHECK(p.item() == doctest::Approx(-1e-4).epsilon(1e-7));
}

TEST_CASE("equal gradients produce equal updates") {
    Tensor a = Tensor::from_values({1}, {5.0}, true);
    Tensor b = Tensor::from_values({1}, {5.0}, true);
    AdamOptimizer opt({a, b}, {"a", "b"}, AdamConfig{1e-2, 0.5, 0.999, 1e-8});
    {
        Tape tape;
        tape.backward(add(sum(a), sum(b)));
    }
    opt.step();
    CHECK(a.item() == b.item());
}

TEST_CASE("adam with lr = 0 never changes parameters") {
    RngEngine rng = make_stream(33, "weights");
    Mlp net = make_mlp({3, 8, 2}, Activation::Relu, rng);
    const auto before = net.layers[0].weight.values();
    AdamOptimizer opt(net.parameters(), net.parameter_names("net"),
                      AdamConfig{0.0, 0.5, 0.999, 1e-8});
    Tensor x = Tensor::from_values({2, 3}, {1, 2, 3, -1, -2, -3});
    for (int i = 0; i < 3; ++i) {
        opt.zero_grad();
        Tape tape;
        tape.backward(l2_norm(net.forward(x)));
        opt.step();
    }
    CHECK(net.layers[0].weight.values() == before);
}

TEST_CASE("adam aborts on a non-finite gradient, naming the parameter") {
    Tensor p = Tensor::from_values({2}, {1.0, 2.0}, true);
    AdamOptimizer opt({p}, {"net.layer0.weight"}, AdamConfig{1e-3, 0.5, 0.999, 1e-8});
    {
        Tape tape;
        tape.backward(scale(sum(p), std::numeric_limits<double>::infinity()));
    }
    CHECK_THROWS_WITH_AS(opt.step(), doctest::Contains("net.layer0.weight"), DivergenceError);
}

TEST_SUITE_END();
