#include <doctest.h>

#include <cmath>
#include <random>

#include "began/error.hpp"
#include "began/gradcheck.hpp"
#include "began/rng.hpp"
#include "began/tensor.hpp"
#include "oracles.hpp"

using namespace began;

namespace {

Tensor random_tensor(std::vector<int> shape, RngEngine& rng, double lo = -2.0, double hi = 2.0,
                     double reject_below = 0.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) {
        double v;
        do {
            v = uniform(rng, lo, hi);
        } while (std::abs(v) < reject_below);
        t.data()[i] = v;
    }
    return t;
}

}  // namespace

TEST_SUITE_BEGIN("tensor");

TEST_CASE("matmul identity and zero cases") {
    Tensor eye = Tensor::from_values({2, 2}, {1, 0, 0, 1});
    Tensor prod = matmul(eye, eye);
    CHECK(prod.values() == std::vector<double>{1, 0, 0, 1});

    Tensor a = Tensor::from_values({2, 2}, {1, 2, 3, 4});
    Tensor zero_col = Tensor::from_values({2, 1}, {0, 0});
    CHECK(matmul(a, zero_col).values() == std::vector<double>{0, 0});
}

TEST_CASE("matmul matches the triple-loop oracle exactly") {
    RngEngine rng = make_stream(7, "matmul-oracle");
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({4, 2}, rng);
    Tensor c = matmul(a, b);
    const auto expected = oracles::matmul_loop(a.values(), b.values(), 3, 4, 2);
    REQUIRE(c.values().size() == expected.size());
    for (size_t i = 0; i < expected.size(); ++i) CHECK(c.values()[i] == expected[i]);

    // larger shapes exercise the blocked kernel paths
    for (auto [m, k, n] : {std::tuple{5, 7, 3}, std::tuple{8, 128, 16}, std::tuple{9, 31, 2}}) {
        Tensor x = random_tensor({m, k}, rng);
        Tensor y = random_tensor({k, n}, rng);
        const auto want = oracles::matmul_loop(x.values(), y.values(), m, k, n);
        const auto got = matmul(x, y).values();
        for (size_t i = 0; i < want.size(); ++i) CHECK(got[i] == want[i]);
    }
}

TEST_CASE("matmul rejects mismatched shapes, naming both") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({2, 3});
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[2 x 3]"), DimensionError);
}

TEST_CASE("relu and add basics") {
    Tensor x = Tensor::from_values({3}, {-1, 0, 2});
    CHECK(relu(x).values() == std::vector<double>{0, 0, 2});

    RngEngine rng = make_stream(3, "add-identity");
    Tensor a = random_tensor({2, 3}, rng);
    Tensor zero = Tensor::zeros({2, 3});
    CHECK(add(a, zero).values() == a.values());

    CHECK_THROWS_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), DimensionError);
}

TEST_CASE("add broadcasts a bias row over the batch") {
    Tensor batch = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor bias = Tensor::from_values({3}, {10, 20, 30});
    CHECK(add(batch, bias).values() == std::vector<double>{11, 22, 33, 14, 25, 36});
}

TEST_CASE("relu gradient is 0 below the kink and 1 above") {
    Tensor x = Tensor::from_values({2}, {-1, 2}, /*requires_grad=*/true);
    {
        Tape tape;
        Tensor loss = sum(relu(x));  // upstream [1, 1]
        tape.backward(loss);
    }
    CHECK(x.grad() == std::vector<double>{0, 1});
}

TEST_CASE("l2_norm examples") {
    CHECK(l2_norm(Tensor::from_values({2}, {3, 4})).item() == 5.0);
    CHECK(l2_norm(Tensor::zeros({4})).item() == 0.0);
    // batch {[1,0],[0,2]} -> (1 + 2) / 2
    Tensor batch = Tensor::from_values({2, 2}, {1, 0, 0, 2});
    CHECK(l2_norm(batch).item() == 1.5);
}

TEST_CASE("backward on a sum gives all-ones gradient") {
    Tensor x = Tensor::zeros({3, 4}, /*requires_grad=*/true);
    {
        Tape tape;
        tape.backward(sum(x));
    }
    CHECK(x.grad() == std::vector<double>(12, 1.0));
}

TEST_CASE("backward through l2_norm gives x / |x|") {
    Tensor x = Tensor::from_values({2}, {3, 4}, /*requires_grad=*/true);
    {
        Tape tape;
        tape.backward(l2_norm(x));
    }
    CHECK(x.grad()[0] == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    CHECK(x.grad()[1] == doctest::Approx(4.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("backward rejects non-scalar losses") {
    Tensor x = Tensor::zeros({2, 2}, true);
    Tape tape;
    Tensor y = relu(x);
    CHECK_THROWS_AS(tape.backward(y), ArgumentError);
}

TEST_CASE("gradient accumulates additively across backward calls") {
    Tensor x = Tensor::from_values({3}, {1, -2, 0.5}, true);
    Tape tape;
    Tensor l1 = sum(relu(x));
    Tensor l2 = l2_norm(x);
    Tensor both = add(l1, l2);

    tape.backward(l1);
    tape.backward(l2);
    std::vector<double> separate = x.grad();

    x.zero_grad();
    tape.backward(both);
    const std::vector<double>& joint = x.grad();
    REQUIRE(separate.size() == joint.size());
    for (size_t i = 0; i < joint.size(); ++i)
        CHECK(joint[i] == doctest::Approx(separate[i]).epsilon(1e-14));
}

TEST_CASE("finite_diff_check knows closed-form derivatives") {
    // f(x) = x^2 as matmul(x, x) on a [1 x 1] tensor; derivative 2x
    auto f = [](const Tensor& t) { return matmul(t, t); };
    Tensor x = Tensor::from_values({1, 1}, {3.0});
    CHECK(finite_diff_check(f, x, 1e-4) < 1e-6);

    auto constant = [](const Tensor&) { return Tensor::scalar(42.0); };
    CHECK(finite_diff_check(constant, x, 1e-4) == 0.0);

    auto relu_scalar = [](const Tensor& t) { return sum(relu(t)); };
    Tensor one = Tensor::from_values({1}, {1.0});
    CHECK(finite_diff_check(relu_scalar, one, 1e-4) < 1e-6);
}

TEST_CASE("every differentiable op passes finite differences on random tensors") {
    RngEngine rng = make_stream(11, "op-gradcheck");
    int done = 0;
    while (done < 100) {
        const int rows = 1 + static_cast<int>(rng() % 4);
        const int cols = 1 + static_cast<int>(rng() % 4);
        const int pick = static_cast<int>(rng() % 7);
        Tensor x = random_tensor({rows, cols}, rng, -2.0, 2.0, /*reject_below=*/1e-3);

        std::function<Tensor(const Tensor&)> f;
        switch (pick) {
            case 0: {
                Tensor w = random_tensor({cols, 3}, rng);
                f = [w](const Tensor& t) { return sum(matmul(t, w)); };
                break;
            }
            case 1: {
                Tensor other = random_tensor({rows, cols}, rng);
                f = [other](const Tensor& t) { return sum(add(t, other)); };
                break;
            }
            case 2: {
                Tensor other = random_tensor({rows, cols}, rng);
                f = [other](const Tensor& t) { return l2_norm(sub(t, other)); };
                break;
            }
            case 3:
                f = [](const Tensor& t) { return sum(relu(t)); };
                break;
            case 4:
                f = [](const Tensor& t) { return scale(sum(t), -1.7); };
                break;
            case 5:
                f = [](const Tensor& t) { return sample_norm_mean(t, NormKind::L2); };
                break;
            case 6:
                f = [](const Tensor& t) { return sample_norm_mean(t, NormKind::L1); };
                break;
        }
        CHECK(finite_diff_check(f, x, 1e-4) < 1e-4);
        ++done;
    }
}

TEST_CASE("bias-broadcast add passes finite differences") {
    RngEngine rng = make_stream(13, "bias-gradcheck");
    Tensor batch = random_tensor({4, 3}, rng);
    auto f = [batch](const Tensor& bias) { return l2_norm(add(batch, bias)); };
    Tensor bias = random_tensor({3}, rng);
    CHECK(finite_diff_check(f, bias, 1e-4) < 1e-4);
}

TEST_CASE("forward results are deterministic") {
    RngEngine rng = make_stream(17, "determinism");
    Tensor a = random_tensor({5, 6}, rng);
    Tensor b = random_tensor({6, 4}, rng);
    Tensor c1 = matmul(relu(a), b);
    Tensor c2 = matmul(relu(a), b);
    CHECK(c1.values() == c2.values());
}

TEST_CASE("detach cuts gradient flow") {
    Tensor x = Tensor::from_values({2}, {3, 4}, true);
    {
        Tape tape;
        Tensor cut = relu(x).detach();
        Tensor loss = l2_norm(cut);
        tape.backward(loss);
    }
    CHECK_FALSE(x.has_grad());
}

TEST_CASE("tapes do not nest") {
    Tape tape;
    CHECK_THROWS_AS(Tape(), Error);
}

TEST_SUITE_END();
