#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stcw/tensor.hpp"

using namespace stcw;

TEST_CASE("zeros") {
    auto z = zeros<double>({2, 2});
    CHECK(z.shape() == Shape{2, 2});
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);
    CHECK(zeros<double>({1}).size() == 1);
    CHECK(sum_all(zeros<double>({3, 4, 5})) == 0.0);

    CHECK_THROWS_AS(zeros<double>({}), ValidationError);
    CHECK_THROWS_AS(zeros<double>({3, 0, 2}), ValidationError);
}

TEST_CASE("scale") {
    Tensor<double> t({1, 1}, {2.0});
    CHECK(scale(t, 1.0 / 3.0)[0] == doctest::Approx(0.6666666666666666));

    Rng rng(3);
    auto r = rand_uniform<double>(rng, {4, 5}, -2.0, 2.0);
    auto identity = scale(r, 1.0);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(identity[i] == r[i]);  // bitwise

    auto annihilated = scale(r, 0.0);
    CHECK(max_abs_diff(annihilated, zeros<double>(r.shape())) == 0.0);

    CHECK_THROWS_AS(scale(t, std::numeric_limits<double>::infinity()), ValidationError);
}

TEST_CASE("elementwise ops and reductions") {
    Tensor<double> a({1, 2}, {1, 2}), b({1, 2}, {3, 4});
    auto s = add(a, b);
    CHECK(s[0] == 4.0);
    CHECK(s[1] == 6.0);

    auto d = sub(a, a);
    CHECK(max_abs_diff(d, zeros<double>({1, 2})) == 0.0);

    auto ones = full<double>({3, 2, 2}, 1.0);
    auto reduced = sum_over_axis(ones, 0);
    CHECK(reduced.shape() == Shape{2, 2});
    for (std::size_t i = 0; i < 4; ++i) CHECK(reduced[i] == 3.0);

    CHECK_THROWS_AS(add(a, Tensor<double>({2, 1}, {1, 2})), ValidationError);
    CHECK_THROWS_AS(sum_over_axis(a, 2), ValidationError);
}

TEST_CASE("max_abs_diff") {
    Tensor<double> a({1, 2}, {1, 2}), b({1, 2}, {1, 2.5});
    CHECK(max_abs_diff(a, b) == 0.5);
    CHECK(max_abs_diff(a, a) == 0.0);
    CHECK(max_abs_diff(zeros<double>({2}), Tensor<double>({2}, {3, -4})) == 4.0);
    CHECK_THROWS_AS(max_abs_diff(a, zeros<double>({3})), ValidationError);
}

TEST_CASE("rng determinism and distribution") {
    Rng r1(7), r2(7);
    auto a = rand_uniform<double>(r1, {4}, 0.0, 1.0);
    auto b = rand_uniform<double>(r2, {4}, 0.0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == b[i]);

    Rng r3(5);
    auto z = rand_normal<double>(r3, {2}, 0.0, 0.0);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);

    Rng r4(1);
    auto big = rand_uniform<double>(r4, {10000}, 0.0, 1.0);
    CHECK(sum_all(big) / 10000.0 == doctest::Approx(0.5).epsilon(0.04));

    CHECK_THROWS_AS(rand_uniform<double>(r4, {2}, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(rand_normal<double>(r4, {2}, 0.0, -1.0), ValidationError);

    // split streams differ from the parent and from each other
    Rng base(9);
    Rng s1 = base.split(1), s2 = base.split(2);
    CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("normal moments") {
    Rng rng(11);
    auto x = rand_normal<double>(rng, {20000}, 1.0, 2.0);
    double mean = sum_all(x) / 20000.0;
    double var = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) var += (x[i] - mean) * (x[i] - mean);
    var /= 20000.0;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
    CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("algebraic properties") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = rand_uniform<double>(rng, {3, 4}, -5.0, 5.0);
        auto b = rand_uniform<double>(rng, {3, 4}, -5.0, 5.0);
        double c = rng.uniform(-3.0, 3.0);

        auto ab = add(a, b);
        auto ba = add(b, a);
        for (std::size_t i = 0; i < ab.size(); ++i) CHECK(ab[i] == ba[i]);  // bitwise

        CHECK(max_abs_diff(scale(ab, c), add(scale(a, c), scale(b, c))) < 1e-12);
    }
}

TEST_CASE("stacked scaling equals scaling by the alpha sum") {
    // sum over the temporal axis of stack(scale(w, a_t)) == scale(w, sum a_t)
    Rng rng(31);
    auto w = rand_uniform<double>(rng, {2, 3, 3}, -1.0, 1.0);
    std::vector<double> alphas = {0.25, 0.5, 0.125, 0.125};
    Tensor<double> stacked({alphas.size(), 2, 3, 3});
    for (std::size_t t = 0; t < alphas.size(); ++t) {
        auto slice = scale(w, alphas[t]);
        std::copy(slice.data().begin(), slice.data().end(),
                  stacked.data().begin() + t * w.size());
    }
    double alpha_sum = 0.0;
    for (double a : alphas) alpha_sum += a;
    CHECK(max_abs_diff(sum_over_axis(stacked, 0), scale(w, alpha_sum)) < 1e-12);
}
