#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "stcw/data.hpp"
#include "stcw/inflate.hpp"

using namespace stcw;

TEST_CASE("alpha profiles") {
    auto ia = make_alphas(InflateMethod::IA, 3);
    CHECK(ia.alphas == std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});

    auto nwi = make_alphas(InflateMethod::NWI, 3, 1);
    CHECK(nwi.alphas[0] == doctest::Approx(5.0 / 3).epsilon(1e-15));
    CHECK(nwi.alphas[1] == doctest::Approx(-1.0 / 3).epsilon(1e-15));
    CHECK(nwi.alphas[2] == doctest::Approx(-1.0 / 3).epsilon(1e-15));

    auto is3 = make_alphas(InflateMethod::IS, 3);
    CHECK(is3.alphas == std::vector<double>{0.25, 0.5, 0.25});
    auto is2 = make_alphas(InflateMethod::IS, 2);
    CHECK(is2.alphas == std::vector<double>{0.5, 0.5});

    auto zwi = make_alphas(InflateMethod::ZWI, 2, 1);
    CHECK(zwi.alphas == std::vector<double>{1.0, 0.0});

    CHECK_THROWS_AS(make_alphas(InflateMethod::ZWI, 3, 4), ValidationError);
    CHECK_THROWS_AS(make_alphas(InflateMethod::IA, 0), ValidationError);
    CHECK_THROWS_AS(make_alphas(InflateMethod::IS, 5), ValidationError);  // needs rng

    // NWI closed form and exact sums for T in [1,16]
    for (std::size_t t = 1; t <= 16; ++t) {
        auto p = make_alphas(InflateMethod::NWI, t, 1);
        CHECK(p.alphas[0] == doctest::Approx((2.0 * t - 1.0) / t).epsilon(1e-15));
        for (std::size_t i = 1; i < t; ++i)
            CHECK(p.alphas[i] == doctest::Approx(-1.0 / t).epsilon(1e-15));
        double sum = 0;
        for (double a : p.alphas) sum += a;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }

    // IS sampling for larger T: positive and normalized
    Rng rng(12);
    for (std::size_t t : {4ull, 7ull, 11ull}) {
        auto p = make_alphas(InflateMethod::IS, t, 1, &rng);
        double sum = 0;
        for (double a : p.alphas) {
            CHECK(a > 0.0);
            sum += a;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("t0 permutes the alpha multiset and the temporal slices") {
    for (InflateMethod m : {InflateMethod::ZWI, InflateMethod::NWI}) {
        auto p1 = make_alphas(m, 4, 1);
        for (std::size_t t0 = 2; t0 <= 4; ++t0) {
            auto p = make_alphas(m, 4, t0);
            auto a = p1.alphas, b = p.alphas;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
            CHECK(p.alphas[t0 - 1] == p1.alphas[0]);
        }
    }
    // inflate_conv outputs are equal up to temporal-slice permutation
    Rng rng(13);
    auto w = rand_uniform<double>(rng, {2, 2, 3, 3}, -1.0, 1.0);
    auto b = zeros<double>({2});
    auto [w_t1, b1] = inflate_conv(w, b, make_alphas(InflateMethod::NWI, 3, 1));
    auto [w_t2, b2] = inflate_conv(w, b, make_alphas(InflateMethod::NWI, 3, 2));
    // slice t of w_t1 should equal slice sigma(t) of w_t2 where sigma swaps 0 and 1
    const std::size_t plane = 9;
    for (std::size_t oc = 0; oc < 4; ++oc)
        for (std::size_t p = 0; p < plane; ++p) {
            CHECK(w_t1[(oc * 3 + 0) * plane + p] == w_t2[(oc * 3 + 1) * plane + p]);
            CHECK(w_t1[(oc * 3 + 1) * plane + p] == w_t2[(oc * 3 + 0) * plane + p]);
            CHECK(w_t1[(oc * 3 + 2) * plane + p] == w_t2[(oc * 3 + 2) * plane + p]);
        }
}

TEST_CASE("inflate_conv examples") {
    Tensor<double> w({1, 1, 1, 1}, {2.0});
    Tensor<double> b({1}, {0.5});

    auto [w_ia, b_ia] = inflate_conv(w, b, make_alphas(InflateMethod::IA, 3));
    for (std::size_t t = 0; t < 3; ++t) CHECK(w_ia[t] == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(b_ia[0] == 0.5);  // bias copied verbatim

    auto [w_nwi, b_nwi] = inflate_conv(w, b, make_alphas(InflateMethod::NWI, 3, 1));
    CHECK(w_nwi[0] == doctest::Approx(10.0 / 3).epsilon(1e-15));
    CHECK(w_nwi[1] == doctest::Approx(-2.0 / 3).epsilon(1e-15));
    CHECK(w_nwi[2] == doctest::Approx(-2.0 / 3).epsilon(1e-15));
    CHECK(w_nwi[0] + w_nwi[1] + w_nwi[2] == doctest::Approx(2.0).epsilon(1e-15));

    Rng rng(14);
    auto wr = rand_uniform<double>(rng, {3, 2, 3, 3}, -1.0, 1.0);
    auto br = rand_uniform<double>(rng, {3}, -1.0, 1.0);
    auto [w_zwi, b_zwi] = inflate_conv(wr, br, make_alphas(InflateMethod::ZWI, 4, 2));
    const std::size_t plane = 9;
    for (std::size_t oc = 0; oc < 6; ++oc)
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t p = 0; p < plane; ++p) {
                double got = w_zwi[(oc * 4 + t) * plane + p];
                if (t == 1) CHECK(got == wr[oc * plane + p]);  // bitwise copy
                else CHECK(got == 0.0);
            }
}

TEST_CASE("sum constraint holds for every method on random weights") {
    Rng rng(15);
    for (InflateMethod m :
         {InflateMethod::IA, InflateMethod::IS, InflateMethod::ZWI, InflateMethod::NWI}) {
        for (int trial = 0; trial < 25; ++trial) {
            std::size_t t_size = 2 + rng.next_below(3);
            auto w = rand_uniform<double>(rng, {2, 2, 3, 3}, -2.0, 2.0);
            auto b = zeros<double>({2});
            auto [w3, b3] = inflate_conv(w, b, make_alphas(m, t_size, 1, &rng));
            CHECK(verify_sum_constraint(w, w3) < 1e-12);
        }
    }

    // sensitivity: a perturbed slice breaks the constraint
    auto w = rand_uniform<double>(rng, {1, 1, 2, 2}, -1.0, 1.0);
    auto [w3, b3] = inflate_conv(w, zeros<double>({1}), make_alphas(InflateMethod::IA, 3));
    w3[0] += 0.5;
    CHECK(verify_sum_constraint(w, w3) >= 0.5);

    // ZWI: residual exactly zero (copy + zeros)
    auto [wz, bz] = inflate_conv(w, zeros<double>({1}), make_alphas(InflateMethod::ZWI, 3, 1));
    CHECK(verify_sum_constraint(w, wz) == 0.0);
}

TEST_CASE("range-preservation equivalence") {
    Rng rng(16);
    for (InflateMethod m :
         {InflateMethod::IA, InflateMethod::IS, InflateMethod::ZWI, InflateMethod::NWI}) {
        auto w = rand_uniform<double>(rng, {3, 2, 3, 3}, -1.0, 1.0);
        auto b = rand_uniform<double>(rng, {3}, -0.5, 0.5);
        auto [w3, b3] = inflate_conv(w, b, make_alphas(m, 3, 1, &rng));
        CHECK(verify_equivalence(w, b, w3, b3, rng, 5) < 1e-12);

        auto wf = w.cast<float>();
        auto bf = b.cast<float>();
        auto [w3f, b3f] = inflate_conv(wf, bf, make_alphas(m, 3, 1, &rng));
        CHECK(verify_equivalence(wf, bf, w3f, b3f, rng, 5) < 1e-4);
    }

    // deviation grows with post-inflation perturbation
    auto w = rand_uniform<double>(rng, {2, 1, 3, 3}, -1.0, 1.0);
    auto b = zeros<double>({2});
    auto [w3, b3] = inflate_conv(w, b, make_alphas(InflateMethod::IA, 3));
    double prev = 0.0;
    for (double mag : {0.01, 0.1, 1.0}) {
        auto wp = w3;
        wp[0] += mag;
        Rng r2(99);
        double dev = verify_equivalence(w, b, wp, b3, r2, 5);
        CHECK(dev > prev);
        prev = dev;
    }
}

TEST_CASE("temporal slice similarity") {
    Rng rng(17);
    auto w = rand_uniform<double>(rng, {2, 2, 3, 3}, -1.0, 1.0);
    auto b = zeros<double>({2});

    auto [w_ia, b1] = inflate_conv(w, b, make_alphas(InflateMethod::IA, 3));
    CHECK(temporal_slice_similarity(w_ia) == doctest::Approx(1.0).epsilon(1e-12));

    auto [w_nwi, b2] = inflate_conv(w, b, make_alphas(InflateMethod::NWI, 3, 1));
    CHECK(temporal_slice_similarity(w_nwi) == doctest::Approx(-1.0 / 3).epsilon(1e-12));

    auto [w_zwi, b3] = inflate_conv(w, b, make_alphas(InflateMethod::ZWI, 3, 1));
    CHECK(temporal_slice_similarity(w_zwi) == 0.0);

    CHECK_THROWS_AS(temporal_slice_similarity(Tensor<double>({1, 1, 1, 2, 2})), ValidationError);
}

TEST_CASE("IA equals IS with uniform alphas bitwise") {
    Rng rng(18);
    auto w = rand_uniform<double>(rng, {2, 2, 3, 3}, -1.0, 1.0);
    auto b = zeros<double>({2});
    auto ia = make_alphas(InflateMethod::IA, 4);
    AlphaProfile is = ia;
    is.method = InflateMethod::IS;
    auto [w_ia, ba] = inflate_conv(w, b, ia);
    auto [w_is, bs] = inflate_conv(w, b, is);
    for (std::size_t i = 0; i < w_ia.size(); ++i) CHECK(w_ia[i] == w_is[i]);
}

TEST_CASE("inflate_net on the reference net") {
    NetSpec spec2d = reference_net_2d(1, 16, 16, 4, 0.5);
    Rng rng(19);
    auto params2d = init_params<float>(spec2d, rng);
    auto plan = default_plan(spec2d, InflateMethod::NWI, 1);
    CHECK(plan.at("conv1").temporal_size == 3);
    CHECK(plan.at("conv2").temporal_size == 2);

    auto [spec3d, params3d, report] = inflate_net(spec2d, params2d, plan, rng);
    CHECK(spec3d.is_3d());
    auto shapes = propagate_shapes(spec3d);
    CHECK(shapes[0][1] == 6);  // conv1: 8 -> 6
    CHECK(shapes[2][1] == 3);  // pool1: 6 -> 3
    CHECK(shapes[3][1] == 2);  // conv2: 3 -> 2
    CHECK(shapes[5][1] == 1);  // pool2: 2 -> 1

    CHECK(report.conv_layers.size() == 2);
    for (const auto& rec : report.conv_layers) CHECK(rec.residual < 1e-5);
    CHECK(report.reinitialized_layers == std::vector<std::string>{"fc1", "fc2"});

    // missing plan entry
    plan.erase("conv2");
    CHECK_THROWS_AS(inflate_net(spec2d, params2d, plan, rng), ValidationError);

    // clip too short for the temporal chain
    auto full_plan = default_plan(spec2d, InflateMethod::IA, 1);
    InflateOptions opt;
    opt.clip_t = 3;
    CHECK_THROWS_AS(inflate_net(spec2d, params2d, full_plan, rng, opt), ValidationError);
}

TEST_CASE("degenerate T=1 ZWI inflation keeps conv weights exactly") {
    NetSpec spec2d = reference_net_2d(1, 16, 16, 4, 0.5);
    Rng rng(20);
    auto params2d = init_params<float>(spec2d, rng);
    std::map<std::string, ConvInflationPlan> plan;
    for (const auto& name : {"conv1", "conv2"})
        plan[name] = {InflateMethod::ZWI, 1, 1};
    InflateOptions opt;
    opt.clip_t = 8;
    opt.pool_t = 2;
    auto [spec3d, params3d, report] = inflate_net(spec2d, params2d, plan, rng, opt);
    for (const auto& name : {"conv1", "conv2"}) {
        const auto& w2 = params2d.at(name).weight;
        const auto& w3 = params3d.at(name).weight;
        CHECK(w3.dim(2) == 1);
        for (std::size_t i = 0; i < w2.size(); ++i) CHECK(w3[i] == w2[i]);
    }
}

TEST_CASE("IA inflation preserves evaluation on temporally constant clips through conv layers") {
    // the conv-only equivalence over all four methods on many random layers
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t o = 1 + rng.next_below(3), c = 1 + rng.next_below(2);
        std::size_t k = 1 + rng.next_below(3);
        auto w = rand_uniform<double>(rng, {o, c, k, k}, -1.0, 1.0);
        auto b = rand_uniform<double>(rng, {o}, -0.5, 0.5);
        for (InflateMethod m :
             {InflateMethod::IA, InflateMethod::IS, InflateMethod::ZWI, InflateMethod::NWI}) {
            auto [w3, b3] = inflate_conv(w, b, make_alphas(m, 2 + rng.next_below(2), 1, &rng));
            CHECK(verify_equivalence(w, b, w3, b3, rng, 3) < 1e-12);
        }
    }
}
