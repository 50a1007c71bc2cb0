// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <doctest.h>

#include "jdecay/model.hpp"

using namespace jdecay;
using doctest::Approx;

namespace {
ModelSpec free_spec() { return make_spec(rules::Constant{1.0, 0.0}); }
ModelSpec ex1() { return make_spec(rules::Example1{3.0, 1.0}); }
ModelSpec ex2() { return make_spec(rules::Example2{}); }
ModelSpec pm() { return make_spec(rules::PowerModulated{0.5, 0.2, 1.0, 2.0, 1.0, PhiKind::Cosine}); }
} // namespace

TEST_CASE("sample_operator rules") {
    CHECK(weight_at(ex1(), 2) == 3.0);
    CHECK(diag_at(ex1(), 2) == 0.0);
    CHECK(weight_at(ex1(), 1) == 4.0);
    CHECK(weight_at(ex2(), 5) == 5.0);
    CHECK(diag_at(ex2(), 5) == -10.0);
    CHECK(weight_at(pm(), 1) == Approx(1.0).epsilon(1e-15));

    // lambda_0 = 1 convention
    for (const auto& s : {free_spec(), ex1(), ex2(), pm()}) {
        CHECK(weight_at(s, 0) == 1.0);
        CHECK(diag_at(s, 0) == 0.0);
    }
}

TEST_CASE("phi profile") {
    for (auto kind : {PhiKind::Cosine, PhiKind::CosineSquared}) {
        CHECK(phi_value(kind, 0.0, 1.0) == Approx(0.0));
        CHECK(phi_value(kind, 0.5, 1.0) == Approx(1.0));
        CHECK(phi_value(kind, 3.0, 1.0) == Approx(0.0));
        for (double x = 0.0; x < 2.0; x += 0.013) {
            CHECK(phi_value(kind, x, 1.0) >= 0.0);
            CHECK(phi_value(kind, x, 1.0) <= 1.0);
        }
    }
}

TEST_CASE("invalid weights are rejected") {
    const auto bad = make_spec(rules::Example1{-5.0, 1.0});
    bool thrown = false;
    try {
        validate(bad);
        (void)sample_operator(bad, 1);
    } catch (const Error& e) {
        thrown = e.code() == ErrorCode::NonPositiveWeight || e.code() == ErrorCode::InvalidModel;
    }
    CHECK(thrown);
}

TEST_CASE("truncate examples") {
    auto t = truncate(free_spec(), 1, 3);
    CHECK(t.diag == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(t.offdiag == std::vector<double>{1.0, 1.0});

    t = truncate(ex1(), 1, 2);
    CHECK(t.diag == std::vector<double>{0.0, 0.0});
    CHECK(t.offdiag == std::vector<double>{4.0});

    t = truncate(ex2(), 2, 4);
    CHECK(t.diag == std::vector<double>{-4.0, -6.0, -8.0});
    CHECK(t.offdiag == std::vector<double>{2.0, 3.0});
    CHECK(t.lo == 2);
    CHECK(t.hi == 4);
}

TEST_CASE("truncate matches sampling entrywise") {
    for (const auto& s : {ex1(), ex2(), pm()}) {
        const auto t = truncate(s, 37, 400);
        for (Index n = 37; n <= 400; ++n) {
            const auto e = sample_operator(s, n);
            CHECK(t.diag[static_cast<std::size_t>(n - 37)] == e.diag);
            if (n < 400)
                CHECK(t.offdiag[static_cast<std::size_t>(n - 37)] == e.weight);
        }
    }
}

TEST_CASE("sampling is order independent") {
    const auto s = pm();
    std::vector<Entry> fwd, bwd;
    for (Index n = 0; n < 500; ++n)
        fwd.push_back(sample_operator(s, n));
    for (Index n = 499; n >= 0; --n)
        bwd.push_back(sample_operator(s, n));
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        CHECK(fwd[i].weight == bwd[fwd.size() - 1 - i].weight);
        CHECK(fwd[i].diag == bwd[fwd.size() - 1 - i].diag);
    }
}

TEST_CASE("carleman sums") {
    CHECK(carleman_sum(free_spec(), 5, CarlemanPower::One) == Approx(4.0));
    CHECK(carleman_sum(ex1(), 3, CarlemanPower::One) == Approx(7.0 / 12.0));
    CHECK(carleman_sum(ex2(), 3, CarlemanPower::Half) == Approx(1.0 + 1.0 / std::sqrt(2.0)));
    CHECK(carleman_sum(ex2(), 3, CarlemanPower::One, 3) == 0.0);
    CHECK(carleman_sum(ex2(), 2, CarlemanPower::One, 5) == 0.0);

    // additivity and monotonicity
    const auto s = pm();
    const double full = carleman_sum(s, 300, CarlemanPower::One);
    const double head = carleman_sum(s, 120, CarlemanPower::One);
    const double tail = carleman_sum(s, 300, CarlemanPower::One, 120);
    CHECK(full == Approx(head + tail).epsilon(1e-14));
    const auto prefix = carleman_prefix(s, 300, CarlemanPower::Half);
    for (std::size_t n = 2; n < prefix.size(); ++n)
        CHECK(prefix[n] >= prefix[n - 1]);
    CHECK(prefix[300] == Approx(carleman_sum(s, 300, CarlemanPower::Half)).epsilon(1e-14));
}

TEST_CASE("apply_operator") {
    std::vector<double> u{0.0, 1.0, 0.0, 0.0, 0.0};
    CHECK(apply_operator<double>(free_spec(), u, 2) == 1.0);

    std::vector<double> ones{0.0, 1.0, 1.0, 1.0, 1.0};
    CHECK(apply_operator<double>(ex2(), ones, 2) == -1.0);

    // x^n solves u(n-1) + u(n+1) = 3 u(n)
    const double x = (3.0 - std::sqrt(5.0)) / 2.0;
    std::vector<double> geo;
    for (int n = 0; n <= 10; ++n)
        geo.push_back(std::pow(x, n));
    CHECK(apply_operator<double>(free_spec(), geo, 5) == Approx(3.0 * std::pow(x, 5)).epsilon(1e-14));

    CHECK_THROWS_AS(apply_operator<double>(free_spec(), u, 0), Error);
    CHECK_THROWS_AS(apply_operator<double>(free_spec(), u, 4), Error);
}

TEST_CASE("apply_operator agrees with the truncated matrix product") {
    const auto s = ex1();
    const Index N = 40;
    std::vector<double> u(static_cast<std::size_t>(N + 1));
    for (Index n = 0; n <= N; ++n)
        u[static_cast<std::size_t>(n)] = n == 0 ? 0.0 : std::sin(0.3 * static_cast<double>(n));
    const auto t = truncate(s, 1, N);
    for (Index n = 1; n < N; ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        double mv = t.diag[i] * u[i + 1] + t.offdiag[i] * u[i + 2];
        if (i > 0)
            mv += t.offdiag[i - 1] * u[i];
        CHECK(apply_operator<double>(s, u, n) == mv);
    }
}

TEST_CASE("rank one perturbation and reflection") {
    auto p = rank_one_perturb(free_spec(), 2.0);
    CHECK(diag_at(p, 1) == 2.0);
    CHECK(diag_at(p, 2) == 0.0);
    CHECK(weight_at(p, 1) == 1.0);

    p = rank_one_perturb(ex2(), -1.0);
    CHECK(diag_at(p, 1) == -3.0);
    CHECK(diag_at(p, 2) == -4.0);

    p = rank_one_perturb(ex1(), 0.0);
    for (Index n = 0; n < 50; ++n) {
        CHECK(weight_at(p, n) == weight_at(ex1(), n));
        CHECK(diag_at(p, n) == diag_at(ex1(), n));
    }

    const auto r = reflect(ex2());
    CHECK(diag_at(r, 5) == 10.0);
    CHECK(weight_at(r, 5) == 5.0);
}

TEST_CASE("weight bounds") {
    CHECK(weights_diverge(ex1()));
    CHECK(weights_diverge(pm()));
    CHECK_FALSE(weights_diverge(free_spec()));
    const auto lb = weight_inf_lower_bound(ex1(), 10);
    REQUIRE(lb.has_value());
    for (Index n = 10; n < 2000; ++n)
        CHECK(*lb <= weight_at(ex1(), n));
    const double ub = weight_sup_upper_bound(pm(), 100, 5000);
    for (Index n = 100; n <= 5000; ++n)
        CHECK(weight_at(pm(), n) <= ub);
    CHECK(has_zero_diagonal(ex1()));
    CHECK_FALSE(has_zero_diagonal(ex2()));
}

TEST_CASE("table rule with tail") {
    rules::Table t;
    t.weights = {2.0, 3.0};
    t.diag = {0.5, -0.5};
    t.tail = share(free_spec());
    const auto s = make_spec(t);
    CHECK(weight_at(s, 1) == 2.0);
    CHECK(diag_at(s, 2) == -0.5);
    CHECK(weight_at(s, 3) == 1.0);
    CHECK(diag_at(s, 3) == 0.0);
}
