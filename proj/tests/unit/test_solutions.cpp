// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <doctest.h>

#include "jdecay/solutions.hpp"
#include "oracles.hpp"

using namespace jdecay;
using doctest::Approx;

namespace {
ModelSpec free_spec() { return make_spec(rules::Constant{1.0, 0.0}); }
ModelSpec ex1() { return make_spec(rules::Example1{3.0, 1.0}); }
ModelSpec ex2() { return make_spec(rules::Example2{}); }
ModelSpec pm() { return make_spec(rules::PowerModulated{0.5, 0.2, 1.0, 2.0, 1.0, PhiKind::Cosine}); }
} // namespace

TEST_CASE("recurrence closed forms") {
    const auto u = recurrence_extend<double>(free_spec(), 0.0, 0.0, 1.0, 12);
    const double pattern[4] = {0.0, 1.0, 0.0, -1.0};
    for (Index n = 0; n <= 12; ++n)
        CHECK(u.value(n) == pattern[n % 4]);

    const auto v = recurrence_extend<double>(free_spec(), 3.0, 0.0, 1.0, 60);
    const double xp = (3.0 + std::sqrt(5.0)) / 2.0, xm = (3.0 - std::sqrt(5.0)) / 2.0;
    for (Index n = 0; n <= 60; ++n) {
        const double ref = (std::pow(xp, n) - std::pow(xm, n)) / (xp - xm);
        CHECK(v.value(n) == Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("rescaling keeps log magnitudes") {
    // grows like e^{0.96 n}; rescales several times over this horizon
    const auto v = recurrence_extend<double>(free_spec(), 3.0, 0.0, 1.0, 2000);
    CHECK_FALSE(v.rescaled_at.empty());
    const double xp = (3.0 + std::sqrt(5.0)) / 2.0;
    for (Index n : {500, 1000, 2000})
        CHECK(v.log_abs(n) == Approx(static_cast<double>(n) * std::log(xp) - std::log(std::sqrt(5.0))).epsilon(1e-12));
}

TEST_CASE("example2 growing solution asymptotics") {
    const Index N = 20000;
    const auto u = recurrence_extend<double>(ex2(), 0.0, 0.0, 1.0, N);
    std::vector<double> logs(static_cast<std::size_t>(N + 1), 0.0);
    for (Index n = 1; n <= N; ++n)
        logs[static_cast<std::size_t>(n)] = u.log_abs(n);
    const auto fit = fit_log_asymptotics(logs, trimmed_window(1, N), {Basis::One, Basis::LogN, Basis::SqrtN});
    CHECK(fit.coefficient(Basis::SqrtN) == Approx(2.0).epsilon(0.02));
    CHECK(fit.coefficient(Basis::LogN) == Approx(-0.25).epsilon(0.25));
}

TEST_CASE("fundamental pair") {
    const auto p = fundamental_pair<double>(free_spec(), 0.0, 4);
    const double phi[5] = {0, 1, 0, -1, 0}, psi[5] = {-1, 0, 1, 0, -1};
    for (Index n = 0; n <= 4; ++n) {
        CHECK(p.phi.value(n) == phi[n]);
        CHECK(p.psi.value(n) == psi[n]);
    }
    CHECK(wronskian(free_spec(), p, 0).value == cplx(1.0, 0.0));
}

TEST_CASE("Wronskian constancy") {
    for (const auto& s : {free_spec(), ex1(), ex2(), pm()}) {
        for (cplx z : {cplx(0.3, 0.0), cplx(-0.7, 0.2), cplx(1.5, 1.0)}) {
            const Index N = 400;
            const auto p = fundamental_pair<cplx>(s, z, N);
            for (Index n = 0; n < N; n += 7) {
                const auto w = wronskian(s, p, n);
                CHECK(std::abs(w.value - 1.0) <= 1e-9 * std::max(1.0, w.scale));
            }
            const auto last = wronskian(s, p, N - 1);
            CHECK(std::abs(last.value - 1.0) <= 1e-9 * std::max(1.0, last.scale));
        }
    }
}

TEST_CASE("Weyl solution") {
    rules::Table one;
    one.weights = {1.0};
    one.diag = {0.0};
    one.tail = share(free_spec());
    const auto w1 = weyl_solution(make_spec(one), 0.0, 1.0, 1);
    CHECK(std::abs(w1.m - cplx(0.0, 1.0)) < 1e-15);

    const auto w3 = weyl_solution(free_spec(), 3.0, 0.0, 64);
    CHECK(w3.m.imag() == 0.0);
    const auto ref = oracle::dense_resolvent_column({std::vector<double>(64, 0.0), std::vector<double>(63, 1.0)}, 3.0);
    for (Index n = 1; n <= 64; ++n)
        CHECK(std::abs(w3.column.at(n) - ref[static_cast<std::size_t>(n - 1)]) < 1e-13);
    CHECK(std::abs(w3.column.at(11) / w3.column.at(10)) == Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-10));

    const auto w = weyl_solution(free_spec(), 0.5, 0.5, 256);
    CHECK(decomposition_residual(free_spec(), w, 64) <= 1e-8);
}

TEST_CASE("Herglotz property") {
    for (const auto& s : {free_spec(), ex1(), ex2(), pm()})
        for (double E : {-3.0, -0.4, 0.0, 1.1, 5.0})
            for (double eta : {1e-3, 0.1, 2.0})
                CHECK(weyl_solution(s, E, eta, 3000).m.imag() > 0.0);
}

TEST_CASE("transfer matrices") {
    const auto p2 = transfer_product_two_step(free_spec(), 0.0, 5);
    CHECK(p2.a[0] == -1.0);
    CHECK(p2.a[1] == 0.0);
    CHECK(p2.a[2] == 0.0);
    CHECK(p2.a[3] == -1.0);

    for (const auto& s : {ex1(), pm()}) {
        for (Index n = 1; n < 200; n += 13) {
            const auto st = transfer_step(s, 0.4, n);
            CHECK(st.matrix.det() == Approx(weight_at(s, n - 1) / weight_at(s, n)).epsilon(1e-12));
            const auto pr = transfer_product_two_step(s, 0.4, n);
            CHECK(pr.det() == Approx(weight_at(s, 2 * n - 2) / weight_at(s, 2 * n)).epsilon(1e-12));
        }
    }

    // B_{2n} B_{2n-1} -> -I for the modulated model
    const auto far = transfer_product_two_step(pm(), 0.3, 1000000);
    CHECK(std::fabs(far.a[0] + 1.0) < 2e-3);
    CHECK(std::fabs(far.a[3] + 1.0) < 2e-3);
    CHECK(std::fabs(far.a[1]) < 2e-3);
    CHECK(std::fabs(far.a[2]) < 2e-3);
}

TEST_CASE("transfer steps reproduce the recurrence") {
    const auto s = ex1();
    const double E = 0.37;
    const auto u = recurrence_extend<double>(s, E, 0.0, 1.0, 300);
    for (Index n = 1; n < 300; ++n) {
        const auto B = transfer_step(s, E, n).matrix;
        const double a = u.value(n - 1), b = u.value(n);
        const double next = B.a[2] * a + B.a[3] * b;
        CHECK(B.a[0] * a + B.a[1] * b == Approx(b).epsilon(1e-12));
        CHECK(next == Approx(u.value(n + 1)).epsilon(1e-12).scale(std::fabs(b) + std::fabs(a)));
    }
}

TEST_CASE("discriminant") {
    // E = 0 and phi(1) = 0
    const auto s = pm();
    CHECK(discriminant_limit(s, 0.0, 1) == Approx(0.0));
    for (Index n : {200000, 400000, 800000}) {
        for (double E : {0.0, 1.5, -2.0})
            CHECK(discriminant_V(s, E, n) == Approx(discriminant_limit(s, E, n)).epsilon(0.05).scale(1.0));
    }
    // |E| above c: negative
    for (Index n = 100000; n <= 100100; ++n)
        CHECK(discriminant_V(s, 1.5, n) < 0.0);
}

TEST_CASE("asymptotic fits") {
    const Index N = 2000;
    std::vector<double> v(static_cast<std::size_t>(N + 1), 1.0);
    for (Index n = 1; n <= N; ++n)
        v[static_cast<std::size_t>(n)] = std::pow(static_cast<double>(n), -1.5);
    auto fit = fit_asymptotics(v, {10, N}, {Basis::One, Basis::LogN});
    CHECK(fit.coefficient(Basis::LogN) == Approx(-1.5).epsilon(1e-10));
    CHECK(fit.residual < 1e-10);

    for (Index n = 1; n <= N; ++n) {
        const double x = static_cast<double>(n);
        v[static_cast<std::size_t>(n)] = std::pow(x, -0.25) * std::exp(-2.0 * std::sqrt(x));
    }
    fit = fit_asymptotics(v, {10, N}, {Basis::One, Basis::LogN, Basis::SqrtN});
    CHECK(fit.coefficient(Basis::LogN) == Approx(-0.25).epsilon(1e-8));
    CHECK(fit.coefficient(Basis::SqrtN) == Approx(-2.0).epsilon(1e-8));
    CHECK(fit.coefficient(Basis::One) == Approx(0.0).scale(1.0).epsilon(1e-8));

    CHECK_THROWS_AS(fit_asymptotics(v, {10, N}, {Basis::One, Basis::One}), Error);
    CHECK_THROWS_AS(fit_asymptotics(v, {10, 20}, {Basis::One, Basis::LogN}), Error);

    const auto w = trimmed_window(1, 1000);
    CHECK(w.first == 101);
    CHECK(w.last == 900);
}

TEST_CASE("example1 Weyl column decay") {
    const auto spec = ex1();
    const Index N = 8000;
    const auto w = weyl_solution(spec, 0.0, 0.0, N);
    std::vector<double> even(static_cast<std::size_t>(N / 2 + 1), 1.0);
    for (Index n = 1; n <= N / 2; ++n)
        even[static_cast<std::size_t>(n)] = std::abs(w.column.at(2 * n));
    const auto fit = fit_asymptotics(even, {200, 1200}, {Basis::One, Basis::LogN});
    CHECK(fit.coefficient(Basis::LogN) == Approx(-1.5).epsilon(0.03));
}
