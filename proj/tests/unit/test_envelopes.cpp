// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <doctest.h>

#include "jdecay/envelopes.hpp"
#include "oracles.hpp"

using namespace jdecay;
using doctest::Approx;

namespace {
ModelSpec free_spec() { return make_spec(rules::Constant{1.0, 0.0}); }
ModelSpec ex1() { return make_spec(rules::Example1{3.0, 1.0}); }
ModelSpec ex2() { return make_spec(rules::Example2{}); }

NormConstants unit_constants() {
    NormConstants c;
    c.C1 = 1.0;
    c.C2 = 1.0;
    return c;
}

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidModel;
}
} // namespace

TEST_CASE("conjugation entries, constant weights") {
    ConjugationWeight w;
    w.gamma = 0.1;
    for (Index n : {1, 5, 40}) {
        const auto e = conjugation_entries(free_spec(), w, n);
        CHECK(e.a == Approx(std::exp(-0.1) - 1.0).epsilon(1e-14));
        CHECK(e.b == Approx(std::exp(0.1) - 1.0).epsilon(1e-14));
        CHECK(e.a + e.b == Approx(2.0 * (std::cosh(0.1) - 1.0)).epsilon(1e-12));
    }
    w.start = 10;
    const auto e = conjugation_entries(free_spec(), w, 4);
    CHECK(e.a == 0.0);
    CHECK(e.b == 0.0);
}

TEST_CASE("conjugation identity against the dense similarity transform") {
    const auto spec = ex1();
    const Index N = 30;
    for (double gamma : {0.05, 0.4, 1.3}) {
        for (Index start : {Index{0}, Index{7}}) {
            ConjugationWeight w;
            w.gamma = gamma;
            w.start = start;
            const auto t = truncate(spec, 1, N);
            const oracle::Tridiag ot{t.diag, t.offdiag};
            const Eigen::MatrixXd T = oracle::dense(ot).real();
            Eigen::VectorXd phi(N);
            for (Index n = 1; n <= N; ++n)
                phi(n - 1) = std::exp(-gamma * conjugation_rho(spec, w, n));
            const Eigen::MatrixXd A =
                phi.cwiseInverse().asDiagonal() * T * phi.asDiagonal() - T;
            for (Index n = 1; n < N; ++n) {
                const auto e = conjugation_entries(spec, w, n);
                const double scale = std::max(1.0, std::fabs(T(n - 1, n)));
                CHECK(std::fabs(A(n - 1, n) - e.a) <= 1e-12 * scale);
                CHECK(std::fabs(A(n, n - 1) - e.b) <= 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("certified constants") {
    ConjugationWeight w;
    w.gamma = 0.1;
    auto c = certify_constants(free_spec(), w, 4096);
    CHECK(c.eps_N == Approx(2.0 * (std::cosh(0.1) - 1.0)).epsilon(1e-9));
    CHECK(c.C1 == Approx(c.eps_N / 0.01).epsilon(1e-12));
    CHECK(c.C2 * 0.1 == Approx(c.delta_N).epsilon(1e-12));

    // growing weights: the supremum sits at the start and delta(N) -> 2 gamma
    w.start = 2000;
    c = certify_constants(ex2(), w, 8192);
    CHECK(c.delta_N == Approx(2.0 * 0.1).epsilon(1e-4));
    CHECK(c.delta_N >= 2.0 * 0.1);
}

TEST_CASE("thm1 envelope arithmetic") {
    const auto win = GapWindow::finite(-2.0, 2.0);
    const auto c = unit_constants();
    CHECK(eta_thm1(win, c) == Approx(0.25));
    CHECK(envelope_thm1(win, c, 0.0, 4.0) == Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(envelope_thm1(win, c, 0.0, 0.0) == Approx(2.0));
    CHECK(envelope_thm1(win, c, -2.0 + 1e-9, 1.0) > 1e8);
    CHECK(code_of([&] { (void)envelope_thm1(win, c, 2.5, 1.0); }) == ErrorCode::OutsideGap);

    double prev = kInf;
    for (double rho = 0.0; rho < 20.0; rho += 0.5) {
        const double v = envelope_thm1(win, c, 0.3, rho);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("thm2 envelope arithmetic") {
    const auto win = GapWindow::finite(-2.0, 2.0);
    CHECK(envelope_thm2(win, 0.0, 0.1, 0.0) == Approx(10.0));
    CHECK(envelope_thm2(win, 0.0, 0.1, 5.0) == Approx(10.0 * std::exp(-4.0)).epsilon(1e-12));
    // eps -> 1/2: no decay left
    CHECK(envelope_thm2(win, 0.0, 0.5 - 1e-12, 50.0) ==
          Approx(envelope_thm2(win, 0.0, 0.5 - 1e-12, 0.0)).epsilon(1e-9));
    CHECK(code_of([&] { (void)envelope_thm2(win, 0.0, 0.5, 1.0); }) == ErrorCode::BadEpsilon);
    CHECK(code_of([&] { (void)envelope_thm2(win, 0.0, 0.0, 1.0); }) == ErrorCode::BadEpsilon);
}

TEST_CASE("thm2 cutoff index") {
    const auto win = GapWindow::finite(-2.0, 2.0);
    const auto ch = pick_N_thm2(ex1(), win, 0.25, 1.0);
    CHECK(ch.C3 == 1.0);
    // r(N) = 1 / inf_{p >= N} lambda_p <= 4 eps^2 / C3 = 0.25
    CHECK(ch.N >= 2);
    CHECK(ch.N <= 4);
    CHECK(1.0 / *weight_inf_lower_bound(ex1(), ch.N) <= 0.25 + 1e-15);

    Index prev = 0;
    for (double eps : {0.4, 0.25, 0.1, 0.05, 0.01}) {
        const auto n = pick_N_thm2(ex1(), win, eps, 1.0).N;
        CHECK(n >= prev);
        prev = n;
    }
    CHECK(code_of([&] { (void)pick_N_thm2(free_spec(), win, 0.25, 1.0); }) == ErrorCode::NotUnbounded);

    // the certified C3 is finite and positive
    const double c3 = c3_thm2(ex1(), win, 0.25);
    CHECK(c3 > 0.0);
    CHECK(std::isfinite(c3));
}

TEST_CASE("thm3 envelope and cutoff") {
    CHECK(envelope_thm3(1.0, 0.0, 0.5, 0.0) == Approx(2.0));
    CHECK(envelope_thm3(1.0, 0.0, 0.5, 4.0) == Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(code_of([&] { (void)envelope_thm3(1.0, 1.5, 0.5, 1.0); }) == ErrorCode::OutsideHalfLine);

    const auto flipped = reflect(ex2());
    CHECK(pick_N_thm3(flipped, 1.0, 0.0, 0.5) == 6);
    Index prev = 0;
    for (double eps : {0.5, 0.2, 0.05}) {
        const auto n = pick_N_thm3(flipped, 1.0, 0.0, eps);
        CHECK(n >= prev);
        prev = n;
    }
    const auto near = pick_N_thm3(flipped, 1.0, 1.0 - 1e-6, 0.5);
    CHECK(near >= 1);
    CHECK(near <= 6);
    CHECK(code_of([&] { (void)pick_N_thm3(free_spec(), 1.0, 0.0, 0.5); }) == ErrorCode::NotUnbounded);
}

TEST_CASE("thm4 envelope") {
    const auto win = GapWindow::finite(-2.0, 2.0);
    const auto c = unit_constants();
    CHECK(eta_thm4(win, c) == Approx(0.125));
    CHECK(envelope_thm4(win, c, 0.0, 0.2, 4.0) == Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(code_of([&] { (void)envelope_thm4(win, c, 0.0, 0.3, 4.0); }) == ErrorCode::DeltaTooLarge);

    // delta = 0 gives the thm1 form with the smaller rate
    for (double lambda : {-1.5, 0.0, 0.7}) {
        for (double s : {0.0, 1.0, 10.0}) {
            const double t1 = envelope_thm1(win, c, lambda, s);
            const double t4 = envelope_thm4(win, c, lambda, 0.0, s);
            CHECK(t4 >= t1);
            const double ratio = std::exp((eta_thm1(win, c) - eta_thm4(win, c)) * std::sqrt(win.w(lambda)) * s);
            CHECK(t4 / t1 == Approx(ratio).epsilon(1e-12));
        }
    }
}

TEST_CASE("lemma inverse bounds") {
    CHECK(lemma_inverse_bound(1.0, 1.0, 0.0, LemmaMode::L2) == Approx(1.0));
    CHECK(lemma_inverse_bound(1.0, 1.0, 0.6, LemmaMode::L2) == Approx(2.5));
    CHECK(lemma_inverse_bound(1.0, 1.0, 0.5, LemmaMode::L1) == Approx(2.0));
    CHECK(lemma_inverse_bound(1.0, 1.0, 0.5, LemmaMode::L2) == Approx(2.0));
    CHECK(code_of([] { (void)lemma_inverse_bound(1.0, 1.0, 0.6, LemmaMode::L1); }) == ErrorCode::BetaTooLarge);
    CHECK(code_of([] { (void)lemma_inverse_bound(1.0, 1.0, 1.0, LemmaMode::L2); }) == ErrorCode::BetaTooLarge);

    // one infinite edge: the limit of the finite formula
    const double lim = lemma_inverse_bound(2.0, kInf, 0.7, LemmaMode::L2);
    CHECK(lim == Approx(lemma_inverse_bound(2.0, 1e9, 0.7, LemmaMode::L2)).epsilon(1e-7));
    CHECK(lemma_inverse_bound(2.0, kInf, 0.7, LemmaMode::L1) == Approx(1.0));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> d(0.05, 5.0), f(-1.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const double dp = d(rng), dm = d(rng);
        const double beta = 0.5 * std::sqrt(dp * dm) * f(rng);
        CHECK(lemma_inverse_bound(dp, dm, beta, LemmaMode::L2) <=
              lemma_inverse_bound(dp, dm, beta, LemmaMode::L1) * (1.0 + 1e-12));
    }
}

TEST_CASE("lemma bounds hold for random matrices") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> f(-1.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        const auto in = oracle::random_lemma_instance(rng, 4 + t % 9);
        const double lim1 = 0.5 * std::sqrt(in.d_plus * in.d_minus);
        const double beta = lim1 * f(rng);
        const double norm = oracle::lemma_oracle(in, beta);
        CHECK(norm <= lemma_inverse_bound(in.d_plus, in.d_minus, beta, LemmaMode::L1) + 1e-9);
        CHECK(norm <= lemma_inverse_bound(in.d_plus, in.d_minus, beta, LemmaMode::L2) + 1e-9);
        const double beta2 = 0.99 * std::sqrt(in.d_plus * in.d_minus) * f(rng);
        CHECK(oracle::lemma_oracle(in, beta2) <=
              lemma_inverse_bound(in.d_plus, in.d_minus, beta2, LemmaMode::L2) + 1e-9);
    }
}

TEST_CASE("verify_envelope") {
    const auto spec = free_spec();
    const Index N = 2000;
    const auto col = resolvent_column(truncate(spec, 1, N), 3.0);

    const auto win = GapWindow::above_top(2.0);
    const auto cert = certify_window(spec, win, 8192, EnvelopeKind::Theorem1, 1.0);
    const auto env = thm1_envelope_sequence(spec, win, cert.constants, 3.0, N);
    const auto rep = verify_envelope(col, env, 200);
    CHECK(rep.pass());
    CHECK(rep.checked == N - 200);
    CHECK(rep.max_ratio <= 1.0);

    const std::vector<double> zero(N, 0.0), inf(N, kInf);
    const auto bad = verify_envelope(col, zero, 200);
    Index nonzero = 0;
    for (Index n = 1; n <= N - 200; ++n)
        nonzero += col.at(n) != 0.0 ? 1 : 0;
    CHECK(static_cast<Index>(bad.violations.size()) == nonzero);
    CHECK(verify_envelope(col, inf, 200).pass());
}

TEST_CASE("gap windows") {
    const auto f = GapWindow::finite(-1.0, 3.0);
    CHECK(f.contains(0.0));
    CHECK_FALSE(f.contains(3.0));
    CHECK(f.w(1.0) == Approx(4.0));
    const auto b = GapWindow::below_bottom(2.0);
    CHECK(b.contains(-100.0));
    CHECK_FALSE(b.contains(2.0));
    CHECK(b.edge_distance(0.5) == Approx(1.5));
    const auto a = GapWindow::above_top(-1.0);
    CHECK(a.contains(0.0));
    CHECK(a.edge_distance(0.0) == Approx(1.0));
}
