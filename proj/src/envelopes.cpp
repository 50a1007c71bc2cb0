// SPDX-License-Identifier: Apache-2.0
#include "jdecay/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jdecay {

GapWindow GapWindow::finite(double r, double s) {
    if (!(r < s))
        throw Error(ErrorCode::OutsideGap, "finite gap needs r < s");
    return {Kind::FiniteGap, r, s, 0.0};
}

GapWindow GapWindow::below_bottom(double d) { return {Kind::BelowBottom, 0.0, 0.0, d}; }
GapWindow GapWindow::above_top(double d) { return {Kind::AboveTop, 0.0, 0.0, d}; }

bool GapWindow::contains(double lambda) const {
    switch (kind) {
    case Kind::FiniteGap: return r < lambda && lambda < s;
    case Kind::BelowBottom: return lambda < d;
    case Kind::AboveTop: return lambda > d;
    }
    return false;
}

double GapWindow::w(double lambda) const { return (lambda - r) * (s - lambda); }

double GapWindow::edge_distance(double lambda) const {
    switch (kind) {
    case Kind::FiniteGap: return std::min(lambda - r, s - lambda);
    case Kind::BelowBottom: return d - lambda;
    case Kind::AboveTop: return lambda - d;
    }
    return 0.0;
}

namespace {

double rho_increment(double weight, CarlemanPower p) {
    return p == CarlemanPower::One ? 1.0 / weight : 1.0 / std::sqrt(weight);
}

bool in_support(const ConjugationWeight& cw, Index n) {
    return n >= std::max<Index>(cw.start, 1) && (!cw.cap || n < *cw.cap);
}

// lambda (cosh x - 1), computed without cancellation
double psi1(double lambda, double x) {
    const double h = std::sinh(0.5 * x);
    return 2.0 * lambda * h * h;
}

double minus_psi2(double lambda, double x) { return lambda * std::sinh(x); }

} // namespace

double conjugation_rho(const ModelSpec& spec, const ConjugationWeight& weight, Index n) {
    double sum = 0.0;
    const Index hi = weight.cap ? std::min(n, *weight.cap) : n;
    for (Index k = std::max<Index>(weight.start, 1); k < hi; ++k)
        sum += rho_increment(weight_at(spec, k), weight.power);
    return sum;
}

ConjugationEntries conjugation_entries(const ModelSpec& spec, const ConjugationWeight& weight,
                                       Index n) {
    if (n < 1)
        throw Error(ErrorCode::IndexOutOfWindow, "conjugation entries need n >= 1");
    if (!in_support(weight, n))
        return {0.0, 0.0};
    const double lam = weight_at(spec, n);
    const double step = weight.gamma * rho_increment(lam, weight.power);
    return {lam * std::expm1(-step), lam * std::expm1(step)};
}

NormConstants certify_constants(const ModelSpec& spec, const ConjugationWeight& weight,
                                Index scanN) {
    if (!(weight.gamma >= 0.0))
        throw Error(ErrorCode::InvalidModel, "gamma must be >= 0");
    if (weight.cap && *weight.cap <= weight.start)
        throw Error(ErrorCode::InvalidModel, "cap must exceed start");
    const Index lo = std::max<Index>(weight.start, 1);
    NormConstants out;
    out.gamma = weight.gamma;

    double inf_lambda = kInf;
    double sup1 = 0.0, sup2 = 0.0;
    const Index scan_hi = weight.cap ? std::min(scanN, *weight.cap - 1) : scanN;
    for (Index p = lo; p <= std::max(scanN, lo); ++p) {
        const double lam = weight_at(spec, p);
        inf_lambda = std::min(inf_lambda, lam);
        if (p > scan_hi)
            continue;
        const double x = weight.gamma * rho_increment(lam, weight.power);
        sup1 = std::max(sup1, psi1(lam, x));
        sup2 = std::max(sup2, minus_psi2(lam, x));
    }

    const auto tail = weight_inf_lower_bound(spec, std::max(scanN, lo) + 1);
    if (!tail || !(*tail > 0.0))
        throw Error(ErrorCode::UnverifiedTail,
                    "no positive lower bound for the weights beyond index " + std::to_string(scanN));
    inf_lambda = std::min(inf_lambda, *tail);
    out.r_N = 1.0 / inf_lambda;

    const bool tail_in_support = !weight.cap || *weight.cap - 1 > scanN;
    if (tail_in_support && weight.gamma > 0.0) {
        // psi1 decreases in lambda for both powers; so does -psi2 for power one
        const double x = weight.gamma * rho_increment(*tail, weight.power);
        sup1 = std::max(sup1, psi1(*tail, x));
        if (weight.power == CarlemanPower::One)
            sup2 = std::max(sup2, minus_psi2(*tail, x));
        else
            sup2 = kInf; // lambda sinh(gamma / sqrt(lambda)) grows like gamma sqrt(lambda)
    }

    out.eps_N = 2.0 * sup1;
    out.delta_N = 2.0 * sup2;
    if (weight.gamma > 0.0) {
        out.C1 = out.eps_N / (weight.gamma * weight.gamma);
        out.C2 = out.delta_N / weight.gamma;
    }
    return out;
}

namespace {

double safe_inverse(double x) { return x > 0.0 ? 1.0 / x : kInf; }

} // namespace

double eta_thm1(const GapWindow& window, const NormConstants& c) {
    if (window.kind == GapWindow::Kind::FiniteGap)
        return std::min(safe_inverse(4.0 * c.C2),
                        safe_inverse(std::sqrt(2.0 * c.C1 * (window.s - window.r))));
    return safe_inverse(std::sqrt(2.0 * c.C1));
}

double eta_thm4(const GapWindow& window, const NormConstants& c) {
    if (window.kind != GapWindow::Kind::FiniteGap)
        throw Error(ErrorCode::OutsideGap, "thm4 envelope needs a finite gap");
    return std::min(safe_inverse(8.0 * c.C2),
                    safe_inverse(std::sqrt(2.0 * c.C1 * (window.s - window.r))));
}

WindowCertificate certify_window(const ModelSpec& spec, const GapWindow& window, Index scanN,
                                 EnvelopeKind kind, double max_distance) {
    const bool finite = window.kind == GapWindow::Kind::FiniteGap;
    if (!finite && !(max_distance > 0.0))
        throw Error(ErrorCode::OutsideHalfLine, "half-line certification needs max_distance > 0");
    WindowCertificate cert;
    double gamma = 1e-3;
    for (int it = 1; it <= 200; ++it) {
        ConjugationWeight cw;
        cw.gamma = gamma;
        cert.constants = certify_constants(spec, cw, scanN);
        cert.iterations = it;
        double needed;
        if (finite) {
            cert.eta = kind == EnvelopeKind::Theorem1 ? eta_thm1(window, cert.constants)
                                                      : eta_thm4(window, cert.constants);
            needed = cert.eta * 0.5 * (window.s - window.r); // sqrt(w) <= (s - r)/2
        } else {
            cert.eta = eta_thm1(window, cert.constants);
            needed = cert.eta * std::sqrt(max_distance);
        }
        // C1, C2 grow with gamma, so certification at gamma covers all smaller values
        if (needed <= gamma)
            return cert;
        gamma = needed;
    }
    throw Error(ErrorCode::UnverifiedTail, "gamma fixed point did not settle");
}

double envelope_thm1(const GapWindow& window, const NormConstants& c, double lambda, double rho_n) {
    if (!window.contains(lambda))
        throw Error(ErrorCode::OutsideGap, "lambda outside the window");
    const double eta = eta_thm1(window, c);
    if (window.kind == GapWindow::Kind::FiniteGap) {
        const double pre = 4.0 * std::max(1.0 / (lambda - window.r), 1.0 / (window.s - lambda));
        return pre * std::exp(-eta * std::sqrt(window.w(lambda)) * rho_n);
    }
    const double dist = window.edge_distance(lambda);
    return 4.0 / dist * std::exp(-eta * std::sqrt(dist) * rho_n);
}

double envelope_thm2(const GapWindow& window, double lambda, double eps, double sumN) {
    if (!(eps > 0.0 && eps < 0.5))
        throw Error(ErrorCode::BadEpsilon, "envelope_thm2 needs 0 < eps < 1/2");
    if (window.kind != GapWindow::Kind::FiniteGap || !window.contains(lambda))
        throw Error(ErrorCode::OutsideGap, "lambda outside the finite gap");
    const double w = window.w(lambda);
    return (window.s - window.r) / (eps * w) * std::exp(-(0.5 - eps) * std::sqrt(w) * sumN);
}

double envelope_thm3(double d, cplx lambda, double eps, double sumSqrtN) {
    if (!(lambda.real() < d))
        throw Error(ErrorCode::OutsideHalfLine, "envelope_thm3 needs Re lambda < d");
    if (!(eps > 0.0 && eps < 1.0))
        throw Error(ErrorCode::BadEpsilon, "envelope_thm3 needs 0 < eps < 1");
    const double dist = d - lambda.real();
    return 1.0 / (dist * eps) * std::exp(-(1.0 - eps) * std::sqrt(dist) * sumSqrtN);
}

double envelope_thm4(const GapWindow& window, const NormConstants& c, double lambda, double delta,
                     double sumBA) {
    if (window.kind != GapWindow::Kind::FiniteGap || !window.contains(lambda))
        throw Error(ErrorCode::OutsideGap, "lambda outside the finite gap");
    const double w = window.w(lambda);
    if (std::abs(delta) > std::sqrt(w) / 8.0)
        throw Error(ErrorCode::DeltaTooLarge, "|delta| exceeds sqrt(w)/8");
    const double pre = 4.0 * std::max(1.0 / (lambda - window.r), 1.0 / (window.s - lambda));
    return pre * std::exp(-eta_thm4(window, c) * std::sqrt(w) * sumBA);
}

double c3_thm2(const ModelSpec& spec, const GapWindow& window, double eps) {
    if (!(eps > 0.0 && eps < 0.5))
        throw Error(ErrorCode::BadEpsilon, "envelope_thm2 needs 0 < eps < 1/2");
    const auto inf1 = weight_inf_lower_bound(spec, 1);
    if (!inf1 || !(*inf1 > 0.0))
        throw Error(ErrorCode::UnverifiedTail, "no positive lower bound for the weights");
    const double r0 = 1.0 / *inf1;
    const double len = window.s - window.r;
    const double gmax = (0.5 - eps) * 0.5 * len;
    const double kappa = std::cosh(gmax * r0);
    // ||Re A|| <= (1/2 - eps)^2 kappa w r(N);  beta^2 <= (1 - 2 eps)^2 w (1 + gmax^2 r0 kappa^2 r(N))
    const double a = (0.5 - eps) * (0.5 - eps) * kappa * len;
    const double b = (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps) * gmax * gmax * r0 * kappa * kappa;
    return a + b;
}

namespace {

// smallest N >= 1 with pred(N), assuming pred is monotone; scan then doubling
template <class Pred>
Index first_index(Pred pred, const char* what) {
    constexpr Index linear_limit = Index{1} << 20;
    for (Index N = 1; N <= linear_limit; ++N)
        if (pred(N))
            return N;
    Index lo = linear_limit, hi = linear_limit * 2;
    while (!pred(hi)) {
        lo = hi;
        hi *= 2;
        if (hi > (Index{1} << 52))
            throw Error(ErrorCode::NotUnbounded, what);
    }
    while (hi - lo > 1) {
        const Index mid = lo + (hi - lo) / 2;
        (pred(mid) ? hi : lo) = mid;
    }
    return hi;
}

} // namespace

Thm2Choice pick_N_thm2(const ModelSpec& spec, const GapWindow& window, double eps,
                       std::optional<double> c3_override) {
    if (!(eps > 0.0 && eps < 0.5))
        throw Error(ErrorCode::BadEpsilon, "envelope_thm2 needs 0 < eps < 1/2");
    if (window.kind != GapWindow::Kind::FiniteGap)
        throw Error(ErrorCode::OutsideGap, "envelope_thm2 needs a finite gap");
    if (!weights_diverge(spec))
        throw Error(ErrorCode::NotUnbounded, "envelope_thm2 needs lambda_n -> infinity");
    Thm2Choice out;
    out.C3 = c3_override ? *c3_override : c3_thm2(spec, window, eps);
    // d+ d- - beta^2 >= w [4 eps - 4 eps^2 - C3 r(N)] must stay >= eps w
    out.threshold = std::min(4.0 * eps * eps, 3.0 * eps - 4.0 * eps * eps) / out.C3;
    out.N = first_index(
        [&](Index N) {
            const auto inf = weight_inf_lower_bound(spec, N);
            return inf && *inf > 0.0 && 1.0 / *inf <= out.threshold;
        },
        "r(N) never reaches the thm2 threshold");
    return out;
}

Index pick_N_thm3(const ModelSpec& spec, double d, cplx lambda, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw Error(ErrorCode::BadEpsilon, "envelope_thm3 needs 0 < eps < 1");
    if (!(lambda.real() < d))
        throw Error(ErrorCode::OutsideHalfLine, "envelope_thm3 needs Re lambda < d");
    if (!weights_diverge(spec))
        throw Error(ErrorCode::NotUnbounded, "envelope_thm3 needs lambda_n -> infinity");
    const double growth = std::exp((1.0 - eps) * (1.0 - eps) * (d - lambda.real()));
    return first_index(
        [&](Index N) {
            const auto inf = weight_inf_lower_bound(spec, N);
            return inf && *inf >= 1.0 && 2.0 / *inf * growth <= eps;
        },
        "no N satisfies the thm3 conditions");
}

double lemma_inverse_bound(double d_plus, double d_minus, double beta, LemmaMode mode) {
    if (!(d_plus > 0.0 && d_minus > 0.0))
        throw Error(ErrorCode::BetaTooLarge, "lemma bounds need d+ > 0 and d- > 0");
    const double prod = d_plus * d_minus; // +inf when either side is unbounded
    const double b2 = beta * beta;
    if (mode == LemmaMode::L1) {
        if (std::isfinite(prod) && std::abs(beta) > 0.5 * std::sqrt(prod))
            throw Error(ErrorCode::BetaTooLarge, "L1 bound needs |beta| <= sqrt(d+ d-)/2");
        return 2.0 * std::max(1.0 / d_plus, 1.0 / d_minus);
    }
    if (std::isfinite(prod) && !(b2 < prod))
        throw Error(ErrorCode::BetaTooLarge, "L2 bound needs |beta| < sqrt(d+ d-)");
    if (std::isinf(d_plus) && std::isinf(d_minus))
        return 0.0;
    if (std::isinf(d_plus) || std::isinf(d_minus))
        return 1.0 / std::min(d_plus, d_minus); // exact limit of the rationalised form
    // [D - sqrt(D^2 + b^2 - d+ d-)]^{-1} = (D + sqrt(h^2 + b^2)) / (d+ d- - b^2)
    const double D = 0.5 * (d_plus + d_minus);
    const double h = 0.5 * (d_plus - d_minus);
    return (D + std::sqrt(h * h + b2)) / (prod - b2);
}

EnvelopeReport verify_envelope(const ResolventColumn& column, std::span<const double> envelope,
                               Index skirt) {
    EnvelopeReport rep;
    const Index last = std::min<Index>(column.N - skirt, static_cast<Index>(envelope.size()));
    for (Index n = 1; n <= last; ++n) {
        const double u = std::abs(column.at(n));
        const double e = envelope[static_cast<std::size_t>(n - 1)];
        ++rep.checked;
        if (u > e * (1.0 + kEnvelopeSlack))
            rep.violations.push_back(n);
        const double ratio = e > 0.0 ? u / e : (u > 0.0 ? kInf : 0.0);
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.worst_index = n;
        }
    }
    return rep;
}

std::vector<double> thm1_envelope_sequence(const ModelSpec& spec, const GapWindow& window,
                                           const NormConstants& c, double lambda, Index N) {
    const auto rho = carleman_prefix(spec, N, CarlemanPower::One, 1);
    std::vector<double> env(static_cast<std::size_t>(N));
    for (Index n = 1; n <= N; ++n)
        env[static_cast<std::size_t>(n - 1)] = envelope_thm1(window, c, lambda, rho[n]);
    return env;
}

std::vector<double> thm3_envelope_sequence(const ModelSpec& spec, double d, cplx lambda, double eps,
                                           Index start, Index N) {
    const auto sums = carleman_prefix(spec, N, CarlemanPower::Half, start);
    std::vector<double> env(static_cast<std::size_t>(N));
    for (Index n = 1; n <= N; ++n)
        env[static_cast<std::size_t>(n - 1)] = envelope_thm3(d, lambda, eps, sums[n]);
    return env;
}

} // namespace jdecay
