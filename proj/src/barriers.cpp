// SPDX-License-Identifier: Apache-2.0
#include "jdecay/barriers.hpp"

#include <algorithm>
#include <cmath>

namespace jdecay {

namespace {

std::size_t idx(Index k) { return static_cast<std::size_t>(k - 1); }

void require_barrier(const BarrierLayout& layout, Index k) {
    if (k < 1 || k > static_cast<Index>(layout.size()))
        throw Error(ErrorCode::IndexOutOfWindow, "barrier index outside the layout");
}

} // namespace

ModelSpec build_composite(const ModelSpec& base, const ModelSpec& inside,
                          const BarrierLayout& layout) {
    if (!has_zero_diagonal(base) || !has_zero_diagonal(inside))
        throw Error(ErrorCode::InvalidModel, "composite operators need zero diagonals");
    layout.validate();
    return make_spec(rules::BarrierComposite{share(base), layout, share(inside)});
}

BarrierCaps barrier_caps(const ModelSpec& spec, const BarrierLayout& layout, Index exact_limit) {
    BarrierCaps out;
    for (std::size_t k = 0; k < layout.size(); ++k) {
        const Index lo = std::max<Index>(layout.matching_lo(k), 1);
        const Index hi = layout.matching_hi(k);
        if (hi - lo + 1 <= exact_limit) {
            double m = 0.0;
            for (Index n = lo; n <= hi; ++n)
                m = std::max(m, weight_at(spec, n));
            out.caps.push_back(m);
            out.exact.push_back(true);
        } else {
            // every term of the criterion grows with Lambda_k, so an upper bound is safe
            out.caps.push_back(weight_sup_upper_bound(spec, lo, hi));
            out.exact.push_back(false);
        }
    }
    return out;
}

const char* to_string(Verdict v) {
    return v == Verdict::ConvergentEvidence ? "CONVERGENT_EVIDENCE" : "INCONCLUSIVE";
}

CriterionSum criterion_partial_sum(const BarrierLayout& layout, std::span<const double> caps,
                                   double gamma, Index K) {
    if (!(gamma > 0.0))
        throw Error(ErrorCode::InvalidModel, "criterion needs gamma > 0");
    if (K < 2 || K + 1 > static_cast<Index>(layout.size()) ||
        K + 1 > static_cast<Index>(caps.size()))
        throw Error(ErrorCode::IndexOutOfWindow, "criterion needs 2 <= K and K + 1 barriers");
    auto cap = [&](Index k) { return caps[idx(std::max<Index>(k, 1))]; };
    auto x = [&](Index k) {
        return k == 0 ? 0.0 : static_cast<double>(layout.centers[idx(k)]);
    };

    CriterionSum out;
    for (Index k = 1; k <= K; ++k) {
        const double L = cap(k);
        const double ell = static_cast<double>(layout.half_lengths[idx(k)]);
        const double lt = std::log(L) + std::log(cap(k - 1) + L + cap(k + 1)) - gamma * ell / L +
                          std::log(x(k + 1) - x(k - 1));
        out.log_terms.push_back(lt);
        out.terms.push_back(std::exp(lt));
        out.partial += out.terms.back();
    }

    // ratio test on the trailing terms
    const Index M = std::min<Index>(10, K - 1);
    bool below_one = true, nonincreasing = true;
    double prev_ratio = kInf;
    for (Index k = K - M; k < K; ++k) {
        const double lr = out.log_terms[idx(k + 1)] - out.log_terms[idx(k)];
        const double ratio = std::exp(lr);
        if (!(ratio < 1.0))
            below_one = false;
        if (ratio > prev_ratio * (1.0 + 1e-12))
            nonincreasing = false;
        prev_ratio = ratio;
    }
    out.last_ratio = prev_ratio;
    if (below_one && nonincreasing) {
        out.verdict = Verdict::ConvergentEvidence;
        out.tail_estimate = out.terms.back() * prev_ratio / (1.0 - prev_ratio);
    } else {
        out.verdict = Verdict::Inconclusive;
        out.tail_estimate = kInf;
    }
    return out;
}

CutoffReport cutoff_residual(const ModelSpec& J, const ModelSpec& J0, cplx z,
                             const WindowedSequence& u, Index cut_lo, Index cut_hi) {
    CutoffReport rep;
    auto chi = [&](Index n) { return (n >= cut_lo && n <= cut_hi) ? 1.0 : 0.0; };
    for (Index n : {cut_lo - 2, cut_lo - 1, cut_lo, cut_hi, cut_hi + 1, cut_hi + 2})
        if (n >= u.first && n <= u.last() &&
            std::find(rep.boundary_set.begin(), rep.boundary_set.end(), n) == rep.boundary_set.end())
            rep.boundary_set.push_back(n);
    std::sort(rep.boundary_set.begin(), rep.boundary_set.end());

    for (Index n = std::max<Index>(u.first + 1, 1); n < u.last(); ++n) {
        const Entry p0 = sample_operator(J0, n - 1), h0 = sample_operator(J0, n);
        const Entry p = sample_operator(J, n - 1), h = sample_operator(J, n);
        // same evaluation order on both sides, so matching entries cancel exactly
        const cplx lhs = p0.weight * (chi(n - 1) * u.at(n - 1)) + (h0.diag - z) * (chi(n) * u.at(n)) +
                         h0.weight * (chi(n + 1) * u.at(n + 1));
        const cplx rhs = chi(n) * (p.weight * u.at(n - 1) + (h.diag - z) * u.at(n) +
                                   h.weight * u.at(n + 1));
        const cplx w = lhs - rhs;
        if (w != 0.0) {
            rep.support.push_back(n);
            rep.values.push_back(w);
            if (!std::binary_search(rep.boundary_set.begin(), rep.boundary_set.end(), n))
                rep.contained = false;
        }
    }
    return rep;
}

double bk_value(double cap_prev, double cap, double cap_next, double a_k, double dist_prev,
                double dist) {
    if (!(dist_prev > 0.0) || !(dist > 0.0))
        throw Error(ErrorCode::OnBlockSpectrum, "E lies on a block spectrum");
    const double c2 = cap * cap;
    return c2 * a_k * a_k *
           (1.0 + (cap_prev * cap_prev + c2) / (dist_prev * dist_prev) +
            (c2 + cap_next * cap_next) / (dist * dist));
}

AkBound ak_bound(const GapWindow& window, const NormConstants& constants,
                 const BarrierLayout& layout, Index k, const ModelSpec& J0, double e_lo,
                 double e_hi, double eta0) {
    require_barrier(layout, k);
    if (window.kind != GapWindow::Kind::FiniteGap || !window.contains(e_lo) ||
        !window.contains(e_hi) || e_hi < e_lo)
        throw Error(ErrorCode::OutsideGap, "energy interval must lie inside the gap of J0");
    AkBound out;
    const double eta4 = eta_thm4(window, constants);
    for (double E : {e_lo, e_hi})
        out.prefactor = std::max(out.prefactor,
                                 4.0 * std::max(1.0 / (E - window.r), 1.0 / (window.s - E)));
    // sqrt(w) is concave, its minimum over the interval sits at an endpoint
    out.gamma0 = eta4 * std::min(std::sqrt(window.w(e_lo)), std::sqrt(window.w(e_hi)));
    out.rate = std::min(out.gamma0, eta0);

    const auto i = idx(k);
    const Index x = layout.centers[i];
    const Index ell = layout.half_lengths[i];
    const Index half = layout.inner_half_length(i);
    for (Index n = std::max<Index>(x - ell - 1, 1); n <= x - half - 1; ++n)
        out.left_sum += 1.0 / weight_at(J0, n);
    for (Index n = x + half; n <= x + ell; ++n)
        out.right_sum += 1.0 / weight_at(J0, n);
    out.two_sided = out.prefactor * (std::exp(-out.gamma0 * out.left_sum) +
                                     std::exp(-out.gamma0 * out.right_sum));

    double cap = 0.0;
    for (Index n = std::max<Index>(layout.matching_lo(i), 1); n <= layout.matching_hi(i); ++n)
        cap = std::max(cap, weight_at(J0, n));
    out.cap_form = 2.0 * out.prefactor *
                   std::exp(-out.rate * static_cast<double>(ell) / (2.0 * cap));
    return out;
}

AlphaK alpha_k(std::span<const double> caps, const BarrierLayout& layout, double gamma1, Index k) {
    require_barrier(layout, k + 1);
    if (static_cast<Index>(caps.size()) < k + 1)
        throw Error(ErrorCode::IndexOutOfWindow, "alpha_k needs Lambda_{k+1}");
    const double L = caps[idx(k)];
    const double Ln = caps[idx(k + 1)];
    const double ell = static_cast<double>(layout.half_lengths[idx(k)]);
    const double elln = static_cast<double>(layout.half_lengths[idx(k + 1)]);
    const double s = L * L + Ln * Ln;
    const double a2 = L * L * s * std::exp(-gamma1 * ell / L) + Ln * Ln * s * std::exp(-gamma1 * elln / Ln);
    AlphaK out;
    out.alpha = std::sqrt(a2);
    out.budget = 4.0 * out.alpha *
                 static_cast<double>(layout.centers[idx(k + 1)] - layout.centers[idx(k)]);
    return out;
}

TridiagonalSlice barrier_block(const ModelSpec& J, const BarrierLayout& layout, Index k) {
    if (k == 0)
        return truncate(J, 1, layout.centers.at(0));
    require_barrier(layout, k + 1);
    return truncate(J, layout.centers[idx(k)], layout.centers[idx(k + 1)]);
}

double bk_of_E(const CriterionTerms& terms, Index k, double E, const ModelSpec& J,
               const BarrierLayout& layout) {
    require_barrier(layout, k + 1);
    if (static_cast<Index>(terms.caps.size()) < k + 1 || static_cast<Index>(terms.a_bound.size()) < k)
        throw Error(ErrorCode::IndexOutOfWindow, "criterion terms too short for b_k");
    const double dprev = distance_to_spectrum(barrier_block(J, layout, k - 1), E);
    const double d = distance_to_spectrum(barrier_block(J, layout, k), E);
    if (dprev < kNearSingular || d < kNearSingular)
        throw Error(ErrorCode::OnBlockSpectrum, "E lies on a block spectrum");
    const double cap_prev = terms.caps[idx(std::max<Index>(k - 1, 1))];
    return bk_value(cap_prev, terms.caps[idx(k)], terms.caps[idx(k + 1)], terms.a_bound[idx(k)],
                    dprev, d);
}

L2TailReport l2_tail_check(const ModelSpec& J, double E, std::span<const double> etas, Index N,
                           const BarrierLayout& layout, Index K, std::span<const double> alphas) {
    require_barrier(layout, K);
    const Index xK = layout.centers[idx(K)];
    if (xK >= N)
        throw Error(ErrorCode::IndexOutOfWindow, "truncation must extend beyond x_K");
    L2TailReport rep;
    const auto slice = truncate(J, 1, N);
    for (double eta : etas) {
        if (!(eta > 0.0))
            throw Error(ErrorCode::NearSingular, "eta grid must be positive");
        const auto col = resolvent_column(slice, cplx(E, eta));
        L2TailRow row;
        row.eta = eta;
        for (Index n = 1; n <= N; ++n) {
            const double m2 = std::norm(col.at(n));
            row.total += m2;
            if (n < xK)
                row.head += m2;
        }
        row.tail = row.total - row.head;
        row.holds = row.total <= 2.0 * row.head;
        rep.all_hold = rep.all_hold && row.holds;
        rep.max_total = std::max(rep.max_total, row.total);
        rep.rows.push_back(row);
    }
    for (Index k = K; k + 1 <= static_cast<Index>(layout.size()) &&
                      layout.centers[idx(k + 1)] <= N;
         ++k) {
        const double d = distance_to_spectrum(barrier_block(J, layout, k), E);
        rep.block_distance.push_back(d);
        if (d < kNearSingular)
            rep.on_block_spectrum = true;
        if (static_cast<Index>(alphas.size()) >= k && d < alphas[idx(k)])
            rep.exceptional = true;
    }
    return rep;
}

} // namespace jdecay
