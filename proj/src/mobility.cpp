// SPDX-License-Identifier: Apache-2.0
#include "jdecay/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "jdecay/solutions.hpp"

namespace jdecay {

GapCount gap_count_J0(double alpha, double c1, double c2, Index N, double margin) {
    const ModelSpec J0 = make_spec(rules::PowerPeriodic{alpha, c1, c2});
    validate(J0);
    const double c = std::abs(c1 - c2);
    GapCount out;
    out.N = N;
    out.lo = -c + margin;
    out.hi = c - margin;
    if (!(out.lo < out.hi)) {
        out.stabilized = true;
        return out;
    }
    auto count = [&](Index n) {
        const auto s = truncate(J0, 1, n);
        return sturm_count(s, out.hi) - sturm_count(s, out.lo);
    };
    out.count_N = count(N);
    out.count_2N = count(2 * N);
    out.stabilized = out.count_N == out.count_2N;
    return out;
}

WeylSequenceSpec make_weyl_sequence_spec(const rules::PowerModulated& pm, Index i,
                                         const WeylSequenceOptions& opt) {
    if (i < 1)
        throw Error(ErrorCode::InvalidModel, "Weyl sequence index must be >= 1");
    const double a = pm.alpha, g = pm.gamma;
    WeylSequenceSpec w;
    w.i = i;
    w.x0 = opt.x0;
    w.M = opt.M;
    w.delta = opt.delta ? *opt.delta : 0.5 * (1.0 - a - g) / g;
    w.eps = opt.eps ? *opt.eps : 0.5 * (1.0 - a - g - g * w.delta);
    const double xi = std::pow(w.x0 + static_cast<double>(i) * pm.period, 1.0 / g);
    w.n_i = static_cast<Index>(std::floor(xi));
    w.eps_i = std::pow(static_cast<double>(i), (a + g - 1.0) / g + w.delta);
    const double n = static_cast<double>(w.n_i);
    const double want = w.eps_i * std::pow(n, 1.0 - g);
    const double cap = w.M * std::pow(n, 1.0 - g - w.eps);
    Index D = 2 * static_cast<Index>(std::ceil(want / 2.0));
    const Index Dcap = 2 * static_cast<Index>(std::floor(cap / 2.0));
    D = std::max<Index>(std::min(D, Dcap), 2);
    w.Delta_i = D;
    w.beta_i = 2.0 / static_cast<double>(D);
    return w;
}

void validate(const WeylSequenceSpec& w, const rules::PowerModulated& pm) {
    const double a = pm.alpha, g = pm.gamma;
    if (w.Delta_i <= 0 || w.Delta_i % 2 != 0)
        throw Error(ErrorCode::InvalidModel, "Delta_i must be positive and even");
    if (!(w.delta > 0.0 && w.delta < (1.0 - a - g) / g))
        throw Error(ErrorCode::InvalidModel, "delta outside (0, (1 - alpha - gamma)/gamma)");
    if (!(w.eps > 0.0 && w.eps < 1.0 - a - g - g * w.delta))
        throw Error(ErrorCode::InvalidModel, "eps outside (0, 1 - alpha - gamma - gamma delta)");
    const double n = static_cast<double>(w.n_i);
    const double D = static_cast<double>(w.Delta_i);
    if (D < w.eps_i * std::pow(n, 1.0 - g) || D > w.M * std::pow(n, 1.0 - g - w.eps))
        throw Error(ErrorCode::InvalidModel, "Delta_i outside its admissible window");
}

std::vector<double> reference_solution(double alpha, double E, Index horizon) {
    const ModelSpec ref = make_spec(rules::PowerPeriodic{alpha, 0.0, 0.0});
    const auto seq = recurrence_extend<double>(ref, E, 0.0, 1.0, horizon);
    std::vector<double> u(static_cast<std::size_t>(horizon + 1));
    for (Index n = 0; n <= horizon; ++n)
        u[static_cast<std::size_t>(n)] = seq.value(n);
    double mean = 0.0;
    Index count = 0;
    for (Index n = horizon / 2; n <= horizon; ++n, ++count) {
        const double v = u[static_cast<std::size_t>(n)];
        mean += std::pow(static_cast<double>(n), alpha) * v * v;
    }
    mean /= static_cast<double>(count);
    const double s = 1.0 / std::sqrt(mean);
    for (double& v : u)
        v *= s;
    return u;
}

WindowedSequence weyl_sequence(const std::vector<double>& u, const WeylSequenceSpec& w) {
    if (w.last() >= static_cast<Index>(u.size()))
        throw Error(ErrorCode::IndexOutOfWindow, "reference solution too short for the window");
    WindowedSequence v;
    v.first = w.n_i;
    const Index c = w.center();
    for (Index n = w.n_i; n <= w.last(); ++n) {
        const double t = static_cast<double>(n - c);
        const double tent = n <= c ? 1.0 + w.beta_i * t : 1.0 - w.beta_i * t;
        v.values.emplace_back(u[static_cast<std::size_t>(n)] * tent);
    }
    return v;
}

double weyl_norm2(const std::vector<double>& u, const WeylSequenceSpec& w) {
    double s = 0.0;
    for (const cplx& x : weyl_sequence(u, w).values)
        s += std::norm(x);
    return s;
}

double weyl_quotient(const ModelSpec& spec, double E, const WeylSequenceSpec& w,
                     const std::vector<double>& u) {
    const auto v = weyl_sequence(u, w);
    auto at = [&](Index n) {
        return (n < v.first || n > v.last()) ? 0.0 : v.at(n).real();
    };
    double num = 0.0, den = 0.0;
    for (Index n = std::max<Index>(v.first - 1, 1); n <= v.last() + 1; ++n) {
        const Entry p = sample_operator(spec, n - 1), h = sample_operator(spec, n);
        const double r = p.weight * at(n - 1) + (h.diag - E) * at(n) + h.weight * at(n + 1);
        num += r * r;
        den += at(n) * at(n);
    }
    return std::sqrt(num / den);
}

namespace {

std::size_t idx(Index k) { return static_cast<std::size_t>(k - 1); }

// smallest value of phi on [x0 - e, x0 + e], sampled
double phi_min_near(const rules::PowerModulated& pm, double x0, double e) {
    constexpr int samples = 2000;
    double m = 1.0;
    for (int j = 0; j <= samples; ++j) {
        const double x = x0 - e + 2.0 * e * j / samples;
        m = std::min(m, phi_value(pm.phi, x + pm.period * 8.0, pm.period));
    }
    return m;
}

} // namespace

DerivedLayout derive_barrier_layout(const ModelSpec& spec, double e_lo, double e_hi, double x0,
                                    std::optional<double> eps_phase, Index k_last,
                                    Index scan_limit) {
    const auto* pmp = std::get_if<rules::PowerModulated>(&spec.rule);
    if (!pmp)
        throw Error(ErrorCode::InvalidModel, "barrier layout needs a PowerModulated model");
    const auto& pm = *pmp;
    validate(spec);
    const double c = std::abs(pm.c1 - pm.c2);
    if (!(-c < e_lo && e_lo <= e_hi && e_hi < c))
        throw Error(ErrorCode::OutsideGap, "energy window must lie inside (-c, c)");

    DerivedLayout out;
    out.delta_E = std::min(e_lo + c, c - e_hi);
    const double cmax = std::max(pm.c1, pm.c2);
    out.phi_threshold = 1.0 - out.delta_E / (2.0 * cmax);
    if (std::abs(phi_value(pm.phi, x0 + pm.period * 8.0, pm.period) - 1.0) > 1e-12)
        throw Error(ErrorCode::PhaseNotFound, "phi(x0) != 1");

    if (eps_phase) {
        if (!(*eps_phase > 0.0) || phi_min_near(pm, x0, *eps_phase) < out.phi_threshold)
            throw Error(ErrorCode::PhaseNotFound, "phi drops below the threshold near x0");
        out.eps_phase = *eps_phase;
    } else {
        double lo = 0.0, hi = 0.5 * pm.period;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (phi_min_near(pm, x0, mid) >= out.phi_threshold ? lo : hi) = mid;
        }
        if (!(lo > 0.0))
            throw Error(ErrorCode::PhaseNotFound, "no positive phase half-width");
        out.eps_phase = lo;
    }

    const double g = pm.gamma;
    for (Index k = 1; k <= k_last; ++k) {
        const double base = x0 + static_cast<double>(k) * pm.period;
        const double lo = std::pow(base - out.eps_phase, 1.0 / g);
        const double hi = std::pow(base + out.eps_phase, 1.0 / g);
        const Index x = static_cast<Index>(std::llround(0.5 * (lo + hi)));
        // quarter length, shrunk so the matching region stays inside [lo, hi]
        Index ell = static_cast<Index>(std::floor((hi - lo) / 4.0));
        ell = std::min(ell, static_cast<Index>(std::floor(static_cast<double>(x) - lo)) - 2);
        ell = std::min(ell, static_cast<Index>(std::floor(hi - static_cast<double>(x))) - 1);
        if (ell < 0)
            throw Error(ErrorCode::PhaseNotFound,
                        "phase interval too short for a barrier at k = " + std::to_string(k));
        out.layout.centers.push_back(x);
        out.layout.half_lengths.push_back(ell);
    }
    out.layout.validate();

    const ModelSpec J0 = make_spec(rules::PowerPeriodic{pm.alpha, pm.c1, pm.c2});
    out.J_eps = build_composite(spec, J0, out.layout);

    for (std::size_t k = 0; k < out.layout.size(); ++k) {
        const Index lo = std::max<Index>(out.layout.matching_lo(k), 1);
        const Index hi = out.layout.matching_hi(k);
        const Index len = hi - lo + 1;
        const Index step = std::max<Index>(1, len / scan_limit);
        for (Index n = lo;; n = std::min(n + step, hi)) {
            const double dev = std::abs(weight_at(out.J_eps, n) - weight_at(J0, n));
            out.max_deviation = std::max(out.max_deviation, dev);
            if (n == hi)
                break;
        }
    }
    if (out.max_deviation > 0.5 * out.delta_E)
        throw Error(ErrorCode::PhaseNotFound, "barrier weights deviate by more than delta_E/2");
    return out;
}

GapWindow numerical_gap(const ModelSpec& J, double e_lo, double e_hi, Index N) {
    const auto s = truncate(J, 1, N);
    const Index below = sturm_count(s, e_lo);
    const Index upto = sturm_count(s, e_hi);
    if (upto != below)
        throw Error(ErrorCode::OutsideGap, "truncated spectrum meets the energy window");
    const auto [glo, ghi] = gershgorin_interval(s);
    const double r = below > 0 ? kth_eigenvalue(s, below - 1, glo - 1.0, e_lo) : glo - 1.0;
    const double t = upto < static_cast<Index>(s.size()) ? kth_eigenvalue(s, upto, e_hi, ghi + 1.0)
                                                         : ghi + 1.0;
    return GapWindow::finite(r, t);
}

WeylScan weyl_scan(const ModelSpec& spec, double E, Index n_max, Index i_first,
                   const WeylSequenceOptions& opt) {
    const auto* pm = std::get_if<rules::PowerModulated>(&spec.rule);
    if (!pm)
        throw Error(ErrorCode::InvalidModel, "Weyl scan needs a power-modulated model");
    WeylScan out;
    out.E = E;
    const auto u = reference_solution(pm->alpha, E, n_max + 1);
    for (Index i = std::max<Index>(i_first, 1);; ++i) {
        const auto w = make_weyl_sequence_spec(*pm, i, opt);
        if (w.last() > n_max)
            break;
        validate(w, *pm);
        out.windows.push_back(w);
        out.quotient.push_back(weyl_quotient(spec, E, w, u));
        const double model = static_cast<double>(w.Delta_i) *
                             std::pow(static_cast<double>(w.n_i), -pm->alpha);
        out.norm_ratio.push_back(weyl_norm2(u, w) / model);
    }
    if (out.quotient.size() < 2)
        throw Error(ErrorCode::IndexOutOfWindow, "fewer than two Weyl windows below n_max");
    for (std::size_t j = 1; j < out.quotient.size(); ++j)
        if (!(out.quotient[j] < out.quotient[j - 1]))
            out.decreasing = false;
    out.final_over_initial = out.quotient.back() / out.quotient.front();
    return out;
}

DiscriminantScan discriminant_scan(const ModelSpec& spec, double E, Index first, Index last) {
    if (first < 1 || last < first)
        throw Error(ErrorCode::IndexOutOfWindow, "empty discriminant range");
    DiscriminantScan out;
    out.E = E;
    out.first = first;
    out.last = last;
    out.threshold = -2.0 * E * E;
    out.max_V = -kInf;
    for (Index n = first; n <= last; ++n) {
        const double v = discriminant_V(spec, E, n);
        if (v > out.max_V) {
            out.max_V = v;
            out.argmax = n;
        }
    }
    out.pass = out.max_V < out.threshold;
    return out;
}

BarrierPipelineResult run_barrier_pipeline(const ModelSpec& spec, const BarrierPipelineOptions& opt) {
    if (!(opt.gamma1_fraction > 0.0 && opt.gamma1_fraction < 0.5))
        throw Error(ErrorCode::InvalidModel, "gamma_1 fraction must lie in (0, 1/2)");
    if (opt.bk_barriers < 2 || opt.criterion_barriers < opt.bk_barriers)
        throw Error(ErrorCode::InvalidModel, "need 2 <= bk_barriers <= criterion_barriers");
    BarrierPipelineResult res;
    res.derived = derive_barrier_layout(spec, opt.e_lo, opt.e_hi, opt.x0, opt.eps_phase,
                                        opt.criterion_barriers + 1);
    const auto& layout = res.derived.layout;
    const ModelSpec& Jeps = res.derived.J_eps;
    const auto caps = barrier_caps(spec, layout).caps;

    res.criterion_gammas = opt.gammas;
    for (double g : opt.gammas)
        res.criteria.push_back(criterion_partial_sum(layout, caps, g, opt.criterion_barriers));

    res.window = numerical_gap(Jeps, opt.e_lo, opt.e_hi, opt.gap_truncation);
    res.thm4 = certify_window(Jeps, res.window, opt.scanN, EnvelopeKind::Theorem4);
    res.d0 = std::min(opt.e_lo - res.window.r, res.window.s - opt.e_hi);
    res.eta0 = res.d0 / 8.0;

    const Index kb = opt.bk_barriers;
    CriterionTerms terms;
    terms.caps.assign(caps.begin(), caps.begin() + kb);
    for (Index k = 1; k <= kb; ++k) {
        const auto ak = ak_bound(res.window, res.thm4.constants, layout, k, Jeps, opt.e_lo, opt.e_hi,
                                 res.eta0);
        terms.a_bound.push_back(ak.two_sided);
        res.gamma0 = ak.gamma0;
    }
    res.gamma1 = opt.gamma1_fraction * res.gamma0;
    const double rate = std::min(res.gamma0, res.eta0);
    const auto small = criterion_partial_sum(layout, caps, rate, kb - 1);
    for (Index k = 1; k < kb; ++k) {
        const auto al = alpha_k(caps, layout, res.gamma1, k);
        terms.alpha.push_back(al.alpha);
        terms.budget.push_back(al.budget);
        const auto i = static_cast<std::size_t>(k - 1);
        res.rows.push_back({k, layout.centers[i], layout.half_lengths[i], caps[i], small.terms[i],
                            terms.a_bound[i], al.alpha, al.budget});
    }

    // blocks J_0 .. J_{kb-1}, shared by every energy
    std::vector<TridiagonalSlice> blocks;
    for (Index k = 0; k < kb; ++k)
        blocks.push_back(barrier_block(spec, layout, k));

    std::vector<double> energies = opt.energies;
    if (energies.empty())
        for (int j = 0; j < 20; ++j)
            energies.push_back(opt.e_lo + (opt.e_hi - opt.e_lo) * (j + 0.5) / 20.0);
    for (double E : energies) {
        EnergyBudget eb;
        eb.E = E;
        for (const auto& b : blocks)
            eb.block_distance.push_back(distance_to_spectrum(b, E));
        for (Index k = 1; k < kb; ++k) {
            const auto i = static_cast<std::size_t>(k);
            const double dprev = eb.block_distance[i - 1], d = eb.block_distance[i];
            double bk = kInf;
            if (dprev >= kNearSingular && d >= kNearSingular)
                bk = bk_value(terms.caps[std::max<std::size_t>(i, 2) - 2], terms.caps[i - 1],
                              terms.caps[i], terms.a_bound[i - 1], dprev, d);
            eb.bk.push_back(bk);
            if (d < terms.alpha[i - 1])
                eb.off_blocks_by_alpha = false;
        }
        for (Index k = kb - 1; k >= 1; --k) {
            if (!(eb.bk[static_cast<std::size_t>(k - 1)] <= kBudgetThreshold))
                break;
            eb.K = k;
        }
        res.budgets.push_back(std::move(eb));
    }

    std::vector<double> etas;
    for (Index j = 1; j <= opt.l2_eta_points; ++j)
        etas.push_back(res.eta0 * static_cast<double>(j) / static_cast<double>(opt.l2_eta_points));
    // one truncation and one solve per eta; every K reads the same prefix sums
    const Index N = opt.l2_N;
    if (layout.centers.front() >= N)
        throw Error(ErrorCode::IndexOutOfWindow, "truncation must extend beyond x_1");
    const auto slice = truncate(spec, 1, N);
    const Index nblocks = static_cast<Index>(layout.size());
    for (double E : opt.l2_energies) {
        // head[j][K] = sum over n < x_K, total[j]
        std::vector<std::vector<double>> head(etas.size());
        std::vector<double> total(etas.size(), 0.0);
        for (std::size_t j = 0; j < etas.size(); ++j) {
            const auto col = resolvent_column(slice, cplx(E, etas[j]));
            head[j].assign(static_cast<std::size_t>(nblocks), 0.0);
            double acc = 0.0;
            Index k = 0;
            for (Index n = 1; n <= N; ++n) {
                while (k < nblocks && layout.centers[static_cast<std::size_t>(k)] <= n)
                    head[j][static_cast<std::size_t>(k++)] = acc;
                acc += std::norm(col.at(n));
            }
            for (; k < nblocks; ++k)
                head[j][static_cast<std::size_t>(k)] = acc;
            total[j] = acc;
        }
        const EnergyBudget* known = nullptr;
        for (const auto& eb : res.budgets)
            if (eb.E == E)
                known = &eb;
        std::vector<double> dist; // Delta_k(E), filled lazily
        auto distance = [&](Index k) {
            while (static_cast<Index>(dist.size()) <= k) {
                const auto i = dist.size();
                dist.push_back(known && i < known->block_distance.size()
                                   ? known->block_distance[i]
                                   : distance_to_spectrum(barrier_block(spec, layout,
                                                                        static_cast<Index>(i)),
                                                          E));
            }
            return dist[static_cast<std::size_t>(k)];
        };

        HeadDominance hd;
        hd.E = E;
        for (Index K = 1; K <= opt.l2_K_max && K <= nblocks && layout.centers[idx(K)] < N; ++K) {
            L2TailReport rep;
            for (std::size_t j = 0; j < etas.size(); ++j) {
                L2TailRow row;
                row.eta = etas[j];
                row.total = total[j];
                row.head = head[j][idx(K)];
                row.tail = row.total - row.head;
                row.holds = row.total <= 2.0 * row.head;
                rep.all_hold = rep.all_hold && row.holds;
                rep.max_total = std::max(rep.max_total, row.total);
                rep.rows.push_back(row);
            }
            for (Index k = K; k + 1 <= nblocks && layout.centers[idx(k + 1)] <= N; ++k) {
                const double d = distance(k);
                rep.block_distance.push_back(d);
                if (d < kNearSingular)
                    rep.on_block_spectrum = true;
                if (static_cast<Index>(terms.alpha.size()) >= k && d < terms.alpha[idx(k)])
                    rep.exceptional = true;
            }
            hd.report = std::move(rep);
            if (hd.report.all_hold) {
                hd.K = K;
                break;
            }
        }
        res.heads.push_back(std::move(hd));
    }
    return res;
}

} // namespace jdecay
