// SPDX-License-Identifier: Apache-2.0
#include "jdecay/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numbers>

namespace jdecay {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::IndexOutOfWindow: return "IndexOutOfWindow";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::OutsideGap: return "OutsideGap";
    case ErrorCode::OutsideHalfLine: return "OutsideHalfLine";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorCode::BetaTooLarge: return "BetaTooLarge";
    case ErrorCode::NotUnbounded: return "NotUnbounded";
    case ErrorCode::UnverifiedTail: return "UnverifiedTail";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::LayoutOverlap: return "LayoutOverlap";
    case ErrorCode::OnBlockSpectrum: return "OnBlockSpectrum";
    case ErrorCode::PhaseNotFound: return "PhaseNotFound";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

void BarrierLayout::validate() const {
    if (centers.size() != half_lengths.size())
        throw Error(ErrorCode::LayoutOverlap, "centers and half_lengths differ in length");
    for (std::size_t k = 0; k < size(); ++k) {
        if (half_lengths[k] < 0)
            throw Error(ErrorCode::LayoutOverlap, "negative half-length");
        if (interval_lo(k) < 1)
            throw Error(ErrorCode::LayoutOverlap, "barrier interval reaches below index 1");
        if (k + 1 < size() && !(interval_hi(k) < interval_lo(k + 1)))
            throw Error(ErrorCode::LayoutOverlap,
                        "barriers " + std::to_string(k + 1) + " and " + std::to_string(k + 2) +
                            " are not separated");
    }
}

bool BarrierLayout::in_matching_region(Index n) const {
    // matching_lo is increasing because the intervals are separated
    std::size_t lo = 0, hi = size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (matching_lo(mid) <= n)
            lo = mid + 1;
        else
            hi = mid;
    }
    std::size_t k = lo;
    // regions of neighbours may overlap by a few indices, so look back two
    for (std::size_t back = 0; back < 2 && k > 0; ++back) {
        --k;
        if (n >= matching_lo(k) && n <= matching_hi(k))
            return true;
    }
    return false;
}

double phi_value(PhiKind kind, double x, double period) {
    const double t = std::fmod(x, period) / period;
    const double base = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * t));
    switch (kind) {
    case PhiKind::Cosine: return base;
    case PhiKind::CosineSquared: return base * base;
    }
    return base;
}

ModelSpec make_spec(Rule rule) {
    ModelSpec spec;
    spec.rule = std::move(rule);
    return spec;
}

ModelPtr share(ModelSpec spec) { return std::make_shared<const ModelSpec>(std::move(spec)); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double periodic_c(Index n, double c1, double c2) { return (n % 2 == 1) ? c1 : c2; }

void invalid(const std::string& what) { throw Error(ErrorCode::InvalidModel, what); }

Entry raw_entry(const ModelSpec& spec, Index n) {
    const double dn = static_cast<double>(n);
    return std::visit(
        overloaded{
            [&](const rules::Constant& r) { return Entry{r.lambda, r.q}; },
            [&](const rules::Example1& r) { return Entry{dn + periodic_c(n, r.c1, r.c2), 0.0}; },
            [&](const rules::Example2&) { return Entry{dn, -2.0 * dn}; },
            [&](const rules::PowerModulated& r) {
                const double c = periodic_c(n, r.c1, r.c2);
                return Entry{std::pow(dn, r.alpha) + c * phi_value(r.phi, std::pow(dn, r.gamma), r.period),
                             0.0};
            },
            [&](const rules::PowerPeriodic& r) {
                return Entry{std::pow(dn, r.alpha) + periodic_c(n, r.c1, r.c2), 0.0};
            },
            [&](const rules::BarrierComposite& r) {
                return r.layout.in_matching_region(n) ? sample_operator(*r.base, n)
                                                      : sample_operator(*r.inside, n);
            },
            [&](const rules::Table& r) {
                const auto L = static_cast<Index>(r.weights.size());
                if (n <= L)
                    return Entry{r.weights[n - 1], r.diag[n - 1]};
                if (!r.tail)
                    throw Error(ErrorCode::IndexOutOfWindow, "table has no tail rule");
                return sample_operator(*r.tail, n);
            },
        },
        spec.rule);
}

} // namespace

void validate(const ModelSpec& spec) {
    std::visit(overloaded{
                   [](const rules::Constant& r) {
                       if (!(r.lambda > 0.0) || !std::isfinite(r.lambda) || !std::isfinite(r.q))
                           invalid("Constant needs finite lambda > 0");
                   },
                   [](const rules::Example1& r) {
                       if (r.c1 == r.c2)
                           invalid("Example1 needs c1 != c2");
                       if (!(1.0 + r.c1 > 0.0) || !(2.0 + r.c2 > 0.0))
                           invalid("Example1 needs n + c_n > 0");
                   },
                   [](const rules::Example2&) {},
                   [](const rules::PowerModulated& r) {
                       if (!(r.alpha > 0.0 && r.alpha < 1.0))
                           invalid("PowerModulated needs 0 < alpha < 1");
                       if (!(r.gamma > 0.0 && r.gamma < 0.5 * (1.0 - r.alpha)))
                           invalid("PowerModulated needs 0 < gamma < (1 - alpha)/2");
                       if (!(r.c1 > 0.0 && r.c2 > 0.0) || r.c1 == r.c2)
                           invalid("PowerModulated needs c1, c2 > 0 and c1 != c2");
                       if (!(r.period > 0.0))
                           invalid("PowerModulated needs T > 0");
                   },
                   [](const rules::PowerPeriodic& r) {
                       if (!(r.alpha >= 0.0 && r.alpha < 1.0))
                           invalid("PowerPeriodic needs 0 <= alpha < 1");
                       if (!(1.0 + r.c1 > 0.0) || !(std::pow(2.0, r.alpha) + r.c2 > 0.0))
                           invalid("PowerPeriodic needs n^alpha + c_n > 0");
                   },
                   [](const rules::BarrierComposite& r) {
                       if (!r.base || !r.inside)
                           invalid("BarrierComposite needs base and inside");
                       validate(*r.base);
                       validate(*r.inside);
                       r.layout.validate();
                   },
                   [](const rules::Table& r) {
                       if (r.weights.size() != r.diag.size())
                           invalid("Table weights and diag differ in length");
                       for (double w : r.weights)
                           if (!(w > 0.0) || !std::isfinite(w))
                               invalid("Table weight must be finite and > 0");
                       if (r.tail)
                           validate(*r.tail);
                   },
               },
               spec.rule);
    if (!std::isfinite(spec.q1_shift))
        invalid("q1 shift must be finite");
}

Entry sample_operator(const ModelSpec& spec, Index n) {
    if (n < 0)
        throw Error(ErrorCode::IndexOutOfWindow, "negative index");
    if (n == 0)
        return {1.0, 0.0};
    Entry e = raw_entry(spec, n);
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
        throw Error(ErrorCode::NonPositiveWeight, "lambda_" + std::to_string(n) + " <= 0");
    if (n == 1)
        e.diag += spec.q1_shift;
    if (spec.reflected)
        e.diag = -e.diag;
    return e;
}

void TridiagonalSlice::validate() const {
    if (diag.empty() || offdiag.size() + 1 != diag.size())
        throw Error(ErrorCode::IndexOutOfWindow, "slice needs |offdiag| = |diag| - 1 >= 0");
    for (double w : offdiag)
        if (!(w > 0.0))
            throw Error(ErrorCode::NonPositiveWeight, "slice offdiagonal must be > 0");
}

TridiagonalSlice truncate(const ModelSpec& spec, Index lo, Index hi) {
    if (lo < 1 || hi < lo)
        throw Error(ErrorCode::IndexOutOfWindow, "truncate needs 1 <= lo <= hi");
    TridiagonalSlice s;
    s.lo = lo;
    s.hi = hi;
    s.diag.reserve(static_cast<std::size_t>(hi - lo + 1));
    s.offdiag.reserve(static_cast<std::size_t>(hi - lo));
    for (Index n = lo; n <= hi; ++n) {
        const Entry e = sample_operator(spec, n);
        s.diag.push_back(e.diag);
        if (n < hi)
            s.offdiag.push_back(e.weight);
    }
    return s;
}

namespace {
double carleman_term(double w, CarlemanPower p) {
    return p == CarlemanPower::One ? 1.0 / w : 1.0 / std::sqrt(w);
}
} // namespace

double carleman_sum(const ModelSpec& spec, Index n, CarlemanPower power, Index start) {
    double sum = 0.0;
    for (Index k = std::max<Index>(start, 1); k < n; ++k)
        sum += carleman_term(weight_at(spec, k), power);
    return sum;
}

std::vector<double> carleman_prefix(const ModelSpec& spec, Index N, CarlemanPower power,
                                    Index start) {
    std::vector<double> out(static_cast<std::size_t>(N + 1), 0.0);
    double sum = 0.0;
    for (Index n = 1; n <= N; ++n) {
        const Index k = n - 1;
        if (k >= std::max<Index>(start, 1))
            sum += carleman_term(weight_at(spec, k), power);
        out[static_cast<std::size_t>(n)] = sum;
    }
    return out;
}

ModelSpec rank_one_perturb(const ModelSpec& spec, double shift) {
    ModelSpec out = spec;
    out.q1_shift += spec.reflected ? -shift : shift;
    return out;
}

ModelSpec reflect(const ModelSpec& spec) {
    ModelSpec out = spec;
    out.reflected = !spec.reflected;
    return out;
}

bool has_zero_diagonal(const ModelSpec& spec) {
    if (spec.q1_shift != 0.0)
        return false;
    return std::visit(overloaded{
                          [](const rules::Constant& r) { return r.q == 0.0; },
                          [](const rules::Example1&) { return true; },
                          [](const rules::Example2&) { return false; },
                          [](const rules::PowerModulated&) { return true; },
                          [](const rules::PowerPeriodic&) { return true; },
                          [](const rules::BarrierComposite& r) {
                              return has_zero_diagonal(*r.base) && has_zero_diagonal(*r.inside);
                          },
                          [](const rules::Table& r) {
                              return std::all_of(r.diag.begin(), r.diag.end(),
                                                 [](double q) { return q == 0.0; }) &&
                                     (!r.tail || has_zero_diagonal(*r.tail));
                          },
                      },
                      spec.rule);
}

std::optional<double> weight_inf_lower_bound(const ModelSpec& spec, Index from) {
    from = std::max<Index>(from, 1);
    const double f = static_cast<double>(from);
    return std::visit(
        overloaded{
            [](const rules::Constant& r) -> std::optional<double> { return r.lambda; },
            [&](const rules::Example1& r) -> std::optional<double> {
                // increasing along each parity class
                return std::min(f + periodic_c(from, r.c1, r.c2),
                                f + 1.0 + periodic_c(from + 1, r.c1, r.c2));
            },
            [&](const rules::Example2&) -> std::optional<double> { return f; },
            [&](const rules::PowerModulated& r) -> std::optional<double> {
                return std::pow(f, r.alpha);
            },
            [&](const rules::PowerPeriodic& r) -> std::optional<double> {
                return std::pow(f, r.alpha) + std::min(r.c1, r.c2);
            },
            [&](const rules::BarrierComposite& r) -> std::optional<double> {
                auto a = weight_inf_lower_bound(*r.base, from);
                auto b = weight_inf_lower_bound(*r.inside, from);
                if (!a || !b)
                    return std::nullopt;
                return std::min(*a, *b);
            },
            [&](const rules::Table& r) -> std::optional<double> {
                const auto L = static_cast<Index>(r.weights.size());
                double m = std::numeric_limits<double>::infinity();
                for (Index p = from; p <= L; ++p)
                    m = std::min(m, r.weights[p - 1]);
                if (!r.tail)
                    return std::nullopt;
                auto t = weight_inf_lower_bound(*r.tail, std::max(from, L + 1));
                if (!t)
                    return std::nullopt;
                return std::min(m, *t);
            },
        },
        spec.rule);
}

double weight_sup_upper_bound(const ModelSpec& spec, Index lo, Index hi) {
    lo = std::max<Index>(lo, 1);
    const double h = static_cast<double>(hi);
    return std::visit(
        overloaded{
            [](const rules::Constant& r) { return r.lambda; },
            [&](const rules::Example1& r) { return h + std::max(r.c1, r.c2); },
            [&](const rules::Example2&) { return h; },
            [&](const rules::PowerModulated& r) {
                return std::pow(h, r.alpha) + std::max(r.c1, r.c2);
            },
            [&](const rules::PowerPeriodic& r) {
                return std::pow(h, r.alpha) + std::max(r.c1, r.c2);
            },
            [&](const rules::BarrierComposite& r) {
                return std::max(weight_sup_upper_bound(*r.base, lo, hi),
                                weight_sup_upper_bound(*r.inside, lo, hi));
            },
            [&](const rules::Table& r) {
                const auto L = static_cast<Index>(r.weights.size());
                double m = 0.0;
                for (Index p = lo; p <= std::min(hi, L); ++p)
                    m = std::max(m, r.weights[p - 1]);
                if (hi > L && r.tail)
                    m = std::max(m, weight_sup_upper_bound(*r.tail, std::max(lo, L + 1), hi));
                return m;
            },
        },
        spec.rule);
}

bool weights_diverge(const ModelSpec& spec) {
    return std::visit(overloaded{
                          [](const rules::Constant&) { return false; },
                          [](const rules::Example1&) { return true; },
                          [](const rules::Example2&) { return true; },
                          [](const rules::PowerModulated&) { return true; },
                          [](const rules::PowerPeriodic& r) { return r.alpha > 0.0; },
                          [](const rules::BarrierComposite& r) {
                              return weights_diverge(*r.inside) &&
                                     (r.layout.empty() || weights_diverge(*r.base));
                          },
                          [](const rules::Table& r) { return r.tail && weights_diverge(*r.tail); },
                      },
                      spec.rule);
}

} // namespace jdecay
