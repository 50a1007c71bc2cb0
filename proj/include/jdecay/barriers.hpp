// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "jdecay/envelopes.hpp"
#include "jdecay/model.hpp"
#include "jdecay/tridiag.hpp"

// Barrier indices k are 1-based throughout this header, as in the layout CSV.
namespace jdecay {

inline constexpr double kBudgetThreshold = 1.0 / 32.0;

ModelSpec build_composite(const ModelSpec& base, const ModelSpec& inside,
                          const BarrierLayout& layout);

// Lambda_k = max lambda_n over [x_k - l_k - 2, x_k + l_k + 1]. Regions longer than
// exact_limit use the analytic upper bound instead of a scan.
struct BarrierCaps {
    std::vector<double> caps;
    std::vector<bool> exact;
};
BarrierCaps barrier_caps(const ModelSpec& spec, const BarrierLayout& layout,
                         Index exact_limit = Index{1} << 20);

enum class Verdict { ConvergentEvidence, Inconclusive };
const char* to_string(Verdict v);

struct CriterionSum {
    double partial = 0.0;
    double tail_estimate = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<double> terms;      // k = 1..K
    std::vector<double> log_terms;  // natural log of the terms
    double last_ratio = 0.0;
};

// needs K + 1 barriers; conventions Lambda_0 = Lambda_1, x_0 = 0
CriterionSum criterion_partial_sum(const BarrierLayout& layout, std::span<const double> caps,
                                   double gamma, Index K);

struct WindowedSequence {
    Index first = 0;
    std::vector<cplx> values;

    Index last() const { return first + static_cast<Index>(values.size()) - 1; }
    cplx at(Index n) const { return values[static_cast<std::size_t>(n - first)]; }
};

struct CutoffReport {
    std::vector<Index> support;
    std::vector<cplx> values;
    std::vector<Index> boundary_set;
    bool contained = true;
};

// w = (J0 - z)(chi u) - chi (J - z) u on the interior of u's window, chi = 1 on [cut_lo, cut_hi]
CutoffReport cutoff_residual(const ModelSpec& J, const ModelSpec& J0, cplx z,
                             const WindowedSequence& u, Index cut_lo, Index cut_hi);

double bk_value(double cap_prev, double cap, double cap_next, double a_k, double dist_prev,
                double dist);

struct AkBound {
    double two_sided = 0.0;
    double cap_form = 0.0;
    double prefactor = 0.0;
    double gamma0 = 0.0;
    double rate = 0.0; // min(gamma0, eta0), used by the cap form
    double left_sum = 0.0;
    double right_sum = 0.0;
};

// thm4 envelope over the split U_k for every E in [e_lo, e_hi] and every eta <= eta0
AkBound ak_bound(const GapWindow& window, const NormConstants& constants,
                 const BarrierLayout& layout, Index k, const ModelSpec& J0, double e_lo,
                 double e_hi, double eta0);

struct AlphaK {
    double alpha = 0.0;
    double budget = 0.0; // |A_k| <= 4 alpha_k (x_{k+1} - x_k)
};
AlphaK alpha_k(std::span<const double> caps, const BarrierLayout& layout, double gamma1, Index k);

// J restricted to [x_k, x_{k+1}]; block 0 is [1, x_1]
TridiagonalSlice barrier_block(const ModelSpec& J, const BarrierLayout& layout, Index k);

struct CriterionTerms {
    std::vector<double> caps;      // Lambda_k, k = 1..K+1
    std::vector<double> terms;     // criterion term_k
    std::vector<double> a_bound;   // a_k
    std::vector<double> alpha;     // alpha_k
    std::vector<double> budget;    // |A_k| bound
};

// b_k(E) with a_k from terms.a_bound; throws OnBlockSpectrum
double bk_of_E(const CriterionTerms& terms, Index k, double E, const ModelSpec& J,
               const BarrierLayout& layout);

struct L2TailRow {
    double eta = 0.0;
    double total = 0.0;
    double head = 0.0;
    double tail = 0.0;
    bool holds = false;
};

struct L2TailReport {
    std::vector<L2TailRow> rows;
    double max_total = 0.0;
    bool all_hold = true;
    std::vector<double> block_distance; // Delta_k(E) for k = K.. with x_{k+1} <= N
    bool on_block_spectrum = false;
    bool exceptional = false;            // some Delta_k(E) < alpha_k
};

L2TailReport l2_tail_check(const ModelSpec& J, double E, std::span<const double> etas, Index N,
                           const BarrierLayout& layout, Index K,
                           std::span<const double> alphas = {});

} // namespace jdecay
