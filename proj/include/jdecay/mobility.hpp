// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "jdecay/barriers.hpp"
#include "jdecay/model.hpp"

namespace jdecay {

struct GapCount {
    Index N = 0;
    double lo = 0.0;
    double hi = 0.0;
    Index count_N = 0;
    Index count_2N = 0;
    bool stabilized = false;
};

// eigenvalues of the N- and 2N-truncations of n^alpha + c_n in (-c + margin, c - margin)
GapCount gap_count_J0(double alpha, double c1, double c2, Index N, double margin);

struct WeylSequenceSpec {
    Index i = 1;
    double x0 = 0.0;
    Index n_i = 0;
    Index Delta_i = 0;
    double beta_i = 0.0;
    double eps_i = 0.0;
    double delta = 0.0;
    double M = 4.0;
    double eps = 0.0;

    Index center() const { return n_i + Delta_i / 2; }
    Index last() const { return n_i + Delta_i; }
};

struct WeylSequenceOptions {
    std::optional<double> delta;
    std::optional<double> eps;
    double M = 4.0;
    double x0 = 0.0;
};

WeylSequenceSpec make_weyl_sequence_spec(const rules::PowerModulated& pm, Index i,
                                         const WeylSequenceOptions& opt = {});
// throws InvalidModel when the window or exponent conditions fail
void validate(const WeylSequenceSpec& w, const rules::PowerModulated& pm);

// forward recurrence of lambda_n = n^alpha, q = 0 at E with u_0 = 0, u_1 = 1, rescaled so that
// the mean of n^alpha u_n^2 over [H/2, H] is one
std::vector<double> reference_solution(double alpha, double E, Index horizon);

// tent-windowed u on [n_i, n_i + Delta_i]
WindowedSequence weyl_sequence(const std::vector<double>& u, const WeylSequenceSpec& w);

double weyl_quotient(const ModelSpec& spec, double E, const WeylSequenceSpec& w,
                     const std::vector<double>& u);

// sum of squares of the tent vector
double weyl_norm2(const std::vector<double>& u, const WeylSequenceSpec& w);

struct WeylScan {
    double E = 0.0;
    std::vector<WeylSequenceSpec> windows;
    std::vector<double> quotient;
    std::vector<double> norm_ratio; // ||v||^2 / (Delta_i n_i^-alpha)
    bool decreasing = true;          // quotient strictly decreasing in i
    double final_over_initial = 0.0;
};

// all i >= i_first whose window ends at or below n_max
WeylScan weyl_scan(const ModelSpec& spec, double E, Index n_max, Index i_first = 2,
                   const WeylSequenceOptions& opt = {});

struct DiscriminantScan {
    double E = 0.0;
    Index first = 0;
    Index last = 0;
    double max_V = 0.0;
    Index argmax = 0;
    double threshold = 0.0; // -2 E^2
    bool pass = false;
};

DiscriminantScan discriminant_scan(const ModelSpec& spec, double E, Index first, Index last);

struct DerivedLayout {
    BarrierLayout layout;
    ModelSpec J_eps;
    double delta_E = 0.0;
    double eps_phase = 0.0;
    double phi_threshold = 0.0;
    double max_deviation = 0.0; // max |lambda^eps_n - (n^alpha + c_n)| over matching regions scanned
};

// Barriers k = 1..k_last centred at the phi-maxima; deviations are scanned on regions of at most
// scan_limit entries.
DerivedLayout derive_barrier_layout(const ModelSpec& spec, double e_lo, double e_hi, double x0,
                                    std::optional<double> eps_phase, Index k_last,
                                    Index scan_limit = Index{1} << 16);

// nearest truncated eigenvalues of J around [e_lo, e_hi] on [1, N]
GapWindow numerical_gap(const ModelSpec& J, double e_lo, double e_hi, Index N);

struct BarrierPipelineOptions {
    double e_lo = -0.5;
    double e_hi = 0.5;
    double x0 = 0.5;                 // phase where phi = 1
    std::optional<double> eps_phase;
    Index criterion_barriers = 400;  // layout length used for the criterion series
    std::vector<double> gammas{0.01, 0.1, 1.0};
    Index bk_barriers = 13;          // b_k evaluated for k = 1..bk_barriers - 1
    Index gap_truncation = Index{1} << 20;
    Index scanN = Index{1} << 16;
    double gamma1_fraction = 0.25;   // gamma_1 = fraction * gamma_0, must stay below 1/2
    std::vector<double> energies;    // empty: 20-point midpoint grid of [e_lo, e_hi]
    std::vector<double> l2_energies; // empty: skip the l2 check
    Index l2_N = 1000000;
    Index l2_eta_points = 8;
    Index l2_K_max = 4;
};

struct BarrierRow {
    Index k = 0;
    Index x = 0;
    Index ell = 0;
    double cap = 0.0;
    double term = 0.0;    // criterion term at rate min(gamma_0, eta_0)
    double a_k = 0.0;
    double alpha = 0.0;
    double budget = 0.0;
};

struct EnergyBudget {
    double E = 0.0;
    std::vector<double> bk;        // k = 1..bk_barriers - 1
    std::vector<double> block_distance;
    std::optional<Index> K;        // smallest k with b_j <= 1/32 for all tested j >= k
    bool off_blocks_by_alpha = true;
};

struct HeadDominance {
    double E = 0.0;
    std::optional<Index> K;        // smallest tested K for which every eta satisfies it
    L2TailReport report;           // at that K (or at l2_K_max when none)
};

struct BarrierPipelineResult {
    DerivedLayout derived;
    GapWindow window;              // numerical gap of J_eps
    WindowCertificate thm4;        // thm4 constants of J_eps
    double d0 = 0.0;
    double eta0 = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    std::vector<double> criterion_gammas;
    std::vector<CriterionSum> criteria;
    std::vector<BarrierRow> rows;
    std::vector<EnergyBudget> budgets;
    std::vector<HeadDominance> heads;
};

BarrierPipelineResult run_barrier_pipeline(const ModelSpec& spec, const BarrierPipelineOptions& opt);

} // namespace jdecay
