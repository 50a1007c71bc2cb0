// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "jdecay/error.hpp"

namespace jdecay {

using Index = std::int64_t;
using cplx = std::complex<double>;

// Barrier centers x_k and half-lengths l_k, stored 0-based (entry 0 is barrier k=1).
struct BarrierLayout {
    std::vector<Index> centers;
    std::vector<Index> half_lengths;

    std::size_t size() const { return centers.size(); }
    bool empty() const { return centers.empty(); }

    Index interval_lo(std::size_t k) const { return centers[k] - half_lengths[k]; }
    Index interval_hi(std::size_t k) const { return centers[k] + half_lengths[k]; }
    // region on which the composite operator copies the base weights
    Index matching_lo(std::size_t k) const { return centers[k] - half_lengths[k] - 2; }
    Index matching_hi(std::size_t k) const { return centers[k] + half_lengths[k] + 1; }
    Index inner_half_length(std::size_t k) const { return half_lengths[k] / 2; }

    // throws LayoutOverlap
    void validate() const;
    bool in_matching_region(Index n) const;
};

enum class PhiKind { Cosine, CosineSquared };

// periodic profile with period T, 0 <= phi <= 1, phi(0) = 0, phi(T/2) = 1
double phi_value(PhiKind kind, double x, double period);

struct ModelSpec;
using ModelPtr = std::shared_ptr<const ModelSpec>;

namespace rules {

struct Constant {
    double lambda = 1.0;
    double q = 0.0;
};

// lambda_n = n + c_n, c_n = c1 (n odd), c2 (n even), q = 0
struct Example1 {
    double c1 = 3.0;
    double c2 = 1.0;
};

// lambda_n = n, q_n = -2n
struct Example2 {};

// lambda_n = n^alpha + c_n phi(n^gamma), q = 0
struct PowerModulated {
    double alpha = 0.5;
    double gamma = 0.2;
    double period = 1.0;
    double c1 = 2.0;
    double c2 = 1.0;
    PhiKind phi = PhiKind::Cosine;
};

// lambda_n = n^alpha + c_n, q = 0 (the unmodulated reference operator)
struct PowerPeriodic {
    double alpha = 0.5;
    double c1 = 0.0;
    double c2 = 0.0;
};

struct BarrierComposite {
    ModelPtr base;
    BarrierLayout layout;
    ModelPtr inside;
};

// explicit lambda_1..lambda_L, q_1..q_L, then the tail rule
struct Table {
    std::vector<double> weights;
    std::vector<double> diag;
    ModelPtr tail;
};

} // namespace rules

using Rule = std::variant<rules::Constant, rules::Example1, rules::Example2, rules::PowerModulated,
                          rules::PowerPeriodic, rules::BarrierComposite, rules::Table>;

struct ModelSpec {
    Rule rule;
    // added to q_1 (rank-one perturbation)
    double q1_shift = 0.0;
    // represents -J through the unitarily equivalent matrix with diagonal -q
    bool reflected = false;
};

ModelSpec make_spec(Rule rule);
ModelPtr share(ModelSpec spec);

struct Entry {
    double weight;
    double diag;
};

// throws InvalidModel
void validate(const ModelSpec& spec);

Entry sample_operator(const ModelSpec& spec, Index n);
inline double weight_at(const ModelSpec& spec, Index n) { return sample_operator(spec, n).weight; }
inline double diag_at(const ModelSpec& spec, Index n) { return sample_operator(spec, n).diag; }

struct TridiagonalSlice {
    Index lo = 1;
    Index hi = 1;
    std::vector<double> diag;
    std::vector<double> offdiag;

    std::size_t size() const { return diag.size(); }
    void validate() const;
};

TridiagonalSlice truncate(const ModelSpec& spec, Index lo, Index hi);

enum class CarlemanPower { One, Half };

double carleman_sum(const ModelSpec& spec, Index n, CarlemanPower power, Index start = 1);
// out[n] = sum_{k=start}^{n-1} lambda_k^-p for n = 0..N
std::vector<double> carleman_prefix(const ModelSpec& spec, Index N, CarlemanPower power,
                                    Index start = 1);

ModelSpec rank_one_perturb(const ModelSpec& spec, double shift);
ModelSpec reflect(const ModelSpec& spec);

bool has_zero_diagonal(const ModelSpec& spec);
// lower bound for inf_{p >= from} lambda_p, nullopt when none is known
std::optional<double> weight_inf_lower_bound(const ModelSpec& spec, Index from);
// upper bound for max_{lo <= p <= hi} lambda_p
double weight_sup_upper_bound(const ModelSpec& spec, Index lo, Index hi);
// lambda_n -> infinity (decided from the rule)
bool weights_diverge(const ModelSpec& spec);

template <class T>
T apply_operator(const ModelSpec& spec, std::span<const T> u, Index n) {
    const auto N = static_cast<Index>(u.size()) - 1;
    if (n < 1 || n > N - 1)
        throw Error(ErrorCode::IndexOutOfWindow, "apply_operator index outside [1, N-1]");
    const Entry prev = sample_operator(spec, n - 1);
    const Entry here = sample_operator(spec, n);
    return prev.weight * u[n - 1] + here.diag * u[n] + here.weight * u[n + 1];
}

} // namespace jdecay
