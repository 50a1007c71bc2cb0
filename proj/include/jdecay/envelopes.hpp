// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "jdecay/model.hpp"
#include "jdecay/tridiag.hpp"

namespace jdecay {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEnvelopeSlack = 1e-6;

struct GapWindow {
    enum class Kind { FiniteGap, BelowBottom, AboveTop };
    Kind kind = Kind::FiniteGap;
    double r = 0.0;
    double s = 0.0;
    double d = 0.0;

    static GapWindow finite(double r, double s);
    static GapWindow below_bottom(double d);
    static GapWindow above_top(double d);

    bool contains(double lambda) const;
    // (lambda - r)(s - lambda) for a finite gap
    double w(double lambda) const;
    // distance from lambda to the spectral edge (half-lines)
    double edge_distance(double lambda) const;
};

struct ConjugationWeight {
    double gamma = 0.0;
    Index start = 0;
    std::optional<Index> cap;
    CarlemanPower power = CarlemanPower::One;
};

struct NormConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double eps_N = 0.0;
    double delta_N = 0.0;
    double r_N = 0.0;
    // gamma at which the constants were certified; valid for every smaller gamma
    double gamma = 0.0;
};

// rho(n) for the weight, n >= 1
double conjugation_rho(const ModelSpec& spec, const ConjugationWeight& weight, Index n);

struct ConjugationEntries {
    double a;
    double b;
};
ConjugationEntries conjugation_entries(const ModelSpec& spec, const ConjugationWeight& weight,
                                       Index n);

NormConstants certify_constants(const ModelSpec& spec, const ConjugationWeight& weight,
                                Index scanN);

enum class EnvelopeKind { Theorem1, Theorem4 };

double eta_thm1(const GapWindow& window, const NormConstants& c);
double eta_thm4(const GapWindow& window, const NormConstants& c);

struct WindowCertificate {
    NormConstants constants;
    double eta = 0.0;
    int iterations = 0;
};

// Constants certified at the largest gamma = eta * sqrt(w) the window can require.
// For half-lines max_distance bounds the distance |d - lambda| of the evaluated points.
WindowCertificate certify_window(const ModelSpec& spec, const GapWindow& window, Index scanN,
                                 EnvelopeKind kind = EnvelopeKind::Theorem1,
                                 double max_distance = 0.0);

double envelope_thm1(const GapWindow& window, const NormConstants& c, double lambda, double rho_n);
double envelope_thm2(const GapWindow& window, double lambda, double eps, double sumN);
double envelope_thm3(double d, cplx lambda, double eps, double sumSqrtN);
double envelope_thm4(const GapWindow& window, const NormConstants& c, double lambda, double delta,
                     double sumBA);

struct Thm2Choice {
    Index N = 0;
    double C3 = 0.0;
    double threshold = 0.0;
};

double c3_thm2(const ModelSpec& spec, const GapWindow& window, double eps);
Thm2Choice pick_N_thm2(const ModelSpec& spec, const GapWindow& window, double eps,
                       std::optional<double> c3_override = std::nullopt);
Index pick_N_thm3(const ModelSpec& spec, double d, cplx lambda, double eps);

enum class LemmaMode { L1, L2 };
double lemma_inverse_bound(double d_plus, double d_minus, double beta, LemmaMode mode);

struct EnvelopeReport {
    std::vector<Index> violations;
    Index checked = 0;
    double max_ratio = 0.0;
    Index worst_index = 0;

    bool pass() const { return violations.empty(); }
};

// envelope[n-1] belongs to index n
EnvelopeReport verify_envelope(const ResolventColumn& column, std::span<const double> envelope,
                               Index skirt);

// envelope_thm1 for n = 1..N
std::vector<double> thm1_envelope_sequence(const ModelSpec& spec, const GapWindow& window,
                                           const NormConstants& c, double lambda, Index N);
// envelope_thm3 for n = 1..N with the given start index
std::vector<double> thm3_envelope_sequence(const ModelSpec& spec, double d, cplx lambda, double eps,
                                           Index start, Index N);

} // namespace jdecay
