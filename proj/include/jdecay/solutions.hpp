// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "jdecay/model.hpp"
#include "jdecay/tridiag.hpp"

namespace jdecay {

inline constexpr double kRescaleAbove = 1e100;
inline constexpr double kOverflowLog = 1e15;

// true value at n is values[n] * exp(log_offset[n])
template <class T>
struct ScaledSequence {
    std::vector<T> values;
    std::vector<double> log_offset;
    std::vector<Index> rescaled_at;

    Index horizon() const { return static_cast<Index>(values.size()) - 1; }
    T value(Index n) const;
    double log_abs(Index n) const;
};

template <class T>
ScaledSequence<T> recurrence_extend(const ModelSpec& spec, T z, T u0, T u1, Index N);

template <class T>
struct FundamentalPair {
    ScaledSequence<T> phi;
    ScaledSequence<T> psi;
    T z;
    Index N = 0;
};

template <class T>
FundamentalPair<T> fundamental_pair(const ModelSpec& spec, T z, Index N);

struct WronskianValue {
    cplx value;
    // |lambda_n phi(n) psi(n+1)| + |lambda_n phi(n+1) psi(n)|, the cancellation scale
    double scale;
};

template <class T>
WronskianValue wronskian(const ModelSpec& spec, const FundamentalPair<T>& pair, Index n);

struct WeylSolution {
    ResolventColumn column;
    cplx m;
};

WeylSolution weyl_solution(const ModelSpec& spec, double E, double eta, Index N);

// max_{n <= horizon} |column(n) - psi(n) - m phi(n)| / max(|psi(n)|, |phi(n)|)
double decomposition_residual(const ModelSpec& spec, const WeylSolution& weyl, Index horizon);

struct Mat2 {
    std::array<double, 4> a{}; // row-major

    double det() const { return a[0] * a[3] - a[1] * a[2]; }
    double trace() const { return a[0] + a[3]; }
};
Mat2 operator*(const Mat2& x, const Mat2& y);

struct TransferStep {
    Index n;
    Mat2 matrix;
};

// B_n = [[0, 1], [-lambda_{n-1}/lambda_n, (E - q_n)/lambda_n]]
TransferStep transfer_step(const ModelSpec& spec, double E, Index n);
Mat2 transfer_product_two_step(const ModelSpec& spec, double E, Index n);

double discriminant_V(const ModelSpec& spec, double E, Index n);
// -4 [E^2 - (c2 - c1)^2 phi((2n-1)^g) phi((2n)^g)]
double discriminant_limit(const ModelSpec& spec, double E, Index n);

enum class Basis { One, LogN, SqrtN, N, CarlemanOne, CarlemanHalf };

struct IndexRange {
    Index first = 0;
    Index last = 0;
    Index length() const { return last - first + 1; }
};

struct AsymptoticFit {
    std::vector<Basis> basis;
    std::vector<double> coefficients;
    IndexRange window;
    double residual = 0.0;

    double coefficient(Basis b) const;
};

// least squares of log(values[n]) on the basis over the window; values[n] is the value at index n
AsymptoticFit fit_asymptotics(std::span<const double> values, IndexRange window,
                              std::vector<Basis> basis, const ModelSpec* spec = nullptr);
// same with the logarithms supplied directly
AsymptoticFit fit_log_asymptotics(std::span<const double> log_values, IndexRange window,
                                  std::vector<Basis> basis, const ModelSpec* spec = nullptr);

// drop the first and last 10% of [first, last]
IndexRange trimmed_window(Index first, Index last);

} // namespace jdecay
