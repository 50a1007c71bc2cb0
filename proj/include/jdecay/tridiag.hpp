// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "jdecay/model.hpp"

namespace jdecay {

inline constexpr double kBisectionTol = 1e-12;
inline constexpr double kNearSingular = 1e-10;
inline constexpr double kPivotFloor = 1e-300;

struct ResolventColumn {
    cplx z;
    Index N = 0;
    // values[n-1] = <(T - z)^{-1} e_1, e_n>, n = 1..N
    std::vector<cplx> values;
    // max-norm of (T - z) values - e_1
    double residual = 0.0;

    cplx at(Index n) const { return values[static_cast<std::size_t>(n - 1)]; }
};

struct SpectrumQuery {
    const TridiagonalSlice& slice;
    double tol = kBisectionTol;
};

// number of eigenvalues < x
Index sturm_count(const TridiagonalSlice& slice, double x);

std::pair<double, double> gershgorin_interval(const TridiagonalSlice& slice);

std::vector<double> eigs_in_window(const SpectrumQuery& query, double a, double b);

// k-th smallest eigenvalue (0-based), bracketed in [lo, hi]
double kth_eigenvalue(const TridiagonalSlice& slice, Index k, double lo, double hi,
                      double tol = kBisectionTol);

// throws NearSingular for real z within 1e-10 of the spectrum
ResolventColumn resolvent_column(const TridiagonalSlice& slice, cplx z);

double distance_to_spectrum(const TridiagonalSlice& slice, double E, double tol = kBisectionTol);

double tridiag_norm_bound(std::span<const double> lower, std::span<const double> diag,
                          std::span<const double> upper);

// general complex tridiagonal solve with partial pivoting; lower/upper have n-1 entries
std::vector<cplx> solve_tridiagonal(std::vector<cplx> lower, std::vector<cplx> diag,
                                    std::vector<cplx> upper, std::vector<cplx> rhs);

} // namespace jdecay
