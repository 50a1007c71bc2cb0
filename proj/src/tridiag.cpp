// SPDX-License-Identifier: Apache-2.0
#include "jdecay/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jdecay {

Index sturm_count(const TridiagonalSlice& slice, double x) {
    // negative pivots of the LDL^T factorisation of T - x
    Index count = 0;
    double pivot = 1.0;
    for (std::size_t i = 0; i < slice.diag.size(); ++i) {
        double d = slice.diag[i] - x;
        if (i > 0) {
            const double w = slice.offdiag[i - 1];
            d -= w * (w / pivot);
        }
        if (std::abs(d) < kPivotFloor)
            d = std::signbit(d) ? -kPivotFloor : kPivotFloor;
        if (d < 0.0)
            ++count;
        pivot = d;
    }
    return count;
}

std::pair<double, double> gershgorin_interval(const TridiagonalSlice& slice) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const std::size_t n = slice.diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0)
            r += std::abs(slice.offdiag[i - 1]);
        if (i + 1 < n)
            r += std::abs(slice.offdiag[i]);
        lo = std::min(lo, slice.diag[i] - r);
        hi = std::max(hi, slice.diag[i] + r);
    }
    return {lo, hi};
}

double kth_eigenvalue(const TridiagonalSlice& slice, Index k, double lo, double hi, double tol) {
    // invariant: count(lo) <= k < count(hi)
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double floor_tol =
            std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(mid));
        if (hi - lo <= floor_tol || mid == lo || mid == hi)
            break;
        if (sturm_count(slice, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> eigs_in_window(const SpectrumQuery& query, double a, double b) {
    const auto& s = query.slice;
    s.validate();
    const Index ca = sturm_count(s, a);
    const Index cb = sturm_count(s, b);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max<Index>(cb - ca, 0)));
    for (Index k = ca; k < cb; ++k)
        out.push_back(kth_eigenvalue(s, k, a, b, query.tol));
    return out;
}

std::vector<cplx> solve_tridiagonal(std::vector<cplx> dl, std::vector<cplx> d, std::vector<cplx> du,
                                    std::vector<cplx> b) {
    const std::size_t n = d.size();
    if (n == 0)
        return b;
    std::vector<cplx> du2(n > 2 ? n - 2 : 0, 0.0);
    std::vector<char> swapped(n > 1 ? n - 1 : 0, 0);

    // LU with partial pivoting; a row swap creates one extra superdiagonal
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::norm(d[i]) >= std::norm(dl[i])) {
            if (d[i] != 0.0) {
                const cplx fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            }
        } else {
            const cplx fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            const cplx temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = 1;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] == 0.0)
            throw Error(ErrorCode::NearSingular, "exactly singular tridiagonal pivot");

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!swapped[i]) {
            b[i + 1] -= dl[i] * b[i];
        } else {
            const cplx temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - dl[i] * b[i];
        }
    }
    b[n - 1] /= d[n - 1];
    if (n == 1)
        return b;
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;)
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    return b;
}

ResolventColumn resolvent_column(const TridiagonalSlice& slice, cplx z) {
    slice.validate();
    const std::size_t n = slice.diag.size();
    if (z.imag() == 0.0) {
        const double x = z.real();
        if (sturm_count(slice, x - kNearSingular) != sturm_count(slice, x + kNearSingular))
            throw Error(ErrorCode::NearSingular,
                        "real spectral parameter within 1e-10 of the truncated spectrum");
    }
    ResolventColumn col;
    col.z = z;
    col.N = static_cast<Index>(n);
    if (z.imag() != 0.0) {
        // backward continued fraction: g_i = a_i - z - b_i^2 / g_{i+1}, Im g_i has the sign of
        // -Im z and |Im g_i| >= |Im z|, so no pivoting; u(i+1) = -b_i u(i) / g_{i+1}
        std::vector<cplx> inv(n);
        cplx g = slice.diag[n - 1] - z;
        inv[n - 1] = 1.0 / g;
        for (std::size_t i = n - 1; i-- > 0;) {
            const double b = slice.offdiag[i];
            g = slice.diag[i] - z - b * b * inv[i + 1];
            inv[i] = 1.0 / g;
        }
        col.values.resize(n);
        col.values[0] = inv[0];
        for (std::size_t i = 1; i < n; ++i)
            col.values[i] = -slice.offdiag[i - 1] * inv[i] * col.values[i - 1];
    } else {
        std::vector<cplx> off(slice.offdiag.begin(), slice.offdiag.end());
        std::vector<cplx> diag(n);
        for (std::size_t i = 0; i < n; ++i)
            diag[i] = slice.diag[i] - z;
        std::vector<cplx> rhs(n, 0.0);
        rhs[0] = 1.0;
        col.values = solve_tridiagonal(off, diag, off, std::move(rhs));
    }

    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cplx r = (slice.diag[i] - z) * col.values[i] - (i == 0 ? 1.0 : 0.0);
        if (i > 0)
            r += slice.offdiag[i - 1] * col.values[i - 1];
        if (i + 1 < n)
            r += slice.offdiag[i] * col.values[i + 1];
        res = std::max(res, std::norm(r));
    }
    col.residual = std::sqrt(res);
    return col;
}

double distance_to_spectrum(const TridiagonalSlice& slice, double E, double tol) {
    slice.validate();
    const auto [glo, ghi] = gershgorin_interval(slice);
    const Index n = static_cast<Index>(slice.size());
    const Index below = sturm_count(slice, E);
    double dist = std::numeric_limits<double>::infinity();
    if (below > 0) {
        const double mu = kth_eigenvalue(slice, below - 1, std::min(glo, E) - 1.0, E, tol);
        dist = std::min(dist, E - mu);
    }
    if (below < n) {
        const double mu = kth_eigenvalue(slice, below, E, std::max(ghi, E) + 1.0, tol);
        dist = std::min(dist, mu - E);
    }
    return std::max(dist, 0.0);
}

double tridiag_norm_bound(std::span<const double> lower, std::span<const double> diag,
                          std::span<const double> upper) {
    const std::size_t n = diag.size();
    double row = 0.0, col = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::abs(diag[i]);
        double c = std::abs(diag[i]);
        if (i > 0) {
            r += std::abs(lower[i - 1]);
            c += std::abs(upper[i - 1]);
        }
        if (i + 1 < n) {
            r += std::abs(upper[i]);
            c += std::abs(lower[i]);
        }
        row = std::max(row, r);
        col = std::max(col, c);
    }
    return std::sqrt(row * col);
}

} // namespace jdecay
