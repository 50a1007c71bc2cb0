// SPDX-License-Identifier: Apache-2.0
#include "jdecay/solutions.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

namespace jdecay {

template <class T>
T ScaledSequence<T>::value(Index n) const {
    const auto i = static_cast<std::size_t>(n);
    return values[i] * std::exp(log_offset[i]);
}

template <class T>
double ScaledSequence<T>::log_abs(Index n) const {
    const auto i = static_cast<std::size_t>(n);
    return std::log(std::abs(values[i])) + log_offset[i];
}

template <class T>
ScaledSequence<T> recurrence_extend(const ModelSpec& spec, T z, T u0, T u1, Index N) {
    if (N < 2)
        throw Error(ErrorCode::IndexOutOfWindow, "recurrence needs N >= 2");
    ScaledSequence<T> seq;
    seq.values.resize(static_cast<std::size_t>(N + 1));
    seq.log_offset.assign(static_cast<std::size_t>(N + 1), 0.0);
    seq.values[0] = u0;
    seq.values[1] = u1;
    double offset = 0.0;
    double w_prev = 1.0; // lambda_0
    for (Index n = 1; n < N; ++n) {
        const auto i = static_cast<std::size_t>(n);
        const Entry e = sample_operator(spec, n);
        seq.values[i + 1] = ((z - e.diag) * seq.values[i] - w_prev * seq.values[i - 1]) / e.weight;
        w_prev = e.weight;
        seq.log_offset[i + 1] = offset;

        const double big = std::max(std::abs(seq.values[i]), std::abs(seq.values[i + 1]));
        if (big > kRescaleAbove || (big > 0.0 && big < 1.0 / kRescaleAbove)) {
            seq.values[i] /= big;
            seq.values[i + 1] /= big;
            offset += std::log(big);
            if (std::abs(offset) > kOverflowLog)
                throw Error(ErrorCode::Overflow, "log-magnitude beyond 1e15");
            seq.log_offset[i] = offset;
            seq.log_offset[i + 1] = offset;
            seq.rescaled_at.push_back(n);
        }
    }
    return seq;
}

template <class T>
FundamentalPair<T> fundamental_pair(const ModelSpec& spec, T z, Index N) {
    FundamentalPair<T> p;
    p.phi = recurrence_extend<T>(spec, z, T(0.0), T(1.0), N);
    p.psi = recurrence_extend<T>(spec, z, T(-1.0), T(0.0), N);
    p.z = z;
    p.N = N;
    return p;
}

template <class T>
WronskianValue wronskian(const ModelSpec& spec, const FundamentalPair<T>& p, Index n) {
    const double lam = weight_at(spec, n);
    const auto i = static_cast<std::size_t>(n);
    const auto& f = p.phi;
    const auto& g = p.psi;
    const cplx t1 = cplx(f.values[i] * g.values[i + 1]) *
                    std::exp(f.log_offset[i] + g.log_offset[i + 1]);
    const cplx t2 = cplx(f.values[i + 1] * g.values[i]) *
                    std::exp(f.log_offset[i + 1] + g.log_offset[i]);
    return {lam * (t1 - t2), lam * (std::abs(t1) + std::abs(t2))};
}

template struct ScaledSequence<double>;
template struct ScaledSequence<cplx>;
template ScaledSequence<double> recurrence_extend<double>(const ModelSpec&, double, double, double,
                                                          Index);
template ScaledSequence<cplx> recurrence_extend<cplx>(const ModelSpec&, cplx, cplx, cplx, Index);
template FundamentalPair<double> fundamental_pair<double>(const ModelSpec&, double, Index);
template FundamentalPair<cplx> fundamental_pair<cplx>(const ModelSpec&, cplx, Index);
template WronskianValue wronskian<double>(const ModelSpec&, const FundamentalPair<double>&, Index);
template WronskianValue wronskian<cplx>(const ModelSpec&, const FundamentalPair<cplx>&, Index);

WeylSolution weyl_solution(const ModelSpec& spec, double E, double eta, Index N) {
    if (eta < 0.0)
        throw Error(ErrorCode::NearSingular, "eta must be >= 0");
    WeylSolution out{resolvent_column(truncate(spec, 1, N), cplx(E, eta)), 0.0};
    out.m = out.column.at(1);
    return out;
}

double decomposition_residual(const ModelSpec& spec, const WeylSolution& weyl, Index horizon) {
    horizon = std::min(horizon, weyl.column.N);
    const auto pair = fundamental_pair<cplx>(spec, weyl.column.z, std::max<Index>(horizon, 2));
    double worst = 0.0;
    for (Index n = 1; n <= horizon; ++n) {
        const cplx f = pair.phi.value(n);
        const cplx g = pair.psi.value(n);
        const double scale = std::max({std::abs(f), std::abs(g), 1e-300});
        worst = std::max(worst, std::abs(weyl.column.at(n) - g - weyl.m * f) / scale);
    }
    return worst;
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
    const auto& a = x.a;
    const auto& b = y.a;
    return Mat2{{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
                 a[2] * b[1] + a[3] * b[3]}};
}

TransferStep transfer_step(const ModelSpec& spec, double E, Index n) {
    if (n < 1)
        throw Error(ErrorCode::IndexOutOfWindow, "transfer step needs n >= 1");
    const double prev = weight_at(spec, n - 1);
    const Entry e = sample_operator(spec, n);
    return {n, Mat2{{0.0, 1.0, -prev / e.weight, (E - e.diag) / e.weight}}};
}

Mat2 transfer_product_two_step(const ModelSpec& spec, double E, Index n) {
    if (n < 1)
        throw Error(ErrorCode::IndexOutOfWindow, "two-step product needs n >= 1");
    return transfer_step(spec, E, 2 * n).matrix * transfer_step(spec, E, 2 * n - 1).matrix;
}

namespace {
const rules::PowerModulated& power_modulated(const ModelSpec& spec) {
    const auto* pm = std::get_if<rules::PowerModulated>(&spec.rule);
    if (!pm)
        throw Error(ErrorCode::InvalidModel, "discriminant needs a PowerModulated model");
    return *pm;
}
} // namespace

double discriminant_V(const ModelSpec& spec, double E, Index n) {
    const auto& pm = power_modulated(spec);
    Mat2 v = transfer_product_two_step(spec, E, n);
    v.a[0] += 1.0;
    v.a[3] += 1.0;
    const double scale = std::pow(2.0 * static_cast<double>(n), pm.alpha);
    for (double& x : v.a)
        x *= scale;
    const double tr = v.trace();
    return tr * tr - 4.0 * v.det();
}

double discriminant_limit(const ModelSpec& spec, double E, Index n) {
    const auto& pm = power_modulated(spec);
    const double m = 2.0 * static_cast<double>(n);
    const double c = pm.c2 - pm.c1;
    const double f1 = phi_value(pm.phi, std::pow(m - 1.0, pm.gamma), pm.period);
    const double f2 = phi_value(pm.phi, std::pow(m, pm.gamma), pm.period);
    return -4.0 * (E * E - c * c * f1 * f2);
}

double AsymptoticFit::coefficient(Basis b) const {
    for (std::size_t j = 0; j < basis.size(); ++j)
        if (basis[j] == b)
            return coefficients[j];
    throw Error(ErrorCode::DegenerateBasis, "basis function not part of the fit");
}

IndexRange trimmed_window(Index first, Index last) {
    const Index cut = (last - first + 1) / 10;
    return {first + cut, last - cut};
}

AsymptoticFit fit_log_asymptotics(std::span<const double> log_values, IndexRange window,
                                  std::vector<Basis> basis, const ModelSpec* spec) {
    const std::size_t p = basis.size();
    if (p == 0 || window.length() < static_cast<Index>(10 * p))
        throw Error(ErrorCode::DegenerateBasis, "fit window shorter than 10 x basis size");
    if (window.first < 1 || window.last >= static_cast<Index>(log_values.size()))
        throw Error(ErrorCode::IndexOutOfWindow, "fit window outside the supplied values");
    const bool needs_spec = std::any_of(basis.begin(), basis.end(), [](Basis b) {
        return b == Basis::CarlemanOne || b == Basis::CarlemanHalf;
    });
    if (needs_spec && !spec)
        throw Error(ErrorCode::DegenerateBasis, "Carleman basis needs a model");

    std::vector<double> s1, sh;
    if (needs_spec) {
        s1 = carleman_prefix(*spec, window.last, CarlemanPower::One, 1);
        sh = carleman_prefix(*spec, window.last, CarlemanPower::Half, 1);
    }
    const auto m = static_cast<std::size_t>(window.length());
    // column-major design matrix
    std::vector<double> A(m * p), y(m);
    for (std::size_t r = 0; r < m; ++r) {
        const Index n = window.first + static_cast<Index>(r);
        const double x = static_cast<double>(n);
        y[r] = log_values[static_cast<std::size_t>(n)];
        for (std::size_t j = 0; j < p; ++j) {
            double v = 0.0;
            switch (basis[j]) {
            case Basis::One: v = 1.0; break;
            case Basis::LogN: v = std::log(x); break;
            case Basis::SqrtN: v = std::sqrt(x); break;
            case Basis::N: v = x; break;
            case Basis::CarlemanOne: v = s1[static_cast<std::size_t>(n)]; break;
            case Basis::CarlemanHalf: v = sh[static_cast<std::size_t>(n)]; break;
            }
            A[j * m + r] = v;
        }
    }

    // equilibrate columns, then Householder QR
    std::vector<double> colscale(p);
    for (std::size_t j = 0; j < p; ++j) {
        double nrm = 0.0;
        for (std::size_t r = 0; r < m; ++r)
            nrm += A[j * m + r] * A[j * m + r];
        nrm = std::sqrt(nrm);
        if (nrm == 0.0)
            throw Error(ErrorCode::DegenerateBasis, "zero basis column");
        colscale[j] = nrm;
        for (std::size_t r = 0; r < m; ++r)
            A[j * m + r] /= nrm;
    }
    std::vector<double> rdiag(p);
    for (std::size_t k = 0; k < p; ++k) {
        double nrm = 0.0;
        for (std::size_t r = k; r < m; ++r)
            nrm += A[k * m + r] * A[k * m + r];
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12)
            throw Error(ErrorCode::DegenerateBasis, "basis columns are linearly dependent");
        const double alpha = A[k * m + k] > 0.0 ? -nrm : nrm;
        std::vector<double> v(m - k);
        for (std::size_t r = k; r < m; ++r)
            v[r - k] = A[k * m + r];
        v[0] -= alpha;
        double vnorm2 = 0.0;
        for (double t : v)
            vnorm2 += t * t;
        auto reflect = [&](double* col) {
            double dot = 0.0;
            for (std::size_t r = k; r < m; ++r)
                dot += v[r - k] * col[r];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t r = k; r < m; ++r)
                col[r] -= f * v[r - k];
        };
        for (std::size_t j = k; j < p; ++j)
            reflect(&A[j * m]);
        reflect(y.data());
        rdiag[k] = A[k * m + k];
    }
    std::vector<double> coef(p);
    for (std::size_t k = p; k-- > 0;) {
        double s = y[k];
        for (std::size_t j = k + 1; j < p; ++j)
            s -= A[j * m + k] * coef[j];
        coef[k] = s / rdiag[k];
    }
    double ss = 0.0;
    for (std::size_t r = p; r < m; ++r)
        ss += y[r] * y[r];

    AsymptoticFit fit;
    fit.basis = std::move(basis);
    fit.window = window;
    fit.residual = std::sqrt(ss / static_cast<double>(m));
    fit.coefficients.resize(p);
    for (std::size_t j = 0; j < p; ++j)
        fit.coefficients[j] = coef[j] / colscale[j];
    return fit;
}

AsymptoticFit fit_asymptotics(std::span<const double> values, IndexRange window,
                              std::vector<Basis> basis, const ModelSpec* spec) {
    std::vector<double> logs(values.size(), 0.0);
    for (Index n = std::max<Index>(window.first, 0);
         n <= window.last && n < static_cast<Index>(values.size()); ++n) {
        const double v = values[static_cast<std::size_t>(n)];
        if (!(v > 0.0))
            throw Error(ErrorCode::DegenerateBasis, "fit values must be positive on the window");
        logs[static_cast<std::size_t>(n)] = std::log(v);
    }
    return fit_log_asymptotics(logs, window, std::move(basis), spec);
}

} // namespace jdecay
