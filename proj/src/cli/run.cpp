// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include "jdecay/barriers.hpp"
#include "jdecay/cli.hpp"
#include "jdecay/tridiag.hpp"

namespace jdecay::cli {

namespace {

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <class T>
Json optional_json(const std::optional<T>& x) {
    return x ? Json(*x) : Json(nullptr);
}

Json constants_json(const NormConstants& c) {
    return Json{{"C1", number_or_null(c.C1)},       {"C2", number_or_null(c.C2)},
                {"eps_N", number_or_null(c.eps_N)}, {"delta_N", number_or_null(c.delta_N)},
                {"r_N", number_or_null(c.r_N)},     {"gamma", c.gamma}};
}

Json window_json(const GapWindow& w) {
    switch (w.kind) {
    case GapWindow::Kind::FiniteGap: return Json{{"r", w.r}, {"s", w.s}};
    case GapWindow::Kind::BelowBottom: return Json{{"below", w.d}};
    case GapWindow::Kind::AboveTop: return Json{{"above", w.d}};
    }
    return nullptr;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Outputs {
    std::filesystem::path dir;
    std::vector<std::string> files;

    void table(const CsvTable& t, const std::string& name) {
        t.write(dir / name);
        files.push_back(name);
    }
    void plot(const std::string& csv, const std::string& x, const std::vector<std::string>& ys,
              PlotStyle style) {
        const auto name = std::filesystem::path(csv).replace_extension(".gp").string();
        emit_plot_script(dir / csv, x, ys, style, dir / name);
        files.push_back(name);
    }
};

struct Section {
    Json constants = Json::object();
    Json tolerances = Json::object();
    Json results = Json::object();
    int exit_code = 0;
};

Section run_resolvent(const ModelSpec& spec, const ResolventParams& p, Outputs& out) {
    Section s;
    const auto col = resolvent_column(truncate(spec, 1, p.N), p.z);
    CsvTable t({"n", "re", "im", "abs"});
    for (Index n = 1; n <= p.N; ++n)
        t.row(n, col.at(n).real(), col.at(n).imag(), std::abs(col.at(n)));
    out.table(t, "resolvent.csv");
    out.plot("resolvent.csv", "n", {"abs"}, PlotStyle::Semilogy);
    s.results = {{"m", {col.at(1).real(), col.at(1).imag()}}, {"residual", col.residual}};
    s.tolerances = {{"near_singular", kNearSingular}};
    return s;
}

Section run_bounds(const ModelSpec& spec, const BoundsParams& p, Outputs& out) {
    Section s;
    const auto res = bounds_check(spec, p);
    CsvTable t({"lambda", "n", "abs_resolvent", "envelope", "pass"});
    Json per_lambda = Json::array();
    for (const auto& row : res.rows) {
        for (Index n = 1; n <= p.N; ++n) {
            const auto i = static_cast<std::size_t>(n - 1);
            const bool checked = n <= p.N - p.skirt;
            const bool ok = !checked || row.abs_column[i] <= row.envelope[i] * (1.0 + kEnvelopeSlack);
            t.row(row.lambda, n, row.abs_column[i], row.envelope[i], ok);
        }
        per_lambda.push_back({{"lambda", row.lambda},
                              {"checked", row.report.checked},
                              {"violations", row.report.violations.size()},
                              {"max_ratio", row.report.max_ratio},
                              {"worst_index", row.report.worst_index}});
    }
    out.table(t, "bounds.csv");
    out.plot("bounds.csv", "n", {"abs_resolvent", "envelope"}, PlotStyle::Semilogy);
    s.constants["theorem"] = p.theorem;
    s.constants["window"] = window_json(p.window);
    if (res.certificate) {
        s.constants["norm"] = constants_json(res.certificate->constants);
        s.constants["eta"] = res.certificate->eta;
    }
    if (res.thm2)
        s.constants["thm2"] = {{"N", res.thm2->N}, {"C3", res.thm2->C3}, {"threshold", res.thm2->threshold}};
    if (res.thm3_N)
        s.constants["thm3"] = {{"N", *res.thm3_N}};
    if (p.theorem != 1)
        s.constants["eps"] = p.eps;
    s.tolerances = {{"envelope_slack", kEnvelopeSlack}, {"skirt", p.skirt}};
    s.results = {{"violations", res.violations}, {"per_lambda", per_lambda}};
    s.exit_code = res.violations > 0 ? 3 : 0;
    return s;
}

Section run_sharpness(const ModelSpec& spec, const SharpnessParams& p, bool first, Outputs& out) {
    Section s;
    const auto res = first ? example1_sharpness(spec, p) : example2_sharpness(spec, p);
    const std::string name = first ? "example1.csv" : "example2.csv";
    CsvTable t({"n", first ? "abs_u_2n" : "abs_u"});
    for (std::size_t n = 1; n < res.values.size(); ++n)
        t.row(static_cast<Index>(n), res.values[n]);
    out.table(t, name);
    out.plot(name, "n", {t.header()[1]}, PlotStyle::Semilogy);
    Json coef = Json::object();
    const char* names[] = {"1", "ln_n", "sqrt_n", "n", "carleman_one", "carleman_half"};
    for (std::size_t j = 0; j < res.fit.basis.size(); ++j)
        coef[names[static_cast<int>(res.fit.basis[j])]] = res.fit.coefficients[j];
    s.results = {{"coefficients", coef},
                 {"fit_window", {res.fit.window.first, res.fit.window.last}},
                 {"fit_residual", res.fit.residual},
                 {"measured", res.measured},
                 {"predicted", res.predicted}};
    if (res.sharpness_ratio)
        s.results["sharpness_ratio"] = *res.sharpness_ratio;
    return s;
}

Section run_barriers(const ModelSpec& spec, const BarriersParams& p, Outputs& out) {
    Section s;
    const auto& o = p.options;
    const auto res = run_barrier_pipeline(spec, o);

    CsvTable rows({"k", "x_k", "ell_k", "Lambda_k", "term_k", "a_k", "alpha_k", "b_k"});
    for (const auto& r : res.rows) {
        double bk = 0.0;
        for (const auto& b : res.budgets)
            bk = std::max(bk, b.bk[static_cast<std::size_t>(r.k - 1)]);
        rows.row(r.k, r.x, r.ell, r.cap, r.term, r.a_k, r.alpha, bk);
    }
    out.table(rows, "barriers.csv");
    out.plot("barriers.csv", "k", {"term_k", "a_k", "b_k"}, PlotStyle::Semilogy);

    CsvTable bk({"E", "k", "b_k", "block_distance"});
    Json budgets = Json::array();
    for (const auto& b : res.budgets) {
        for (std::size_t j = 0; j < b.bk.size(); ++j)
            bk.row(b.E, static_cast<Index>(j + 1), b.bk[j], b.block_distance[j + 1]);
        budgets.push_back({{"E", b.E},
                           {"K", optional_json(b.K)},
                           {"max_b_k", *std::max_element(b.bk.begin(), b.bk.end())},
                           {"off_blocks_by_alpha", b.off_blocks_by_alpha}});
    }
    out.table(bk, "barriers_bk.csv");

    CsvTable crit({"gamma", "k", "term"});
    Json criteria = Json::array();
    for (std::size_t g = 0; g < res.criteria.size(); ++g) {
        const auto& c = res.criteria[g];
        for (std::size_t k = 0; k < c.terms.size(); ++k)
            crit.row(res.criterion_gammas[g], static_cast<Index>(k + 1), c.terms[k]);
        criteria.push_back({{"gamma", res.criterion_gammas[g]},
                            {"verdict", to_string(c.verdict)},
                            {"partial", c.partial},
                            {"tail_estimate", number_or_null(c.tail_estimate)},
                            {"last_ratio", c.last_ratio}});
    }
    out.table(crit, "barriers_criterion.csv");

    Json heads = Json::array();
    for (const auto& h : res.heads) {
        Json rows_json = Json::array();
        for (const auto& r : h.report.rows)
            rows_json.push_back({{"eta", r.eta}, {"total", r.total}, {"head", r.head}, {"holds", r.holds}});
        heads.push_back({{"E", h.E},
                         {"K", optional_json(h.K)},
                         {"exceptional", h.report.exceptional},
                         {"on_block_spectrum", h.report.on_block_spectrum},
                         {"rows", rows_json}});
    }

    s.constants = {{"norm", constants_json(res.thm4.constants)},
                   {"eta", res.thm4.eta},
                   {"gap", window_json(res.window)},
                   {"d0", res.d0},
                   {"eta0", res.eta0},
                   {"gamma0", res.gamma0},
                   {"gamma1", res.gamma1},
                   {"delta_E", res.derived.delta_E},
                   {"eps_phase", res.derived.eps_phase},
                   {"phi_threshold", res.derived.phi_threshold}};
    s.tolerances = {{"budget_threshold", kBudgetThreshold},
                    {"near_singular", kNearSingular},
                    {"max_deviation_allowed", res.derived.delta_E / 2.0}};
    s.results = {{"layout", layout_to_json(res.derived.layout)},
                 {"max_deviation", res.derived.max_deviation},
                 {"criteria", criteria},
                 {"budgets", budgets},
                 {"head_dominance", heads}};
    return s;
}

Section run_mobility(const ModelSpec& spec, const MobilityParams& p, Outputs& out) {
    Section s;
    CsvTable weyl({"E", "i", "n_i", "Delta_i", "beta_i", "eps_i", "quotient", "norm_ratio"});
    Json weyl_json = Json::array();
    for (double E : p.weyl_energies) {
        const auto scan = weyl_scan(spec, E, p.n_max, p.i_first);
        for (std::size_t j = 0; j < scan.windows.size(); ++j) {
            const auto& w = scan.windows[j];
            weyl.row(E, w.i, w.n_i, w.Delta_i, w.beta_i, w.eps_i, scan.quotient[j], scan.norm_ratio[j]);
        }
        weyl_json.push_back({{"E", E},
                             {"windows", scan.windows.size()},
                             {"decreasing", scan.decreasing},
                             {"final_over_initial", scan.final_over_initial}});
    }
    out.table(weyl, "mobility_weyl.csv");
    out.plot("mobility_weyl.csv", "i", {"quotient"}, PlotStyle::Semilogy);

    CsvTable disc({"E", "n", "V", "limit"});
    Json disc_json = Json::array();
    for (double E : p.discriminant_energies) {
        const auto scan = discriminant_scan(spec, E, p.discriminant_first, p.discriminant_last);
        for (Index n = p.discriminant_first; n <= p.discriminant_last; n += p.discriminant_stride)
            disc.row(E, n, discriminant_V(spec, E, n), discriminant_limit(spec, E, n));
        disc_json.push_back({{"E", E},
                             {"max_V", scan.max_V},
                             {"argmax", scan.argmax},
                             {"threshold", scan.threshold},
                             {"pass", scan.pass}});
    }
    out.table(disc, "mobility_discriminant.csv");
    out.plot("mobility_discriminant.csv", "n", {"V", "limit"}, PlotStyle::Linear);

    const auto& pm = std::get<rules::PowerModulated>(spec.rule);
    const auto w = make_weyl_sequence_spec(pm, p.i_first);
    s.constants = {{"delta", w.delta}, {"eps", w.eps}, {"M", w.M}, {"x0", w.x0}};
    s.results = {{"weyl", weyl_json},
                 {"discriminant", disc_json},
                 {"discriminant_range", {p.discriminant_first, p.discriminant_last}}};
    return s;
}

Section run_eigs(const ModelSpec& spec, const EigsParams& p, Outputs& out) {
    Section s;
    const auto slice = truncate(spec, 1, p.N);
    const auto ev = eigs_in_window({slice}, p.lo, p.hi);
    CsvTable t({"index", "eigenvalue"});
    for (std::size_t j = 0; j < ev.size(); ++j)
        t.row(static_cast<Index>(j), ev[j]);
    out.table(t, "eigs.csv");
    out.plot("eigs.csv", "index", {"eigenvalue"}, PlotStyle::Linear);
    s.tolerances = {{"bisection_tol", kBisectionTol}};
    s.results = {{"count", ev.size()}};
    return s;
}

} // namespace

BoundsResult bounds_check(const ModelSpec& spec, const BoundsParams& p) {
    BoundsResult out;
    const auto slice = truncate(spec, 1, p.N);
    std::vector<double> sums;
    if (p.theorem == 1) {
        double maxd = 0.0;
        if (p.window.kind != GapWindow::Kind::FiniteGap)
            for (double l : p.lambdas)
                maxd = std::max(maxd, p.window.edge_distance(l));
        out.certificate = certify_window(spec, p.window, p.scanN, EnvelopeKind::Theorem1, maxd);
    } else if (p.theorem == 2) {
        out.thm2 = pick_N_thm2(spec, p.window, p.eps, p.c3);
        sums = carleman_prefix(spec, p.N, CarlemanPower::One, out.thm2->N);
    }
    for (double l : p.lambdas) {
        BoundsRow row;
        row.lambda = l;
        const cplx z(l, p.theorem == 3 ? p.imag : 0.0);
        const auto col = resolvent_column(slice, z);
        if (p.theorem == 1) {
            row.envelope = thm1_envelope_sequence(spec, p.window, out.certificate->constants, l, p.N);
        } else if (p.theorem == 2) {
            for (Index n = 1; n <= p.N; ++n)
                row.envelope.push_back(envelope_thm2(p.window, l, p.eps, sums[static_cast<std::size_t>(n)]));
        } else {
            const Index N0 = pick_N_thm3(spec, p.window.d, z, p.eps);
            out.thm3_N = std::max(out.thm3_N.value_or(0), N0);
            row.envelope = thm3_envelope_sequence(spec, p.window.d, z, p.eps, N0, p.N);
        }
        for (const cplx& v : col.values)
            row.abs_column.push_back(std::abs(v));
        row.report = verify_envelope(col, row.envelope, p.skirt);
        out.violations += static_cast<Index>(row.report.violations.size());
        out.rows.push_back(std::move(row));
    }
    return out;
}

SharpnessResult example1_sharpness(const ModelSpec& spec, const SharpnessParams& p) {
    const auto* ex = std::get_if<rules::Example1>(&spec.rule);
    if (!ex)
        throw Error(ErrorCode::InvalidModel, "example1 sharpness needs an Example1 model");
    const double rho = std::abs(ex->c1 - ex->c2);
    if (!(std::abs(p.lambda) < rho))
        throw Error(ErrorCode::OutsideGap, "lambda outside (-rho, rho)");
    if (2 * p.fit.last > p.N)
        throw Error(ErrorCode::IndexOutOfWindow, "truncation shorter than the fit window");
    const auto col = resolvent_column(truncate(spec, 1, p.N), cplx(p.lambda, 0.0));
    SharpnessResult out;
    out.values.assign(static_cast<std::size_t>(p.N / 2 + 1), 0.0);
    for (Index n = 1; n <= p.N / 2; ++n)
        out.values[static_cast<std::size_t>(n)] = std::abs(col.at(2 * n));
    out.fit = fit_asymptotics(out.values, p.fit, {Basis::One, Basis::LogN}, &spec);
    out.measured = out.fit.coefficient(Basis::LogN);
    const double root = std::sqrt(rho * rho - p.lambda * p.lambda);
    out.predicted = -(1.0 + root) / 2.0;
    // the n^(-1/2) prefactor is removed before comparing with the envelope rate
    out.sharpness_ratio = (-out.measured - 0.5) / root;
    return out;
}

SharpnessResult example2_sharpness(const ModelSpec& spec, const SharpnessParams& p) {
    if (!std::holds_alternative<rules::Example2>(spec.rule))
        throw Error(ErrorCode::InvalidModel, "example2 sharpness needs an Example2 model");
    if (!(p.lambda > -1.0))
        throw Error(ErrorCode::OutsideHalfLine, "lambda must lie above -1");
    if (p.fit.last > p.N)
        throw Error(ErrorCode::IndexOutOfWindow, "truncation shorter than the fit window");
    // (-J + lambda)^{-1} = -(J - lambda)^{-1}: same moduli, bounded-below form
    const auto col = resolvent_column(truncate(reflect(spec), 1, p.N), cplx(-p.lambda, 0.0));
    SharpnessResult out;
    out.values.assign(static_cast<std::size_t>(p.N + 1), 0.0);
    for (Index n = 1; n <= p.N; ++n)
        out.values[static_cast<std::size_t>(n)] = std::abs(col.at(n));
    out.fit = fit_asymptotics(out.values, p.fit, {Basis::One, Basis::LogN, Basis::SqrtN}, &spec);
    out.measured = out.fit.coefficient(Basis::SqrtN);
    out.predicted = -2.0 * std::sqrt(p.lambda + 1.0);
    return out;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidModel:
    case ErrorCode::OutsideGap:
    case ErrorCode::OutsideHalfLine:
    case ErrorCode::BadEpsilon:
    case ErrorCode::DeltaTooLarge:
    case ErrorCode::BetaTooLarge:
    case ErrorCode::LayoutOverlap:
    case ErrorCode::MissingColumn:
        return 1;
    default:
        return 2;
    }
}

RunOutput run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    Outputs out{out_dir, {}};
    const auto& spec = config.model;
    const Section s = std::visit(
        [&](const auto& p) -> Section {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ResolventParams>)
                return run_resolvent(spec, p, out);
            else if constexpr (std::is_same_v<P, BoundsParams>)
                return run_bounds(spec, p, out);
            else if constexpr (std::is_same_v<P, SharpnessParams>)
                return run_sharpness(spec, p, config.experiment == Experiment::Example1, out);
            else if constexpr (std::is_same_v<P, BarriersParams>)
                return run_barriers(spec, p, out);
            else if constexpr (std::is_same_v<P, MobilityParams>)
                return run_mobility(spec, p, out);
            else
                return run_eigs(spec, p, out);
        },
        config.params);

    RunOutput r;
    r.exit_code = s.exit_code;
    r.files = out.files;
    r.files.push_back("manifest.json");
    r.manifest = Json{{"experiment", to_string(config.experiment)},
                      {"model", model_to_json(spec)},
                      {"parameters", config.raw_parameters},
                      {"constants", s.constants},
                      {"tolerances", s.tolerances},
                      {"results", s.results},
                      {"outputs", out.files},
                      {"exit_code", s.exit_code},
                      {"generated", utc_now()}};
    std::ofstream f(out_dir / "manifest.json", std::ios::binary);
    if (!f)
        throw Error(ErrorCode::InvalidConfig, "cannot write manifest");
    f << r.manifest.dump(2) << '\n';
    return r;
}

} // namespace jdecay::cli
