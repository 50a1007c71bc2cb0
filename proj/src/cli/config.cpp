// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "jdecay/cli.hpp"

namespace jdecay::cli {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

// typed access to the "parameters" object; unread keys are rejected by finish()
class Params {
public:
    Params(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object())
            bad(where_ + " must be an object");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    double number(const char* key, double fallback) {
        return has(key) ? number_at(j_[key], key) : fallback;
    }
    double number(const char* key) {
        if (!has(key))
            bad(where_ + " needs \"" + key + "\"");
        return number_at(j_[key], key);
    }
    std::optional<double> maybe_number(const char* key) {
        if (!has(key))
            return std::nullopt;
        return number_at(j_[key], key);
    }
    Index integer(const char* key, Index fallback) {
        if (!has(key))
            return fallback;
        const auto& v = j_[key];
        if (!v.is_number_integer())
            bad("\"" + std::string(key) + "\" must be an integer");
        return v.get<Index>();
    }
    std::vector<double> numbers(const char* key, std::vector<double> fallback) {
        if (!has(key))
            return fallback;
        const auto& v = j_[key];
        if (!v.is_array())
            bad("\"" + std::string(key) + "\" must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v)
            out.push_back(number_at(x, key));
        return out;
    }
    const Json& object(const char* key) {
        if (!has(key) || !j_[key].is_object())
            bad(where_ + " needs an object \"" + key + "\"");
        return j_[key];
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            (void)v;
            if (!seen_.count(k))
                bad("unknown key \"" + k + "\" in " + where_);
        }
    }

private:
    static double number_at(const Json& v, const std::string& key) {
        if (!v.is_number() || !std::isfinite(v.get<double>()))
            bad("\"" + key + "\" must be a finite number");
        return v.get<double>();
    }

    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
    if (!ok)
        bad(what);
}

std::vector<double> lambda_grid(Params& p) {
    if (p.has("lambdas")) {
        if (p.has("lambda_grid"))
            bad("give either \"lambdas\" or \"lambda_grid\"");
        return p.numbers("lambdas", {});
    }
    Params g(p.object("lambda_grid"), "lambda_grid");
    const double lo = g.number("lo"), hi = g.number("hi");
    const Index points = g.integer("points", 11);
    g.finish();
    require(lo < hi && points >= 2, "lambda_grid needs lo < hi and points >= 2");
    // evenly spaced, both ends included
    std::vector<double> out;
    for (Index j = 0; j < points; ++j)
        out.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1));
    return out;
}

GapWindow window_from(const Json& j) {
    Params w(j, "window");
    GapWindow out;
    if (w.has("r") || w.has("s")) {
        out = GapWindow::finite(w.number("r"), w.number("s"));
        require(out.r < out.s, "window needs r < s");
    } else if (w.has("below")) {
        out = GapWindow::below_bottom(w.number("below"));
    } else if (w.has("above")) {
        out = GapWindow::above_top(w.number("above"));
    } else {
        bad("window needs {r, s}, {below} or {above}");
    }
    w.finish();
    return out;
}

BoundsParams bounds_params(Params& p) {
    BoundsParams b;
    b.theorem = static_cast<int>(p.integer("theorem", 1));
    require(b.theorem >= 1 && b.theorem <= 3, "\"theorem\" must be 1, 2 or 3");
    b.lambdas = lambda_grid(p);
    require(!b.lambdas.empty(), "empty lambda grid");
    b.N = p.integer("N", 4000);
    b.skirt = p.integer("skirt", b.N / 10);
    require(b.N >= 2 && b.skirt >= 0 && b.skirt < b.N, "need N >= 2 and 0 <= skirt < N");
    b.scanN = p.integer("scanN", b.scanN);
    require(b.scanN >= 1, "\"scanN\" must be positive");
    if (b.theorem == 3) {
        b.window = GapWindow::below_bottom(p.number("d"));
        b.eps = p.number("eps", 0.5);
        b.imag = p.number("imag", 0.0);
        require(b.eps > 0.0 && b.eps < 1.0, "envelope_thm3 needs 0 < eps < 1");
        for (double l : b.lambdas)
            require(l < b.window.d, "envelope_thm3 needs every lambda below d");
    } else {
        b.window = window_from(p.object("window"));
        for (double l : b.lambdas)
            require(b.window.contains(l), "lambda grid leaves the window");
        if (b.theorem == 2) {
            require(b.window.kind == GapWindow::Kind::FiniteGap, "envelope_thm2 needs a finite gap");
            b.eps = p.number("eps", 0.25);
            require(b.eps > 0.0 && b.eps < 0.5, "envelope_thm2 needs 0 < eps < 1/2");
            b.c3 = p.maybe_number("c3");
            require(!b.c3 || *b.c3 > 0.0, "\"c3\" must be positive");
        }
    }
    return b;
}

SharpnessParams sharpness_params(Params& p, Index N, Index first, Index last) {
    SharpnessParams s;
    s.lambda = p.number("lambda", 0.0);
    s.N = p.integer("N", N);
    s.fit = {first, last};
    if (p.has("fit")) {
        Params f(p.object("fit"), "fit");
        s.fit.first = f.integer("first", first);
        s.fit.last = f.integer("last", last);
        f.finish();
    }
    require(s.fit.first >= 1 && s.fit.first < s.fit.last, "fit needs 1 <= first < last");
    return s;
}

BarriersParams barrier_params(Params& p) {
    BarriersParams b;
    auto& o = b.options;
    o.e_lo = p.number("e_lo", o.e_lo);
    o.e_hi = p.number("e_hi", o.e_hi);
    require(o.e_lo < o.e_hi, "need e_lo < e_hi");
    o.x0 = p.number("x0", o.x0);
    o.eps_phase = p.maybe_number("eps_phase");
    o.criterion_barriers = p.integer("criterion_barriers", o.criterion_barriers);
    o.gammas = p.numbers("gammas", o.gammas);
    for (double g : o.gammas)
        require(g > 0.0, "criterion gammas must be positive");
    o.bk_barriers = p.integer("bk_barriers", o.bk_barriers);
    require(o.bk_barriers >= 2 && o.criterion_barriers >= o.bk_barriers,
            "need 2 <= bk_barriers <= criterion_barriers");
    o.gap_truncation = p.integer("gap_truncation", o.gap_truncation);
    o.scanN = p.integer("scanN", o.scanN);
    o.gamma1_fraction = p.number("gamma1_fraction", o.gamma1_fraction);
    require(o.gamma1_fraction > 0.0 && o.gamma1_fraction < 0.5, "gamma1_fraction must lie in (0, 1/2)");
    o.energies = p.numbers("energies", {});
    o.l2_energies = p.numbers("l2_energies", {});
    for (double E : o.energies)
        require(E >= o.e_lo && E <= o.e_hi, "energies must lie in [e_lo, e_hi]");
    for (double E : o.l2_energies)
        require(E >= o.e_lo && E <= o.e_hi, "l2_energies must lie in [e_lo, e_hi]");
    o.l2_N = p.integer("l2_N", o.l2_N);
    o.l2_eta_points = p.integer("l2_eta_points", o.l2_eta_points);
    o.l2_K_max = p.integer("l2_K_max", o.l2_K_max);
    require(o.gap_truncation >= 2 && o.scanN >= 1 && o.l2_N >= 2 && o.l2_eta_points >= 1 &&
                o.l2_K_max >= 1,
            "barrier sizes must be positive");
    return b;
}

MobilityParams mobility_params(Params& p) {
    MobilityParams m;
    m.weyl_energies = p.numbers("weyl_energies", m.weyl_energies);
    m.n_max = p.integer("n_max", m.n_max);
    m.i_first = p.integer("i_first", m.i_first);
    m.discriminant_energies = p.numbers("discriminant_energies", m.discriminant_energies);
    m.discriminant_last = p.integer("discriminant_last", m.n_max);
    m.discriminant_first = p.integer("discriminant_first", m.discriminant_last / 10);
    m.discriminant_stride = p.integer("discriminant_stride", m.discriminant_stride);
    require(m.n_max >= 4 && m.i_first >= 1, "need n_max >= 4 and i_first >= 1");
    require(m.discriminant_first >= 1 && m.discriminant_first <= m.discriminant_last &&
                m.discriminant_stride >= 1,
            "invalid discriminant range");
    return m;
}

} // namespace

const char* to_string(Experiment e) {
    switch (e) {
    case Experiment::Resolvent: return "resolvent";
    case Experiment::BoundsCheck: return "bounds-check";
    case Experiment::Example1: return "example1";
    case Experiment::Example2: return "example2";
    case Experiment::Barriers: return "barriers";
    case Experiment::Mobility: return "mobility";
    case Experiment::Eigs: return "eigs";
    }
    return "?";
}

ExperimentConfig parse_config(const Json& j) {
    if (!j.is_object())
        bad("config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (k != "experiment" && k != "model" && k != "parameters")
            bad("unknown top-level key \"" + k + "\"");
    }
    if (!j.contains("experiment") || !j["experiment"].is_string())
        bad("config needs a string \"experiment\"");
    if (!j.contains("model"))
        bad("config needs \"model\"");

    ExperimentConfig cfg;
    const auto name = j["experiment"].get<std::string>();
    bool found = false;
    for (auto e : {Experiment::Resolvent, Experiment::BoundsCheck, Experiment::Example1,
                   Experiment::Example2, Experiment::Barriers, Experiment::Mobility, Experiment::Eigs})
        if (name == to_string(e)) {
            cfg.experiment = e;
            found = true;
        }
    if (!found)
        bad("unknown experiment \"" + name + "\"");
    cfg.model = model_from_json(j["model"]);
    cfg.raw_parameters = j.value("parameters", Json::object());

    Params p(cfg.raw_parameters, "parameters");
    const bool modulated = std::holds_alternative<rules::PowerModulated>(cfg.model.rule);
    switch (cfg.experiment) {
    case Experiment::Resolvent: {
        const auto z = p.numbers("z", {});
        require(z.size() == 2, "resolvent needs \"z\": [re, im]");
        ResolventParams r{cplx(z[0], z[1]), p.integer("N", 2000)};
        require(r.N >= 1, "\"N\" must be positive");
        cfg.params = r;
        break;
    }
    case Experiment::BoundsCheck:
        cfg.params = bounds_params(p);
        break;
    case Experiment::Example1:
        require(std::holds_alternative<rules::Example1>(cfg.model.rule), "example1 needs an example1 model");
        cfg.params = sharpness_params(p, 16000, 500, 2000);
        break;
    case Experiment::Example2:
        require(std::holds_alternative<rules::Example2>(cfg.model.rule), "example2 needs an example2 model");
        cfg.params = sharpness_params(p, 12000, 1000, 4000);
        break;
    case Experiment::Barriers:
        require(modulated, "barriers needs a power_modulated model");
        cfg.params = barrier_params(p);
        break;
    case Experiment::Mobility:
        require(modulated, "mobility needs a power_modulated model");
        cfg.params = mobility_params(p);
        break;
    case Experiment::Eigs: {
        EigsParams e{p.integer("N", 1000), p.number("lo", -1.0), p.number("hi", 1.0)};
        require(e.N >= 1 && e.lo < e.hi, "eigs needs N >= 1 and lo < hi");
        cfg.params = e;
        break;
    }
    }
    if (auto* s = std::get_if<SharpnessParams>(&cfg.params)) {
        const Index need = cfg.experiment == Experiment::Example1 ? 2 * s->fit.last : s->fit.last;
        require(s->N > need, "truncation N must exceed the fit window");
    }
    p.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        bad("cannot read " + path.string());
    Json j;
    try {
        j = Json::parse(f);
    } catch (const Json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

} // namespace jdecay::cli
