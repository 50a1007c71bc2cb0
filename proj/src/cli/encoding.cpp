// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "jdecay/cli.hpp"

namespace jdecay::cli {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object())
        bad(where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
            bad("unknown key \"" + k + "\" in " + where);
    }
}

double num(const Json& j, const char* key, double fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number())
        bad(std::string("\"") + key + "\" must be a number");
    return j[key].get<double>();
}

std::vector<double> num_array(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array())
        bad(std::string("\"") + key + "\" must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : j[key]) {
        if (!x.is_number())
            bad(std::string("\"") + key + "\" must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<Index> int_array(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array())
        bad(std::string("\"") + key + "\" must be an array of integers");
    std::vector<Index> out;
    for (const auto& x : j[key]) {
        if (!x.is_number_integer())
            bad(std::string("\"") + key + "\" must be an array of integers");
        out.push_back(x.get<Index>());
    }
    return out;
}

const char* phi_name(PhiKind k) { return k == PhiKind::Cosine ? "cosine" : "cosine_squared"; }

} // namespace

Json layout_to_json(const BarrierLayout& layout) {
    return Json{{"centers", layout.centers}, {"half_lengths", layout.half_lengths}};
}

BarrierLayout layout_from_json(const Json& j) {
    only_keys(j, {"centers", "half_lengths"}, "layout");
    BarrierLayout out;
    out.centers = int_array(j, "centers");
    out.half_lengths = int_array(j, "half_lengths");
    return out;
}

Json model_to_json(const ModelSpec& spec) {
    Json j = std::visit(
        overloaded{
            [](const rules::Constant& r) {
                return Json{{"kind", "constant"}, {"lambda", r.lambda}, {"q", r.q}};
            },
            [](const rules::Example1& r) {
                return Json{{"kind", "example1"}, {"c1", r.c1}, {"c2", r.c2}};
            },
            [](const rules::Example2&) { return Json{{"kind", "example2"}}; },
            [](const rules::PowerModulated& r) {
                return Json{{"kind", "power_modulated"}, {"alpha", r.alpha}, {"gamma", r.gamma},
                            {"period", r.period},        {"c1", r.c1},       {"c2", r.c2},
                            {"phi", phi_name(r.phi)}};
            },
            [](const rules::PowerPeriodic& r) {
                return Json{{"kind", "power_periodic"}, {"alpha", r.alpha}, {"c1", r.c1}, {"c2", r.c2}};
            },
            [](const rules::BarrierComposite& r) {
                return Json{{"kind", "barrier_composite"},
                            {"base", model_to_json(*r.base)},
                            {"layout", layout_to_json(r.layout)},
                            {"inside", model_to_json(*r.inside)}};
            },
            [](const rules::Table& r) {
                return Json{{"kind", "table"},
                            {"weights", r.weights},
                            {"diag", r.diag},
                            {"tail", model_to_json(*r.tail)}};
            },
        },
        spec.rule);
    if (spec.q1_shift != 0.0)
        j["q1_shift"] = spec.q1_shift;
    if (spec.reflected)
        j["reflected"] = true;
    return j;
}

ModelSpec model_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        bad("model needs a string \"kind\"");
    const auto kind = j["kind"].get<std::string>();
    ModelSpec spec;
    if (kind == "constant") {
        only_keys(j, {"kind", "lambda", "q", "q1_shift", "reflected"}, "constant model");
        spec.rule = rules::Constant{num(j, "lambda", 1.0), num(j, "q", 0.0)};
    } else if (kind == "example1") {
        only_keys(j, {"kind", "c1", "c2", "q1_shift", "reflected"}, "example1 model");
        spec.rule = rules::Example1{num(j, "c1", 3.0), num(j, "c2", 1.0)};
    } else if (kind == "example2") {
        only_keys(j, {"kind", "q1_shift", "reflected"}, "example2 model");
        spec.rule = rules::Example2{};
    } else if (kind == "power_modulated") {
        only_keys(j, {"kind", "alpha", "gamma", "period", "c1", "c2", "phi", "q1_shift", "reflected"},
                  "power_modulated model");
        rules::PowerModulated r;
        r.alpha = num(j, "alpha", r.alpha);
        r.gamma = num(j, "gamma", r.gamma);
        r.period = num(j, "period", r.period);
        r.c1 = num(j, "c1", r.c1);
        r.c2 = num(j, "c2", r.c2);
        if (j.contains("phi")) {
            const auto& p = j["phi"];
            if (p == "cosine")
                r.phi = PhiKind::Cosine;
            else if (p == "cosine_squared")
                r.phi = PhiKind::CosineSquared;
            else
                bad("\"phi\" must be \"cosine\" or \"cosine_squared\"");
        }
        spec.rule = r;
    } else if (kind == "power_periodic") {
        only_keys(j, {"kind", "alpha", "c1", "c2", "q1_shift", "reflected"}, "power_periodic model");
        spec.rule = rules::PowerPeriodic{num(j, "alpha", 0.5), num(j, "c1", 0.0), num(j, "c2", 0.0)};
    } else if (kind == "barrier_composite") {
        only_keys(j, {"kind", "base", "layout", "inside", "q1_shift", "reflected"},
                  "barrier_composite model");
        for (const char* k : {"base", "layout", "inside"})
            if (!j.contains(k))
                bad(std::string("barrier_composite needs \"") + k + "\"");
        spec.rule = rules::BarrierComposite{share(model_from_json(j["base"])),
                                            layout_from_json(j["layout"]),
                                            share(model_from_json(j["inside"]))};
    } else if (kind == "table") {
        only_keys(j, {"kind", "weights", "diag", "tail", "q1_shift", "reflected"}, "table model");
        if (!j.contains("tail"))
            bad("table needs \"tail\"");
        spec.rule = rules::Table{num_array(j, "weights"), num_array(j, "diag"),
                                 share(model_from_json(j["tail"]))};
    } else {
        bad("unknown model kind \"" + kind + "\"");
    }
    spec.q1_shift = num(j, "q1_shift", 0.0);
    if (j.contains("reflected")) {
        if (!j["reflected"].is_boolean())
            bad("\"reflected\" must be a boolean");
        spec.reflected = j["reflected"].get<bool>();
    }
    validate(spec);
    return spec;
}

std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_number(Index n) { return std::to_string(n); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw Error(ErrorCode::MissingColumn, "row width differs from the header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
    f << str();
}

std::string plot_script(const std::string& csv_name, const std::vector<std::string>& header,
                        const std::string& x, const std::vector<std::string>& ys, PlotStyle style) {
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw Error(ErrorCode::MissingColumn, "no column \"" + name + "\" in " + csv_name);
        return static_cast<std::size_t>(it - header.begin()) + 1;
    };
    if (ys.empty())
        throw Error(ErrorCode::MissingColumn, "nothing to plot");
    const auto xc = column(x);
    std::ostringstream s;
    s << "set datafile separator ','\n";
    s << "set key autotitle columnhead\n";
    s << "set xlabel '" << x << "'\n";
    if (style == PlotStyle::Semilogy)
        s << "set logscale y\n";
    s << "plot";
    for (std::size_t i = 0; i < ys.size(); ++i) {
        s << (i ? ", \\\n    " : " ") << "'" << csv_name << "' using " << xc << ":" << column(ys[i])
          << " with lines title '" << ys[i] << "'";
    }
    s << "\n";
    return s.str();
}

void emit_plot_script(const std::filesystem::path& csv, const std::string& x,
                      const std::vector<std::string>& ys, PlotStyle style,
                      const std::filesystem::path& script) {
    std::ifstream f(csv);
    if (!f)
        throw Error(ErrorCode::MissingColumn, "cannot read " + csv.string());
    std::string line;
    std::getline(f, line);
    std::vector<std::string> header;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
        header.push_back(cell);
    const auto text = plot_script(csv.filename().string(), header, x, ys, style);
    std::ofstream out(script, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::InvalidConfig, "cannot write " + script.string());
    out << text;
}

} // namespace jdecay::cli
