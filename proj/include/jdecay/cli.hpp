// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "jdecay/envelopes.hpp"
#include "jdecay/mobility.hpp"
#include "jdecay/model.hpp"
#include "jdecay/solutions.hpp"

namespace jdecay::cli {

using Json = nlohmann::json;

// ---- model / layout encoding ----

Json model_to_json(const ModelSpec& spec);
// throws InvalidConfig on unknown kinds, unknown keys or wrong types
ModelSpec model_from_json(const Json& j);
Json layout_to_json(const BarrierLayout& layout);
BarrierLayout layout_from_json(const Json& j);

// ---- CSV ----

// shortest representation that parses back to the same double
std::string format_number(double x);
std::string format_number(Index n);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    template <class... Ts>
    void row(const Ts&... xs) {
        add_row({cell(xs)...});
    }

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    static std::string cell(double x) { return format_number(x); }
    static std::string cell(Index n) { return format_number(n); }
    static std::string cell(int n) { return format_number(static_cast<Index>(n)); }
    static std::string cell(bool b) { return b ? "1" : "0"; }
    static std::string cell(const std::string& s) { return s; }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// ---- plot scripts ----

enum class PlotStyle { Linear, Semilogy };

// gnuplot script for the named columns of a CSV; the CSV is referenced by file name only.
// throws MissingColumn
std::string plot_script(const std::string& csv_name, const std::vector<std::string>& header,
                        const std::string& x, const std::vector<std::string>& ys, PlotStyle style);
// reads the header of an existing CSV and writes the script next to it
void emit_plot_script(const std::filesystem::path& csv, const std::string& x,
                      const std::vector<std::string>& ys, PlotStyle style,
                      const std::filesystem::path& script);

// ---- experiment parameters ----

struct ResolventParams {
    cplx z;
    Index N = 2000;
};

struct BoundsParams {
    int theorem = 1;
    std::vector<double> lambdas;
    double imag = 0.0; // thm3 only
    Index N = 4000;
    Index skirt = 400;
    GapWindow window;
    double eps = 0.25;
    Index scanN = Index{1} << 16;
    std::optional<double> c3;
};

struct SharpnessParams {
    double lambda = 0.0;
    Index N = 0;
    IndexRange fit;
};

struct BarriersParams {
    BarrierPipelineOptions options;
};

struct MobilityParams {
    std::vector<double> weyl_energies{0.0, 0.5};
    Index n_max = 1000000;
    Index i_first = 2;
    std::vector<double> discriminant_energies{-2.0, -1.5, -1.25, 1.25, 1.5, 2.0};
    Index discriminant_first = 100000;
    Index discriminant_last = 1000000;
    Index discriminant_stride = 1000; // CSV sampling only; the test scans every n
};

struct EigsParams {
    Index N = 1000;
    double lo = -1.0;
    double hi = 1.0;
};

enum class Experiment { Resolvent, BoundsCheck, Example1, Example2, Barriers, Mobility, Eigs };
const char* to_string(Experiment e);

using ExperimentParams = std::variant<ResolventParams, BoundsParams, SharpnessParams, BarriersParams,
                                      MobilityParams, EigsParams>;

struct ExperimentConfig {
    Experiment experiment = Experiment::Resolvent;
    ModelSpec model;
    ExperimentParams params;
    Json raw_parameters;
};

// throws InvalidConfig (and the model validation errors)
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// ---- experiment kernels shared with the acceptance suite ----

struct BoundsRow {
    double lambda = 0.0;
    std::vector<double> abs_column; // n = 1..N
    std::vector<double> envelope;   // n = 1..N
    EnvelopeReport report;
};

struct BoundsResult {
    std::vector<BoundsRow> rows;
    std::optional<WindowCertificate> certificate; // thm1
    std::optional<Thm2Choice> thm2;
    std::optional<Index> thm3_N;
    Index violations = 0;
};

BoundsResult bounds_check(const ModelSpec& spec, const BoundsParams& p);

struct SharpnessResult {
    AsymptoticFit fit;
    std::vector<double> values; // values[n]; index 0 unused
    double predicted = 0.0;     // predicted coefficient of the leading basis function
    double measured = 0.0;
    std::optional<double> sharpness_ratio; // example 1 only
};

// |u(2n)| of the Weyl column at lambda, fitted on {1, ln n}
SharpnessResult example1_sharpness(const ModelSpec& spec, const SharpnessParams& p);
// |u(n)| of the reflected operator's column at -lambda, fitted on {1, ln n, sqrt n}
SharpnessResult example2_sharpness(const ModelSpec& spec, const SharpnessParams& p);

// ---- runner ----

struct RunOutput {
    int exit_code = 0;
    std::vector<std::string> files;
    Json manifest;
};

// exit status for an error raised while running
int exit_code_for(ErrorCode code);

RunOutput run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

} // namespace jdecay::cli
