#ifndef MZITRACE_REPORT_HPP
#define MZITRACE_REPORT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amplitude.hpp"
#include "errors.hpp"
#include "markers.hpp"
#include "perturbation.hpp"
#include "pointer.hpp"
#include "scenario.hpp"

namespace mzitrace {

inline constexpr const char* tool_version = "0.1.0";

inline constexpr double sensitivity_step = 1e-5;

struct WeakValueEntry {
    std::string arm;
    Amplitude value;
    std::optional<double> strong_frequency;
};

struct PointerEntry {
    std::string arm;
    double delta_f = 0.0;
    double mean_reading = 0.0;
};

struct SensitivityEntry {
    std::string arm;
    Sensitivity value;
};

struct SectionError {
    std::string section;
    std::string message;
};

/// Everything a simulate run computes. Contains no timestamps, so the same
/// scenario and tool version always reproduce the same report.
struct RunReport {
    std::string scenario;
    std::string fingerprint;
    std::string version = tool_version;
    bool renormalized = false;
    std::vector<std::string> sites;
    std::vector<OutcomeRecord> outcomes;
    double detection_probability = 0.0;
    std::vector<std::pair<std::string, double>> marginals;
    std::vector<WeakValueEntry> weak_values;
    std::vector<PointerEntry> pointer_means;
    std::vector<SensitivityEntry> sensitivities;
    std::vector<SectionError> errors;
};

/// Full pipeline over one scenario. A failing section is recorded in
/// `errors` and the remaining sections are still computed.
inline RunReport run_simulate(const ScenarioSpec& spec) {
    RunReport report;
    report.scenario = spec.name;
    report.fingerprint = scenario_fingerprint(spec);
    report.renormalized = spec.options.renormalize;
    const PathNetwork network = to_network(spec);

    try {
        auto table = enumerate_outcomes(network, to_markers(spec));
        report.detection_probability = table.total_probability();
        if (spec.options.renormalize) {
            table = conditional_on_click(std::move(table));
        }
        report.marginals = marginals(table);
        report.sites = std::move(table.sites);
        report.outcomes = std::move(table.records);
    } catch (const std::exception& e) {
        report.errors.push_back({"markers", e.what()});
    }

    for (const auto& arm : network.arms()) {
        try {
            const auto partition = arm_partition(network, arm.label);
            WeakValueEntry entry{arm.label, weak_value(network, partition).value, std::nullopt};
            try {
                entry.strong_frequency = strong_frequencies(network, partition).selected;
            } catch (const numeric_error&) {
            }
            report.weak_values.push_back(std::move(entry));
        } catch (const std::exception&) {
            // undefined for this arm; weak values are reported only where they exist
        }
    }

    for (const auto& meter : spec.meters) {
        try {
            const auto pointer = PointerMeter::projector(meter.delta_f,
                                                         arm_partition(network, meter.arm));
            report.pointer_means.push_back(
                {meter.arm, meter.delta_f, mean_reading(pointer, network)});
        } catch (const std::exception& e) {
            report.errors.push_back({"pointer", meter.arm + ": " + e.what()});
        }
    }

    // arm perturbations are undefined once a path amplitude is overridden
    if (network.factorized()) {
        for (const auto& arm : network.arms()) {
            report.sensitivities.push_back(
                {arm.label, sensitivity_check(network, arm.label, sensitivity_step)});
        }
    }
    return report;
}

inline nlohmann::json amplitude_json(Amplitude z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline nlohmann::json to_json(const RunReport& r) {
    using nlohmann::json;
    json outcomes = json::array();
    for (const auto& o : r.outcomes) {
        outcomes.push_back({{"bits", o.bits},
                            {"re", o.amplitude.real()},
                            {"im", o.amplitude.imag()},
                            {"probability", o.probability},
                            {"epsilon_order", o.epsilon_order},
                            {"contributing_paths", o.contributing_paths}});
    }
    json marginal = json::array();
    for (const auto& [site, w] : r.marginals) {
        marginal.push_back({{"site", site}, {"W", w}});
    }
    json weak = json::array();
    for (const auto& w : r.weak_values) {
        json entry{{"arm", w.arm}, {"re", w.value.real()}, {"im", w.value.imag()}};
        entry["strong_frequency"] = w.strong_frequency ? json(*w.strong_frequency) : json(nullptr);
        weak.push_back(std::move(entry));
    }
    json pointer = json::array();
    for (const auto& p : r.pointer_means) {
        pointer.push_back({{"arm", p.arm}, {"delta_f", p.delta_f}, {"mean_reading", p.mean_reading}});
    }
    json sens = json::array();
    for (const auto& s : r.sensitivities) {
        sens.push_back({{"arm", s.arm}, {"numeric", s.value.numeric}, {"analytic", s.value.analytic}});
    }
    json errors = json::array();
    for (const auto& e : r.errors) {
        errors.push_back({{"section", e.section}, {"message", e.message}});
    }
    return {{"scenario", r.scenario},
            {"fingerprint", r.fingerprint},
            {"version", r.version},
            {"renormalized", r.renormalized},
            {"sites", r.sites},
            {"detection_probability", r.detection_probability},
            {"outcomes", std::move(outcomes)},
            {"marginals", std::move(marginal)},
            {"weak_values", std::move(weak)},
            {"pointer_means", std::move(pointer)},
            {"sensitivities", std::move(sens)},
            {"errors", std::move(errors)}};
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& out) const {
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out << (i ? "," : "") << cells[i];
            }
            out << "\n";
        };
        line(header);
        for (const auto& row : rows) {
            line(row);
        }
    }
};

inline std::vector<CsvTable> to_csv_tables(const RunReport& r, bool nonzero_only = false) {
    using std::to_string;
    std::vector<CsvTable> tables;

    CsvTable summary{"summary.csv", {"key", "value"}, {}};
    summary.rows = {{"scenario", r.scenario},
                    {"fingerprint", r.fingerprint},
                    {"version", r.version},
                    {"renormalized", r.renormalized ? "true" : "false"},
                    {"detection_probability", format_g17(r.detection_probability)}};
    tables.push_back(std::move(summary));

    CsvTable outcomes{"outcomes.csv",
                      {"bits", "re", "im", "probability", "epsilon_order", "contributing_paths"},
                      {}};
    for (const auto& o : r.outcomes) {
        if (nonzero_only && !(o.probability > 0.0)) {
            continue;
        }
        std::string paths;
        for (std::size_t i = 0; i < o.contributing_paths.size(); ++i) {
            paths += (i ? ";" : "") + to_string(o.contributing_paths[i]);
        }
        outcomes.rows.push_back({o.bits, format_g17(o.amplitude.real()),
                                 format_g17(o.amplitude.imag()), format_g17(o.probability),
                                 to_string(o.epsilon_order), paths});
    }
    tables.push_back(std::move(outcomes));

    CsvTable marginal{"marginals.csv", {"site", "W"}, {}};
    for (const auto& [site, w] : r.marginals) {
        marginal.rows.push_back({site, format_g17(w)});
    }
    tables.push_back(std::move(marginal));

    CsvTable weak{"weak_values.csv", {"arm", "re", "im", "strong_frequency"}, {}};
    for (const auto& w : r.weak_values) {
        weak.rows.push_back({w.arm, format_g17(w.value.real()), format_g17(w.value.imag()),
                             w.strong_frequency ? format_g17(*w.strong_frequency) : ""});
    }
    tables.push_back(std::move(weak));

    CsvTable pointer{"pointer.csv", {"arm", "delta_f", "mean_reading"}, {}};
    for (const auto& p : r.pointer_means) {
        pointer.rows.push_back({p.arm, format_g17(p.delta_f), format_g17(p.mean_reading)});
    }
    tables.push_back(std::move(pointer));

    CsvTable sens{"sensitivity.csv", {"arm", "numeric", "analytic"}, {}};
    for (const auto& s : r.sensitivities) {
        sens.rows.push_back({s.arm, format_g17(s.value.numeric), format_g17(s.value.analytic)});
    }
    tables.push_back(std::move(sens));

    CsvTable errors{"errors.csv", {"section", "message"}, {}};
    for (const auto& e : r.errors) {
        std::string msg = e.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        errors.rows.push_back({e.section, msg});
    }
    tables.push_back(std::move(errors));
    return tables;
}

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot open '" + path.string() + "' for writing");
    }
    body(out);
    out.flush();
    if (!out) {
        throw io_error("write to '" + path.string() + "' failed");
    }
}

inline void write_tables(const std::vector<CsvTable>& tables, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw io_error("cannot create directory '" + dir.string() + "': " + ec.message());
    }
    for (const auto& t : tables) {
        write_file(dir / t.name, [&](std::ostream& out) { t.write(out); });
    }
}

enum class ReportFormat { csv, json };

/// JSON: a single report.json. CSV: one file per table.
inline void emit_report(const RunReport& report, ReportFormat format,
                        const std::filesystem::path& dir, bool nonzero_only = false) {
    if (format == ReportFormat::json) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            throw io_error("cannot create directory '" + dir.string() + "': " + ec.message());
        }
        write_file(dir / "report.json",
                   [&](std::ostream& out) { out << to_json(report).dump(2) << "\n"; });
    } else {
        write_tables(to_csv_tables(report, nonzero_only), dir);
    }
}

struct Figure4Data {
    SampledCurve spectrum;
    SampledCurve inset;
};

/// Smeared W(X) at the site abscissae, plus an inset with only the E and F lines.
inline Figure4Data figure4(const ScenarioSpec& spec) {
    auto table = enumerate_outcomes(to_network(spec), to_markers(spec));
    if (spec.options.renormalize) {
        table = conditional_on_click(std::move(table));
    }
    const auto w = marginals(table);
    const auto points = static_cast<std::size_t>(spec.options.output_grid);
    Figure4Data data{smear_spectrum(w, spec.options.smear_width, points), {}};

    std::vector<SpectrumLine> inset;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].first == "E" || w[i].first == "F") {
            inset.push_back({w[i].first, static_cast<double>(i), w[i].second});
        }
    }
    if (!inset.empty()) {
        const auto [lo, hi] = std::minmax_element(
            inset.begin(), inset.end(),
            [](const SpectrumLine& a, const SpectrumLine& b) { return a.position < b.position; });
        data.inset = smear_lines(inset, spec.options.smear_width, lo->position - 0.5,
                                 hi->position + 0.5, points);
    }
    return data;
}

inline CsvTable curve_table(std::string name, const SampledCurve& curve) {
    CsvTable t{std::move(name), {"x", "W"}, {}};
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        t.rows.push_back({format_g17(curve.x[i]), format_g17(curve.y[i])});
    }
    return t;
}

enum class SweepParameter { epsilon, delta_f };

struct SweepTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    CsvTable csv(std::string name) const {
        CsvTable t{std::move(name), header, {}};
        for (const auto& row : rows) {
            std::vector<std::string> cells;
            for (double v : row) {
                cells.push_back(format_g17(v));
            }
            t.rows.push_back(std::move(cells));
        }
        return t;
    }
};

namespace detail {

inline std::vector<double> epsilon_row(const ScenarioSpec& spec, double eps,
                                       const std::vector<std::string>& joint) {
    const auto s = with_epsilon(spec, eps);
    auto table = enumerate_outcomes(to_network(s), to_markers(s));
    const double total = table.total_probability();
    if (s.options.renormalize) {
        table = conditional_on_click(std::move(table));
    }
    std::vector<double> row{eps, total};
    for (const auto& [site, w] : marginals(table)) {
        row.push_back(w);
    }
    if (!joint.empty()) {
        row.push_back(joint_mark_probability(table, joint));
    }
    return row;
}

inline std::vector<std::string> meter_arms(const ScenarioSpec& spec, const PathNetwork& network) {
    std::vector<std::string> arms;
    for (const auto& m : spec.meters) {
        if (std::find(arms.begin(), arms.end(), m.arm) == arms.end()) {
            arms.push_back(m.arm);
        }
    }
    if (arms.empty()) {
        for (const auto& a : network.arms()) {
            for (const auto& p : network.paths()) {
                if (p.visits(a.label)) {
                    arms.push_back(a.label);
                    break;
                }
            }
        }
    }
    return arms;
}

} // namespace detail

/// Re-runs the pure pipeline at each value; points run concurrently, rows come back in input order.
inline SweepTable run_sweep(const ScenarioSpec& spec, SweepParameter parameter,
                            const std::vector<double>& values,
                            const std::vector<std::string>& joint = {}) {
    SweepTable table;
    const PathNetwork network = to_network(spec);
    std::vector<std::future<std::vector<double>>> futures;

    if (parameter == SweepParameter::epsilon) {
        table.header = {"epsilon", "detection_probability"};
        for (const auto& m : spec.markers) {
            table.header.push_back("W_" + m.arm);
        }
        if (!joint.empty()) {
            std::string name = "W";
            for (const auto& s : joint) {
                name += "_" + s;
            }
            table.header.push_back(name);
        }
        for (double eps : values) {
            futures.push_back(std::async(std::launch::async, [&spec, &joint, eps] {
                return detail::epsilon_row(spec, eps, joint);
            }));
        }
    } else {
        const auto arms = detail::meter_arms(spec, network);
        table.header = {"delta_f"};
        for (const auto& arm : arms) {
            table.header.push_back("mean_" + arm);
        }
        for (double w : values) {
            futures.push_back(std::async(std::launch::async, [&network, arms, w] {
                std::vector<double> row{w};
                for (const auto& arm : arms) {
                    const auto meter = PointerMeter::projector(w, arm_partition(network, arm));
                    row.push_back(mean_reading(meter, network));
                }
                return row;
            }));
        }
    }
    for (auto& f : futures) {
        table.rows.push_back(f.get());
    }
    return table;
}

} // namespace mzitrace

#endif // MZITRACE_REPORT_HPP
