// mzitrace: command-line front end for nested-interferometer path simulations.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mzitrace/mzitrace.hpp>

namespace fs = std::filesystem;
using namespace mzitrace;

namespace {

enum ExitCode : int { ok = 0, io_failure = 1, spec_failure = 2, numeric_failure = 3 };

constexpr const char* out_dir_env = "MZITRACE_OUT_DIR";

ScenarioSpec load(const std::string& source) {
    if (source == "builtin" || source == "builtin:nested_mzi") {
        return builtin_scenario();
    }
    return load_scenario(source);
}

/// --out if given, else $MZITRACE_OUT_DIR, else nothing (write to stdout).
std::optional<fs::path> destination(const std::string& out) {
    if (!out.empty()) {
        return fs::path(out);
    }
    if (const char* env = std::getenv(out_dir_env); env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    return std::nullopt;
}

void emit_tables(const std::vector<CsvTable>& tables, const std::optional<fs::path>& dir) {
    if (dir) {
        write_tables(tables, *dir);
        return;
    }
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (tables.size() > 1) {
            std::cout << (i ? "\n" : "") << "# " << tables[i].name << "\n";
        }
        tables[i].write(std::cout);
    }
}

/// Single-table commands: --out names a file; the env var names a directory.
void emit_single(const CsvTable& table, const std::string& out) {
    if (!out.empty()) {
        write_file(out, [&](std::ostream& os) { table.write(os); });
    } else if (auto dir = destination("")) {
        write_tables({table}, *dir);
    } else {
        table.write(std::cout);
    }
}

Amplitude parse_complex(const std::string& text) {
    const auto comma = text.find(',');
    std::size_t used = 0;
    const double re = std::stod(text.substr(0, comma), &used);
    double im = 0.0;
    if (comma != std::string::npos) {
        im = std::stod(text.substr(comma + 1));
    }
    return {re, im};
}

std::vector<double> grid(double from, double to, std::size_t steps, bool log) {
    return log ? log_space(from, to, steps) : lin_space(from, to, steps);
}

struct Options {
    std::string scenario;
    std::string out;
    std::string format = "json";
    std::optional<double> epsilon;
    std::optional<double> width;
    std::optional<int> points;
    bool renormalize = false;
    bool nonzero_only = false;

    std::string param;
    double from = 0.0;
    double to = 0.0;
    std::size_t steps = 16;
    bool log = false;
    std::vector<std::string> joint;

    std::string arm;
    std::vector<double> delta_f;

    std::vector<std::string> deltas;
    std::string scan_arm;

    double k = 1.0;
    double omega = 0.0;
};

int cmd_validate(const Options& o) {
    const auto spec = load(o.scenario);
    std::cout << "ok " << (spec.name.empty() ? o.scenario : spec.name) << ": " << spec.arms.size()
              << " arms, " << spec.paths.size() << " paths, " << spec.markers.size() << " markers, "
              << spec.meters.size() << " meters, fingerprint " << scenario_fingerprint(spec) << "\n";
    return ok;
}

int cmd_simulate(const Options& o) {
    auto spec = load(o.scenario);
    if (o.epsilon) {
        spec = with_epsilon(std::move(spec), *o.epsilon);
    }
    if (o.renormalize) {
        spec.options.renormalize = true;
    }
    const auto report = run_simulate(spec);
    const auto dir = destination(o.out);
    if (o.format == "json") {
        if (dir) {
            emit_report(report, ReportFormat::json, *dir);
        } else {
            std::cout << to_json(report).dump(2) << "\n";
        }
    } else {
        emit_tables(to_csv_tables(report, o.nonzero_only), dir);
    }
    for (const auto& e : report.errors) {
        std::cerr << "mzitrace: " << e.section << ": " << e.message << "\n";
    }
    return report.errors.empty() ? ok : numeric_failure;
}

int cmd_sweep(const Options& o) {
    auto spec = load(o.scenario);
    SweepParameter p;
    if (o.param == "epsilon") {
        p = SweepParameter::epsilon;
    } else if (o.param == "delta_f") {
        p = SweepParameter::delta_f;
    } else {
        throw domain_error("--param must be 'epsilon' or 'delta_f'");
    }
    const auto table = run_sweep(spec, p, grid(o.from, o.to, o.steps, o.log), o.joint);
    emit_single(table.csv("sweep_" + o.param + ".csv"), o.out);
    return ok;
}

int cmd_pointer(const Options& o) {
    const auto spec = load(o.scenario);
    const auto network = to_network(spec);
    std::vector<double> widths = o.delta_f;
    if (widths.empty()) {
        for (const auto& m : spec.meters) {
            if (m.arm == o.arm) {
                widths.push_back(m.delta_f);
            }
        }
    }
    if (widths.empty()) {
        throw domain_error("no pointer width given for arm '" + o.arm + "' (use --delta-f)");
    }
    const auto partition = arm_partition(network, o.arm);
    const auto alpha = weak_value(network, partition).value;
    std::optional<double> strong;
    try {
        strong = strong_frequencies(network, partition).selected;
    } catch (const numeric_error&) {
    }
    CsvTable t{"pointer_" + o.arm + ".csv",
               {"arm", "delta_f", "mean_reading", "strong_frequency", "weak_re", "weak_im"},
               {}};
    for (double w : widths) {
        const double mean = mean_reading(PointerMeter::projector(w, partition), network);
        t.rows.push_back({o.arm, format_g17(w), format_g17(mean), strong ? format_g17(*strong) : "",
                          format_g17(alpha.real()), format_g17(alpha.imag())});
    }
    emit_single(t, o.out);
    return ok;
}

int cmd_perturb(const Options& o) {
    const auto network = to_network(load(o.scenario));
    PerturbationSet deltas;
    for (const auto& d : o.deltas) {
        const auto eq = d.find('=');
        if (eq == std::string::npos) {
            throw domain_error("--delta expects ARM=re[,im], got '" + d + "'");
        }
        deltas[d.substr(0, eq)] = parse_complex(d.substr(eq + 1));
    }
    if (!o.scan_arm.empty()) {
        const auto rows =
            perturbation_scan(network, o.scan_arm, grid(o.from, o.to, o.steps, o.log), deltas);
        CsvTable t{"perturb_scan_" + o.scan_arm + ".csv", {"delta", "P", "P_minus_P0"}, {}};
        for (const auto& r : rows) {
            t.rows.push_back({format_g17(r.delta), format_g17(r.probability), format_g17(r.change)});
        }
        emit_single(t, o.out);
        return ok;
    }
    const double p0 = perturbed_detection_probability(network, {});
    const double p = perturbed_detection_probability(network, deltas);
    const auto first = first_order_terms(network, deltas);
    const auto second = second_order_terms(network, deltas);
    CsvTable t{"perturb.csv", {"quantity", "re", "im"}, {}};
    t.rows.push_back({"P0", format_g17(p0), "0"});
    t.rows.push_back({"P", format_g17(p), "0"});
    t.rows.push_back({"zeroth_order", format_g17(total_amplitude(network).real()),
                      format_g17(total_amplitude(network).imag())});
    t.rows.push_back({"first_order", format_g17(first.real()), format_g17(first.imag())});
    t.rows.push_back({"higher_order", format_g17(second.real()), format_g17(second.imag())});
    for (const auto& [arm, c] : first_order_coefficients(network)) {
        t.rows.push_back({"coefficient_" + arm, format_g17(c.real()), format_g17(c.imag())});
    }
    for (const auto& arm : network.arms()) {
        const auto s = sensitivity_check(network, arm.label, sensitivity_step);
        t.rows.push_back({"dP_numeric_" + arm.label, format_g17(s.numeric), "0"});
        t.rows.push_back({"dP_analytic_" + arm.label, format_g17(s.analytic), "0"});
    }
    emit_single(t, o.out);
    return ok;
}

int cmd_barrier(const Options& o) {
    const BarrierParams params{o.k, o.omega};
    const auto s = delta_barrier_amplitudes(params);
    CsvTable t{"barrier.csv", {"channel", "re", "im", "probability"}, {}};
    auto row = [&](const std::string& name, Amplitude z) {
        t.rows.push_back({name, format_g17(z.real()), format_g17(z.imag()), format_g17(std::norm(z))});
    };
    row("transmit_no_flip", s.transmit_no_flip);
    row("transmit_flip", s.transmit_flip);
    row("reflect_no_flip", s.reflect_no_flip);
    row("reflect_flip", s.reflect_flip);
    t.rows.push_back({"total", "", "", format_g17(s.total_probability())});
    if (params.omega / params.k <= weak_coupling_limit) {
        const auto m = marker_from_barrier(params);
        row("marker_no_flip", m.site.no_flip);
        row("marker_flip", m.site.flip);
        t.rows.push_back({"discarded_reflection", "", "", format_g17(m.discarded_reflection)});
    }
    emit_single(t, o.out);
    return ok;
}

int cmd_figure4(const Options& o) {
    auto spec = load(o.scenario);
    if (o.epsilon) {
        spec = with_epsilon(std::move(spec), *o.epsilon);
    }
    if (o.width) {
        spec.options.smear_width = *o.width;
    }
    if (o.points) {
        spec.options.output_grid = *o.points;
    }
    const auto data = figure4(spec);
    std::vector<CsvTable> tables{curve_table("figure4.csv", data.spectrum)};
    if (!data.inset.x.empty()) {
        tables.push_back(curve_table("figure4_inset.csv", data.inset));
    }
    emit_tables(tables, destination(o.out));
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path amplitudes, pointer readings and marker statistics for nested interferometers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);
    Options o;

    const std::string scenario_help = "scenario file, or 'builtin' for the nested interferometer";
    const std::string out_help = std::string("output destination (default: $") + out_dir_env +
                                 ", else stdout)";

    auto* validate = app.add_subcommand("validate", "parse a scenario and report its contents");
    validate->add_option("scenario", o.scenario, scenario_help)->required();

    auto* simulate = app.add_subcommand("simulate", "outcome table, W(X), weak values, pointer means");
    simulate->add_option("scenario", o.scenario, scenario_help)->required();
    simulate->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    simulate->add_option("--out", o.out, out_help + " (directory)");
    simulate->add_option("--epsilon", o.epsilon, "override every marker coupling");
    simulate->add_flag("--renormalize", o.renormalize, "condition probabilities on a click");
    simulate->add_flag("--nonzero-only", o.nonzero_only, "CSV: drop zero-probability outcomes");

    auto* sweep = app.add_subcommand("sweep", "re-run the pipeline over a parameter grid");
    sweep->add_option("scenario", o.scenario, scenario_help)->required();
    sweep->add_option("--param", o.param, "epsilon or delta_f")->required();
    sweep->add_option("--from", o.from)->required();
    sweep->add_option("--to", o.to)->required();
    sweep->add_option("--steps", o.steps)->check(CLI::Range(2, 100000));
    sweep->add_flag("--log", o.log, "logarithmic grid");
    sweep->add_option("--joint", o.joint, "add a joint-mark column for these sites")->delimiter(',');
    sweep->add_option("--out", o.out, out_help + " (file)");

    auto* pointer = app.add_subcommand("pointer", "mean readings of a projector meter on one arm");
    pointer->add_option("scenario", o.scenario, scenario_help)->required();
    pointer->add_option("--arm", o.arm)->required();
    pointer->add_option("--delta-f", o.delta_f, "pointer width (repeatable)");
    pointer->add_option("--out", o.out, out_help + " (file)");

    auto* perturb = app.add_subcommand("perturb", "detection probability under arm perturbations");
    perturb->add_option("scenario", o.scenario, scenario_help)->required();
    perturb->add_option("--delta", o.deltas, "ARM=re[,im] (repeatable)");
    perturb->add_option("--scan", o.scan_arm, "sweep a real perturbation on this arm");
    perturb->add_option("--from", o.from);
    perturb->add_option("--to", o.to);
    perturb->add_option("--steps", o.steps)->check(CLI::Range(2, 100000));
    perturb->add_flag("--log", o.log, "logarithmic grid");
    perturb->add_option("--out", o.out, out_help + " (file)");

    auto* barrier = app.add_subcommand("barrier", "spin-flip scattering amplitudes at a contact barrier");
    barrier->add_option("--k", o.k, "incident momentum")->required();
    barrier->add_option("--omega", o.omega, "coupling strength")->required();
    barrier->add_option("--out", o.out, out_help + " (file)");

    auto* fig = app.add_subcommand("figure4", "smeared W(X) spectrum plus the E/F inset");
    fig->add_option("scenario", o.scenario, scenario_help)->required();
    fig->add_option("--epsilon", o.epsilon, "override every marker coupling");
    fig->add_option("--width", o.width, "Gaussian smear width");
    fig->add_option("--points", o.points, "samples per curve");
    fig->add_option("--out", o.out, out_help + " (directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : spec_failure;
    }

    try {
        if (*validate) return cmd_validate(o);
        if (*simulate) return cmd_simulate(o);
        if (*sweep) return cmd_sweep(o);
        if (*pointer) return cmd_pointer(o);
        if (*perturb) return cmd_perturb(o);
        if (*barrier) return cmd_barrier(o);
        if (*fig) return cmd_figure4(o);
    } catch (const numeric_error& e) {
        std::cerr << "mzitrace: " << e.what() << "\n";
        return numeric_failure;
    } catch (const io_error& e) {
        std::cerr << "mzitrace: " << e.what() << "\n";
        return io_failure;
    } catch (const std::exception& e) {
        // spec_error, domain_error, capacity_error, bad numeric flags
        std::cerr << "mzitrace: " << e.what() << "\n";
        return spec_failure;
    }
    return ok;
}
