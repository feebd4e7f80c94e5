// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <mzitrace/mzitrace.hpp>

#include "oracle/oracle.hpp"

using namespace mzitrace;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Accumulates checks; the first failing check is kept as the detail.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && pass_) {
            pass_ = false;
            detail_ = what;
        }
    }
    void note(const std::string& s) {
        if (pass_) {
            detail_ += (detail_.empty() ? "" : ", ") + s;
        }
    }
    Outcome result() const { return {pass_, detail_}; }

private:
    bool pass_ = true;
    std::string detail_;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const std::vector<std::string> marker_arms{"A", "B", "C", "E", "F"};

Outcome thirteen_pathways() {
    Checks c;
    const auto table = enumerate_outcomes(build_nested_mzi(), MarkerSet::uniform(marker_arms, 0.05));
    int contributing = 0;
    for (const auto& r : table.records) {
        contributing += r.contributing_paths.empty() ? 0 : 1;
    }
    c.expect(table.records.size() == 32, "record count " + std::to_string(table.records.size()));
    c.expect(contributing == 13, "contributing records " + std::to_string(contributing));
    double worst = 0.0;
    for (const char* bits : {"00010", "00001", "00011"}) {
        worst = std::max(worst, std::abs(outcome_amplitude(build_nested_mzi(),
                                                           MarkerSet::uniform(marker_arms, 0.05), bits)
                                             .amplitude));
    }
    c.expect(worst <= 1e-15, "cancelled amplitude " + num(worst));
    c.note(std::to_string(contributing) + "/32 contributing, cancelled max |amp| " + num(worst));
    return c.result();
}

Outcome figure4_structure() {
    Checks c;
    const auto net = build_nested_mzi();
    const auto markers = MarkerSet::uniform(marker_arms, 0.05);
    const auto w = marginals(enumerate_outcomes(net, markers));
    const double wa = w[0].second, wb = w[1].second, wc = w[2].second, we = w[3].second,
                 wf = w[4].second;
    c.expect(std::abs(wa - wb) <= 1e-9, "W(A) - W(B) = " + num(wa - wb));
    c.expect(wc / wa >= 1.99 && wc / wa <= 2.01, "W(C)/W(A) = " + num(wc / wa));
    c.expect(we > 0.0 && we < 1e-5 && wf > 0.0 && wf < 1e-5, "W(E), W(F) = " + num(we) + ", " + num(wf));
    c.expect(wa > 1e-4, "W(A) = " + num(wa));
    const auto state = oracle::evolve_state_vector(net, markers);
    double dev = 0.0;
    for (std::size_t s = 0; s < w.size(); ++s) {
        dev = std::max(dev, std::abs(w[s].second - oracle::marginal(state, s)));
    }
    c.expect(dev <= 1e-12, "oracle deviation " + num(dev));
    c.note("W(A)=" + num(wa) + " W(C)/W(A)=" + num(wc / wa) + " W(E)=" + num(we) +
           " oracle dev " + num(dev));
    return c.result();
}

Outcome epsilon_scaling() {
    Checks c;
    const auto net = build_nested_mzi();
    const auto grid = log_space(1e-3, 1e-2, 16);
    const std::vector<std::string> e{"E"}, ef{"E", "F"};
    const double s_e = scaling_exponent(net, marker_arms, e, grid);
    const double s_ef = scaling_exponent(net, marker_arms, ef, grid);
    c.expect(std::abs(s_e - 4.0) <= 0.05, "slope W(E) " + num(s_e));
    c.expect(std::abs(s_ef - 6.0) <= 0.05, "slope W(E,F) " + num(s_ef));
    c.note("slope W(E)=" + num(s_e) + " slope W(E,F)=" + num(s_ef));
    return c.result();
}

Outcome weak_limit() {
    Checks c;
    const auto net = build_nested_mzi();
    const std::vector<std::pair<std::string, double>> inner{
        {"A", std::sqrt(0.5)}, {"B", -std::sqrt(0.5)}, {"C", 1.0}};
    for (const auto& [arm, alpha] : inner) {
        const auto part = arm_partition(net, arm);
        c.expect(std::abs(weak_value(net, part).value.real() - alpha) <= 1e-14, "alpha " + arm);
        const double m = mean_reading(PointerMeter::projector(1e3, part), net);
        c.expect(std::abs(m - alpha) <= 1e-3, "weak reading " + arm + " = " + num(m));
    }
    double connector = 0.0;
    for (const char* arm : {"E", "F"}) {
        const double m = mean_reading(PointerMeter::projector(1e3, arm_partition(net, arm)), net);
        connector = std::max(connector, std::abs(m));
    }
    c.expect(connector <= 1e-6, "E/F weak reading " + num(connector));
    double dev = 0.0;
    for (double width : {0.01, 1.0, 10.0, 1e3}) {
        for (const auto& arm : marker_arms) {
            const auto meter = PointerMeter::projector(width, arm_partition(net, arm));
            std::vector<double> values;
            for (const auto& p : net.paths()) {
                values.push_back(meter.value_on(p.index));
            }
            const double closed = oracle::mean_reading_closed_form(values, path_amplitudes(net), width);
            dev = std::max(dev, std::abs(mean_reading(meter, net) - closed));
        }
    }
    c.expect(dev <= 1e-9, "quadrature vs closed form " + num(dev));
    c.note("max |E/F reading| " + num(connector) + ", quadrature dev " + num(dev));
    return c.result();
}

Outcome strong_limit() {
    Checks c;
    const auto net = build_nested_mzi();
    const auto part = arm_partition(net, "A");
    const double w = strong_frequencies(net, part).selected;
    const double m = mean_reading(PointerMeter::projector(0.01, part), net);
    c.expect(std::abs(w - 0.853553390593274) <= 1e-12, "w(I) " + num(w));
    c.expect(std::abs(m - w) <= 1e-5, "strong reading " + num(m));
    c.note("reading " + num(m) + " vs w(I) " + num(w));
    return c.result();
}

Outcome perturbation() {
    Checks c;
    const auto net = build_nested_mzi();
    const double de = sensitivity_check(net, "E", sensitivity_step).numeric;
    const double df = sensitivity_check(net, "F", sensitivity_step).numeric;
    const double dc = sensitivity_check(net, "C", sensitivity_step).numeric;
    c.expect(std::abs(de) <= 1e-8 && std::abs(df) <= 1e-8, "dP/dE, dP/dF = " + num(de) + ", " + num(df));
    c.expect(std::abs(dc - 0.816497) <= 1e-6, "dP/dC = " + num(dc));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    double identity = 0.0;
    for (int i = 0; i < 200; ++i) {
        PerturbationSet d;
        for (const auto& arm : marker_arms) {
            d[arm] = Amplitude{u(rng), u(rng)};
        }
        const Amplitude lhs = perturbed_total_amplitude(net, d);
        const Amplitude rhs = total_amplitude(net) + first_order_terms(net, d) + second_order_terms(net, d);
        identity = std::max(identity, std::abs(lhs - rhs));
    }
    c.expect(identity <= 1e-14, "expansion identity " + num(identity));

    const auto grid = log_space(1e-4, 1e-2, 16);
    std::vector<double> attributable;
    for (double s : grid) {
        attributable.push_back(arm_attributable_change(net, {{"E", s}, {"A", s}, {"B", s}}, "E"));
    }
    const double slope = log_log_slope(grid, attributable);
    c.expect(std::abs(slope - 2.0) <= 0.05, "E-attributable slope " + num(slope));
    c.note("dP/dC=" + num(dc) + " identity " + num(identity) + " E-attributable slope " + num(slope));
    return c.result();
}

Outcome scattering() {
    Checks c;
    double worst = 0.0;
    for (double k : log_space(0.05, 20.0, 40)) {
        for (double omega : log_space(1e-4, 20.0, 40)) {
            worst = std::max(worst, std::abs(delta_barrier_amplitudes({k, omega}).total_probability() - 1.0));
        }
        worst = std::max(worst, std::abs(delta_barrier_amplitudes({k, 0.0}).total_probability() - 1.0));
    }
    c.expect(worst <= 1e-12, "unitarity " + num(worst));
    const double k = 1.0, w = 0.05;
    const auto s = delta_barrier_amplitudes({k, w});
    const Amplitude a0{k * k / (k * k + w * w), 0.0};
    const Amplitude a1{0.0, -k * w / (k * k + w * w)};
    const double dev = std::max(std::abs(s.transmit_no_flip - a0), std::abs(s.transmit_flip - a1));
    c.expect(dev <= 1e-15, "a0/a1 closed form " + num(dev));
    c.note("max |norm - 1| " + num(worst) + ", a0/a1 dev " + num(dev));
    return c.result();
}

Outcome determinism() {
    Checks c;
    const auto spec = builtin_scenario();
    c.expect(to_json(run_simulate(spec)).dump() == to_json(run_simulate(spec)).dump(),
             "reports differ");
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(MZITRACE_SCENARIO_DIR)) {
        if (entry.path().extension() != ".scn") {
            continue;
        }
        ++files;
        const auto parsed = load_scenario(entry.path().string());
        const auto text = serialize_scenario(parsed);
        c.expect(parse_scenario(text) == parsed && serialize_scenario(parse_scenario(text)) == text,
                 "round trip " + entry.path().filename().string());
    }
    c.expect(files >= 10, "corpus has " + std::to_string(files) + " files");
    c.note(std::to_string(files) + " scenario files round-trip");
    return c.result();
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "thirteen pathways", 1.0, thirteen_pathways},
        {2, "marker spectrum structure", 1.0, figure4_structure},
        {3, "epsilon scaling", 5.0, epsilon_scaling},
        {4, "weak limit", 10.0, weak_limit},
        {5, "strong limit", 5.0, strong_limit},
        {6, "perturbation", 1.0, perturbation},
        {7, "scattering unitarity", 1.0, scattering},
        {8, "determinism and round trip", 1.0, determinism},
    };
    int failures = 0;
    for (const auto& cr : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = cr.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (out.pass && secs > cr.budget_s) {
            out = {false, "took " + num(secs) + " s, budget " + num(cr.budget_s) + " s"};
        }
        failures += out.pass ? 0 : 1;
        std::printf("%s %d %s: %s (%.3f s)\n", out.pass ? "PASS" : "FAIL", cr.id, cr.name,
                    out.detail.c_str(), secs);
    }
    return failures == 0 ? 0 : 1;
}
