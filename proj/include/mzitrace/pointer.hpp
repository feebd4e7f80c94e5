#ifndef MZITRACE_POINTER_HPP
#define MZITRACE_POINTER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amplitude.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

namespace mzitrace {

/// Pointer profile G(x) = exp(-x^2/2): bell-shaped, peaked at zero.
inline double gaussian_profile(double x) noexcept { return std::exp(-0.5 * x * x); }

/// Split of the network's paths into the ones a meter detects ({I}) and the rest ({II}).
struct PathPartition {
    std::set<int> selected;
    std::set<int> complement;

    friend bool operator==(const PathPartition&, const PathPartition&) = default;
};

inline PathPartition make_partition(const PathNetwork& network, const std::set<int>& selected) {
    if (selected.empty()) {
        throw domain_error("partition: selected set is empty");
    }
    PathPartition partition;
    for (const auto& path : network.paths()) {
        (selected.contains(path.index) ? partition.selected : partition.complement)
            .insert(path.index);
    }
    for (int id : selected) {
        if (!partition.selected.contains(id)) {
            throw domain_error("partition: unknown path id " + std::to_string(id));
        }
    }
    return partition;
}

/// Paths passing through `arm` versus all others: what a meter placed on that arm sees.
inline PathPartition arm_partition(const PathNetwork& network, const std::string& arm) {
    network.arm(arm);
    std::set<int> selected;
    for (const auto& path : network.paths()) {
        if (path.visits(arm)) {
            selected.insert(path.index);
        }
    }
    if (selected.empty()) {
        throw domain_error("partition: no path visits arm '" + arm + "'");
    }
    return make_partition(network, selected);
}

/// von Neumann pointer of width `delta_f` measuring the functional F[path].
class PointerMeter {
public:
    PointerMeter(double delta_f, std::map<int, double> indicator)
        : delta_f_(delta_f), indicator_(std::move(indicator)) {
        if (!(delta_f_ > 0.0) || !std::isfinite(delta_f_)) {
            throw domain_error("pointer width must be positive and finite");
        }
        for (const auto& [id, value] : indicator_) {
            if (!std::isfinite(value)) {
                throw domain_error("indicator value for path " + std::to_string(id) +
                                   " is not finite");
            }
        }
    }

    /// Projector onto the selected paths: F = 1 on {I}, 0 on {II}.
    static PointerMeter projector(double delta_f, const PathPartition& partition) {
        std::map<int, double> indicator;
        for (int id : partition.selected) {
            indicator[id] = 1.0;
        }
        for (int id : partition.complement) {
            indicator[id] = 0.0;
        }
        return PointerMeter(delta_f, std::move(indicator));
    }

    double delta_f() const noexcept { return delta_f_; }
    const std::map<int, double>& indicator() const noexcept { return indicator_; }

    double value_on(int path) const {
        auto it = indicator_.find(path);
        if (it == indicator_.end()) {
            throw domain_error("indicator undefined for path " + std::to_string(path));
        }
        return it->second;
    }

    PointerMeter with_delta_f(double delta_f) const { return PointerMeter(delta_f, indicator_); }

private:
    double delta_f_;
    std::map<int, double> indicator_;
};

namespace detail {

struct MeterTerms {
    std::vector<double> values;
    std::vector<Amplitude> amplitudes;
};

inline MeterTerms meter_terms(const PointerMeter& meter, const PathNetwork& network) {
    MeterTerms terms;
    for (const auto& path : network.paths()) {
        terms.values.push_back(meter.value_on(path.index));
        terms.amplitudes.push_back(compose_path_amplitude(network, path));
    }
    return terms;
}

inline double density(const MeterTerms& terms, double delta_f, double f) {
    Amplitude sum{0.0, 0.0};
    for (std::size_t i = 0; i < terms.values.size(); ++i) {
        sum += gaussian_profile((f - terms.values[i]) / delta_f) * terms.amplitudes[i];
    }
    return std::norm(sum);
}

} // namespace detail

/// Unnormalized reading density rho(f) = |sum_i G((f - F[i])/delta_f) A[i]|^2.
inline double pointer_density(const PointerMeter& meter, const PathNetwork& network, double f) {
    return detail::density(detail::meter_terms(meter, network), meter.delta_f(), f);
}

/// Amplitudes of the two real paths a strong meter creates.
inline std::pair<Amplitude, Amplitude> partition_amplitudes(const PathNetwork& network,
                                                            const PathPartition& partition) {
    Amplitude selected{0.0, 0.0};
    Amplitude complement{0.0, 0.0};
    for (const auto& path : network.paths()) {
        const Amplitude a = compose_path_amplitude(network, path);
        if (partition.selected.contains(path.index)) {
            selected += a;
        } else if (partition.complement.contains(path.index)) {
            complement += a;
        } else {
            throw domain_error("partition does not cover path " + std::to_string(path.index));
        }
    }
    return {selected, complement};
}

struct StrongFrequencies {
    double selected = 0.0;
    double complement = 0.0;
};

inline StrongFrequencies strong_frequencies(const PathNetwork& network,
                                            const PathPartition& partition) {
    const auto [a_sel, a_comp] = partition_amplitudes(network, partition);
    const double p_sel = std::norm(a_sel);
    const double p_comp = std::norm(a_comp);
    const double total = p_sel + p_comp;
    if (!(total > 0.0)) {
        throw numeric_error("degenerate partition: both real-path amplitudes vanish");
    }
    return {p_sel / total, p_comp / total};
}

/// Relative path amplitude alpha[I] = A[I] / (A[I] + A[II]).
struct WeakValue {
    Amplitude value;
};

inline WeakValue weak_value(const PathNetwork& network, const PathPartition& partition) {
    const auto [a_sel, a_comp] = partition_amplitudes(network, partition);
    const Amplitude total = a_sel + a_comp;
    if (total == Amplitude{0.0, 0.0}) {
        throw numeric_error("weak value undefined: post-selection amplitude vanishes");
    }
    return {a_sel / total};
}

inline constexpr std::size_t default_quadrature_intervals = std::size_t{1} << 15;

/// Mean pointer reading, integral f rho(f) df / integral rho(f) df.
///
/// Composite Simpson over [min F - 10 delta_f, max F + 10 delta_f] on
/// `intervals` sub-intervals (2^15 + 1 nodes by default).
inline double mean_reading(const PointerMeter& meter, const PathNetwork& network,
                           std::size_t intervals = default_quadrature_intervals) {
    const auto terms = detail::meter_terms(meter, network);
    const auto [lo_it, hi_it] = std::minmax_element(terms.values.begin(), terms.values.end());
    const double width = meter.delta_f();
    const double lower = *lo_it - 10.0 * width;
    const double upper = *hi_it + 10.0 * width;

    const auto moments = quadrature::simpson<2>(
        [&](double f) {
            const double rho = detail::density(terms, width, f);
            return std::array<double, 2>{rho, f * rho};
        },
        lower, upper, intervals);

    const double norm = moments[0];
    if (!(norm > 0.0) || !std::isfinite(norm) || norm < std::numeric_limits<double>::min()) {
        throw numeric_error("post-selection impossible: pointer density vanishes");
    }
    return moments[1] / norm;
}

struct ConvergencePoint {
    double delta_f = 0.0;
    double error = 0.0;
};

/// |mean_reading - Re alpha[I]| for each pointer width in `widths`.
inline std::vector<ConvergencePoint> weak_limit_convergence(const PointerMeter& meter,
                                                            const PathNetwork& network,
                                                            const PathPartition& partition,
                                                            std::span<const double> widths) {
    const double target = weak_value(network, partition).value.real();
    std::vector<ConvergencePoint> out;
    out.reserve(widths.size());
    for (double w : widths) {
        out.push_back({w, std::abs(mean_reading(meter.with_delta_f(w), network) - target)});
    }
    return out;
}

} // namespace mzitrace

#endif // MZITRACE_POINTER_HPP
