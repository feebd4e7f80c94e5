#ifndef MZITRACE_PERTURBATION_HPP
#define MZITRACE_PERTURBATION_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "amplitude.hpp"
#include "errors.hpp"

namespace mzitrace {

/// Localized changes delta[X] of arm amplitudes; arms not listed are unperturbed.
using PerturbationSet = std::map<std::string, Amplitude>;

namespace detail {

inline void require_factorized(const PathNetwork& network) {
    if (!network.factorized()) {
        throw domain_error("perturbations attach to arms; network uses path-amplitude overrides");
    }
}

inline void validate_deltas(const PathNetwork& network, const PerturbationSet& deltas) {
    for (const auto& [label, delta] : deltas) {
        network.arm(label);
        checked(delta, "perturbation on arm '" + label + "'");
    }
}

inline Amplitude delta_on(const PerturbationSet& deltas, const std::string& arm) {
    auto it = deltas.find(arm);
    return it == deltas.end() ? Amplitude{0.0, 0.0} : it->second;
}

} // namespace detail

/// Sum over paths of prod over arms (A[X] + delta[X]); exact, no truncation.
inline Amplitude perturbed_total_amplitude(const PathNetwork& network, const PerturbationSet& deltas) {
    detail::require_factorized(network);
    detail::validate_deltas(network, deltas);
    Amplitude sum{0.0, 0.0};
    for (const auto& path : network.paths()) {
        Amplitude product{1.0, 0.0};
        for (const auto& label : path.arms) {
            product *= network.arm(label).amplitude + detail::delta_on(deltas, label);
        }
        sum += product;
    }
    return sum;
}

inline double perturbed_detection_probability(const PathNetwork& network,
                                              const PerturbationSet& deltas) {
    return std::norm(perturbed_total_amplitude(network, deltas));
}

/// Coefficient of delta[X] in the expansion of the perturbed total amplitude:
/// for each path through X, the product of its other arms' amplitudes.
inline std::map<std::string, Amplitude> first_order_coefficients(const PathNetwork& network) {
    detail::require_factorized(network);
    std::map<std::string, Amplitude> out;
    for (const auto& arm : network.arms()) {
        out[arm.label] = {0.0, 0.0};
    }
    for (const auto& path : network.paths()) {
        for (const auto& target : path.arms) {
            Amplitude product{1.0, 0.0};
            for (const auto& label : path.arms) {
                if (label != target) {
                    product *= network.arm(label).amplitude;
                }
            }
            out[target] += product;
        }
    }
    return out;
}

/// First-order change sum_X coefficient(X) * delta[X].
inline Amplitude first_order_terms(const PathNetwork& network, const PerturbationSet& deltas) {
    detail::validate_deltas(network, deltas);
    const auto coefficients = first_order_coefficients(network);
    Amplitude sum{0.0, 0.0};
    for (const auto& [label, delta] : deltas) {
        sum += coefficients.at(label) * delta;
    }
    return sum;
}

/// All terms of the perturbed total amplitude carrying two or more deltas.
///
/// For the nested interferometer this is
///   A[E](dA+dB)dF + dE(dA+dB)A[F] + dE(A[A]+A[B])dF + dE(dA+dB)dF,
/// where the third term drops out when A[A] = -A[B].
inline Amplitude second_order_terms(const PathNetwork& network, const PerturbationSet& deltas) {
    detail::require_factorized(network);
    detail::validate_deltas(network, deltas);
    Amplitude sum{0.0, 0.0};
    for (const auto& path : network.paths()) {
        const std::size_t n = path.arms.size();
        if (n < 2) {
            continue;
        }
        if (n > 24) {
            throw capacity_error("second_order_terms: path too long to expand");
        }
        for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) {
            if (std::popcount(mask) < 2) {
                continue;
            }
            Amplitude term{1.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                const auto& label = path.arms[i];
                term *= (mask & (std::uint32_t{1} << i)) ? detail::delta_on(deltas, label)
                                                         : network.arm(label).amplitude;
            }
            sum += term;
        }
    }
    return sum;
}

struct Sensitivity {
    double numeric = 0.0;
    double analytic = 0.0;
};

/// dP/d(Re delta[arm]) at delta = 0: central difference against 2 Re(conj(sum A) * coefficient).
inline Sensitivity sensitivity_check(const PathNetwork& network, const std::string& arm,
                                     double step) {
    if (!(step >= 1e-8 && step <= 1e-2)) {
        throw domain_error("sensitivity step must lie in [1e-8, 1e-2]");
    }
    network.arm(arm);
    const double up = perturbed_detection_probability(network, {{arm, {step, 0.0}}});
    const double down = perturbed_detection_probability(network, {{arm, {-step, 0.0}}});
    const Amplitude coefficient = first_order_coefficients(network).at(arm);
    return {(up - down) / (2.0 * step),
            2.0 * (std::conj(total_amplitude(network)) * coefficient).real()};
}

/// Part of the detection probability that disappears when delta[arm] is switched off.
inline double arm_attributable_change(const PathNetwork& network, const PerturbationSet& deltas,
                                      const std::string& arm) {
    PerturbationSet without = deltas;
    without.erase(arm);
    return perturbed_detection_probability(network, deltas) -
           perturbed_detection_probability(network, without);
}

struct ScanRow {
    double delta = 0.0;
    double probability = 0.0;
    double change = 0.0;
};

/// Real perturbation of one arm swept over `values`, on top of `base`.
inline std::vector<ScanRow> perturbation_scan(const PathNetwork& network, const std::string& arm,
                                              std::span<const double> values,
                                              const PerturbationSet& base = {}) {
    const double reference = perturbed_detection_probability(network, {});
    std::vector<ScanRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        PerturbationSet deltas = base;
        deltas[arm] = {v, 0.0};
        const double p = perturbed_detection_probability(network, deltas);
        rows.push_back({v, p, p - reference});
    }
    return rows;
}

} // namespace mzitrace

#endif // MZITRACE_PERTURBATION_HPP
