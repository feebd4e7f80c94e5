#ifndef MZITRACE_AMPLITUDE_HPP
#define MZITRACE_AMPLITUDE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mzitrace {

/// Transition amplitude. Dimensionless; stored instances are always finite.
using Amplitude = std::complex<double>;

inline bool is_finite(Amplitude z) noexcept {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline Amplitude checked(Amplitude z, const std::string& what) {
    if (!is_finite(z)) {
        throw domain_error(what + ": amplitude is not finite");
    }
    return z;
}

struct Arm {
    std::string label;
    Amplitude amplitude{1.0, 0.0};

    friend bool operator==(const Arm&, const Arm&) = default;
};

/// An alternative between pre- and post-selection, given as the ordered arms it traverses.
struct VirtualPath {
    int index = 0;
    std::vector<std::string> arms;

    bool visits(const std::string& arm) const {
        return std::find(arms.begin(), arms.end(), arm) != arms.end();
    }

    friend bool operator==(const VirtualPath&, const VirtualPath&) = default;
};

/// Arms with segment amplitudes plus the virtual paths built from them.
///
/// A path's amplitude is the ordered product of its arms' segment amplitudes
/// unless an override is registered for its index. Networks are immutable
/// once constructed; the constructor enforces every structural invariant.
class PathNetwork {
public:
    PathNetwork(std::vector<Arm> arms, std::vector<VirtualPath> paths,
                std::map<int, Amplitude> overrides = {})
        : arms_(std::move(arms)), paths_(std::move(paths)), overrides_(std::move(overrides)) {
        if (paths_.empty()) {
            throw domain_error("network has no paths");
        }
        std::set<std::string> labels;
        for (const auto& arm : arms_) {
            if (arm.label.empty()) {
                throw domain_error("arm label is empty");
            }
            if (!labels.insert(arm.label).second) {
                throw domain_error("duplicate arm label '" + arm.label + "'");
            }
            checked(arm.amplitude, "arm '" + arm.label + "'");
        }
        std::set<int> ids;
        for (const auto& path : paths_) {
            if (!ids.insert(path.index).second) {
                throw domain_error("duplicate path id " + std::to_string(path.index));
            }
            if (path.arms.empty()) {
                throw domain_error("path " + std::to_string(path.index) + " has no arms");
            }
            std::set<std::string> seen;
            for (const auto& label : path.arms) {
                if (!labels.contains(label)) {
                    throw domain_error("path " + std::to_string(path.index) +
                                       " references unknown arm '" + label + "'");
                }
                if (!seen.insert(label).second) {
                    throw domain_error("path " + std::to_string(path.index) + " visits arm '" +
                                       label + "' twice");
                }
            }
        }
        for (const auto& [id, value] : overrides_) {
            if (!ids.contains(id)) {
                throw domain_error("override for unknown path " + std::to_string(id));
            }
            checked(value, "override for path " + std::to_string(id));
        }
    }

    const std::vector<Arm>& arms() const noexcept { return arms_; }
    const std::vector<VirtualPath>& paths() const noexcept { return paths_; }
    const std::map<int, Amplitude>& overrides() const noexcept { return overrides_; }
    bool factorized() const noexcept { return overrides_.empty(); }

    const Arm* find_arm(const std::string& label) const {
        auto it = std::find_if(arms_.begin(), arms_.end(),
                               [&](const Arm& a) { return a.label == label; });
        return it == arms_.end() ? nullptr : &*it;
    }

    const Arm& arm(const std::string& label) const {
        if (const Arm* a = find_arm(label)) {
            return *a;
        }
        throw domain_error("unknown arm '" + label + "'");
    }

    const VirtualPath& path(int index) const {
        auto it = std::find_if(paths_.begin(), paths_.end(),
                               [&](const VirtualPath& p) { return p.index == index; });
        if (it == paths_.end()) {
            throw domain_error("unknown path id " + std::to_string(index));
        }
        return *it;
    }

    std::optional<Amplitude> override_for(int index) const {
        if (auto it = overrides_.find(index); it != overrides_.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    friend bool operator==(const PathNetwork&, const PathNetwork&) = default;

private:
    std::vector<Arm> arms_;
    std::vector<VirtualPath> paths_;
    std::map<int, Amplitude> overrides_;
};

/// Product rule: amplitude of travelling the arms of `path` in order.
inline Amplitude compose_path_amplitude(const PathNetwork& network, const VirtualPath& path) {
    const VirtualPath& owned = network.path(path.index);
    if (owned.arms != path.arms) {
        throw domain_error("path " + std::to_string(path.index) + " does not belong to network");
    }
    if (auto value = network.override_for(path.index)) {
        return *value;
    }
    Amplitude product{1.0, 0.0};
    for (const auto& label : owned.arms) {
        product *= network.arm(label).amplitude;
    }
    return product;
}

inline Amplitude compose_path_amplitude(const PathNetwork& network, int index) {
    return compose_path_amplitude(network, network.path(index));
}

/// Composed amplitudes for every path, in network order.
inline std::vector<Amplitude> path_amplitudes(const PathNetwork& network) {
    std::vector<Amplitude> out;
    out.reserve(network.paths().size());
    for (const auto& path : network.paths()) {
        out.push_back(compose_path_amplitude(network, path));
    }
    return out;
}

/// Sum rule: amplitude of the weighted combination sum_k weights[k] * amplitudes[k].
inline Amplitude superpose(std::span<const Amplitude> amplitudes, std::span<const Amplitude> weights) {
    if (amplitudes.empty()) {
        throw domain_error("superpose: no amplitudes");
    }
    if (amplitudes.size() != weights.size()) {
        throw domain_error("superpose: " + std::to_string(amplitudes.size()) + " amplitudes but " +
                           std::to_string(weights.size()) + " weights");
    }
    Amplitude sum{0.0, 0.0};
    for (std::size_t k = 0; k < amplitudes.size(); ++k) {
        sum += weights[k] * amplitudes[k];
    }
    return sum;
}

inline double born_probability(Amplitude amplitude) noexcept { return std::norm(amplitude); }

/// Amplitude to reach the detector with all paths left interfering.
inline Amplitude total_amplitude(const PathNetwork& network) {
    Amplitude sum{0.0, 0.0};
    for (const auto& a : path_amplitudes(network)) {
        sum += a;
    }
    return sum;
}

namespace nested_mzi {

inline const std::vector<std::string>& arm_labels() {
    static const std::vector<std::string> labels{"E", "A", "B", "F", "C"};
    return labels;
}

inline Amplitude default_upper() { return {std::sqrt(1.0 / 12.0), 0.0}; }
inline Amplitude default_lower() { return {-std::sqrt(1.0 / 12.0), 0.0}; }
inline Amplitude default_outer() { return {std::sqrt(1.0 / 6.0), 0.0}; }

} // namespace nested_mzi

/// Nested interferometer: paths 1=(E,A,F), 2=(E,B,F), 3=(C).
///
/// The connector arms E and F carry amplitude 1, so the composed path
/// amplitudes are exactly `a1`, `a2`, `a3`. The pi phase picked up on
/// the A branch lives in the sign of the A segment.
inline PathNetwork build_nested_mzi(Amplitude a1, Amplitude a2, Amplitude a3) {
    std::vector<Arm> arms{{"E", {1.0, 0.0}}, {"A", a1}, {"B", a2}, {"F", {1.0, 0.0}}, {"C", a3}};
    std::vector<VirtualPath> paths{{1, {"E", "A", "F"}}, {2, {"E", "B", "F"}}, {3, {"C"}}};
    return PathNetwork(std::move(arms), std::move(paths));
}

inline PathNetwork build_nested_mzi() {
    return build_nested_mzi(nested_mzi::default_upper(), nested_mzi::default_lower(),
                            nested_mzi::default_outer());
}

} // namespace mzitrace

#endif // MZITRACE_AMPLITUDE_HPP
