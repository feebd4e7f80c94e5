#ifndef MZITRACE_MARKERS_HPP
#define MZITRACE_MARKERS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "amplitude.hpp"
#include "errors.hpp"

namespace mzitrace {

/// Two-level system on an arm: a passing photon leaves it in |0> with
/// amplitude `no_flip` or excites it to |1> with amplitude `flip`.
struct MarkerSite {
    std::string arm;
    Amplitude no_flip{1.0, 0.0};
    Amplitude flip{0.0, 0.0};

    /// flip = -i eps, no_flip = sqrt(1 - eps^2).
    static MarkerSite from_coupling(std::string arm, double eps) {
        if (!(eps >= 0.0 && eps <= 1.0)) {
            throw domain_error("marker coupling must lie in [0, 1]");
        }
        return {std::move(arm), {std::sqrt(1.0 - eps * eps), 0.0}, {0.0, -eps}};
    }

    friend bool operator==(const MarkerSite&, const MarkerSite&) = default;
};

inline constexpr double marker_norm_tolerance = 1e-12;
inline constexpr std::size_t max_marker_sites = 20;

/// Ordered marker sites; the order fixes bit positions in outcome strings.
class MarkerSet {
public:
    MarkerSet() = default;

    explicit MarkerSet(std::vector<MarkerSite> sites) : sites_(std::move(sites)) {
        std::set<std::string> arms;
        for (const auto& site : sites_) {
            if (!arms.insert(site.arm).second) {
                throw domain_error("two markers on arm '" + site.arm + "'");
            }
            checked(site.no_flip, "marker '" + site.arm + "' no-flip");
            checked(site.flip, "marker '" + site.arm + "' flip");
            const double norm = std::norm(site.no_flip) + std::norm(site.flip);
            if (std::abs(norm - 1.0) > marker_norm_tolerance) {
                throw domain_error("marker '" + site.arm + "' is not normalized: |a0|^2+|a1|^2 = " +
                                   std::to_string(norm));
            }
        }
    }

    /// Same coupling on every listed arm.
    static MarkerSet uniform(std::span<const std::string> arms, double eps) {
        std::vector<MarkerSite> sites;
        for (const auto& arm : arms) {
            sites.push_back(MarkerSite::from_coupling(arm, eps));
        }
        return MarkerSet(std::move(sites));
    }

    const std::vector<MarkerSite>& sites() const noexcept { return sites_; }
    std::size_t size() const noexcept { return sites_.size(); }

    std::vector<std::string> arms() const {
        std::vector<std::string> out;
        for (const auto& s : sites_) {
            out.push_back(s.arm);
        }
        return out;
    }

    std::size_t position_of(const std::string& arm) const {
        for (std::size_t i = 0; i < sites_.size(); ++i) {
            if (sites_[i].arm == arm) {
                return i;
            }
        }
        throw domain_error("no marker on arm '" + arm + "'");
    }

    friend bool operator==(const MarkerSet&, const MarkerSet&) = default;

private:
    std::vector<MarkerSite> sites_;
};

/// One distinguishable final marker configuration and the real pathway leading to it.
struct OutcomeRecord {
    std::string bits;  // '1' = mark left, one char per site in MarkerSet order
    Amplitude amplitude{0.0, 0.0};
    double probability = 0.0;
    int epsilon_order = 0;  // structural leading power of the coupling in `probability`
    std::vector<int> contributing_paths;
};

struct OutcomeTable {
    std::vector<std::string> sites;
    std::vector<OutcomeRecord> records;

    double total_probability() const {
        double total = 0.0;
        for (const auto& r : records) {
            total += r.probability;
        }
        return total;
    }
};

namespace detail {

struct PathMarkerPlan {
    int index = 0;
    Amplitude amplitude;
    std::uint32_t visited = 0;                  // bit i set = path passes site i
    std::vector<std::size_t> sites_in_order;    // site positions in traversal order
};

inline std::vector<PathMarkerPlan> plan_paths(const PathNetwork& network, const MarkerSet& markers) {
    std::vector<PathMarkerPlan> plans;
    for (const auto& path : network.paths()) {
        PathMarkerPlan plan{path.index, compose_path_amplitude(network, path), 0, {}};
        for (const auto& arm : path.arms) {
            for (std::size_t s = 0; s < markers.size(); ++s) {
                if (markers.sites()[s].arm == arm) {
                    plan.visited |= std::uint32_t{1} << s;
                    plan.sites_in_order.push_back(s);
                }
            }
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

inline std::uint32_t parse_bits(std::string_view bits, std::size_t sites) {
    if (bits.size() != sites) {
        throw domain_error("bit-string has " + std::to_string(bits.size()) + " positions but " +
                           std::to_string(sites) + " marker sites");
    }
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            mask |= std::uint32_t{1} << i;
        } else if (bits[i] != '0') {
            throw domain_error("bit-string may only contain '0' and '1'");
        }
    }
    return mask;
}

inline std::string format_bits(std::uint32_t mask, std::size_t sites) {
    std::string out(sites, '0');
    for (std::size_t i = 0; i < sites; ++i) {
        if (mask & (std::uint32_t{1} << i)) {
            out[i] = '1';
        }
    }
    return out;
}

inline OutcomeRecord outcome_for_mask(const std::vector<PathMarkerPlan>& plans,
                                      const MarkerSet& markers, std::uint32_t mask) {
    OutcomeRecord record;
    record.bits = format_bits(mask, markers.size());
    record.epsilon_order = 2 * std::popcount(mask);
    for (const auto& plan : plans) {
        // A path can only flip markers it passes; everything else must stay in |0>.
        if ((mask & ~plan.visited) != 0) {
            continue;
        }
        Amplitude term = plan.amplitude;
        for (std::size_t s : plan.sites_in_order) {
            const auto& site = markers.sites()[s];
            term *= (mask & (std::uint32_t{1} << s)) ? site.flip : site.no_flip;
        }
        record.amplitude += term;
        record.contributing_paths.push_back(plan.index);
    }
    record.probability = std::norm(record.amplitude);
    return record;
}

} // namespace detail

/// Amplitude to click at the detector leaving the marker configuration `bits`.
inline OutcomeRecord outcome_amplitude(const PathNetwork& network, const MarkerSet& markers,
                                       std::string_view bits) {
    if (markers.size() > max_marker_sites) {
        throw capacity_error("at most " + std::to_string(max_marker_sites) + " marker sites");
    }
    const auto mask = detail::parse_bits(bits, markers.size());
    return detail::outcome_for_mask(detail::plan_paths(network, markers), markers, mask);
}

/// All 2^K outcomes. Records are ordered by bit-string, first site most significant.
inline OutcomeTable enumerate_outcomes(const PathNetwork& network, const MarkerSet& markers) {
    const std::size_t k = markers.size();
    if (k > max_marker_sites) {
        throw capacity_error("enumeration limited to " + std::to_string(max_marker_sites) +
                             " marker sites, got " + std::to_string(k));
    }
    for (const auto& site : markers.sites()) {
        network.arm(site.arm);
    }
    const auto plans = detail::plan_paths(network, markers);
    OutcomeTable table{markers.arms(), {}};
    const std::uint32_t count = std::uint32_t{1} << k;
    table.records.reserve(count);
    for (std::uint32_t rank = 0; rank < count; ++rank) {
        // rank counts with site 0 as the most significant bit
        std::uint32_t mask = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (rank & (std::uint32_t{1} << (k - 1 - i))) {
                mask |= std::uint32_t{1} << i;
            }
        }
        table.records.push_back(detail::outcome_for_mask(plans, markers, mask));
    }
    return table;
}

/// Probabilities conditional on a detector click.
inline OutcomeTable conditional_on_click(OutcomeTable table) {
    const double total = table.total_probability();
    if (!(total > 0.0)) {
        throw numeric_error("detection probability vanishes; cannot condition on a click");
    }
    const double scale = 1.0 / std::sqrt(total);
    for (auto& r : table.records) {
        r.amplitude *= scale;
        r.probability = std::norm(r.amplitude);
    }
    return table;
}

/// Probability of a click with marks at every site in `sites` (others unconstrained).
inline double joint_mark_probability(const OutcomeTable& table,
                                     std::span<const std::string> sites) {
    std::vector<std::size_t> positions;
    for (const auto& site : sites) {
        auto it = std::find(table.sites.begin(), table.sites.end(), site);
        if (it == table.sites.end()) {
            throw domain_error("no marker on arm '" + site + "'");
        }
        positions.push_back(static_cast<std::size_t>(it - table.sites.begin()));
    }
    double w = 0.0;
    for (const auto& r : table.records) {
        if (std::all_of(positions.begin(), positions.end(),
                        [&](std::size_t p) { return r.bits[p] == '1'; })) {
            w += r.probability;
        }
    }
    return w;
}

/// W(site): net probability to click and find a mark at `site`.
inline double marginal_mark_probability(const OutcomeTable& table, const std::string& site) {
    const std::string one[] = {site};
    return joint_mark_probability(table, one);
}

inline std::vector<std::pair<std::string, double>> marginals(const OutcomeTable& table) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& site : table.sites) {
        out.emplace_back(site, marginal_mark_probability(table, site));
    }
    return out;
}

inline std::vector<double> log_space(double from, double to, std::size_t steps) {
    if (steps < 2 || !(from > 0.0) || !(to > 0.0)) {
        throw domain_error("log_space: need >= 2 steps over a positive range");
    }
    std::vector<double> out(steps);
    const double a = std::log(from);
    const double b = std::log(to);
    for (std::size_t i = 0; i < steps; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(steps - 1));
    }
    out.front() = from;
    out.back() = to;
    return out;
}

inline std::vector<double> lin_space(double from, double to, std::size_t steps) {
    if (steps < 2) {
        throw domain_error("lin_space: need >= 2 steps");
    }
    std::vector<double> out(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        out[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
    out.back() = to;
    return out;
}

/// Least-squares slope of log y against log x.
inline double log_log_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw domain_error("log_log_slope: need matching samples, at least two");
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            throw numeric_error("degenerate fit: non-positive sample");
        }
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (!(denom > 0.0)) {
        throw numeric_error("degenerate fit: abscissae coincide");
    }
    return (n * sxy - sx * sy) / denom;
}

/// Leading power of eps in the probability of marks at all of `marked`,
/// with uniform coupling eps on every arm of `marker_arms`.
inline double scaling_exponent(const PathNetwork& network, std::span<const std::string> marker_arms,
                               std::span<const std::string> marked,
                               std::span<const double> eps_grid) {
    if (eps_grid.size() < 4) {
        throw domain_error("scaling_exponent: need at least 4 grid points");
    }
    if (!std::all_of(eps_grid.begin(), eps_grid.end(), [](double e) { return e > 0.0; })) {
        throw domain_error("scaling_exponent: grid points must be positive");
    }
    const auto [lo, hi] = std::minmax_element(eps_grid.begin(), eps_grid.end());
    if (*hi < 10.0 * *lo) {
        throw domain_error("scaling_exponent: grid must span at least one decade");
    }
    std::vector<double> w;
    w.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        const auto table = enumerate_outcomes(network, MarkerSet::uniform(marker_arms, eps));
        const double p = joint_mark_probability(table, marked);
        if (!(p > 0.0)) {
            throw numeric_error("degenerate fit: zero probability at eps = " + std::to_string(eps));
        }
        w.push_back(p);
    }
    return log_log_slope(eps_grid, w);
}

struct SampledCurve {
    std::vector<double> x;
    std::vector<double> y;
};

struct SpectrumLine {
    std::string site;
    double position = 0.0;
    double weight = 0.0;
};

/// Sum of Gaussian bumps weight * exp(-(x - position)^2 / (2 width^2)) sampled on [lower, upper].
inline SampledCurve smear_lines(std::span<const SpectrumLine> lines, double width, double lower,
                                double upper, std::size_t points) {
    if (!(width > 0.0)) {
        throw domain_error("smear width must be positive");
    }
    SampledCurve curve;
    curve.x = lin_space(lower, upper, points);
    curve.y.assign(points, 0.0);
    for (std::size_t i = 0; i < points; ++i) {
        for (const auto& line : lines) {
            const double u = (curve.x[i] - line.position) / width;
            curve.y[i] += line.weight * std::exp(-0.5 * u * u);
        }
    }
    return curve;
}

/// Sites sit at abscissae 0, 1, ..., K-1 in the given order; the grid spans [-1, K].
inline SampledCurve smear_spectrum(std::span<const std::pair<std::string, double>> weights,
                                   double width, std::size_t points) {
    std::vector<SpectrumLine> lines;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        lines.push_back({weights[i].first, static_cast<double>(i), weights[i].second});
    }
    return smear_lines(lines, width, -1.0, static_cast<double>(weights.size()), points);
}

} // namespace mzitrace

#endif // MZITRACE_MARKERS_HPP
