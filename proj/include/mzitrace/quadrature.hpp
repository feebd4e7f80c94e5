#ifndef MZITRACE_QUADRATURE_HPP
#define MZITRACE_QUADRATURE_HPP

#include <array>
#include <cstddef>

#include "errors.hpp"

namespace mzitrace::quadrature {

/// Composite Simpson rule on `intervals` equal sub-intervals of [lower, upper].
///
/// `f` returns an array of N values so several moments of the same
/// integrand are accumulated in one sweep over the grid.
template <std::size_t N, typename Function>
std::array<double, N> simpson(Function&& f, double lower, double upper, std::size_t intervals) {
    if (intervals < 2 || intervals % 2 != 0) {
        throw domain_error("simpson: interval count must be even and >= 2");
    }
    const double h = (upper - lower) / static_cast<double>(intervals);
    std::array<double, N> ends{};
    std::array<double, N> odd{};
    std::array<double, N> even{};

    auto accumulate = [](std::array<double, N>& into, const std::array<double, N>& v) {
        for (std::size_t k = 0; k < N; ++k) {
            into[k] += v[k];
        }
    };
    accumulate(ends, f(lower));
    accumulate(ends, f(upper));
    for (std::size_t i = 1; i < intervals; ++i) {
        const double x = lower + static_cast<double>(i) * h;
        accumulate(i % 2 == 1 ? odd : even, f(x));
    }
    std::array<double, N> out{};
    for (std::size_t k = 0; k < N; ++k) {
        out[k] = h / 3.0 * (ends[k] + 4.0 * odd[k] + 2.0 * even[k]);
    }
    return out;
}

template <typename Function>
double simpson(Function&& f, double lower, double upper, std::size_t intervals) {
    return simpson<1>([&](double x) { return std::array<double, 1>{f(x)}; }, lower, upper,
                      intervals)[0];
}

} // namespace mzitrace::quadrature

#endif // MZITRACE_QUADRATURE_HPP
