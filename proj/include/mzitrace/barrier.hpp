#ifndef MZITRACE_BARRIER_HPP
#define MZITRACE_BARRIER_HPP

#include <cmath>
#include <string>

#include "amplitude.hpp"
#include "errors.hpp"
#include "markers.hpp"

namespace mzitrace {

/// Particle of momentum k (unit mass) crossing the contact coupling Omega sigma_x delta(x - x0).
struct BarrierParams {
    double k = 1.0;
    double omega = 0.0;

    friend bool operator==(const BarrierParams&, const BarrierParams&) = default;
};

struct ScatteringAmplitudes {
    Amplitude transmit_no_flip;
    Amplitude transmit_flip;
    Amplitude reflect_no_flip;
    Amplitude reflect_flip;

    double total_probability() const {
        return std::norm(transmit_no_flip) + std::norm(transmit_flip) + std::norm(reflect_no_flip) +
               std::norm(reflect_flip);
    }
    double reflection_probability() const {
        return std::norm(reflect_no_flip) + std::norm(reflect_flip);
    }
};

inline void validate(const BarrierParams& p) {
    if (!(p.k > 0.0) || !std::isfinite(p.k)) {
        throw domain_error("barrier momentum k must be positive and finite");
    }
    if (!(p.omega >= 0.0) || !std::isfinite(p.omega)) {
        throw domain_error("barrier coupling omega must be non-negative and finite");
    }
}

/// Four-channel amplitudes for a spin prepared in |+z>.
///
/// In the sigma_x eigenbasis the particle sees +Omega delta or -Omega delta,
/// with transmission k/(k +- i Omega) and reflection -+i Omega/(k +- i Omega).
/// Projecting back on |+z>, |-z> gives the no-flip (half-sum) and flip
/// (half-difference) channels.
inline ScatteringAmplitudes delta_barrier_amplitudes(const BarrierParams& params) {
    validate(params);
    const Amplitude k{params.k, 0.0};
    const Amplitude i_omega{0.0, params.omega};
    const Amplitude t_plus = k / (k + i_omega);
    const Amplitude t_minus = k / (k - i_omega);
    const Amplitude r_plus = -i_omega / (k + i_omega);
    const Amplitude r_minus = i_omega / (k - i_omega);
    return {0.5 * (t_plus + t_minus), 0.5 * (t_plus - t_minus), 0.5 * (r_plus + r_minus),
            0.5 * (r_plus - r_minus)};
}

inline constexpr double weak_coupling_limit = 0.3;

struct BarrierMarker {
    MarkerSite site;
    double discarded_reflection = 0.0;
};

/// Marker amplitudes from the transmitted channels, renormalized to unit norm.
inline BarrierMarker marker_from_barrier(const BarrierParams& params, std::string arm = {}) {
    validate(params);
    if (params.omega / params.k > weak_coupling_limit) {
        throw numeric_error("weak-coupling guard violated: omega/k = " +
                            std::to_string(params.omega / params.k) + " > 0.3");
    }
    const auto s = delta_barrier_amplitudes(params);
    const double norm = std::sqrt(std::norm(s.transmit_no_flip) + std::norm(s.transmit_flip));
    return {{std::move(arm), s.transmit_no_flip / norm, s.transmit_flip / norm},
            s.reflection_probability()};
}

} // namespace mzitrace

#endif // MZITRACE_BARRIER_HPP
