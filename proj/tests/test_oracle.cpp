// Agreement between the library and the independent reference implementations.
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <mzitrace/markers.hpp>
#include <mzitrace/perturbation.hpp>
#include <mzitrace/pointer.hpp>

#include "oracle/oracle.hpp"
#include "test_support.hpp"

namespace mzitrace {
namespace {

using oracle::cplx;

struct RandomCase {
    PathNetwork network;
    MarkerSet markers;
};

RandomCase random_case(testing::Gen& gen) {
    const int n_arms = gen.integer(1, 6);
    std::vector<Arm> arms;
    std::vector<std::string> labels;
    for (int i = 0; i < n_arms; ++i) {
        labels.push_back("x" + std::to_string(i));
        arms.push_back({labels.back(), gen.amplitude()});
    }
    std::vector<VirtualPath> paths;
    const int n_paths = gen.integer(1, 4);
    for (int p = 1; p <= n_paths; ++p) {
        auto order = labels;
        std::shuffle(order.begin(), order.end(), std::mt19937(gen.integer(0, 1 << 20)));
        order.resize(static_cast<std::size_t>(gen.integer(1, n_arms)));
        paths.push_back({p, order});
    }
    std::map<int, Amplitude> overrides;
    if (gen.integer(0, 4) == 0) {
        overrides[1] = gen.amplitude();
    }
    std::vector<MarkerSite> sites;
    auto marked = labels;
    std::shuffle(marked.begin(), marked.end(), std::mt19937(gen.integer(0, 1 << 20)));
    marked.resize(static_cast<std::size_t>(gen.integer(0, std::min(5, n_arms))));
    for (const auto& arm : marked) {
        const double r = gen.real(0.0, 1.0);
        const double th = gen.real(-M_PI, M_PI), ph = gen.real(-M_PI, M_PI);
        sites.push_back({arm, std::polar(std::sqrt(1.0 - r * r), ph), std::polar(r, th)});
    }
    return {PathNetwork(arms, paths, overrides), MarkerSet(sites)};
}

TEST(StateVectorOracle, BuiltInScenarioComponentwise) {
    const std::vector<std::string> sites{"A", "B", "C", "E", "F"};
    const auto net = build_nested_mzi();
    const auto m = MarkerSet::uniform(sites, 0.05);
    const auto table = enumerate_outcomes(net, m);
    const auto st = oracle::evolve_state_vector(net, m);
    for (const auto& r : table.records) {
        EXPECT_NEAR(std::abs(r.amplitude - st.detected[oracle::mask_of(r.bits)]), 0.0, 1e-12) << r.bits;
    }
    EXPECT_NEAR(st.detected_norm(), table.total_probability(), 1e-14);
}

TEST(StateVectorOracle, ZeroCouplingIsProductState) {
    const std::vector<std::string> sites{"A", "B", "C", "E", "F"};
    const auto st = oracle::evolve_state_vector(build_nested_mzi(), MarkerSet::uniform(sites, 0.0));
    EXPECT_NEAR(std::abs(st.detected[0] - cplx{std::sqrt(1.0 / 6.0)}), 0.0, 1e-15);
    for (std::size_t b = 1; b < st.detected.size(); ++b) {
        EXPECT_EQ(st.detected[b], cplx{0.0});
    }
}

TEST(StateVectorOracle, OnePathOneMarker) {
    const PathNetwork net({{"X", cplx{0.6, 0.2}}}, {{1, {"X"}}});
    const MarkerSet m({{"X", cplx{0.8, 0.0}, cplx{0.0, -0.6}}});
    const auto st = oracle::evolve_state_vector(net, m);
    EXPECT_NEAR(std::abs(st.detected[0] - cplx{0.6, 0.2} * 0.8), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(st.detected[1] - cplx{0.6, 0.2} * cplx{0.0, -0.6}), 0.0, 1e-15);
}

TEST(StateVectorOracle, RandomNetworksMatchEnumeration) {
    testing::Gen gen(31);
    for (int trial = 0; trial < 400; ++trial) {
        const auto c = random_case(gen);
        const auto table = enumerate_outcomes(c.network, c.markers);
        const auto st = oracle::evolve_state_vector(c.network, c.markers);
        double total = 0.0;
        for (const auto& r : table.records) {
            EXPECT_NEAR(std::abs(r.amplitude - st.detected[oracle::mask_of(r.bits)]), 0.0, 1e-12);
            total += r.probability;
        }
        // probabilities of distinct outcomes add
        EXPECT_NEAR(total, st.detected_norm(), 1e-12);
    }
}

TEST(ExpansionOracle, DefaultTuningStructure) {
    const auto poly = oracle::naive_expansion(build_nested_mzi());
    EXPECT_EQ(oracle::monomial_coefficient(poly, {"E"}), cplx{0.0});
    EXPECT_EQ(oracle::monomial_coefficient(poly, {"F"}), cplx{0.0});
    EXPECT_NEAR(std::abs(oracle::monomial_coefficient(poly, {}) - cplx{std::sqrt(1.0 / 6.0)}), 0.0,
                1e-15);
    EXPECT_EQ(oracle::monomial_coefficient(poly, {"A", "E", "F"}), cplx{1.0});
    EXPECT_EQ(oracle::monomial_coefficient(poly, {"B", "E", "F"}), cplx{1.0});
    EXPECT_EQ(oracle::monomial_coefficient(poly, {"E", "F"}), cplx{0.0});
}

TEST(ExpansionOracle, GroupedDegreesMatchPerturbationModule) {
    testing::Gen gen(32);
    for (int trial = 0; trial < 300; ++trial) {
        const auto net = trial % 3 == 0 ? build_nested_mzi()
                                        : build_nested_mzi(gen.amplitude(), gen.amplitude(), gen.amplitude());
        const auto poly = oracle::naive_expansion(net);
        std::map<std::string, cplx> deltas;
        PerturbationSet set;
        for (const char* arm : {"E", "A", "B", "F", "C"}) {
            deltas[arm] = gen.amplitude(0.1);
            set[arm] = deltas[arm];
        }
        EXPECT_NEAR(std::abs(oracle::degree_part(poly, deltas, 0) - total_amplitude(net)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(oracle::degree_part(poly, deltas, 1) - first_order_terms(net, set)), 0.0,
                    1e-15);
        const cplx higher = oracle::degree_part(poly, deltas, 2) + oracle::degree_part(poly, deltas, 3);
        EXPECT_NEAR(std::abs(higher - second_order_terms(net, set)), 0.0, 1e-15);
        const auto coeffs = first_order_coefficients(net);
        for (const char* arm : {"E", "A", "B", "F", "C"}) {
            EXPECT_NEAR(std::abs(oracle::monomial_coefficient(poly, {arm}) - coeffs.at(arm)), 0.0, 1e-15);
        }
    }
}

TEST(QuadratureOracle, FinerGridChangesLittle) {
    const auto net = build_nested_mzi();
    for (const char* arm : {"A", "B", "C", "E", "F"}) {
        for (double w : {0.01, 1.0, 1000.0}) {
            const auto m = PointerMeter::projector(w, arm_partition(net, arm));
            const double base = mean_reading(m, net);
            const double fine = mean_reading(m, net, 10 * default_quadrature_intervals);
            EXPECT_LT(std::abs(base - fine), 1e-10) << arm << " " << w;
        }
    }
}

TEST(QuadratureOracle, LongDoubleTrapezoidAgrees) {
    const auto net = build_nested_mzi();
    for (const char* arm : {"A", "C", "E"}) {
        for (double w : {0.05, 3.0, 1000.0}) {
            const auto m = PointerMeter::projector(w, arm_partition(net, arm));
            std::vector<double> values;
            for (const auto& p : net.paths()) {
                values.push_back(m.value_on(p.index));
            }
            const double ref = oracle::mean_reading_trapezoid(values, path_amplitudes(net), w);
            EXPECT_NEAR(mean_reading(m, net), ref, 1e-9) << arm << " " << w;
        }
    }
}

} // namespace
} // namespace mzitrace
