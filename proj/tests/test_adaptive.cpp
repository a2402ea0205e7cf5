#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace bbpd {
namespace {

const DamageLaw kLaw{0.033, 0.066, 3.0, true};

Model<1> damaged_pair() {
    auto m = testing::two_particle_model(1e-3);
    m.law = kLaw;
    return m;
}

TEST(SwitchToExplicit, FiresJustPastOnset) {
    const auto m = damaged_pair();
    auto s = initial_state(m);
    s.u[1][0] = (kLaw.onset + 1e-9) * 1e-3;
    EXPECT_TRUE(detect_switch_to_explicit(m, s));
    s.u[1][0] = (kLaw.onset - 1e-9) * 1e-3;
    EXPECT_FALSE(detect_switch_to_explicit(m, s));
    s.u[1][0] = -0.5e-3;  // compression never counts
    EXPECT_FALSE(detect_switch_to_explicit(m, s));
}

TEST(SwitchToExplicit, IgnoresDeadBondsAndMissingLaw) {
    auto m = damaged_pair();
    auto s = initial_state(m);
    s.u[1][0] = 0.5e-3;
    for (auto& a : m.table.alive) a = 0;
    EXPECT_FALSE(detect_switch_to_explicit(m, s));

    const auto elastic = testing::two_particle_model(1e-3);
    EXPECT_FALSE(detect_switch_to_explicit(elastic, s));
}

std::vector<TracePoint> quiet_trace(std::size_t steps) {
    std::vector<TracePoint> t;
    for (std::size_t k = 1; k <= steps; ++k) t.push_back({k, 1e-6, 5, 2});
    return t;
}

TEST(SwitchToImplicit, WindowRules) {
    EXPECT_TRUE(detect_switch_to_implicit(quiet_trace(150), 100));
    EXPECT_FALSE(detect_switch_to_implicit(quiet_trace(50), 100));

    auto late = quiet_trace(150);
    late.back().failed = 3;  // new failure at the newest step
    EXPECT_FALSE(detect_switch_to_implicit(late, 100));

    auto degraded = quiet_trace(150);
    for (std::size_t k = 140; k < 150; ++k) degraded[k].degraded = 6;
    EXPECT_FALSE(detect_switch_to_implicit(degraded, 100));

    // An event just before the window no longer matters.
    auto old = quiet_trace(150);
    for (std::size_t k = 0; k < 40; ++k) old[k].degraded = 4;
    EXPECT_TRUE(detect_switch_to_implicit(old, 100));

    // Exactly W steps taken: counts compare against the start of the run.
    EXPECT_FALSE(detect_switch_to_implicit(quiet_trace(100), 100));
    auto fresh = quiet_trace(100);
    for (auto& p : fresh) p.degraded = p.failed = 0;
    EXPECT_TRUE(detect_switch_to_implicit(fresh, 100));
}

TEST(LoadSchedule, QuarterMillimetreSchedule) {
    const LoadSchedule s{2.75e-4, 3, 180};
    for (std::size_t n = 0; n <= 3; ++n) {
        const double expected = (1.0 - n / 3.0) * 2.75e-4 / 180.0;
        EXPECT_NEAR(s.explicit_increment(n), expected, 1e-15 * 2.75e-4);
    }
}

TEST(LoadSchedule, FourMillimetreSchedule) {
    const LoadSchedule s{4e-3, 5, 1000};
    EXPECT_DOUBLE_EQ(s.implicit_increment(), 8e-4);
    EXPECT_DOUBLE_EQ(s.explicit_increment(2), 2.4e-3 / 1000.0);
    EXPECT_THROW((LoadSchedule{1.0, 0, 1}.validate()), ConfigError);
    EXPECT_THROW((LoadSchedule{1.0, 1, 0}.validate()), ConfigError);
}

TEST(LoadSchedule, IncrementsReproduceTotal) {
    for (double total : {2.75e-4, 4e-3, 1e8, 1.0 / 3.0})
        for (std::size_t ni : {1u, 3u, 5u, 7u, 10u})
            for (std::size_t ne : {1u, 180u, 1000u, 4096u})
                for (std::size_t n = 0; n <= ni; ++n) {
                    const LoadSchedule s{total, ni, ne};
                    const double sum = n * s.implicit_increment() + ne * s.explicit_increment(n);
                    ASSERT_NEAR(sum, total, 8 * std::numeric_limits<double>::epsilon() * total)
                        << total << " " << ni << " " << ne << " " << n;
                }
}

TEST(StepLevel, LandsOnOneExactly) {
    for (std::size_t n : {1u, 3u, 7u, 10u, 49u}) {
        EXPECT_EQ(step_level(n, n), 1.0);
        for (std::size_t k = 1; k < n; ++k) EXPECT_LT(step_level(k, n), step_level(k + 1, n));
    }
}

TEST(Adaptive, WithoutDamageMatchesPureImplicitBitForBit) {
    const auto m = testing::plate_model(12, 4, 1e-3, kLaw);
    auto a = initial_state(m);
    auto b = initial_state(m);
    AdaptiveConfig cfg;
    const RunReport ra = run_adaptive(m, a, LoadSchedule{1e8, 4, 100}, cfg);
    const RunReport rb = run_implicit(m, b, 4, cfg.newton);
    ASSERT_TRUE(ra.converged) << ra.failure;
    ASSERT_TRUE(rb.converged);
    EXPECT_EQ(ra.implicit_steps, 4u);
    EXPECT_EQ(ra.explicit_steps, 0u);
    EXPECT_FALSE(ra.final_phase_ran);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.s_max, b.s_max);
    EXPECT_EQ(*ra.r_n_steps(), 1.0);
    EXPECT_EQ(*ra.r_n_time(), 1.0);
    EXPECT_EQ(ra.applied_load(), 1e8);
}

// Uniform tension past onset: Newton hands over to ADR, which finishes loading.
Model<2> pulled_plate(double strain) {
    const double dx = 1e-3;
    const int nx = 12, ny = 4;
    const MaterialParams mat = testing::steel_plane_stress(dx);
    GeometrySpec g = testing::plate_geometry(nx, ny, dx);
    g.layers[1] = BoundaryLayer{Side::Right, 3, LayerRole::Constrained, 1, std::nullopt, std::nullopt};
    const double pull = strain * (nx + 2) * dx;
    return make_model<2>(build_grid<2>(g, mat), mat, kLaw,
                         {DisplacementGroup{{true, true, true}, {0.0, 0.0, 0.0}},
                          DisplacementGroup{{true, false, false}, {pull, 0.0, 0.0}}},
                         Vec<2>{});
}

TEST(Adaptive, SwitchesPhasesAndConservesLoad) {
    const auto m = pulled_plate(0.05);
    auto s = initial_state(m);
    AdaptiveConfig cfg;
    cfg.arrest_window = 200;
    const LoadSchedule schedule{0.05, 10, 300};
    const RunReport r = run_adaptive(m, s, schedule, cfg);
    ASSERT_TRUE(r.converged) << r.failure;
    EXPECT_LT(r.implicit_steps, 10u);
    EXPECT_GT(r.implicit_steps, 0u);
    EXPECT_GE(r.explicit_steps, 300u);
    EXPECT_EQ(r.explicit_loading_steps, 300u);
    EXPECT_TRUE(r.final_phase_ran);
    EXPECT_NEAR(r.applied_load(), schedule.total, 8 * std::numeric_limits<double>::epsilon() * schedule.total);
    EXPECT_EQ(s.load_level, 1.0);
    EXPECT_EQ(r.trace.size(), r.explicit_steps);
    EXPECT_GT(r.damage.degraded, 0u);
    const double rn = *r.r_n_steps();
    EXPECT_GT(rn, 0.0);
    EXPECT_LT(rn, 1.0);
}

TEST(Adaptive, PhaseOneNeverLeavesBondsPastOnset) {
    const auto m = pulled_plate(0.05);
    auto s = initial_state(m);
    // Replay Phase 1 by hand and inspect each accepted step.
    std::size_t accepted = 0;
    for (std::size_t k = 1; k <= 10; ++k) {
        std::string why;
        bool onset = false;
        const auto before = s;
        const StepRecord rec = implicit_step_with_halving(m, s, step_level(k, 10), NewtonConfig{}, 4, why, true, &onset);
        if (onset) {
            EXPECT_EQ(s, before);
            break;
        }
        ASSERT_TRUE(rec.converged) << why;
        ++accepted;
        const bool last = detect_switch_to_explicit(m, s);
        if (!last)
            for (double v : s.s_max) EXPECT_LE(v, kLaw.onset);
        if (last) break;
    }
    EXPECT_GT(accepted, 0u);
}

TEST(Adaptive, RunsAreDeterministic) {
    const auto m = pulled_plate(0.05);
    AdaptiveConfig cfg;
    cfg.arrest_window = 200;
    auto a = initial_state(m);
    auto b = initial_state(m);
    const RunReport ra = run_adaptive(m, a, LoadSchedule{0.05, 10, 300}, cfg);
    const RunReport rb = run_adaptive(m, b, LoadSchedule{0.05, 10, 300}, cfg);
    EXPECT_EQ(a, b);
    EXPECT_EQ(ra.implicit_steps, rb.implicit_steps);
    EXPECT_EQ(ra.explicit_steps, rb.explicit_steps);
    EXPECT_EQ(ra.final_iterations, rb.final_iterations);
}

TEST(Metrics, AccelerationRatio) {
    EXPECT_NEAR(acceleration_ratio(4109.0, 29.0), 141.7, 0.05);
    EXPECT_EQ(acceleration_ratio(12.5, 12.5), 1.0);
    EXPECT_THROW(acceleration_ratio(0.0, 1.0), ConfigError);

    RunReport adaptive;
    adaptive.method = Method::Adaptive;
    adaptive.seconds_implicit = 10.0;
    adaptive.seconds_explicit = 15.0;
    adaptive.seconds_final = 4.0;
    RunReport ref;
    ref.method = Method::Adr;
    ref.seconds_explicit = 4109.0;
    compute_metrics(adaptive, ref);
    ASSERT_TRUE(adaptive.r_a);
    EXPECT_NEAR(*adaptive.r_a, 141.7, 0.05);
    EXPECT_NEAR(*adaptive.r_n_time(), 10.0 / 29.0, 1e-15);
    compute_metrics(adaptive, std::nullopt);
    EXPECT_FALSE(adaptive.r_a);
    EXPECT_TRUE(adaptive.r_n_time());

    RunReport self = ref;
    compute_metrics(self, ref);
    EXPECT_EQ(*self.r_a, 1.0);
    EXPECT_FALSE(ref.r_n_time());
}

TEST(Metrics, StepShareCountsFinalBlockOnce) {
    RunReport r;
    r.method = Method::Adaptive;
    r.implicit_steps = 3;
    r.explicit_steps = 96;
    r.final_phase_ran = true;
    EXPECT_DOUBLE_EQ(*r.r_n_steps(), 0.03);
}

TEST(MethodNames, RoundTrip) {
    for (Method m : {Method::Adr, Method::Implicit, Method::Adaptive}) EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_THROW(parse_method("euler"), ConfigError);
}

}  // namespace
}  // namespace bbpd
