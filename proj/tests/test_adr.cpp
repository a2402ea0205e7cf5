#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace bbpd {
namespace {

TEST(FictitiousDensity, QuarterOfAbsoluteRowSum) {
    const double dx = 1e-3;
    const auto m = testing::two_particle_model(dx);
    const double k = m.bond_weight[0] / dx;  // axial spring stiffness of the single bond at rest
    const auto lam = fictitious_density(m);
    EXPECT_NEAR(lam[1], 0.25 * 2.0 * k, 1e-12 * k);
    EXPECT_NEAR(fictitious_density(m, 2.0)[1], 4.0 * lam[1], 1e-12 * k);

    auto stiffer = m;
    stiffer.bond_constant *= 2.0;
    refresh_bond_weights(stiffer);
    EXPECT_NEAR(fictitious_density(stiffer)[1] / lam[1], 2.0, 1e-14);

    const auto st = make_adr_state(m, initial_state(m));
    EXPECT_EQ(st.lambda[0], 0.0);
    EXPECT_EQ(st.lambda[1], lam[1]);
}

TEST(Damping, RayleighQuotientExamples) {
    const std::vector<double> u{1.0}, v{1.0}, lam{1.0};
    // kappa = -(f - f_prev) / (lambda dt v) = 0.25, c = 2 sqrt(0.25) = 1.
    EXPECT_DOUBLE_EQ(damping_coefficient(u, v, std::vector<double>{-0.25}, std::vector<double>{0.0}, lam, 1.0), 1.0);
    EXPECT_EQ(damping_coefficient(u, std::vector<double>{0.0}, std::vector<double>{-1.0}, std::vector<double>{0.0}, lam,
                                  1.0),
              0.0);
    EXPECT_EQ(damping_coefficient(u, v, std::vector<double>{0.5}, std::vector<double>{0.0}, lam, 1.0), 0.0);
    const double capped = damping_coefficient(u, v, std::vector<double>{-100.0}, std::vector<double>{0.0}, lam, 1.0);
    EXPECT_LT(capped, 2.0);
    EXPECT_NEAR(capped, 2.0, 1e-15);
    // DOFs with zero lambda (constrained) are ignored entirely.
    EXPECT_DOUBLE_EQ(damping_coefficient(std::vector<double>{1.0, 50.0}, std::vector<double>{1.0, 1.0},
                                         std::vector<double>{-0.25, -9.0}, std::vector<double>{0.0, 0.0},
                                         std::vector<double>{1.0, 0.0}, 1.0),
                     1.0);
}

TEST(Damping, MatchesSpringFrequency) {
    // Single DOF spring with lambda well above k: the estimate recovers 2 sqrt(k / lambda).
    const double k = 3.0, lambda = 30.0, dt = 1.0;
    const std::vector<double> u{0.7}, v{0.2}, lam{lambda};
    const std::vector<double> f_prev{-k * (0.7 - dt * 0.2)}, f{-k * 0.7};
    const double c = damping_coefficient(u, v, f, f_prev, lam, dt);
    EXPECT_NEAR(c, 2.0 * std::sqrt(k / lambda), 0.05 * 2.0 * std::sqrt(k / lambda));
}

TEST(Adr, SpringRelaxesToStaticDeflection) {
    const double dx = 1e-3, force = 1e9;
    const auto m = testing::two_particle_model(dx, force);
    auto st = make_adr_state(m, initial_state(m));
    const AdrReport rep = run_to_convergence(m, st, LoadProgram{0.0, 1.0, 0}, AdrConfig{});
    ASSERT_TRUE(rep.converged);
    const double expected = dx * force / (m.bond_constant * m.particles.volume[0]);
    EXPECT_NEAR(st.system.u[1][0], expected, 1e-3 * expected);
    EXPECT_EQ(st.system.u[0][0], 0.0);
    EXPECT_EQ(rep.trace.size(), rep.steps);
    EXPECT_LT(rep.e_u, 1e-9);
}

TEST(Adr, PrescribedEndCarriesFreeParticle) {
    const auto m = testing::two_particle_model(1e-3, 0.0, 2e-6);
    auto st = make_adr_state(m, initial_state(m));
    AdrConfig cfg;
    cfg.tolerance = 1e-12;
    const AdrReport rep = run_to_convergence(m, st, LoadProgram{0.0, 1.0, 20}, cfg);
    ASSERT_TRUE(rep.converged);
    EXPECT_GE(rep.steps, 20u);
    EXPECT_EQ(st.system.u[0][0], 2e-6);
    EXPECT_NEAR(st.system.u[1][0], 2e-6, 1e-3 * 2e-6);
}

TEST(Adr, DisplacementErrorDefinition) {
    const std::vector<double> prev{1e-3, 1e-3}, cur{1e-3 + 1e-7, 1e-3};
    const double e = displacement_error(prev, cur);
    EXPECT_NEAR(e, 7.071e-5, 1e-8);
    std::vector<double> p7 = prev, c7 = cur;
    for (double& v : p7) v *= 7.0;
    for (double& v : c7) v *= 7.0;
    EXPECT_NEAR(displacement_error(p7, c7), e, 1e-15);
    EXPECT_EQ(displacement_error(prev, prev), 0.0);
    EXPECT_TRUE(std::isinf(displacement_error(std::vector<double>{0.0, 0.0}, cur)));
}

TEST(Adr, EquilibriumIsAFixedPoint) {
    const auto m = testing::plate_model(12, 4, 1e-3);
    auto s = initial_state(m);
    ASSERT_TRUE(newton_load_step(m, s, 1.0, NewtonConfig{}).converged);
    auto st = make_adr_state(m, s);
    double scale = 0.0;
    for (const auto& u : s.u) scale = std::max(scale, norm(u));
    for (int k = 0; k < 50; ++k) adr_step(m, st, 1.0);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_LE(norm(st.system.u[i] - s.u[i]), 1e-6 * scale);
}

TEST(Adr, BondHistoryNeverDecreases) {
    const auto m = testing::plate_model(12, 4, 1e-3, DamageLaw{0.033, 0.066, 3.0, true}, Vec<2>{2e10, 0.0});
    auto st = make_adr_state(m, initial_state(m));
    const LoadProgram program{0.0, 1.0, 100};
    auto prev = st.system.s_max;
    bool grew = false;
    for (std::size_t k = 1; k <= 300; ++k) {
        adr_step(m, st, program.level(k));
        for (std::size_t b = 0; b < prev.size(); ++b) {
            ASSERT_GE(st.system.s_max[b], prev[b]);
            grew = grew || st.system.s_max[b] > prev[b];
        }
        prev = st.system.s_max;
    }
    EXPECT_TRUE(grew);
}

TEST(LoadProgram, RampThenHold) {
    const LoadProgram p{0.0, 1.0, 4};
    EXPECT_EQ(p.level(0), 0.0);
    EXPECT_EQ(p.level(1), 0.25);
    EXPECT_EQ(p.level(2), 0.5);
    EXPECT_EQ(p.level(4), 1.0);
    EXPECT_EQ(p.level(99), 1.0);
    const LoadProgram odd{0.3, 0.9, 7};
    EXPECT_EQ(odd.level(7), 0.9);
    for (std::size_t k = 1; k <= 7; ++k) EXPECT_GE(odd.level(k), odd.level(k - 1));
    EXPECT_EQ((LoadProgram{0.0, 1.0, 0}.level(1)), 1.0);
}

TEST(LoadProgram, ConstantRate) {
    EXPECT_EQ(LoadProgram::constant_rate(1e-3, 1e-6).steps, 1000u);
    EXPECT_EQ(LoadProgram::constant_rate(1e-3, 3e-4).steps, 4u);
    EXPECT_EQ(LoadProgram::constant_rate(1e-9, 1.0).steps, 1u);
    EXPECT_THROW(LoadProgram::constant_rate(0.0, 1e-6), ConfigError);
    EXPECT_THROW(LoadProgram::constant_rate(1e-3, -1.0), ConfigError);
}

TEST(AdrConfig, Validation) {
    AdrConfig c;
    EXPECT_NO_THROW(c.validate());
    c.tolerance = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = AdrConfig{};
    c.dt = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Adr, IsolatedParticleIsRejected) {
    ParticleSet<1> p;
    p.spacing = 1e-3;
    p.density = 7850.0;
    p.push({0.0}, 1e-9, Role::Fictitious, 0);
    p.push({1e-3}, 1e-9, Role::Real, -1);
    p.push({10e-3}, 1e-9, Role::Real, -1);
    MaterialParams mat;
    mat.youngs_modulus = 200e9;
    mat.density = 7850.0;
    mat.mode = DimensionMode::OneD;
    mat.cross_section = 1e-6;
    mat.horizon = 1.5e-3;
    const auto m = make_model<1>(p, mat, std::nullopt, {DisplacementGroup{{true, false, false}, {0.0, 0.0, 0.0}}},
                                 Vec<1>{0.0});
    EXPECT_THROW(fictitious_density(m), SetupError);
}

}  // namespace
}  // namespace bbpd
