#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "test_support.hpp"

namespace bbpd {
namespace {

const DamageLaw kPlateLaw{0.033, 0.066, 3.0, true};

Model<1> three_in_a_row(std::optional<DamageLaw> law) {
    ParticleSet<1> p;
    p.spacing = 1e-3;
    p.density = 7850.0;
    for (int i = 0; i < 3; ++i) p.push({i * 1e-3}, 1e-9, Role::Real, -1);
    MaterialParams mat;
    mat.youngs_modulus = 200e9;
    mat.density = 7850.0;
    mat.mode = DimensionMode::OneD;
    mat.cross_section = 1e-6;
    mat.horizon = 1.5e-3;
    return make_model<1>(p, mat, law, {}, Vec<1>{0.0});
}

TEST(BondConstant, ClosedForms) {
    MaterialParams m;
    m.youngs_modulus = 192e9;
    m.mode = DimensionMode::PlaneStress;
    m.horizon = 3.015e-3;
    m.thickness = 1e-3;
    EXPECT_NEAR(bond_constant(m) / 2.007e22, 1.0, 1e-3);

    MaterialParams d3;
    d3.youngs_modulus = 200e9;
    d3.mode = DimensionMode::ThreeD;
    d3.horizon = 3.015e-2;
    EXPECT_NEAR(bond_constant(d3) / 9.24e17, 1.0, 1e-3);

    MaterialParams d1;
    d1.youngs_modulus = 200e9;
    d1.mode = DimensionMode::OneD;
    d1.horizon = 0.003;
    d1.cross_section = 1e-4;
    EXPECT_DOUBLE_EQ(bond_constant(d1), 2.0 * 200e9 / (std::numbers::pi * 0.003 * 0.003 * 1e-4));

    MaterialParams strain = m;
    strain.mode = DimensionMode::PlaneStrain;
    EXPECT_DOUBLE_EQ(bond_constant(strain), 48.0 * 192e9 / (5.0 * std::numbers::pi * std::pow(3.015e-3, 3) * 1e-3));
}

TEST(BondConstant, LinearInModulusAndRequiresGeometry) {
    for (auto mode : {DimensionMode::OneD, DimensionMode::PlaneStress, DimensionMode::PlaneStrain, DimensionMode::ThreeD}) {
        MaterialParams m;
        m.youngs_modulus = 70e9;
        m.mode = mode;
        m.horizon = 0.01;
        m.thickness = 0.002;
        m.cross_section = 4e-6;
        MaterialParams twice = m;
        twice.youngs_modulus *= 2.0;
        EXPECT_NEAR(bond_constant(twice) / bond_constant(m), 2.0, 1e-15);
    }
    MaterialParams bad;
    bad.youngs_modulus = 1e9;
    bad.horizon = 0.01;
    bad.mode = DimensionMode::PlaneStress;
    EXPECT_THROW(bond_constant(bad), SetupError);
    bad.mode = DimensionMode::OneD;
    EXPECT_THROW(bond_constant(bad), SetupError);
}

TEST(Degradation, BranchValues) {
    EXPECT_EQ(degradation(0.02, kPlateLaw), 1.0);
    EXPECT_EQ(degradation(0.033, kPlateLaw), 1.0);
    EXPECT_EQ(degradation((0.033 + 0.066) / 2.0, kPlateLaw), 0.5);
    EXPECT_EQ(degradation(0.066, kPlateLaw), 0.0);
    EXPECT_EQ(degradation(0.07, kPlateLaw), 0.0);
}

TEST(Degradation, EdgeJumpIsHalfOneMinusTanhBeta) {
    for (double beta : {0.5, 1.0, 3.0, 7.0}) {
        const DamageLaw law{0.015, 0.02, beta, true};
        const double jump = 0.5 * (1.0 - std::tanh(beta));
        const double inf = std::numeric_limits<double>::infinity();
        EXPECT_NEAR(1.0 - degradation(std::nextafter(law.onset, inf), law), jump, 1e-12);
        EXPECT_NEAR(degradation(std::nextafter(law.critical, -inf), law) - 0.0, jump, 1e-12);
    }
    EXPECT_NEAR(0.5 * (1.0 - std::tanh(3.0)), 2.47e-3, 1e-5);
}

TEST(Degradation, MonotoneNonIncreasingOnDenseSample) {
    double prev = 2.0;
    for (int k = 0; k <= 20000; ++k) {
        const double s = 0.1 * k / 20000.0;
        const double t = degradation(s, kPlateLaw);
        EXPECT_LE(t, prev);
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, 1.0);
        prev = t;
    }
}

TEST(Degradation, SlopeMatchesFiniteDifferenceInsideBand) {
    for (double s : {0.034, 0.04, 0.0495, 0.06, 0.065}) {
        const double h = 1e-8;
        const double fd = (degradation(s + h, kPlateLaw) - degradation(s - h, kPlateLaw)) / (2 * h);
        EXPECT_NEAR(degradation_slope(s, kPlateLaw), fd, 1e-5 * std::abs(fd) + 1e-9);
    }
    EXPECT_EQ(degradation_slope(0.01, kPlateLaw), 0.0);
    EXPECT_EQ(degradation_slope(0.08, kPlateLaw), 0.0);
}

TEST(Degradation, HistoryUsesLargestStretchWhenIrreversible) {
    const std::optional<DamageLaw> law = kPlateLaw;
    EXPECT_EQ(degradation(0.01, 0.07, law), 0.0);
    EXPECT_EQ(degradation_slope(0.04, 0.05, law), 0.0);
    DamageLaw healing = kPlateLaw;
    healing.irreversible = false;
    EXPECT_EQ(degradation(0.01, 0.07, std::optional<DamageLaw>(healing)), 1.0);
    EXPECT_EQ(degradation(0.5, 0.5, std::optional<DamageLaw>{}), 1.0);
}

TEST(DamageLawValidation, RejectsBadThresholds) {
    EXPECT_THROW((DamageLaw{0.02, 0.01, 3.0, true}.validate()), SetupError);
    EXPECT_THROW((DamageLaw{0.0, 0.01, 3.0, true}.validate()), SetupError);
    EXPECT_THROW((DamageLaw{0.01, 0.02, -1.0, true}.validate()), SetupError);
}

TEST(Stretch, Examples) {
    EXPECT_EQ(stretch(std::array<double, 2>{1.0, 0.0}, std::array<double, 2>{0.0, 0.0}), 0.0);
    EXPECT_NEAR(stretch(std::array<double, 2>{1.0, 0.0}, std::array<double, 2>{0.1, 0.0}), 0.1, 1e-15);
    const double a = std::numbers::pi / 6;
    const std::array<double, 2> rotated{std::cos(a), std::sin(a)};
    EXPECT_NEAR(stretch(std::array<double, 2>{1.0, 0.0}, rotated - std::array<double, 2>{1.0, 0.0}), 0.0, 1e-15);
    EXPECT_THROW(stretch(std::array<double, 2>{1.0, 0.0}, std::array<double, 2>{-1.0, 0.0}), SingularBondError);
}

TEST(BondForce, ZeroAtRestAndAntisymmetric) {
    const std::array<double, 3> xi{1e-3, 2e-3, -1e-3}, eta{1e-6, -3e-6, 2e-6};
    const auto zero = bond_force(xi, std::array<double, 3>{}, 1e18, 1.0, 1.0, 1e-9);
    for (double c : zero) EXPECT_EQ(c, 0.0);
    const auto f = bond_force(xi, eta, 1e18, 0.7, 0.9, 1e-9);
    const auto g = bond_force(std::array<double, 3>{} - xi, std::array<double, 3>{} - eta, 1e18, 0.7, 0.9, 1e-9);
    for (int a = 0; a < 3; ++a) EXPECT_EQ(f[a], -g[a]);
    const auto broken = bond_force(xi, eta, 1e18, degradation(0.07, kPlateLaw), 1.0, 1e-9);
    for (double c : broken) EXPECT_EQ(c, 0.0);
}

TEST(InternalForce, TwoParticleHandEvaluation) {
    const double dx = 1e-3, s = 2e-3;
    auto m = testing::two_particle_model(dx);
    auto st = initial_state(m);
    st.u[1][0] = s * dx;
    const auto f = assemble_internal_force(m, st);
    const double expected = m.bond_constant * 1.0 * m.particles.volume[0] * s;  // nu = 1 at |xi| = dx
    EXPECT_NEAR(f[1][0], -expected, 1e-12 * expected);
    EXPECT_NEAR(f[0][0], expected, 1e-12 * expected);
}

TEST(InternalForce, RigidTranslationLeavesOnlyRoundoff) {
    const auto m = testing::plate_model(8, 4, 1e-3);
    auto strained = initial_state(m);
    for (std::size_t i = 0; i < m.size(); ++i) strained.u[i] = 1e-3 * m.particles.position[i];
    double reference = 0.0;
    for (const auto& f : assemble_internal_force(m, strained)) reference = std::max(reference, norm(f));

    auto s = initial_state(m);
    for (auto& u : s.u) u = {0.25e-3, -0.5e-3};
    for (const auto& f : assemble_internal_force(m, s)) EXPECT_LE(norm(f), 1e-9 * reference);
}

TEST(InternalForce, SmallRotationVanishesQuadratically) {
    const auto m = testing::plate_model(8, 4, 1e-3);
    auto peak = [&](double theta) {
        auto s = initial_state(m);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto& x = m.particles.position[i];
            s.u[i] = {-theta * x[1], theta * x[0]};
        }
        double mx = 0.0;
        for (const auto& f : assemble_internal_force(m, s)) mx = std::max(mx, norm(f));
        return mx;
    };
    const double ratio = peak(1e-4) / peak(5e-5);
    EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(InternalForce, FreeBodyHasZeroNetForce) {
    const double dx = 1e-3;
    const MaterialParams mat = testing::steel_plane_stress(dx);
    GeometrySpec g;
    g.dimension = 2;
    g.cells = {9, 6, 1};
    g.spacing = dx;
    g.extent = {9 * dx, 6 * dx, 0.0};
    const auto m = make_model<2>(build_grid<2>(g, mat), mat, kPlateLaw, {}, Vec<2>{});
    const auto s = testing::random_state(m, 1e-6, 11);
    const auto f = assemble_internal_force(m, s);
    Vec<2> net{};
    double scale = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        net = net + m.particles.volume[i] * f[i];
        scale += norm(f[i]) * m.particles.volume[i];
    }
    EXPECT_LE(norm(net), 1e-10 * scale);
}

TEST(InternalForce, NamesCollapsedBond) {
    auto m = testing::two_particle_model(1e-3);
    auto s = initial_state(m);
    s.u[1][0] = -1e-3;
    try {
        assemble_internal_force(m, s);
        FAIL() << "expected a singular bond";
    } catch (const SingularBondError& e) {
        EXPECT_TRUE((e.first == 0 && e.second == 1) || (e.first == 1 && e.second == 0));
    }
}

TEST(DamageIndex, Definition) {
    auto m = three_in_a_row(kPlateLaw);
    auto s = initial_state(m);
    for (double phi : damage_index(m, s)) EXPECT_EQ(phi, 0.0);

    // Break the 1-0 bond in both directions: particle 1 keeps one of two equal bonds.
    for (std::size_t i : {0u, 1u})
        for (std::size_t k = m.table.offsets[i]; k < m.table.offsets[i + 1]; ++k)
            if (m.table.neighbor[k] == 1 - i) s.s_max[k] = 0.1;
    const auto phi = damage_index(m, s);
    EXPECT_EQ(phi[0], 1.0);
    EXPECT_EQ(phi[1], 0.5);
    EXPECT_EQ(phi[2], 0.0);

    for (auto& v : s.s_max) v = 0.1;
    for (double p : damage_index(m, s)) EXPECT_EQ(p, 1.0);
}

TEST(DamageHistory, MonotoneMaximum) {
    auto m = three_in_a_row(kPlateLaw);
    auto s = initial_state(m);
    s.u[2][0] = 0.01e-3;  // bond 1-2 stretched by 0.01
    update_damage_history(m, s);
    for (std::size_t k = m.table.offsets[2]; k < m.table.offsets[3]; ++k)
        if (m.table.neighbor[k] == 1) EXPECT_NEAR(s.s_max[k], 0.01, 1e-12);
    const auto before = s.s_max;
    s.u[2][0] = 0.005e-3;
    update_damage_history(m, s);
    EXPECT_EQ(s.s_max, before);
    s.u[2][0] = 0.04e-3;
    const DamageCounts c = update_damage_history(m, s);
    EXPECT_EQ(c.degraded, 2u);  // both directions of the 1-2 bond entered the band
    EXPECT_EQ(c.failed, 0u);
}

TEST(FloatingParticles, DetachedFragmentIsFlagged) {
    auto m = testing::two_particle_model(1e-3);
    auto s = initial_state(m);
    EXPECT_EQ(floating_particles(m, s), (std::vector<char>{0, 0}));
    m.law = kPlateLaw;
    s.s_max.assign(s.s_max.size(), 0.1);
    EXPECT_EQ(floating_particles(m, s), (std::vector<char>{0, 1}));
}

}  // namespace
}  // namespace bbpd
