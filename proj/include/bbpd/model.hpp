#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "bbpd/error.hpp"
#include "bbpd/geometry.hpp"
#include "bbpd/horizon.hpp"
#include "bbpd/material.hpp"
#include "bbpd/vec.hpp"

namespace bbpd {

/// A set of driven particles moving together. `direction` is the displacement
/// (m) reached at full load; axes left unconstrained stay free.
struct DisplacementGroup {
    std::array<bool, 3> axes{true, true, true};
    std::array<double, 3> direction{};

    bool operator==(const DisplacementGroup&) const = default;
};

/// Everything needed to evaluate forces and tangents on one discretization.
template <int Dim>
struct Model {
    ParticleSet<Dim> particles;
    HorizonTable table;
    MaterialParams material;
    std::optional<DamageLaw> law;
    double bond_constant = 0.0;

    std::vector<double> bond_weight;   // c * mu * nu * V_j per directed bond
    std::vector<Vec<Dim>> body_force;  // N/m^3 at full load
    std::vector<char> dof_fixed;       // per DOF (particle * Dim + axis)
    std::vector<double> dof_target;    // prescribed displacement at full load, m
    std::vector<long> free_index;      // DOF -> solved index, -1 when fixed
    std::size_t free_count = 0;

    std::size_t size() const { return particles.size(); }
    std::size_t dof_count() const { return particles.size() * Dim; }
};

/// Recomputes bond weights from the current table, material and volumes.
template <int Dim>
void refresh_bond_weights(Model<Dim>& model) {
    const auto& t = model.table;
    model.bond_weight.resize(t.bond_count());
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t k = t.offsets[i]; k < t.offsets[i + 1]; ++k)
            model.bond_weight[k] = model.bond_constant * t.surface_correction[k] * t.volume_correction[k] *
                                   model.particles.volume[t.neighbor[k]];
}

/// Assembles a model on an existing particle set. `material.horizon` selects
/// the bond table; groups and body force describe the full-load boundary data.
template <int Dim>
Model<Dim> make_model(ParticleSet<Dim> particles, const MaterialParams& material, std::optional<DamageLaw> law,
                      const std::vector<DisplacementGroup>& groups, const Vec<Dim>& load_layer_body_force,
                      const std::vector<Notch>& notches = {}) {
    if (law) law->validate();
    if (!(material.density > 0.0)) throw SetupError("density must be positive");
    Model<Dim> m;
    m.material = material;
    m.law = law;
    m.bond_constant = bond_constant(material);
    m.table = correction_factors(apply_notches<Dim>(build_horizons<Dim>(particles, material.horizon), particles, notches));
    m.particles = std::move(particles);
    refresh_bond_weights(m);

    const std::size_t n = m.particles.size();
    m.body_force.assign(n, Vec<Dim>{});
    m.dof_fixed.assign(n * Dim, 0);
    m.dof_target.assign(n * Dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (m.particles.role[i] == Role::LoadLayer) m.body_force[i] = load_layer_body_force;
        const int g = m.particles.group[i];
        if (g < 0) continue;
        if (g >= static_cast<int>(groups.size())) throw SetupError("particle references a missing displacement group");
        for (int a = 0; a < Dim; ++a) {
            if (!groups[g].axes[a]) continue;
            m.dof_fixed[i * Dim + a] = 1;
            m.dof_target[i * Dim + a] = groups[g].direction[a];
        }
    }
    m.free_index.assign(n * Dim, -1);
    m.free_count = 0;
    for (std::size_t d = 0; d < n * Dim; ++d)
        if (!m.dof_fixed[d]) m.free_index[d] = static_cast<long>(m.free_count++);
    if (m.free_count == 0) throw SetupError("every degree of freedom is constrained");
    return m;
}

/// Same particles and boundary data, bonds rebuilt for a different horizon.
template <int Dim>
Model<Dim> with_horizon(const Model<Dim>& base, double horizon, const std::vector<Notch>& notches = {}) {
    Model<Dim> m = base;
    m.material.horizon = horizon;
    m.bond_constant = bond_constant(m.material);
    m.table = correction_factors(apply_notches<Dim>(build_horizons<Dim>(m.particles, horizon), m.particles, notches));
    refresh_bond_weights(m);
    return m;
}

/// Mutable solution data. `load_level` in [0, 1] scales prescriptions and body force.
template <int Dim>
struct SystemState {
    std::vector<Vec<Dim>> u;
    std::vector<double> s_max;        // per directed bond
    std::vector<Vec<Dim>> body_force;  // current b, N/m^3
    double load_level = 0.0;
    // Largest residual denominator (|b| or reaction norm) seen so far. Floors
    // the denominator once a crack has unloaded the constraints.
    double force_scale = 0.0;

    bool operator==(const SystemState&) const = default;
};

template <int Dim>
SystemState<Dim> initial_state(const Model<Dim>& m) {
    SystemState<Dim> s;
    s.u.assign(m.size(), Vec<Dim>{});
    s.s_max.assign(m.table.bond_count(), 0.0);
    s.body_force.assign(m.size(), Vec<Dim>{});
    return s;
}

/// Sets constrained displacements and body force for the given load level.
template <int Dim>
void apply_load(const Model<Dim>& m, SystemState<Dim>& s, double level) {
    s.load_level = level;
    for (std::size_t i = 0; i < m.size(); ++i) {
        s.body_force[i] = level * m.body_force[i];
        for (int a = 0; a < Dim; ++a)
            if (m.dof_fixed[i * Dim + a]) s.u[i][a] = level * m.dof_target[i * Dim + a];
    }
}

/// Flattens the displacement of the given particles (all by default).
template <std::size_t Dim>
std::vector<double> flatten(const std::vector<std::array<double, Dim>>& v) {
    std::vector<double> out;
    out.reserve(v.size() * Dim);
    for (const auto& x : v)
        for (double c : x) out.push_back(c);
    return out;
}

}  // namespace bbpd
