#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <type_traits>
#include <vector>

#include "bbpd/error.hpp"
#include "bbpd/material.hpp"
#include "bbpd/model.hpp"
#include "bbpd/vec.hpp"

namespace bbpd {

/// Bond stretch (|xi + eta| - |xi|) / |xi|.
template <std::size_t Dim>
double stretch(const std::array<double, Dim>& xi, const std::array<double, Dim>& eta) {
    const double r0 = norm(xi);
    const double r = norm(xi + eta);
    if (!(r0 > 0.0) || !(r > 0.0)) throw SingularBondError();
    return (r - r0) / r0;
}

/// Force density contribution of one bond on its first endpoint:
/// c * s * T_s * (mu nu) * V * (xi + eta) / |xi + eta|.
template <std::size_t Dim>
std::array<double, Dim> bond_force(const std::array<double, Dim>& xi, const std::array<double, Dim>& eta, double c,
                                   double degradation_factor, double correction, double volume) {
    const auto y = xi + eta;
    const double r = norm(y);
    if (!(r > 0.0)) throw SingularBondError();
    const double s = (r - norm(xi)) / norm(xi);
    return (c * s * degradation_factor * correction * volume / r) * y;
}

template <int Dim>
std::vector<Vec<Dim>> deformed_positions(const Model<Dim>& m, const SystemState<Dim>& s) {
    std::vector<Vec<Dim>> y(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) y[i] = m.particles.position[i] + s.u[i];
    return y;
}

/// Visits every alive bond of particle i with (slot, j, dy, |dy|, stretch).
template <int Dim, typename Fn>
void for_each_bond(const Model<Dim>& m, const std::type_identity_t<std::vector<Vec<Dim>>>& y, std::size_t i, Fn&& fn) {
    const auto& t = m.table;
    for (std::size_t k = t.offsets[i]; k < t.offsets[i + 1]; ++k) {
        if (!t.alive[k]) continue;
        const std::size_t j = t.neighbor[k];
        const Vec<Dim> dy = y[j] - y[i];
        const double r = norm<Dim>(dy);
        if (!(r > 0.0)) throw SingularBondError(i, j);
        fn(k, j, dy, r, (r - t.length[k]) / t.length[k]);
    }
}

/// Internal force density F_i (N/m^3), summed over each point's bonds in
/// neighbor order. Dead bonds contribute nothing.
template <int Dim>
std::vector<Vec<Dim>> assemble_internal_force(const Model<Dim>& m, const SystemState<Dim>& s) {
    const auto y = deformed_positions(m, s);
    std::vector<Vec<Dim>> f(m.size(), Vec<Dim>{});
    for (std::size_t i = 0; i < m.size(); ++i) {
        Vec<Dim> acc{};
        for_each_bond(m, y, i, [&](std::size_t k, std::size_t, const Vec<Dim>& dy, double r, double st) {
            const double ts = degradation(st, s.s_max[k], m.law);
            const double scale = m.bond_weight[k] * st * ts / r;
            for (int a = 0; a < Dim; ++a) acc[a] += scale * dy[a];
        });
        f[i] = acc;
    }
    return f;
}

/// Volume-weighted lost bond capacity per point: 1 - sum(T_s * alive * V_j) / sum(V_j).
template <int Dim>
std::vector<double> damage_index(const Model<Dim>& m, const SystemState<Dim>& s) {
    const auto y = deformed_positions(m, s);
    const auto& t = m.table;
    std::vector<double> phi(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        double total = 0.0, intact = 0.0;
        for (std::size_t k = t.offsets[i]; k < t.offsets[i + 1]; ++k) {
            const std::size_t j = t.neighbor[k];
            const double vj = m.particles.volume[j];
            total += vj;
            if (!t.alive[k]) continue;
            const double r = norm<Dim>(y[j] - y[i]);
            const double st = (r - t.length[k]) / t.length[k];
            intact += degradation(st, s.s_max[k], m.law) * vj;
        }
        phi[i] = total > 0.0 ? 1.0 - intact / total : 0.0;
    }
    return phi;
}

struct DamageCounts {
    std::size_t degraded = 0;  // directed bonds whose history passed the onset stretch
    std::size_t failed = 0;    // directed bonds whose history reached the critical stretch

    bool operator==(const DamageCounts&) const = default;
};

/// Raises each alive bond's historical maximum stretch to its current stretch.
/// Returns how many bonds crossed the onset and critical stretch in this update.
template <int Dim>
DamageCounts update_damage_history(const Model<Dim>& m, SystemState<Dim>& s) {
    const auto y = deformed_positions(m, s);
    DamageCounts crossed;
    for (std::size_t i = 0; i < m.size(); ++i)
        for_each_bond(m, y, i, [&](std::size_t k, std::size_t, const Vec<Dim>&, double, double st) {
            if (!(st > s.s_max[k])) return;
            if (m.law) {
                crossed.degraded += s.s_max[k] <= m.law->onset && st > m.law->onset;
                crossed.failed += s.s_max[k] < m.law->critical && st >= m.law->critical;
            }
            s.s_max[k] = st;
        });
    return crossed;
}

template <int Dim>
DamageCounts damage_counts(const Model<Dim>& m, const SystemState<Dim>& s) {
    DamageCounts c;
    if (!m.law) return c;
    for (std::size_t k = 0; k < m.table.bond_count(); ++k) {
        if (!m.table.alive[k]) continue;
        c.degraded += s.s_max[k] > m.law->onset;
        c.failed += s.s_max[k] >= m.law->critical;
    }
    return c;
}

/// Flags particles that no chain of load-carrying bonds (alive, T_s > 0)
/// connects to a particle with a prescribed DOF. Equilibrium does not fix
/// their displacement.
template <int Dim>
std::vector<char> floating_particles(const Model<Dim>& m, const SystemState<Dim>& s) {
    const auto y = deformed_positions(m, s);
    std::vector<char> reached(m.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int a = 0; a < Dim && !reached[i]; ++a)
            if (m.dof_fixed[i * Dim + a]) {
                reached[i] = 1;
                stack.push_back(i);
            }
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for_each_bond(m, y, i, [&](std::size_t k, std::size_t j, const Vec<Dim>&, double, double st) {
            if (reached[j] || degradation(st, s.s_max[k], m.law) <= 0.0) return;
            reached[j] = 1;
            stack.push_back(j);
        });
    }
    for (auto& r : reached) r = !r;
    return reached;
}

/// Largest current stretch over alive bonds.
template <int Dim>
double max_stretch(const Model<Dim>& m, const SystemState<Dim>& s) {
    const auto y = deformed_positions(m, s);
    double smax = -INFINITY;
    for (std::size_t i = 0; i < m.size(); ++i)
        for_each_bond(m, y, i, [&](std::size_t, std::size_t, const Vec<Dim>&, double, double st) {
            smax = std::max(smax, st);
        });
    return smax;
}

}  // namespace bbpd
