#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bbpd/adaptive.hpp"
#include "bbpd/adr.hpp"
#include "bbpd/bond_mechanics.hpp"
#include "bbpd/error.hpp"
#include "bbpd/geometry.hpp"
#include "bbpd/implicit.hpp"
#include "bbpd/model.hpp"
#include "bbpd/scenario.hpp"

namespace bbpd {

/// Final per-particle fields of the real (non-fictitious) particles, by id.
struct FieldSnapshot {
    int dimension = 2;
    double spacing = 0.0;
    std::vector<std::size_t> id;
    std::vector<std::array<double, 3>> position;      // m
    std::vector<std::array<double, 3>> displacement;  // m
    std::vector<double> damage;
    std::vector<Role> role;
    std::vector<char> floating;  // detached from every constraint; displacement indeterminate

    std::size_t size() const { return id.size(); }
    bool operator==(const FieldSnapshot&) const = default;
};

struct RunResult {
    FieldSnapshot fields;
    RunReport report;
};

template <int Dim>
Model<Dim> build_model(const Scenario& sc, const ParticleSet<Dim>& particles, double horizon) {
    MaterialParams mat = sc.material;
    mat.horizon = horizon;
    Vec<Dim> b{};
    for (int a = 0; a < Dim; ++a) b[a] = sc.loading.body_force[a];
    return make_model<Dim>(particles, mat, sc.damage, sc.loading.groups, b, sc.geometry.notches);
}

template <int Dim>
Model<Dim> build_model(const Scenario& sc) {
    return build_model<Dim>(sc, build_grid<Dim>(sc.geometry, sc.material), sc.material.horizon);
}

template <int Dim>
FieldSnapshot snapshot(const Model<Dim>& m, const SystemState<Dim>& s) {
    FieldSnapshot f;
    f.dimension = Dim;
    f.spacing = m.particles.spacing;
    const auto phi = damage_index(m, s);
    const auto loose = floating_particles(m, s);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.particles.role[i] == Role::Fictitious) continue;
        std::array<double, 3> x{}, u{};
        for (int a = 0; a < Dim; ++a) {
            x[a] = m.particles.position[i][a];
            u[a] = s.u[i][a];
        }
        f.id.push_back(i);
        f.position.push_back(x);
        f.displacement.push_back(u);
        f.damage.push_back(phi[i]);
        f.role.push_back(m.particles.role[i]);
        f.floating.push_back(loose[i]);
    }
    return f;
}

namespace detail {

template <int Dim>
RunResult run_dim(const Scenario& sc, Method method, std::size_t implicit_steps) {
    const auto t0 = Clock::now();
    const ParticleSet<Dim> particles = build_grid<Dim>(sc.geometry, sc.material);
    const Model<Dim> model = build_model<Dim>(sc, particles, sc.material.horizon);
    std::optional<Model<Dim>> deform;
    if (method == Method::Adaptive && sc.solver.deformation_horizon &&
        *sc.solver.deformation_horizon != sc.material.horizon)
        deform = build_model<Dim>(sc, particles, *sc.solver.deformation_horizon);
    const double setup = seconds_since(t0);

    RunResult res;
    switch (method) {
        case Method::Implicit: {
            SystemState<Dim> s = initial_state(model);
            res.report = run_implicit(model, s, implicit_steps, sc.solver.newton);
            res.report.implicit_increment = sc.loading.total() / static_cast<double>(implicit_steps);
            res.fields = snapshot(model, s);
            break;
        }
        case Method::Adr: {
            SystemState<Dim> s = initial_state(model);
            const LoadProgram program = sc.loading.adr_program();
            res.report = run_explicit(model, s, program, sc.solver.adr);
            if (program.steps == 0) {
                // Full load from the first iteration.
                res.report.explicit_loading_steps = std::min<std::size_t>(res.report.explicit_steps, 1);
                res.report.explicit_increment = sc.loading.total();
            } else {
                res.report.explicit_increment = sc.loading.total() / static_cast<double>(program.steps);
            }
            res.fields = snapshot(model, s);
            break;
        }
        case Method::Adaptive: {
            const Model<Dim>& first = deform ? *deform : model;
            SystemState<Dim> s = initial_state(first);
            LoadSchedule sched = sc.solver.schedule;
            sched.total = sc.loading.total();
            res.report = run_adaptive(first, model, s, sched, sc.solver.adaptive());
            const bool reached_damage_model = !deform || res.report.explicit_steps > 0;
            res.fields = reached_damage_model ? snapshot(model, s) : snapshot(first, s);
            break;
        }
    }
    res.report.seconds_setup = setup;
    res.report.load_total = sc.loading.total();
    return res;
}

}  // namespace detail

/// Runs one scenario with the given method. `implicit_steps` overrides the
/// scenario's pure-implicit step count when nonzero.
inline RunResult run_scenario(const Scenario& sc, Method method, std::size_t implicit_steps = 0) {
    validate(sc);
    const std::size_t steps = implicit_steps ? implicit_steps : sc.solver.implicit_steps;
    try {
        switch (sc.geometry.dimension) {
            case 1: return detail::run_dim<1>(sc, method, steps);
            case 2: return detail::run_dim<2>(sc, method, steps);
            case 3: return detail::run_dim<3>(sc, method, steps);
        }
    } catch (const SolverError& e) {
        throw SolverError("scenario '" + sc.name + "': " + e.what());
    } catch (const SingularBondError& e) {
        throw SolverError("scenario '" + sc.name + "': " + e.what());
    }
    throw ConfigError("unsupported dimension");
}

inline RunResult run_scenario(const Scenario& sc) { return run_scenario(sc, sc.solver.method); }

/// ||u_a - u_b||_2 / ||u_b||_2 over all displacement components.
inline double field_distance(const FieldSnapshot& a, const FieldSnapshot& b) {
    if (a.size() != b.size()) throw ConfigError("snapshots have different particle counts");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int k = 0; k < 3; ++k) {
            const double d = a.displacement[i][k] - b.displacement[i][k];
            num += d * d;
            den += b.displacement[i][k] * b.displacement[i][k];
        }
    if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
    return std::sqrt(num / den);
}

inline std::size_t floating_count(const FieldSnapshot& f) {
    std::size_t n = 0;
    for (char c : f.floating) n += c != 0;
    return n;
}

struct DamageSetComparison {
    std::size_t in_a = 0;
    std::size_t in_b = 0;
    std::size_t only_a = 0;
    std::size_t only_b = 0;
    std::size_t outside_band = 0;  // mismatches not adjacent to the other set
    bool agree() const { return outside_band == 0; }
};

/// Compares {phi > threshold} between two snapshots. A particle in only one set
/// is tolerated when it lies within one lattice neighbor (diagonals included)
/// of a particle of the other set.
inline DamageSetComparison compare_damage_sets(const FieldSnapshot& a, const FieldSnapshot& b,
                                               double threshold = 0.35) {
    if (a.size() != b.size()) throw ConfigError("snapshots have different particle counts");
    DamageSetComparison c;
    std::vector<std::size_t> sa, sb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.damage[i] > threshold) sa.push_back(i);
        if (b.damage[i] > threshold) sb.push_back(i);
    }
    c.in_a = sa.size();
    c.in_b = sb.size();
    const double reach = 1.5 * a.spacing;
    auto near_any = [&](std::size_t i, const std::vector<std::size_t>& set) {
        for (std::size_t j : set) {
            double d2 = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double d = a.position[i][k] - a.position[j][k];
                d2 += d * d;
            }
            if (d2 <= reach * reach) return true;
        }
        return false;
    };
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool ia = a.damage[i] > threshold, ib = b.damage[i] > threshold;
        if (ia == ib) continue;
        if (ia) {
            ++c.only_a;
            if (!near_any(i, sb)) ++c.outside_band;
        } else {
            ++c.only_b;
            if (!near_any(i, sa)) ++c.outside_band;
        }
    }
    return c;
}

struct SweepRow {
    std::size_t steps = 0;
    bool ok = false;
    bool converged = false;
    double distance = 0.0;
    double seconds = 0.0;
    std::string failure;
};

/// Pure implicit runs at each total step count, each compared with `reference`.
inline std::vector<SweepRow> sweep_loading_steps(const Scenario& sc, const std::vector<std::size_t>& steps,
                                                 const FieldSnapshot& reference) {
    std::vector<SweepRow> rows;
    for (std::size_t n : steps) {
        SweepRow row;
        row.steps = n;
        try {
            const RunResult r = run_scenario(sc, Method::Implicit, n);
            row.ok = true;
            row.converged = r.report.converged;
            row.failure = r.report.failure;
            row.distance = field_distance(r.fields, reference);
            row.seconds = r.report.solver_seconds();
        } catch (const std::exception& e) {
            row.failure = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

/// True when distances do not grow with the step count beyond `noise`
/// (relative) between consecutive sorted entries; distances at or below `floor`
/// always pass. Failed rows break the trend.
inline bool monotone_non_increasing(std::vector<SweepRow> rows, double noise = 0.05, double floor = 1e-6) {
    std::sort(rows.begin(), rows.end(), [](const SweepRow& x, const SweepRow& y) { return x.steps < y.steps; });
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (!rows[k].ok) return false;
        if (rows[k].distance <= floor) continue;  // already at solver precision
        if (k > 0 && rows[k].distance > rows[k - 1].distance * (1.0 + noise)) return false;
    }
    return true;
}

}  // namespace bbpd
