#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "bbpd/bond_mechanics.hpp"
#include "bbpd/error.hpp"
#include "bbpd/implicit.hpp"
#include "bbpd/model.hpp"
#include "bbpd/sparse.hpp"

namespace bbpd {

struct AdrConfig {
    double tolerance = 1e-9;  // e0 on the whole-field displacement change
    std::size_t max_steps = 2'000'000;
    double dt = 1.0;

    bool operator==(const AdrConfig&) const = default;

    void validate() const {
        if (!(tolerance > 0.0)) throw ConfigError("ADR tolerance must be positive");
        if (max_steps < 1) throw ConfigError("ADR step budget must be at least 1");
        if (!(dt > 0.0)) throw ConfigError("ADR time step must be positive");
    }
};

/// Load level as a function of the iteration counter: a linear ramp from
/// `start` to `end` over `steps` iterations, then a hold. Zero steps means the
/// end level is applied from the first iteration. The last ramp iteration lands
/// on `end` exactly.
struct LoadProgram {
    double start = 0.0;
    double end = 1.0;
    std::size_t steps = 0;

    bool operator==(const LoadProgram&) const = default;

    double level(std::size_t step) const {
        if (step >= steps) return end;
        return start + (end - start) * static_cast<double>(step) / static_cast<double>(steps);
    }

    /// Constant boundary velocity `rate` (m/iteration) up to `total` (m).
    static LoadProgram constant_rate(double total, double rate) {
        if (!(total > 0.0) || !(rate > 0.0)) throw ConfigError("loading rate and total must be positive");
        const double n = std::ceil(total / rate * (1.0 - 1e-12));
        return LoadProgram{0.0, 1.0, static_cast<std::size_t>(std::max(1.0, n))};
    }
};

template <int Dim>
struct AdrState {
    SystemState<Dim> system;
    std::vector<double> velocity;      // half-step u-dot per DOF
    std::vector<double> force_prev;    // internal force per DOF at the previous step
    std::vector<double> lambda;        // fictitious density per DOF (0 on constrained DOFs)
    double dt = 1.0;
    std::size_t step = 0;
};

/// lambda_d = dt^2 / 4 * sum_c |K_dc| with K the reference-configuration tangent.
template <int Dim>
std::vector<double> fictitious_density(const Model<Dim>& m, double dt = 1.0) {
    SystemState<Dim> ref = initial_state(m);
    const auto k = assemble_jacobian(m, ref);
    std::vector<double> lam(m.dof_count(), 0.0);
    for (std::size_t d = 0; d < lam.size(); ++d) {
        double sum = 0.0;
        for (std::size_t e = k.matrix.row_ptr[d]; e < k.matrix.row_ptr[d + 1]; ++e) sum += std::abs(k.matrix.val[e]);
        lam[d] = 0.25 * dt * dt * sum;
        if (!m.dof_fixed[d] && !(lam[d] > 0.0))
            throw SetupError("particle " + std::to_string(d / Dim) + " has no bonds; fictitious density is zero");
    }
    return lam;
}

/// Rayleigh-quotient damping c = 2 sqrt(u.K u / u.u) with a diagonal local
/// stiffness estimated from the change of internal force over the last step.
/// Only the DOFs with a nonzero entry in `lambda` participate.
inline double damping_coefficient(std::span<const double> u, std::span<const double> v, std::span<const double> f,
                                  std::span<const double> f_prev, std::span<const double> lambda, double dt) {
    double num = 0.0, den = 0.0;
    for (std::size_t d = 0; d < u.size(); ++d) {
        if (!(lambda[d] > 0.0)) continue;
        den += u[d] * u[d];
        if (std::abs(v[d]) < 1e-30) continue;
        const double kappa = -(f[d] - f_prev[d]) / (lambda[d] * dt * v[d]);
        num += u[d] * u[d] * kappa;
    }
    if (!(den > 0.0) || !(num > 0.0)) return 0.0;
    const double c = 2.0 * std::sqrt(num / den);
    const double cap = std::nextafter(2.0 / dt, 0.0);
    return std::isfinite(c) ? std::min(c, cap) : cap;
}

template <int Dim>
AdrState<Dim> make_adr_state(const Model<Dim>& m, SystemState<Dim> system, double dt = 1.0) {
    AdrState<Dim> st;
    st.system = std::move(system);
    st.dt = dt;
    st.lambda = fictitious_density(m, dt);
    for (std::size_t d = 0; d < st.lambda.size(); ++d)
        if (m.dof_fixed[d]) st.lambda[d] = 0.0;
    st.velocity.assign(m.dof_count(), 0.0);
    return st;
}

/// One central-difference step at the given load level. Returns the bonds that
/// newly crossed the onset / critical stretch.
template <int Dim>
DamageCounts adr_step(const Model<Dim>& m, AdrState<Dim>& st, double level) {
    apply_load(m, st.system, level);
    const auto fv = assemble_internal_force(m, st.system);
    const std::size_t ndof = m.dof_count();
    std::vector<double> f(ndof);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int a = 0; a < Dim; ++a) f[i * Dim + a] = fv[i][a];

    double bb = 0.0, reaction = 0.0;
    for (std::size_t d = 0; d < ndof; ++d) {
        const double b = st.system.body_force[d / Dim][d % Dim];
        bb += b * b;
        if (m.dof_fixed[d]) reaction += f[d] * f[d];
    }
    st.system.force_scale = std::max(st.system.force_scale, std::sqrt(bb > 0.0 ? bb : reaction));

    const double dt = st.dt;
    if (st.force_prev.empty()) {
        for (std::size_t d = 0; d < ndof; ++d) {
            if (m.dof_fixed[d]) continue;
            const double total = f[d] + st.system.body_force[d / Dim][d % Dim];
            st.velocity[d] = 0.5 * dt * total / st.lambda[d];
        }
    } else {
        const auto u = flatten(st.system.u);
        const double c = damping_coefficient(u, st.velocity, f, st.force_prev, st.lambda, dt);
        for (std::size_t d = 0; d < ndof; ++d) {
            if (m.dof_fixed[d]) continue;
            const double total = f[d] + st.system.body_force[d / Dim][d % Dim];
            st.velocity[d] = ((2.0 - c * dt) * st.velocity[d] + 2.0 * dt * total / st.lambda[d]) / (2.0 + c * dt);
        }
    }
    for (std::size_t d = 0; d < ndof; ++d) {
        if (m.dof_fixed[d]) continue;
        st.system.u[d / Dim][d % Dim] += dt * st.velocity[d];
    }
    st.force_prev = std::move(f);
    ++st.step;
    return update_damage_history(m, st.system);
}

/// ||u_n - u_{n-1}|| / ||u_{n-1}||; 0 when nothing moved, +inf when starting from rest.
inline double displacement_error(std::span<const double> previous, std::span<const double> current) {
    double diff = 0.0, base = 0.0;
    for (std::size_t d = 0; d < current.size(); ++d) {
        const double e = current[d] - previous[d];
        diff += e * e;
        base += previous[d] * previous[d];
    }
    if (diff == 0.0) return 0.0;
    if (base == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(diff / base);
}

struct TracePoint {
    std::size_t step = 0;
    double e_u = 0.0;
    std::size_t degraded = 0;  // cumulative onset crossings
    std::size_t failed = 0;    // cumulative critical crossings
};

struct AdrReport {
    bool converged = false;
    bool stopped_early = false;  // ended by the caller's stop predicate
    std::size_t steps = 0;
    double e_u = 0.0;
    std::vector<TracePoint> trace;
    DamageCounts new_damage;
};

/// Runs the loading program and relaxes until e_u < e0 after loading ends.
/// `stop(report, loading_done)` may end the run early (used for phase switching).
template <int Dim>
AdrReport run_to_convergence(const Model<Dim>& m, AdrState<Dim>& st, const LoadProgram& program, const AdrConfig& cfg,
                             const std::function<bool(const AdrReport&, bool)>& stop = {}) {
    cfg.validate();
    AdrReport rep;
    auto prev = flatten(st.system.u);
    for (std::size_t k = 1; k <= cfg.max_steps; ++k) {
        const DamageCounts crossed = adr_step(m, st, program.level(k));
        rep.new_damage.degraded += crossed.degraded;
        rep.new_damage.failed += crossed.failed;
        auto cur = flatten(st.system.u);
        rep.e_u = displacement_error(prev, cur);
        if (!std::isfinite(rep.e_u) && k > 1) throw SolverError("ADR diverged: non-finite displacement");
        prev = std::move(cur);
        rep.steps = k;
        rep.trace.push_back({k, rep.e_u, rep.new_damage.degraded, rep.new_damage.failed});
        const bool loading_done = k >= program.steps;
        if (loading_done && rep.e_u < cfg.tolerance) {
            rep.converged = true;
            break;
        }
        if (stop && stop(rep, loading_done)) {
            rep.stopped_early = true;
            break;
        }
    }
    return rep;
}

}  // namespace bbpd
