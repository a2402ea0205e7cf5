#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bbpd/adr.hpp"
#include "bbpd/bond_mechanics.hpp"
#include "bbpd/error.hpp"
#include "bbpd/implicit.hpp"
#include "bbpd/model.hpp"

namespace bbpd {

enum class Method { Adr, Implicit, Adaptive };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::Adr: return "adr";
        case Method::Implicit: return "implicit";
        case Method::Adaptive: return "adaptive";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "adr" || s == "explicit") return Method::Adr;
    if (s == "implicit") return Method::Implicit;
    if (s == "adaptive") return Method::Adaptive;
    throw ConfigError("unknown method '" + s + "' (expected adr, implicit or adaptive)");
}

/// Total load and the step budgets of the three-phase method. `total` is the
/// boundary displacement magnitude (m) or body force magnitude (N/m^3); the
/// arithmetic below only needs it for reporting increments.
struct LoadSchedule {
    double total = 1.0;
    std::size_t implicit_steps = 1;  // N_i
    std::size_t explicit_steps = 1;  // N_e

    bool operator==(const LoadSchedule&) const = default;

    void validate() const {
        if (implicit_steps < 1 || explicit_steps < 1) throw ConfigError("N_i and N_e must be at least 1");
    }
    double implicit_increment() const { return total / static_cast<double>(implicit_steps); }
    /// Per-iteration explicit increment after n implicit steps.
    double explicit_increment(std::size_t n) const {
        return (total - static_cast<double>(n) * implicit_increment()) / static_cast<double>(explicit_steps);
    }
};

/// Load level after k of n equal steps; the last step lands on 1 exactly.
inline double step_level(std::size_t k, std::size_t n) {
    return k >= n ? 1.0 : static_cast<double>(k) / static_cast<double>(n);
}

struct StepRecord {
    double level = 0.0;
    std::size_t iterations = 0;
    std::size_t cg_iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::size_t halvings = 0;
};

struct RunReport {
    Method method = Method::Implicit;
    bool converged = false;
    std::string failure;

    std::size_t implicit_steps = 0;        // n: accepted Phase-1 (or pure implicit) load steps
    std::size_t explicit_steps = 0;        // ADR iterations
    std::size_t explicit_loading_steps = 0;  // ADR iterations that advanced the load
    std::size_t final_iterations = 0;      // Newton iterations of the final equilibration
    bool final_phase_ran = false;
    bool final_phase_fallback = false;     // final Newton failed; ADR finished the relaxation

    double seconds_implicit = 0.0;
    double seconds_explicit = 0.0;
    double seconds_final = 0.0;
    double seconds_setup = 0.0;

    double load_total = 0.0;  // u_total or body-force magnitude
    double implicit_increment = 0.0;
    double explicit_increment = 0.0;

    double residual = 0.0;  // last relative equilibrium residual (Newton)
    double e_u = 0.0;       // last whole-field displacement change (ADR)
    DamageCounts damage;
    std::vector<StepRecord> steps;
    std::vector<TracePoint> trace;

    std::optional<double> r_a;

    double solver_seconds() const { return seconds_implicit + seconds_explicit + seconds_final; }

    /// Deformation-phase share of solver time.
    std::optional<double> r_n_time() const {
        if (method != Method::Adaptive) return std::nullopt;
        const double t = solver_seconds();
        return t > 0.0 ? seconds_implicit / t : 1.0;
    }

    /// Deformation-phase share of steps (implicit + explicit + final block).
    std::optional<double> r_n_steps() const {
        if (method != Method::Adaptive) return std::nullopt;
        const double all = static_cast<double>(implicit_steps + explicit_steps + (final_phase_ran ? 1 : 0));
        return all > 0.0 ? static_cast<double>(implicit_steps) / all : 1.0;
    }

    /// n * du_i + N_e * du_e, which should reproduce load_total.
    double applied_load() const {
        return static_cast<double>(implicit_steps) * implicit_increment +
               static_cast<double>(explicit_loading_steps) * explicit_increment;
    }
};

namespace detail {
using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace detail

/// True iff some alive bond is stretched beyond the onset stretch.
template <int Dim>
bool detect_switch_to_explicit(const Model<Dim>& m, const SystemState<Dim>& s) {
    if (!m.law) return false;
    const auto y = deformed_positions(m, s);
    for (std::size_t i = 0; i < m.size(); ++i) {
        bool hit = false;
        for_each_bond(m, y, i, [&](std::size_t, std::size_t, const Vec<Dim>&, double, double st) {
            hit = hit || st > m.law->onset;
        });
        if (hit) return true;
    }
    return false;
}

/// True iff the trace covers at least `window` steps and no bond crossed the
/// onset or critical stretch within the last `window` of them.
inline bool detect_switch_to_implicit(const std::vector<TracePoint>& trace, std::size_t window) {
    if (window == 0) return !trace.empty();
    if (trace.size() < window) return false;
    const TracePoint& last = trace.back();
    std::size_t deg0 = 0, fail0 = 0;
    if (trace.size() > window) {
        deg0 = trace[trace.size() - 1 - window].degraded;
        fail0 = trace[trace.size() - 1 - window].failed;
    }
    return last.degraded == deg0 && last.failed == fail0;
}

/// Newton step to `level` from the state's current level, halving the
/// increment up to `max_halvings` times on failure. On final failure the state
/// is restored to its value on entry. With `stop_on_damage`, an attempt that
/// meets an indefinite tangent, or fails with a bond stretched past the onset
/// stretch in its best iterate, ends the search at once (`damage_onset` set,
/// state restored): the increment crosses into softening, which the explicit
/// solver is meant to handle.
template <int Dim>
StepRecord implicit_step_with_halving(const Model<Dim>& m, SystemState<Dim>& s, double level, const NewtonConfig& cfg,
                                      std::size_t max_halvings, std::string& failure, bool stop_on_damage = false,
                                      bool* damage_onset = nullptr) {
    const SystemState<Dim> saved = s;
    const double from = s.load_level;
    StepRecord rec;
    rec.level = level;
    if (damage_onset) *damage_onset = false;
    NewtonConfig step_cfg = cfg;
    step_cfg.stop_on_softening = stop_on_damage;
    for (std::size_t h = 0; h <= max_halvings; ++h) {
        s = saved;
        const std::size_t parts = std::size_t{1} << h;
        bool ok = true;
        for (std::size_t p = 1; p <= parts && ok; ++p) {
            const double target = p == parts ? level : from + (level - from) * static_cast<double>(p) / parts;
            const NewtonReport r = newton_load_step(m, s, target, step_cfg);
            rec.iterations += r.iterations;
            rec.cg_iterations += r.cg_iterations;
            rec.residual = r.relative_residual;
            ok = r.converged;
            if (!ok) failure = r.failure;
            if (r.softening) {
                if (damage_onset) *damage_onset = true;
                rec.halvings = h;
                s = saved;
                return rec;
            }
        }
        if (ok) {
            rec.converged = true;
            rec.halvings = h;
            return rec;
        }
        if (stop_on_damage && detect_switch_to_explicit(m, s)) {
            if (damage_onset) *damage_onset = true;
            rec.halvings = h;
            s = saved;
            return rec;
        }
    }
    s = saved;
    rec.halvings = max_halvings;
    return rec;
}

/// Pure Newton-Raphson loading in `steps` equal increments. A step that fails
/// to converge keeps its best iterate, records the failure and loading goes on.
template <int Dim>
RunReport run_implicit(const Model<Dim>& m, SystemState<Dim>& s, std::size_t steps, const NewtonConfig& cfg) {
    if (steps < 1) throw ConfigError("implicit step count must be at least 1");
    RunReport rep;
    rep.method = Method::Implicit;
    rep.converged = true;
    const auto t0 = detail::Clock::now();
    for (std::size_t k = 1; k <= steps; ++k) {
        const double level = step_level(k, steps);
        const NewtonReport r = newton_load_step(m, s, level, cfg);
        rep.steps.push_back({level, r.iterations, r.cg_iterations, r.relative_residual, r.converged, 0});
        if (!r.converged) {
            rep.converged = false;
            if (rep.failure.empty()) rep.failure = "load step " + std::to_string(k) + ": " + r.failure;
            update_damage_history(m, s);
        }
        rep.residual = r.relative_residual;
    }
    rep.implicit_steps = steps;
    rep.seconds_implicit = detail::seconds_since(t0);
    rep.damage = damage_counts(m, s);
    return rep;
}

/// Pure ADR run following the loading program.
template <int Dim>
RunReport run_explicit(const Model<Dim>& m, SystemState<Dim>& s, const LoadProgram& program, const AdrConfig& cfg) {
    RunReport rep;
    rep.method = Method::Adr;
    const auto t0 = detail::Clock::now();
    AdrState<Dim> st = make_adr_state(m, s, cfg.dt);
    const AdrReport a = run_to_convergence(m, st, program, cfg);
    s = std::move(st.system);
    rep.seconds_explicit = detail::seconds_since(t0);
    rep.explicit_steps = a.steps;
    rep.explicit_loading_steps = std::min(a.steps, program.steps);
    rep.e_u = a.e_u;
    rep.trace = a.trace;
    rep.converged = a.converged;
    if (!a.converged) rep.failure = "ADR did not converge within " + std::to_string(cfg.max_steps) + " steps";
    rep.damage = damage_counts(m, s);
    return rep;
}

struct AdaptiveConfig {
    NewtonConfig newton;
    AdrConfig adr;
    std::size_t arrest_window = 500;  // W
    std::size_t max_halvings = 4;

    bool operator==(const AdaptiveConfig&) const = default;
};

/// Three-phase run: Newton loading until a bond passes the onset stretch, ADR
/// for the remaining load and the damage evolution, and a final Newton
/// equilibration once no bond has degraded for `arrest_window` iterations.
/// `damage_model` (same particles, possibly a larger horizon) is used from the
/// explicit phase on.
template <int Dim>
RunReport run_adaptive(const Model<Dim>& deform_model, const Model<Dim>& damage_model, SystemState<Dim>& s,
                       const LoadSchedule& schedule, const AdaptiveConfig& cfg) {
    schedule.validate();
    if (deform_model.size() != damage_model.size()) throw ConfigError("phase models must share one particle set");
    RunReport rep;
    rep.method = Method::Adaptive;
    rep.load_total = schedule.total;
    rep.implicit_increment = schedule.implicit_increment();

    // Phase 1: implicit deformation.
    auto t0 = detail::Clock::now();
    bool damaged = false;
    std::size_t n = 0;
    while (n < schedule.implicit_steps) {
        std::string why;
        const double level = step_level(n + 1, schedule.implicit_steps);
        bool onset = false;
        StepRecord rec =
            implicit_step_with_halving(deform_model, s, level, cfg.newton, cfg.max_halvings, why, true, &onset);
        rep.steps.push_back(rec);
        if (onset) {
            // The increment drives bonds into softening: hand the remaining
            // load to the explicit phase from the last converged state.
            damaged = true;
            break;
        }
        if (!rec.converged) {
            rep.seconds_implicit = detail::seconds_since(t0);
            rep.implicit_steps = n;
            rep.failure = "implicit step " + std::to_string(n + 1) + " failed after " +
                          std::to_string(cfg.max_halvings) + " halvings: " + why;
            rep.damage = damage_counts(deform_model, s);
            return rep;
        }
        ++n;
        rep.residual = rec.residual;
        if (detect_switch_to_explicit(deform_model, s)) {
            damaged = true;
            break;
        }
    }
    rep.implicit_steps = n;
    rep.explicit_increment = schedule.explicit_increment(n);
    rep.seconds_implicit = detail::seconds_since(t0);
    if (!damaged) {
        rep.explicit_increment = 0.0;
        rep.converged = true;
        rep.damage = damage_counts(deform_model, s);
        return rep;
    }

    // Phase 2: explicit damage evolution on the damage model.
    t0 = detail::Clock::now();
    SystemState<Dim> carried = initial_state(damage_model);
    carried.u = s.u;
    carried.body_force = s.body_force;
    carried.load_level = s.load_level;
    carried.force_scale = s.force_scale;
    if (&deform_model == &damage_model) carried.s_max = s.s_max;
    AdrState<Dim> st = make_adr_state(damage_model, std::move(carried), cfg.adr.dt);
    const double start = s.load_level;
    const LoadProgram program{start, 1.0, start < 1.0 ? schedule.explicit_steps : 0};
    const std::size_t window = cfg.arrest_window;
    const AdrReport a = run_to_convergence(
        damage_model, st, program, cfg.adr,
        [window](const AdrReport& r, bool loading_done) { return loading_done && detect_switch_to_implicit(r.trace, window); });
    rep.explicit_steps = a.steps;
    rep.explicit_loading_steps = std::min(a.steps, program.steps);
    if (program.steps == 0) rep.explicit_increment = 0.0;
    rep.trace = a.trace;
    rep.e_u = a.e_u;
    rep.seconds_explicit = detail::seconds_since(t0);
    s = st.system;
    if (!a.converged && !a.stopped_early) {
        rep.failure = "explicit phase exhausted its step budget (e_u = " + std::to_string(a.e_u) + ")";
        rep.damage = damage_counts(damage_model, s);
        return rep;
    }

    // Phase 3: implicit equilibration at full load.
    t0 = detail::Clock::now();
    rep.final_phase_ran = true;
    const NewtonReport fin = newton_load_step(damage_model, s, 1.0, cfg.newton);
    rep.final_iterations = fin.iterations;
    rep.residual = fin.relative_residual;
    if (fin.converged) {
        rep.converged = true;
    } else {
        // Softening ahead of the crack tip can defeat Newton; let ADR finish.
        rep.final_phase_fallback = true;
        st.system = s;
        st.velocity.assign(st.velocity.size(), 0.0);
        st.force_prev.clear();
        const AdrReport b = run_to_convergence(damage_model, st, LoadProgram{1.0, 1.0, 0}, cfg.adr);
        rep.explicit_steps += b.steps;
        for (TracePoint p : b.trace) {
            p.step += a.steps;
            p.degraded += a.new_damage.degraded;
            p.failed += a.new_damage.failed;
            rep.trace.push_back(p);
        }
        rep.e_u = b.e_u;
        s = st.system;
        rep.converged = b.converged;
        if (!b.converged) rep.failure = "final equilibration failed: " + fin.failure;
    }
    rep.seconds_final = detail::seconds_since(t0);
    rep.damage = damage_counts(damage_model, s);
    return rep;
}

template <int Dim>
RunReport run_adaptive(const Model<Dim>& m, SystemState<Dim>& s, const LoadSchedule& schedule,
                       const AdaptiveConfig& cfg) {
    return run_adaptive(m, m, s, schedule, cfg);
}

/// Fills r_a from a reference explicit run (solver seconds over solver seconds).
inline void compute_metrics(RunReport& adaptive, const std::optional<RunReport>& reference) {
    adaptive.r_a.reset();
    if (!reference) return;
    const double ta = adaptive.solver_seconds();
    const double te = reference->solver_seconds();
    if (ta > 0.0 && te > 0.0) adaptive.r_a = te / ta;
}

inline double acceleration_ratio(double explicit_seconds, double adaptive_seconds) {
    if (!(explicit_seconds > 0.0) || !(adaptive_seconds > 0.0)) throw ConfigError("timings must be positive");
    return explicit_seconds / adaptive_seconds;
}

}  // namespace bbpd
