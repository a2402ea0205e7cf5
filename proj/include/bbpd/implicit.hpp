#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bbpd/bond_mechanics.hpp"
#include "bbpd/cg.hpp"
#include "bbpd/error.hpp"
#include "bbpd/model.hpp"
#include "bbpd/sparse.hpp"

namespace bbpd {

struct NewtonConfig {
    double tolerance = 1e-8;  // e: ||E|| / denominator
    std::size_t max_iterations = 40;
    double cg_tolerance = 1e-12;  // floor on the relative CG tolerance
    std::size_t cg_max_iterations = 50000;
    std::size_t divergence_window = 3;
    std::size_t line_search_steps = 6;  // residual-driven step halvings per iteration
    bool stop_on_softening = false;     // give up the step once the exact tangent turns indefinite

    bool operator==(const NewtonConfig&) const = default;

    void validate() const {
        if (!(tolerance > 0.0 && tolerance < 1.0)) throw ConfigError("Newton tolerance must lie in (0, 1)");
        if (max_iterations < 1 || cg_max_iterations < 1) throw ConfigError("iteration caps must be at least 1");
        if (!(cg_tolerance > 0.0 && cg_tolerance < 1.0)) throw ConfigError("CG tolerance must lie in (0, 1)");
    }
};

/// Exact: the consistent derivative of the internal force. PositivePart: each
/// bond block keeps only the non-negative part of its two eigenvalues (along and
/// across the bond), giving a negative semidefinite K even in softening.
enum class TangentKind { Exact, PositivePart };

/// dF/du over all DOFs (row/column = particle * Dim + axis), before any
/// boundary condition is applied.
struct SparseTangent {
    CsrMatrix matrix;
    int dimension = 0;

    std::size_t dof(std::size_t particle, int axis) const { return particle * dimension + axis; }
};

/// Reduced system over solved DOFs. `dofs[r]` is the global DOF of row r.
struct ReducedSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    std::vector<std::size_t> dofs;
    std::vector<std::size_t> inactive;  // unconstrained DOFs with an all-zero row (isolated points)
};

/// -E(u) = -(F(u) + b) on the solved DOFs, in free-index order.
template <int Dim>
std::vector<double> residual(const Model<Dim>& m, const SystemState<Dim>& s) {
    const auto f = assemble_internal_force(m, s);
    std::vector<double> r(m.free_count);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int a = 0; a < Dim; ++a) {
            const long fi = m.free_index[i * Dim + a];
            if (fi >= 0) r[static_cast<std::size_t>(fi)] = -(f[i][a] + s.body_force[i][a]);
        }
    return r;
}

/// Analytical tangent. For a bond i->j with P = c mu nu V_j, r0 = |x_j - x_i|,
/// r = |y_j - y_i|, a = 1/r0 - 1/r and D = dy dy^T:
///
///   dF_i/du_j = P [ T a I + (T / r^3 + L a / (r0 r)) D ]
///
/// with T the degradation factor and L = dT/ds. The slope term carries the
/// scalar a, not the Kronecker-weighted A_pq; the finite-difference tests pin
/// this. Diagonal blocks are minus the sum of the row's off-diagonal blocks.
template <int Dim>
SparseTangent assemble_jacobian(const Model<Dim>& m, const SystemState<Dim>& s, TangentKind kind = TangentKind::Exact) {
    const auto& t = m.table;
    const std::size_t n = m.size();
    SparseTangent k;
    k.dimension = Dim;
    CsrMatrix& a = k.matrix;
    a.rows = n * Dim;
    a.row_ptr.assign(n * Dim + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = (t.neighbor_count(i) + 1) * Dim;
        for (int p = 0; p < Dim; ++p) a.row_ptr[i * Dim + p + 1] = a.row_ptr[i * Dim + p] + len;
    }
    a.col.resize(a.row_ptr.back());
    a.val.assign(a.row_ptr.back(), 0.0);

    const auto y = deformed_positions(m, s);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t first = t.offsets[i];
        const std::size_t cnt = t.neighbor_count(i);
        std::size_t diag_slot = 0;
        while (diag_slot < cnt && t.neighbor[first + diag_slot] < i) ++diag_slot;

        auto slot_of = [&](std::size_t local) { return local + (local >= diag_slot ? 1 : 0); };
        for (int p = 0; p < Dim; ++p) {
            const std::size_t base = a.row_ptr[i * Dim + p];
            for (std::size_t local = 0; local < cnt; ++local) {
                const std::size_t j = t.neighbor[first + local];
                for (int q = 0; q < Dim; ++q) a.col[base + slot_of(local) * Dim + q] = static_cast<std::uint32_t>(j * Dim + q);
            }
            for (int q = 0; q < Dim; ++q) a.col[base + diag_slot * Dim + q] = static_cast<std::uint32_t>(i * Dim + q);
        }

        for (std::size_t local = 0; local < cnt; ++local) {
            const std::size_t kb = first + local;
            if (!t.alive[kb]) continue;
            const std::size_t j = t.neighbor[kb];
            const Vec<Dim> dy = y[j] - y[i];
            const double r = norm<Dim>(dy);
            if (!(r > 0.0)) throw SingularBondError(i, j);
            const double r0 = t.length[kb];
            const double st = (r - r0) / r0;
            const double ts = degradation(st, s.s_max[kb], m.law);
            const double slope = degradation_slope(st, s.s_max[kb], m.law);
            const double P = m.bond_weight[kb];
            const double sa = 1.0 / r0 - 1.0 / r;
            double iso = P * ts * sa;
            double dyad = P * (ts / (r * r * r) + slope * sa / (r0 * r));
            if (kind == TangentKind::PositivePart) {
                const double across = std::max(iso, 0.0);
                const double along = std::max(iso + dyad * r * r, 0.0);
                iso = across;
                dyad = (along - across) / (r * r);
            }
            const std::size_t off_slot = slot_of(local);
            for (int p = 0; p < Dim; ++p) {
                const std::size_t base = a.row_ptr[i * Dim + p];
                for (int q = 0; q < Dim; ++q) {
                    const double v = (p == q ? iso : 0.0) + dyad * dy[p] * dy[q];
                    a.val[base + off_slot * Dim + q] += v;
                    a.val[base + diag_slot * Dim + q] -= v;
                }
            }
        }
    }
    return k;
}

/// Eliminates constrained DOFs from K x = rhs. Known increments `delta` on the
/// constrained DOFs are moved to the right-hand side: rhs_f -= K_fc delta_c.
/// Unconstrained DOFs whose row is identically zero are set aside as inactive.
inline ReducedSystem apply_dirichlet(const SparseTangent& k, std::span<const double> rhs,
                                     std::span<const char> constrained, std::span<const double> delta) {
    const CsrMatrix& a = k.matrix;
    const std::size_t n = a.rows;
    std::size_t n_fixed = 0;
    for (std::size_t d = 0; d < n; ++d) n_fixed += constrained[d] != 0;
    if (n_fixed == n) throw SolverError("every degree of freedom is constrained; nothing to solve");
    if (n_fixed == 0)
        throw SolverError("no displacement constraints: the tangent has row sums of zero and is singular "
                          "(rigid-body modes); add a constrained layer");

    ReducedSystem red;
    std::vector<long> map(n, -1);
    for (std::size_t d = 0; d < n; ++d) {
        if (constrained[d]) continue;
        bool empty = true;
        for (std::size_t e = a.row_ptr[d]; e < a.row_ptr[d + 1] && empty; ++e) empty = a.val[e] == 0.0;
        if (empty) {
            red.inactive.push_back(d);
            continue;
        }
        map[d] = static_cast<long>(red.dofs.size());
        red.dofs.push_back(d);
    }
    if (red.dofs.empty()) throw SolverError("no active degrees of freedom remain after elimination");

    CsrMatrix& out = red.matrix;
    out.rows = red.dofs.size();
    red.rhs.resize(out.rows);
    for (std::size_t r = 0; r < out.rows; ++r) {
        const std::size_t d = red.dofs[r];
        double b = rhs[d];
        for (std::size_t e = a.row_ptr[d]; e < a.row_ptr[d + 1]; ++e) {
            const std::size_t c = a.col[e];
            if (constrained[c]) {
                b -= a.val[e] * delta[c];
            } else if (map[c] >= 0) {
                out.col.push_back(static_cast<std::uint32_t>(map[c]));
                out.val.push_back(a.val[e]);
            }
        }
        red.rhs[r] = b;
        out.row_ptr.push_back(out.col.size());
    }
    return red;
}

struct NewtonReport {
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t cg_iterations = 0;
    std::size_t indefinite_solves = 0;  // exact tangent rejected by CG; positive-part tangent used
    bool softening = false;             // stopped by stop_on_softening
    double relative_residual = 0.0;
    std::vector<double> history;  // relative residual after each iteration, history[0] = start
    DamageCounts new_damage;  // bonds that crossed onset / critical stretch when the step was accepted
    std::string failure;
};

namespace detail {

template <int Dim>
struct ResidualEval {
    std::vector<double> free_rhs;  // E on the solved DOFs
    double norm = 0.0;
    double denominator = 0.0;
    double current_scale = 0.0;
};

// ||b|| when a body force acts, else the reaction norm on constrained DOFs,
// floored by the largest value the state has carried.
template <int Dim>
ResidualEval<Dim> evaluate(const Model<Dim>& m, const SystemState<Dim>& s) {
    const auto f = assemble_internal_force(m, s);
    ResidualEval<Dim> ev;
    ev.free_rhs.assign(m.free_count, 0.0);
    double bb = 0.0, reaction = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int a = 0; a < Dim; ++a) {
            const std::size_t d = i * Dim + a;
            const double b = s.body_force[i][a];
            bb += b * b;
            if (m.dof_fixed[d]) {
                reaction += f[i][a] * f[i][a];
            } else {
                ev.free_rhs[static_cast<std::size_t>(m.free_index[d])] = f[i][a] + b;
            }
        }
    ev.norm = norm2(ev.free_rhs);
    ev.current_scale = bb > 0.0 ? std::sqrt(bb) : std::sqrt(reaction);
    ev.denominator = std::max({ev.current_scale, s.force_scale, 1e-30});
    return ev;
}

}  // namespace detail

/// Relative equilibrium error ||E(u)||_2 / denominator at the current state.
template <int Dim>
double relative_residual(const Model<Dim>& m, const SystemState<Dim>& s) {
    const auto ev = detail::evaluate(m, s);
    return ev.norm / ev.denominator;
}

/// One Newton-Raphson load step to `target_level`. The change of prescribed
/// displacements enters the first linear solve through the Dirichlet coupling.
/// On success the bond history is updated. On failure `state` holds the iterate
/// with the smallest residual and the history is left untouched.
template <int Dim>
NewtonReport newton_load_step(const Model<Dim>& m, SystemState<Dim>& state, double target_level,
                              const NewtonConfig& cfg) {
    cfg.validate();
    NewtonReport rep;
    const std::size_t ndof = m.dof_count();
    std::vector<double> delta(ndof, 0.0);
    bool moved = false;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int a = 0; a < Dim; ++a) {
            const std::size_t d = i * Dim + a;
            if (!m.dof_fixed[d]) continue;
            delta[d] = target_level * m.dof_target[d] - state.u[i][a];
            moved = moved || delta[d] != 0.0;
        }
    state.load_level = target_level;
    for (std::size_t i = 0; i < m.size(); ++i) state.body_force[i] = target_level * m.body_force[i];

    auto ev = detail::evaluate(m, state);
    rep.relative_residual = ev.norm / ev.denominator;
    rep.history.push_back(rep.relative_residual);
    if (!moved && rep.relative_residual <= cfg.tolerance) {
        rep.converged = true;
        state.force_scale = std::max(state.force_scale, ev.current_scale);
        rep.new_damage = update_damage_history(m, state);
        return rep;
    }

    std::vector<double> rhs(ndof, 0.0);
    std::size_t growth = 0;
    std::vector<Vec<Dim>> best_u;
    double best = std::numeric_limits<double>::infinity();
    TangentKind tangent = TangentKind::Exact;
    auto fail = [&](std::string why) {
        rep.failure = std::move(why);
        if (!best_u.empty()) {
            state.u = best_u;
            rep.relative_residual = best;
        }
        return rep;
    };
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (std::size_t d = 0; d < ndof; ++d)
            if (m.free_index[d] >= 0) rhs[d] = -ev.free_rhs[static_cast<std::size_t>(m.free_index[d])];
        auto solve = [&](TangentKind kind) {
            ReducedSystem red = apply_dirichlet(assemble_jacobian(m, state, kind), rhs, m.dof_fixed, delta);
            red.matrix.scale(-1.0);
            for (double& v : red.rhs) v = -v;
            const double rhs_norm = norm2(red.rhs);
            const double linear_target = 0.1 * cfg.tolerance * ev.denominator;
            const double cg_tol =
                rhs_norm > 0.0 ? std::clamp(linear_target / rhs_norm, cfg.cg_tolerance, 0.5) : 0.5;
            CgResult cg = cg_solve(red.matrix, red.rhs, cg_tol, cfg.cg_max_iterations);
            rep.cg_iterations += cg.iterations;
            return std::pair{std::move(red), std::move(cg)};
        };
        auto [red, cg] = solve(tangent);
        if (cg.indefinite) {
            // Softening bonds made the exact tangent indefinite; continue this
            // load step with the positive-part tangent (modified Newton).
            ++rep.indefinite_solves;
            if (cfg.stop_on_softening) {
                rep.softening = true;
                rep.iterations = it;
                return fail("exact tangent indefinite: bonds softening");
            }
            tangent = TangentKind::PositivePart;
            std::tie(red, cg) = solve(tangent);
        }

        const double previous = rep.relative_residual;
        rep.iterations = it;
        const bool predictor = it == 1;
        const std::vector<Vec<Dim>> base = state.u;
        auto take_step = [&](double alpha) {
            state.u = base;
            for (std::size_t r = 0; r < red.dofs.size(); ++r) {
                const std::size_t d = red.dofs[r];
                state.u[d / Dim][d % Dim] += alpha * cg.x[r];
            }
            for (std::size_t d = 0; d < ndof; ++d)
                if (m.dof_fixed[d]) state.u[d / Dim][d % Dim] += delta[d];
            return detail::evaluate(m, state);
        };
        try {
            ev = take_step(1.0);
            // Backtrack on the residual norm once the prescribed increment is in place.
            double alpha = 1.0;
            for (std::size_t t = 0; !predictor && t < cfg.line_search_steps && ev.norm / ev.denominator > previous; ++t) {
                alpha *= 0.5;
                ev = take_step(alpha);
            }
            if (!predictor && ev.norm / ev.denominator > previous && alpha < 1.0) ev = take_step(1.0);
        } catch (const SingularBondError& e) {
            return fail(e.what());
        }
        std::fill(delta.begin(), delta.end(), 0.0);
        rep.relative_residual = ev.norm / ev.denominator;
        rep.history.push_back(rep.relative_residual);
        if (!std::isfinite(rep.relative_residual)) return fail("non-finite residual");
        if (rep.relative_residual <= cfg.tolerance) {
            rep.converged = true;
            state.force_scale = std::max(state.force_scale, ev.current_scale);
            rep.new_damage = update_damage_history(m, state);
            return rep;
        }
        if (rep.relative_residual < best) {
            best = rep.relative_residual;
            best_u = state.u;
        }
        growth = rep.relative_residual > previous ? growth + 1 : 0;
        if (growth >= cfg.divergence_window)
            return fail("residual grew for " + std::to_string(growth) + " consecutive iterations");
    }
    return fail("no convergence within " + std::to_string(cfg.max_iterations) + " iterations");
}

}  // namespace bbpd
