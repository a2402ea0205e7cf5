#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bbpd/error.hpp"
#include "bbpd/material.hpp"
#include "bbpd/vec.hpp"

namespace bbpd {

/// Domain faces: x-, x+, y-, y+, z-, z+.
enum class Side { Left, Right, Bottom, Top, Back, Front };

inline int normal_axis(Side side) { return static_cast<int>(side) / 2; }
inline bool is_max_side(Side side) { return static_cast<int>(side) % 2 == 1; }

/// First in-plane axis along which a boundary layer may be limited to a span.
inline int tangent_axis(Side side) { return normal_axis(side) == 0 ? 1 : 0; }

inline std::string to_string(Side side) {
    static const char* names[] = {"left", "right", "bottom", "top", "back", "front"};
    return names[static_cast<int>(side)];
}

enum class LayerRole {
    Constrained,  // fictitious particles appended outside the face, displacement prescribed
    LoadLayer,    // outermost real particles on the face, carry the body force
};

struct BoundaryLayer {
    Side side = Side::Left;
    int layers = 1;
    LayerRole role = LayerRole::Constrained;
    int group = 0;  // index of the displacement group (Constrained only)
    std::optional<double> span_center;  // m, along tangent_axis(side)
    std::optional<double> span_width;   // m

    bool operator==(const BoundaryLayer&) const = default;
};

struct Hole {
    std::array<double, 3> center{};
    double radius = 0.0;

    bool operator==(const Hole&) const = default;
};

/// Straight pre-crack. Bonds crossing the segment are broken before any solve;
/// with a positive half width, particles strictly inside the swept slot are removed.
struct Notch {
    std::array<double, 2> start{};
    std::array<double, 2> end{};
    double half_width = 0.0;

    bool operator==(const Notch&) const = default;
};

/// Real particles in the ring r < |x - c| <= r + layers * dx around a hole are
/// driven by a displacement group (pin loading through a hole).
struct RimConstraint {
    int hole = 0;
    int layers = 1;
    int group = 0;

    bool operator==(const RimConstraint&) const = default;
};

struct GeometrySpec {
    int dimension = 2;
    std::array<double, 3> extent{};  // m
    std::array<int, 3> cells{1, 1, 1};
    double spacing = 0.0;  // m
    std::vector<Hole> holes;
    std::vector<Notch> notches;
    std::vector<BoundaryLayer> layers;
    std::vector<RimConstraint> rims;

    bool operator==(const GeometrySpec&) const = default;
};

enum class Role : std::uint8_t { Real, Fictitious, LoadLayer };

template <int Dim>
struct ParticleSet {
    std::vector<Vec<Dim>> position;
    std::vector<double> volume;
    std::vector<Role> role;
    std::vector<int> group;  // displacement group, -1 when not driven
    double spacing = 0.0;
    double density = 0.0;

    std::size_t size() const { return position.size(); }
    bool constrained(std::size_t i) const { return group[i] >= 0; }

    std::size_t count(Role r) const {
        std::size_t n = 0;
        for (Role x : role) n += (x == r);
        return n;
    }

    void push(const Vec<Dim>& x, double v, Role r, int g) {
        position.push_back(x);
        volume.push_back(v);
        role.push_back(r);
        group.push_back(g);
    }
};

/// Volume of one lattice cell, using thickness (2D) or cross-section (1D).
inline double cell_volume(int dimension, double dx, const MaterialParams& mat) {
    switch (dimension) {
        case 1: return dx * (mat.cross_section > 0.0 ? mat.cross_section : dx * dx);
        case 2: return dx * dx * (mat.thickness > 0.0 ? mat.thickness : dx);
        default: return dx * dx * dx;
    }
}

namespace detail {

inline void validate(const GeometrySpec& spec) {
    if (spec.dimension < 1 || spec.dimension > 3) throw SetupError("dimension must be 1, 2 or 3");
    if (!(spec.spacing > 0.0)) throw SetupError("grid spacing must be positive");
    for (int a = 0; a < spec.dimension; ++a) {
        if (spec.cells[a] < 1) throw SetupError("grid counts must be at least 1");
        if (!(spec.extent[a] > 0.0)) throw SetupError("degenerate domain: zero extent on axis " + std::to_string(a));
        const double implied = spec.cells[a] * spec.spacing;
        if (std::abs(implied - spec.extent[a]) > 1e-9 * spec.extent[a])
            throw SetupError("extent on axis " + std::to_string(a) + " does not equal cells * spacing");
    }
    for (const auto& h : spec.holes)
        if (!(h.radius > 0.0)) throw SetupError("hole radius must be positive");
    for (const auto& n : spec.notches)
        if (!(n.half_width >= 0.0)) throw SetupError("notch half width must be non-negative");
    for (const auto& l : spec.layers) {
        if (l.layers < 1) throw SetupError("boundary layer thickness must be at least one layer");
        if (normal_axis(l.side) >= spec.dimension)
            throw SetupError("boundary side " + to_string(l.side) + " does not exist in " +
                             std::to_string(spec.dimension) + "D");
        if (l.span_center.has_value() != l.span_width.has_value())
            throw SetupError("boundary span needs both center and width");
        if (l.span_width && !(*l.span_width > 0.0)) throw SetupError("boundary span width must be positive");
        if (l.span_center && spec.dimension < 2) throw SetupError("boundary spans need at least 2D");
        if (l.role == LayerRole::Constrained && l.group < 0) throw SetupError("constrained layer needs a group");
    }
    for (const auto& r : spec.rims) {
        if (r.hole < 0 || r.hole >= static_cast<int>(spec.holes.size()))
            throw SetupError("rim constraint references a missing hole");
        if (r.layers < 1) throw SetupError("rim thickness must be at least one layer");
        if (r.group < 0) throw SetupError("rim constraint needs a group");
    }
}

inline bool in_span(const BoundaryLayer& l, double tangent_coord, double dx) {
    if (!l.span_center) return true;
    const double half = 0.5 * *l.span_width + 1e-9 * dx;
    return std::abs(tangent_coord - *l.span_center) <= half;
}

// Tangent cell index range [lo, hi) covered by a layer on an axis with n cells.
inline std::pair<int, int> span_cells(const BoundaryLayer& l, int n, double dx) {
    int lo = n, hi = 0;
    for (int k = 0; k < n; ++k) {
        if (in_span(l, (k + 0.5) * dx, dx)) {
            lo = std::min(lo, k);
            hi = std::max(hi, k + 1);
        }
    }
    return {lo, std::max(lo, hi)};
}

template <int Dim>
bool inside_notch_slot(const Vec<Dim>& x, const Notch& n) {
    if constexpr (Dim != 2) {
        return false;
    } else {
        if (!(n.half_width > 0.0)) return false;
        const double tx = n.end[0] - n.start[0], ty = n.end[1] - n.start[1];
        const double len = std::hypot(tx, ty);
        if (len == 0.0) return false;
        const double rx = x[0] - n.start[0], ry = x[1] - n.start[1];
        const double along = (rx * tx + ry * ty) / len;
        const double across = (rx * ty - ry * tx) / len;
        return along > 0.0 && along < len && std::abs(across) < n.half_width;
    }
}

}  // namespace detail

/// Lays particles at cell centers of the lattice, removes hole and notch-slot
/// interiors, tags load layers and rim constraints, then appends fictitious
/// constrained layers in declaration order.
template <int Dim>
ParticleSet<Dim> build_grid(const GeometrySpec& spec, const MaterialParams& mat) {
    if (spec.dimension != Dim)
        throw SetupError("geometry dimension " + std::to_string(spec.dimension) + " does not match model dimension " +
                         std::to_string(Dim));
    detail::validate(spec);
    if (spec.notches.size() && Dim != 2) throw SetupError("notches are supported in 2D only");

    const double dx = spec.spacing;
    const double v = cell_volume(Dim, dx, mat);
    std::array<int, 3> n{1, 1, 1};
    for (int a = 0; a < Dim; ++a) n[a] = spec.cells[a];

    // Appended constrained layers on the same face must not overlap.
    for (std::size_t p = 0; p < spec.layers.size(); ++p) {
        for (std::size_t q = p + 1; q < spec.layers.size(); ++q) {
            const auto& a = spec.layers[p];
            const auto& b = spec.layers[q];
            if (a.side != b.side || a.role != b.role) continue;
            const int t = tangent_axis(a.side);
            const int nt = Dim > 1 ? n[t] : 1;
            auto [alo, ahi] = detail::span_cells(a, nt, dx);
            auto [blo, bhi] = detail::span_cells(b, nt, dx);
            if (alo < bhi && blo < ahi) throw SetupError("overlapping boundary layers on side " + to_string(a.side));
        }
    }

    ParticleSet<Dim> pts;
    pts.spacing = dx;
    pts.density = mat.density;

    auto removed = [&](const Vec<Dim>& x) {
        for (const auto& h : spec.holes)
            if (norm<Dim>(x - take<Dim>(h.center)) < h.radius) return true;
        for (const auto& nt : spec.notches)
            if (detail::inside_notch_slot<Dim>(x, nt)) return true;
        return false;
    };

    for (int k = 0; k < n[2]; ++k) {
        for (int j = 0; j < n[1]; ++j) {
            for (int i = 0; i < n[0]; ++i) {
                const std::array<int, 3> idx{i, j, k};
                Vec<Dim> x{};
                for (int a = 0; a < Dim; ++a) x[a] = (idx[a] + 0.5) * dx;
                if (removed(x)) continue;

                Role role = Role::Real;
                for (const auto& l : spec.layers) {
                    if (l.role != LayerRole::LoadLayer) continue;
                    const int a = normal_axis(l.side);
                    const int depth = is_max_side(l.side) ? n[a] - 1 - idx[a] : idx[a];
                    const bool spanned = Dim < 2 || detail::in_span(l, x[tangent_axis(l.side)], dx);
                    if (depth < l.layers && spanned) role = Role::LoadLayer;
                }
                int group = -1;
                for (const auto& r : spec.rims) {
                    const auto& h = spec.holes[r.hole];
                    const double d = norm<Dim>(x - take<Dim>(h.center));
                    if (d <= h.radius + r.layers * dx * (1.0 + 1e-9)) group = r.group;
                }
                pts.push(x, v, role, group);
            }
        }
    }
    if (pts.size() == 0) throw SetupError("holes and notches remove every particle of the domain");

    for (const auto& l : spec.layers) {
        if (l.role != LayerRole::Constrained) continue;
        const int a = normal_axis(l.side);
        const int t = tangent_axis(l.side);
        std::array<int, 3> lo{0, 0, 0}, hi = n;
        if (is_max_side(l.side)) {
            lo[a] = n[a];
            hi[a] = n[a] + l.layers;
        } else {
            lo[a] = -l.layers;
            hi[a] = 0;
        }
        if (Dim > 1) {
            auto [slo, shi] = detail::span_cells(l, n[t], dx);
            lo[t] = slo;
            hi[t] = shi;
        }
        for (int k = lo[2]; k < hi[2]; ++k) {
            for (int j = lo[1]; j < hi[1]; ++j) {
                for (int i = lo[0]; i < hi[0]; ++i) {
                    const std::array<int, 3> idx{i, j, k};
                    Vec<Dim> x{};
                    for (int b = 0; b < Dim; ++b) x[b] = (idx[b] + 0.5) * dx;
                    pts.push(x, v, Role::Fictitious, l.group);
                }
            }
        }
    }
    return pts;
}

}  // namespace bbpd
