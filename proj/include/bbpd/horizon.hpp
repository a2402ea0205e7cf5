#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bbpd/error.hpp"
#include "bbpd/geometry.hpp"
#include "bbpd/vec.hpp"

namespace bbpd {

/// Bond graph in compressed adjacency form. Each undirected bond appears twice
/// (once from each endpoint); neighbor lists are sorted by index.
struct HorizonTable {
    std::vector<std::size_t> offsets{0};
    std::vector<std::uint32_t> neighbor;
    std::vector<double> length;              // |xi|, m
    std::vector<double> volume_correction;   // nu
    std::vector<double> surface_correction;  // mu
    std::vector<std::uint8_t> alive;
    double horizon = 0.0;
    double spacing = 0.0;

    std::size_t size() const { return offsets.size() - 1; }
    std::size_t bond_count() const { return neighbor.size(); }
    std::size_t neighbor_count(std::size_t i) const { return offsets[i + 1] - offsets[i]; }
    std::span<const std::uint32_t> neighbors_of(std::size_t i) const {
        return {neighbor.data() + offsets[i], neighbor_count(i)};
    }
    std::size_t dead_count() const {
        return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), std::uint8_t{0}));
    }

    bool operator==(const HorizonTable&) const = default;
};

/// All pairs with 0 < |x_j - x_i| <= horizon, found by binning at horizon size.
template <int Dim>
HorizonTable build_horizons(const ParticleSet<Dim>& pts, double horizon) {
    const double dx = pts.spacing;
    if (!(horizon > dx)) throw SetupError("horizon must exceed the grid spacing");
    const std::size_t n = pts.size();

    Vec<Dim> lo, hi;
    lo.fill(INFINITY);
    hi.fill(-INFINITY);
    for (const auto& x : pts.position)
        for (int a = 0; a < Dim; ++a) {
            lo[a] = std::min(lo[a], x[a]);
            hi[a] = std::max(hi[a], x[a]);
        }

    std::array<long, Dim> dims{};
    long nbins = 1;
    for (int a = 0; a < Dim; ++a) {
        dims[a] = static_cast<long>(std::floor((hi[a] - lo[a]) / horizon)) + 1;
        nbins *= dims[a];
    }
    auto bin_coord = [&](const Vec<Dim>& x) {
        std::array<long, Dim> b{};
        for (int a = 0; a < Dim; ++a)
            b[a] = std::min(dims[a] - 1, static_cast<long>(std::floor((x[a] - lo[a]) / horizon)));
        return b;
    };
    auto flat = [&](const std::array<long, Dim>& b) {
        long f = 0;
        for (int a = Dim - 1; a >= 0; --a) f = f * dims[a] + b[a];
        return f;
    };

    std::vector<std::size_t> bin_start(nbins + 1, 0);
    std::vector<long> bin_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        bin_of[i] = flat(bin_coord(pts.position[i]));
        ++bin_start[bin_of[i] + 1];
    }
    for (long b = 0; b < nbins; ++b) bin_start[b + 1] += bin_start[b];
    std::vector<std::uint32_t> members(n);
    {
        auto cursor = bin_start;
        for (std::size_t i = 0; i < n; ++i) members[cursor[bin_of[i]]++] = static_cast<std::uint32_t>(i);
    }

    HorizonTable table;
    table.horizon = horizon;
    table.spacing = dx;
    table.offsets.assign(1, 0);
    std::vector<std::pair<std::uint32_t, double>> found;
    for (std::size_t i = 0; i < n; ++i) {
        found.clear();
        const auto& xi = pts.position[i];
        const auto bi = bin_coord(xi);
        std::array<long, Dim> off{};
        off.fill(-1);
        while (true) {
            std::array<long, Dim> b{};
            bool valid = true;
            for (int a = 0; a < Dim; ++a) {
                b[a] = bi[a] + off[a];
                valid = valid && b[a] >= 0 && b[a] < dims[a];
            }
            if (valid) {
                const long f = flat(b);
                for (std::size_t m = bin_start[f]; m < bin_start[f + 1]; ++m) {
                    const std::uint32_t j = members[m];
                    if (j == i) continue;
                    const double r = norm<Dim>(pts.position[j] - xi);
                    if (r > 0.0 && r <= horizon) found.emplace_back(j, r);
                }
            }
            int a = 0;
            while (a < Dim && off[a] == 1) off[a++] = -1;
            if (a == Dim) break;
            ++off[a];
        }
        std::sort(found.begin(), found.end());
        for (const auto& [j, r] : found) {
            table.neighbor.push_back(j);
            table.length.push_back(r);
        }
        table.offsets.push_back(table.neighbor.size());
    }
    table.volume_correction.assign(table.neighbor.size(), 1.0);
    table.surface_correction.assign(table.neighbor.size(), 1.0);
    table.alive.assign(table.neighbor.size(), 1);
    return table;
}

namespace detail {

inline double orient(const std::array<double, 2>& a, const std::array<double, 2>& b, const std::array<double, 2>& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

inline bool on_segment(const std::array<double, 2>& a, const std::array<double, 2>& b, const std::array<double, 2>& p) {
    return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
           p[1] <= std::max(a[1], b[1]);
}

}  // namespace detail

/// Closed-segment intersection; touching endpoints and collinear overlap count.
inline bool segments_intersect(const std::array<double, 2>& p1, const std::array<double, 2>& p2,
                               const std::array<double, 2>& q1, const std::array<double, 2>& q2) {
    const double d1 = detail::orient(q1, q2, p1);
    const double d2 = detail::orient(q1, q2, p2);
    const double d3 = detail::orient(p1, p2, q1);
    const double d4 = detail::orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && detail::on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && detail::on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && detail::on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && detail::on_segment(p1, p2, q2)) return true;
    return false;
}

/// Marks every bond whose reference segment crosses a notch as dead.
template <int Dim>
HorizonTable apply_notches(HorizonTable table, const ParticleSet<Dim>& pts, const std::vector<Notch>& notches) {
    if (notches.empty()) return table;
    if constexpr (Dim != 2) {
        throw SetupError("notches are supported in 2D only");
    } else {
        for (std::size_t i = 0; i < table.size(); ++i) {
            const std::array<double, 2> a{pts.position[i][0], pts.position[i][1]};
            for (std::size_t k = table.offsets[i]; k < table.offsets[i + 1]; ++k) {
                const auto& xj = pts.position[table.neighbor[k]];
                const std::array<double, 2> b{xj[0], xj[1]};
                for (const auto& n : notches)
                    if (segments_intersect(a, b, n.start, n.end)) table.alive[k] = 0;
            }
        }
    }
    return table;
}

enum class SurfaceCorrection { None };

struct CorrectionPolicy {
    SurfaceCorrection surface = SurfaceCorrection::None;
};

/// Partial-volume factor for a neighbor at reference distance r: 1 well inside
/// the horizon, linear across the band [delta - dx/2, delta + dx/2].
inline double volume_correction(double r, double horizon, double dx) {
    if (r <= horizon - 0.5 * dx) return 1.0;
    const double nu = (horizon + 0.5 * dx - r) / dx;
    return std::clamp(nu, std::numeric_limits<double>::min(), 1.0);
}

inline HorizonTable correction_factors(HorizonTable table, CorrectionPolicy policy = {}) {
    for (std::size_t k = 0; k < table.bond_count(); ++k) {
        table.volume_correction[k] = volume_correction(table.length[k], table.horizon, table.spacing);
        switch (policy.surface) {
            case SurfaceCorrection::None: table.surface_correction[k] = 1.0; break;
        }
    }
    return table;
}

/// Fraction of nonzero particle blocks in the tangent: sum_i (N_i + 1) / N^2.
inline double sparsity_index(const HorizonTable& table) {
    const std::size_t n = table.size();
    if (n == 0) throw SetupError("sparsity index of an empty particle set");
    const double nnz = static_cast<double>(table.bond_count() + n);
    return nnz / (static_cast<double>(n) * static_cast<double>(n));
}

inline std::size_t max_neighbor_count(const HorizonTable& table) {
    std::size_t m = 0;
    for (std::size_t i = 0; i < table.size(); ++i) m = std::max(m, table.neighbor_count(i));
    return m;
}

}  // namespace bbpd
