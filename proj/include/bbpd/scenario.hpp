#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbpd/adaptive.hpp"
#include "bbpd/error.hpp"
#include "bbpd/geometry.hpp"
#include "bbpd/material.hpp"
#include "bbpd/model.hpp"

namespace bbpd {

enum class LoadingType { BodyForce, Displacement };

struct LoadingSpec {
    LoadingType type = LoadingType::BodyForce;
    std::array<double, 3> body_force{};       // N/m^3 on load-layer particles at full load
    std::vector<DisplacementGroup> groups;     // full-load displacements (m) per group
    double adr_rate = 0.0;                     // m per ADR iteration (displacement loading)

    bool operator==(const LoadingSpec&) const = default;

    /// Load magnitude: |b| or the largest prescribed group displacement.
    double total() const {
        if (type == LoadingType::BodyForce)
            return std::sqrt(body_force[0] * body_force[0] + body_force[1] * body_force[1] +
                             body_force[2] * body_force[2]);
        double m = 0.0;
        for (const auto& g : groups) {
            double s = 0.0;
            for (int a = 0; a < 3; ++a) s += g.axes[a] ? g.direction[a] * g.direction[a] : 0.0;
            m = std::max(m, std::sqrt(s));
        }
        return m;
    }

    /// ADR loading program: full body force from the first iteration, or a
    /// constant boundary velocity until the prescribed displacement is reached.
    LoadProgram adr_program() const {
        if (type == LoadingType::BodyForce) return LoadProgram{1.0, 1.0, 0};
        return LoadProgram::constant_rate(total(), adr_rate);
    }
};

struct SolverSpec {
    Method method = Method::Implicit;
    std::size_t implicit_steps = 1;  // pure implicit load steps
    NewtonConfig newton;
    AdrConfig adr;
    LoadSchedule schedule;  // N_i, N_e (total filled from the loading)
    std::size_t arrest_window = 500;
    std::size_t max_halvings = 4;
    std::optional<double> deformation_horizon;  // m, horizon for the implicit deformation phase

    bool operator==(const SolverSpec&) const = default;

    AdaptiveConfig adaptive() const { return AdaptiveConfig{newton, adr, arrest_window, max_halvings}; }
};

struct Scenario {
    std::string name;
    std::string description;
    GeometrySpec geometry;
    MaterialParams material;
    std::optional<DamageLaw> damage;
    LoadingSpec loading;
    SolverSpec solver;

    bool operator==(const Scenario&) const = default;
};

namespace detail {

using nlohmann::json;

inline const char* side_names[] = {"left", "right", "bottom", "top", "back", "front"};

inline Side parse_side(const std::string& s, const std::string& where) {
    for (int k = 0; k < 6; ++k)
        if (s == side_names[k]) return static_cast<Side>(k);
    throw ConfigError(where + ": unknown side '" + s + "'");
}

inline DimensionMode parse_mode(const std::string& s, const std::string& where) {
    for (auto m : {DimensionMode::OneD, DimensionMode::PlaneStress, DimensionMode::PlaneStrain, DimensionMode::ThreeD})
        if (to_string(m) == s) return m;
    throw ConfigError(where + ": unknown dimension mode '" + s + "' (1d, plane_stress, plane_strain, 3d)");
}

/// Checked access to one JSON object; every key must be consumed.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    std::string where(const std::string& key = "") const {
        const std::string p = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
        return "field '" + (p.empty() ? std::string("<root>") : p) + "'";
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(where(key) + " is required");
        return j_.at(key);
    }

    template <typename T>
    T req(const std::string& key) {
        const json& v = raw(key);
        try {
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }

    template <typename T>
    T opt(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        return req<T>(key);
    }

    template <typename T>
    std::optional<T> maybe(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return std::nullopt;
        return req<T>(key);
    }

    /// The array under `key`, or nullptr when the key is absent or null.
    const json* array(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return nullptr;
        const json& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
        return &v;
    }

    void mark(const std::string& key) { seen_.insert(key); }

    Reader child(const std::string& key) { return Reader(raw(key), path_.empty() ? key : path_ + "." + key); }

    std::string path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + " is not a recognized key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::array<double, 3> vec3(const std::vector<double>& v, const std::string& where, std::size_t need) {
    if (v.size() != need)
        throw ConfigError(where + ": expected " + std::to_string(need) + " components, got " + std::to_string(v.size()));
    std::array<double, 3> out{};
    for (std::size_t a = 0; a < v.size(); ++a) out[a] = v[a];
    return out;
}

inline std::vector<double> head(const std::array<double, 3>& a, int n) { return {a.begin(), a.begin() + n}; }

}  // namespace detail

/// Clears components beyond the scenario dimension so equal scenarios compare equal.
inline void canonicalize(Scenario& sc) {
    const int dim = sc.geometry.dimension;
    for (int a = std::max(dim, 0); a < 3; ++a) {
        sc.geometry.extent[a] = 0.0;
        sc.geometry.cells[a] = 1;
        sc.loading.body_force[a] = 0.0;
        for (auto& h : sc.geometry.holes) h.center[a] = 0.0;
        for (auto& g : sc.loading.groups) {
            g.axes[a] = false;
            g.direction[a] = 0.0;
        }
    }
    sc.solver.schedule.total = sc.loading.total();
}

/// Cross-field checks beyond what parsing enforces.
inline void validate(const Scenario& sc) {
    if (sc.name.empty()) throw ConfigError("field 'name' must be non-empty");
    const int dim = sc.geometry.dimension;
    if (spatial_dimension(sc.material.mode) != dim)
        throw ConfigError("field 'material.mode': " + to_string(sc.material.mode) + " does not match dimension " +
                          std::to_string(dim));
    const int ngroups = static_cast<int>(sc.loading.groups.size());
    bool has_load_layer = false;
    for (const auto& l : sc.geometry.layers) {
        if (l.role == LayerRole::LoadLayer) has_load_layer = true;
        if (l.role == LayerRole::Constrained && (l.group < 0 || l.group >= ngroups))
            throw ConfigError("boundary layer on side " + to_string(l.side) + " references missing group " +
                              std::to_string(l.group));
    }
    for (const auto& r : sc.geometry.rims)
        if (r.group < 0 || r.group >= ngroups)
            throw ConfigError("rim constraint references missing group " + std::to_string(r.group));
    if (sc.geometry.layers.empty() && sc.geometry.rims.empty())
        throw ConfigError("scenario has no boundary layers: nothing is constrained");
    if (sc.loading.type == LoadingType::BodyForce) {
        if (!has_load_layer) throw ConfigError("body-force loading needs a load_layer boundary layer");
        if (!(sc.loading.total() > 0.0)) throw ConfigError("body-force loading needs a nonzero body force");
    } else {
        if (!(sc.loading.total() > 0.0))
            throw ConfigError("displacement loading needs a group with a nonzero prescribed displacement");
        if (!(sc.loading.adr_rate > 0.0)) throw ConfigError("displacement loading needs a positive ADR rate");
    }
    if (!(sc.material.horizon > sc.geometry.spacing))
        throw ConfigError("field 'material.horizon_m' must exceed the grid spacing");
    if (sc.solver.deformation_horizon && !(*sc.solver.deformation_horizon > sc.geometry.spacing))
        throw ConfigError("field 'solver.deformation_horizon_m' must exceed the grid spacing");
    if (sc.solver.implicit_steps < 1) throw ConfigError("field 'solver.implicit_steps' must be at least 1");
    if (sc.damage) sc.damage->validate();
    sc.solver.newton.validate();
    sc.solver.adr.validate();
    sc.solver.schedule.validate();
    detail::validate(sc.geometry);
}

inline nlohmann::ordered_json to_json(const Scenario& sc) {
    using nlohmann::ordered_json;
    const int dim = sc.geometry.dimension;
    const auto& g = sc.geometry;
    ordered_json geo;
    geo["dimension"] = dim;
    geo["extent_m"] = detail::head(g.extent, dim);
    geo["cells"] = std::vector<int>(g.cells.begin(), g.cells.begin() + dim);
    geo["spacing_m"] = g.spacing;
    geo["holes"] = ordered_json::array();
    for (const auto& h : g.holes)
        geo["holes"].push_back(ordered_json{{"center_m", detail::head(h.center, dim)}, {"radius_m", h.radius}});
    geo["notches"] = ordered_json::array();
    for (const auto& n : g.notches)
        geo["notches"].push_back(ordered_json{{"start_m", std::vector<double>(n.start.begin(), n.start.end())},
                                              {"end_m", std::vector<double>(n.end.begin(), n.end.end())},
                                              {"half_width_m", n.half_width}});
    geo["boundary_layers"] = ordered_json::array();
    for (const auto& l : g.layers) {
        ordered_json o{{"side", to_string(l.side)},
                       {"layers", l.layers},
                       {"role", l.role == LayerRole::Constrained ? "constrained" : "load_layer"},
                       {"group", l.group}};
        o["span_center_m"] = l.span_center ? ordered_json(*l.span_center) : ordered_json(nullptr);
        o["span_width_m"] = l.span_width ? ordered_json(*l.span_width) : ordered_json(nullptr);
        geo["boundary_layers"].push_back(o);
    }
    geo["rims"] = ordered_json::array();
    for (const auto& r : g.rims)
        geo["rims"].push_back(ordered_json{{"hole", r.hole}, {"layers", r.layers}, {"group", r.group}});

    const auto& m = sc.material;
    ordered_json mat{{"youngs_modulus_pa", m.youngs_modulus},
                     {"density_kg_m3", m.density},
                     {"mode", to_string(m.mode)},
                     {"thickness_m", m.thickness},
                     {"cross_section_m2", m.cross_section},
                     {"horizon_m", m.horizon}};

    ordered_json dmg = nullptr;
    if (sc.damage)
        dmg = ordered_json{{"onset_stretch", sc.damage->onset},
                           {"critical_stretch", sc.damage->critical},
                           {"rate", sc.damage->rate},
                           {"irreversible", sc.damage->irreversible}};

    ordered_json load;
    load["type"] = sc.loading.type == LoadingType::BodyForce ? "body_force" : "displacement";
    load["body_force_n_m3"] = detail::head(sc.loading.body_force, dim);
    load["groups"] = ordered_json::array();
    for (const auto& grp : sc.loading.groups)
        load["groups"].push_back(ordered_json{{"axes", std::vector<bool>(grp.axes.begin(), grp.axes.begin() + dim)},
                                              {"displacement_m", detail::head(grp.direction, dim)}});
    load["adr_rate_m_per_iteration"] = sc.loading.adr_rate;

    const auto& s = sc.solver;
    ordered_json sol{{"method", to_string(s.method)},
                     {"implicit_steps", s.implicit_steps},
                     {"newton_tolerance", s.newton.tolerance},
                     {"newton_max_iterations", s.newton.max_iterations},
                     {"cg_tolerance", s.newton.cg_tolerance},
                     {"cg_max_iterations", s.newton.cg_max_iterations},
                     {"divergence_window", s.newton.divergence_window},
                     {"adr_tolerance", s.adr.tolerance},
                     {"adr_max_steps", s.adr.max_steps},
                     {"adr_time_step", s.adr.dt},
                     {"adaptive_implicit_steps", s.schedule.implicit_steps},
                     {"adaptive_explicit_steps", s.schedule.explicit_steps},
                     {"arrest_window_steps", s.arrest_window},
                     {"max_halvings", s.max_halvings}};
    sol["deformation_horizon_m"] = s.deformation_horizon ? ordered_json(*s.deformation_horizon) : ordered_json(nullptr);

    ordered_json out;
    out["name"] = sc.name;
    out["description"] = sc.description;
    out["geometry"] = geo;
    out["material"] = mat;
    out["damage"] = dmg;
    out["loading"] = load;
    out["solver"] = sol;
    return out;
}

inline std::string serialize(const Scenario& sc) { return to_json(sc).dump(2) + "\n"; }

/// Parses and validates a scenario document. Optional keys take the defaults
/// shown by `serialize`.
inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error: " + e.what());
    }

    Scenario sc;
    detail::Reader root(doc, "");
    sc.name = root.req<std::string>("name");
    sc.description = root.opt<std::string>("description", "");

    {
        auto g = root.child("geometry");
        auto& geo = sc.geometry;
        geo.dimension = g.req<int>("dimension");
        if (geo.dimension < 1 || geo.dimension > 3) throw ConfigError(g.where("dimension") + " must be 1, 2 or 3");
        const auto dim = static_cast<std::size_t>(geo.dimension);
        geo.extent = detail::vec3(g.req<std::vector<double>>("extent_m"), g.where("extent_m"), dim);
        const auto cells = g.req<std::vector<int>>("cells");
        if (cells.size() != dim) throw ConfigError(g.where("cells") + ": expected " + std::to_string(dim) + " entries");
        geo.cells = {1, 1, 1};
        for (std::size_t a = 0; a < dim; ++a) geo.cells[a] = cells[a];
        geo.spacing = g.req<double>("spacing_m");
        const json* holes_ptr = g.array("holes");
        const json& holes = holes_ptr ? *holes_ptr : json::array();
        for (std::size_t k = 0; k < holes.size(); ++k) {
            detail::Reader h(holes[k], g.path_of("holes") + "[" + std::to_string(k) + "]");
            Hole hole;
            hole.center = detail::vec3(h.req<std::vector<double>>("center_m"), h.where("center_m"), dim);
            hole.radius = h.req<double>("radius_m");
            h.finish();
            geo.holes.push_back(hole);
        }
        if (const json* notches_ptr = g.array("notches")) {
            const json& notches = *notches_ptr;
            for (std::size_t k = 0; k < notches.size(); ++k) {
                detail::Reader n(notches[k], g.path_of("notches") + "[" + std::to_string(k) + "]");
                Notch nt;
                const auto a = detail::vec3(n.req<std::vector<double>>("start_m"), n.where("start_m"), 2);
                const auto b = detail::vec3(n.req<std::vector<double>>("end_m"), n.where("end_m"), 2);
                nt.start = {a[0], a[1]};
                nt.end = {b[0], b[1]};
                nt.half_width = n.opt<double>("half_width_m", 0.0);
                n.finish();
                geo.notches.push_back(nt);
            }
        }
        const json* layers_ptr = g.array("boundary_layers");
        const json& layers = layers_ptr ? *layers_ptr : json::array();
        for (std::size_t k = 0; k < layers.size(); ++k) {
            detail::Reader l(layers[k], g.path_of("boundary_layers") + "[" + std::to_string(k) + "]");
            BoundaryLayer bl;
            bl.side = detail::parse_side(l.req<std::string>("side"), l.where("side"));
            bl.layers = l.opt<int>("layers", 1);
            const auto role = l.opt<std::string>("role", "constrained");
            if (role == "constrained") {
                bl.role = LayerRole::Constrained;
            } else if (role == "load_layer") {
                bl.role = LayerRole::LoadLayer;
            } else {
                throw ConfigError(l.where("role") + ": expected 'constrained' or 'load_layer'");
            }
            bl.group = l.opt<int>("group", 0);
            bl.span_center = l.maybe<double>("span_center_m");
            bl.span_width = l.maybe<double>("span_width_m");
            l.finish();
            geo.layers.push_back(bl);
        }
        if (const json* rims_ptr = g.array("rims")) {
            const json& rims = *rims_ptr;
            for (std::size_t k = 0; k < rims.size(); ++k) {
                detail::Reader r(rims[k], g.path_of("rims") + "[" + std::to_string(k) + "]");
                RimConstraint rc;
                rc.hole = r.req<int>("hole");
                rc.layers = r.opt<int>("layers", 1);
                rc.group = r.opt<int>("group", 0);
                r.finish();
                geo.rims.push_back(rc);
            }
        }
        g.finish();
    }

    {
        auto m = root.child("material");
        auto& mat = sc.material;
        mat.youngs_modulus = m.req<double>("youngs_modulus_pa");
        mat.density = m.req<double>("density_kg_m3");
        mat.mode = detail::parse_mode(m.req<std::string>("mode"), m.where("mode"));
        mat.thickness = m.opt<double>("thickness_m", 0.0);
        mat.cross_section = m.opt<double>("cross_section_m2", 0.0);
        mat.horizon = m.req<double>("horizon_m");
        m.finish();
    }

    if (root.has("damage")) {
        auto d = root.child("damage");
        DamageLaw law;
        law.onset = d.req<double>("onset_stretch");
        law.critical = d.req<double>("critical_stretch");
        law.rate = d.req<double>("rate");
        law.irreversible = d.opt<bool>("irreversible", true);
        d.finish();
        sc.damage = law;
    } else {
        root.mark("damage");
    }

    const auto dim = static_cast<std::size_t>(sc.geometry.dimension);
    {
        auto l = root.child("loading");
        auto& ld = sc.loading;
        const auto type = l.req<std::string>("type");
        if (type == "body_force") {
            ld.type = LoadingType::BodyForce;
        } else if (type == "displacement") {
            ld.type = LoadingType::Displacement;
        } else {
            throw ConfigError(l.where("type") + ": expected 'body_force' or 'displacement'");
        }
        if (l.has("body_force_n_m3"))
            ld.body_force = detail::vec3(l.req<std::vector<double>>("body_force_n_m3"), l.where("body_force_n_m3"), dim);
        else
            l.mark("body_force_n_m3");
        const json* groups_ptr = l.array("groups");
        const json& groups = groups_ptr ? *groups_ptr : json::array();
        for (std::size_t k = 0; k < groups.size(); ++k) {
            detail::Reader gr(groups[k], l.path_of("groups") + "[" + std::to_string(k) + "]");
            DisplacementGroup grp;
            grp.axes = {false, false, false};
            const auto axes = gr.opt<std::vector<bool>>("axes", std::vector<bool>(dim, true));
            if (axes.size() != dim) throw ConfigError(gr.where("axes") + ": expected " + std::to_string(dim) + " flags");
            for (std::size_t a = 0; a < dim; ++a) grp.axes[a] = axes[a];
            grp.direction = detail::vec3(gr.opt<std::vector<double>>("displacement_m", std::vector<double>(dim, 0.0)),
                                         gr.where("displacement_m"), dim);
            gr.finish();
            ld.groups.push_back(grp);
        }
        ld.adr_rate = l.opt<double>("adr_rate_m_per_iteration", 0.0);
        l.finish();
    }

    {
        SolverSpec& s = sc.solver;
        const SolverSpec def;
        if (root.has("solver")) {
            auto r = root.child("solver");
            s.method = parse_method(r.opt<std::string>("method", to_string(def.method)));
            s.implicit_steps = r.opt<std::size_t>("implicit_steps", def.implicit_steps);
            s.newton.tolerance = r.opt<double>("newton_tolerance", def.newton.tolerance);
            s.newton.max_iterations = r.opt<std::size_t>("newton_max_iterations", def.newton.max_iterations);
            s.newton.cg_tolerance = r.opt<double>("cg_tolerance", def.newton.cg_tolerance);
            s.newton.cg_max_iterations = r.opt<std::size_t>("cg_max_iterations", def.newton.cg_max_iterations);
            s.newton.divergence_window = r.opt<std::size_t>("divergence_window", def.newton.divergence_window);
            s.adr.tolerance = r.opt<double>("adr_tolerance", def.adr.tolerance);
            s.adr.max_steps = r.opt<std::size_t>("adr_max_steps", def.adr.max_steps);
            s.adr.dt = r.opt<double>("adr_time_step", def.adr.dt);
            s.schedule.implicit_steps = r.opt<std::size_t>("adaptive_implicit_steps", def.schedule.implicit_steps);
            s.schedule.explicit_steps = r.opt<std::size_t>("adaptive_explicit_steps", def.schedule.explicit_steps);
            s.arrest_window = r.opt<std::size_t>("arrest_window_steps", def.arrest_window);
            s.max_halvings = r.opt<std::size_t>("max_halvings", def.max_halvings);
            s.deformation_horizon = r.maybe<double>("deformation_horizon_m");
            r.finish();
        } else {
            root.mark("solver");
        }
        s.schedule.total = sc.loading.total();
    }
    root.finish();
    canonicalize(sc);
    validate(sc);
    return sc;
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

// ---------------------------------------------------------------------------
// Built-in catalog

namespace builtin {

inline constexpr double kSteelE = 200e9;

inline GeometrySpec grid(int dim, std::array<int, 3> cells, double dx) {
    GeometrySpec g;
    g.dimension = dim;
    g.cells = cells;
    g.spacing = dx;
    for (int a = 0; a < 3; ++a) g.extent[a] = a < dim ? cells[a] * dx : 0.0;
    return g;
}

inline MaterialParams plane_stress(double e, double rho, double dx, double horizon_factor) {
    return MaterialParams{e, rho, DimensionMode::PlaneStress, dx, 0.0, horizon_factor * dx};
}

inline DisplacementGroup fixed() { return DisplacementGroup{{true, true, true}, {0.0, 0.0, 0.0}}; }

/// Cantilever under an end body force; resultant `force_n` is kept for any grid.
inline Scenario bar2d(const std::string& name, int nx, int ny, double length) {
    Scenario sc;
    sc.name = name;
    sc.description = "2D bar fixed on the left, transverse body force on the rightmost layer, no damage";
    const double dx = length / nx;
    sc.geometry = grid(2, {nx, ny, 1}, dx);
    sc.geometry.layers = {BoundaryLayer{Side::Left, 3, LayerRole::Constrained, 0, {}, {}},
                          BoundaryLayer{Side::Right, 1, LayerRole::LoadLayer, 0, {}, {}}};
    sc.material = plane_stress(kSteelE, 7850.0, dx, 3.015);
    const double force_n = 125.0;
    sc.loading.type = LoadingType::BodyForce;
    sc.loading.body_force = {0.0, -force_n / (ny * dx * dx * dx), 0.0};
    sc.loading.groups = {fixed()};
    sc.solver.method = Method::Implicit;
    sc.solver.schedule = LoadSchedule{sc.loading.total(), 1, 1};
    return sc;
}

inline Scenario plate_hole(const std::string& name, int nx, int ny, double length) {
    Scenario sc;
    sc.name = name;
    sc.description = "2D plate with a central hole pulled apart horizontally, degradation-law damage";
    const double dx = length / nx;
    sc.geometry = grid(2, {nx, ny, 1}, dx);
    sc.geometry.holes = {Hole{{0.5 * nx * dx, 0.5 * ny * dx, 0.0}, 0.005}};
    sc.geometry.layers = {BoundaryLayer{Side::Left, 3, LayerRole::Constrained, 0, {}, {}},
                          BoundaryLayer{Side::Right, 3, LayerRole::Constrained, 1, {}, {}}};
    sc.material = plane_stress(192e9, 8000.0, dx, 3.015);
    sc.damage = DamageLaw{0.033, 0.066, 3.0, true};
    sc.loading.type = LoadingType::Displacement;
    sc.loading.groups = {DisplacementGroup{{true, true, true}, {-1.6e-3, 0.0, 0.0}},
                         DisplacementGroup{{true, true, true}, {1.6e-3, 0.0, 0.0}}};
    sc.loading.adr_rate = 1.6e-7;
    sc.solver.method = Method::Implicit;
    sc.solver.implicit_steps = 1000;
    sc.solver.schedule = LoadSchedule{sc.loading.total(), 5, 1000};
    return sc;
}

inline Scenario bar3d(const std::string& name, int nx, int ny, int nz, double length) {
    Scenario sc;
    sc.name = name;
    sc.description = "3D cantilever fixed on the left, downward body force on the rightmost layer, no damage";
    const double dx = length / nx;
    sc.geometry = grid(3, {nx, ny, nz}, dx);
    sc.geometry.layers = {BoundaryLayer{Side::Left, 3, LayerRole::Constrained, 0, {}, {}},
                          BoundaryLayer{Side::Right, 1, LayerRole::LoadLayer, 0, {}, {}}};
    sc.material = MaterialParams{kSteelE, 7850.0, DimensionMode::ThreeD, 0.0, 0.0, 3.015 * dx};
    const double force_n = 5000.0;
    sc.loading.type = LoadingType::BodyForce;
    sc.loading.body_force = {0.0, 0.0, -force_n / (ny * nz * dx * dx * dx)};
    sc.loading.groups = {fixed()};
    sc.solver.method = Method::Adaptive;
    sc.solver.schedule = LoadSchedule{sc.loading.total(), 1, 1};
    return sc;
}

inline Scenario square_plate(const std::string& name, int n, double length) {
    Scenario sc;
    sc.name = name;
    sc.description = "2D square plate with a central hole pulled apart vertically, degradation-law damage";
    const double dx = length / n;
    sc.geometry = grid(2, {n, n, 1}, dx);
    sc.geometry.holes = {Hole{{0.5 * length, 0.5 * length, 0.0}, 0.005}};
    sc.geometry.layers = {BoundaryLayer{Side::Bottom, 3, LayerRole::Constrained, 0, {}, {}},
                          BoundaryLayer{Side::Top, 3, LayerRole::Constrained, 1, {}, {}}};
    sc.material = plane_stress(192e9, 8000.0, dx, 3.015);
    sc.damage = DamageLaw{0.015, 0.02, 3.0, true};
    sc.loading.type = LoadingType::Displacement;
    sc.loading.groups = {DisplacementGroup{{true, true, true}, {0.0, -2.75e-4, 0.0}},
                         DisplacementGroup{{true, true, true}, {0.0, 2.75e-4, 0.0}}};
    sc.loading.adr_rate = 2.75e-7;
    sc.solver.method = Method::Adaptive;
    sc.solver.implicit_steps = 100;
    sc.solver.schedule = LoadSchedule{sc.loading.total(), 3, 180};
    return sc;
}

inline Scenario three_point(const std::string& name, int nx, int ny, double length, double rate) {
    Scenario sc;
    sc.name = name;
    sc.description = "notched beam in three-point bending, degradation-law damage";
    const double dx = length / nx;
    const double width = ny * dx;
    const double mid = 0.5 * length;
    sc.geometry = grid(2, {nx, ny, 1}, dx);
    // Four-cell patches cannot sit centered on a cell center; snap to the nearest cell boundary.
    const double left = std::round((mid - 0.105) / dx) * dx;
    const double right = length - left;
    sc.geometry.layers = {BoundaryLayer{Side::Bottom, 3, LayerRole::Constrained, 0, left, 4 * dx},
                          BoundaryLayer{Side::Bottom, 3, LayerRole::Constrained, 0, right, 4 * dx},
                          BoundaryLayer{Side::Top, 3, LayerRole::Constrained, 1, mid, 4 * dx}};
    sc.geometry.notches = {Notch{{mid, 0.0}, {mid, 0.3 * width}, 0.0}};
    sc.material = plane_stress(kSteelE, 8000.0, dx, 3.015);
    sc.damage = DamageLaw{0.016, 0.02, 3.0, true};
    sc.loading.type = LoadingType::Displacement;
    sc.loading.groups = {DisplacementGroup{{false, true, false}, {0.0, 0.0, 0.0}},
                         DisplacementGroup{{true, true, true}, {0.0, -4e-3, 0.0}}};
    sc.loading.adr_rate = rate;
    sc.solver.method = Method::Adaptive;
    sc.solver.implicit_steps = 100;
    sc.solver.schedule = LoadSchedule{sc.loading.total(), 5, 1000};
    return sc;
}

inline Scenario multi_hole(const std::string& name, int nx, int ny, double length, double rate) {
    Scenario sc;
    sc.name = name;
    sc.description = "plate with four holes, pin loading through the two left holes, degradation-law damage";
    const double dx = length / nx;
    sc.geometry = grid(2, {nx, ny, 1}, dx);
    sc.geometry.holes = {Hole{{0.020, 0.020, 0.0}, 0.0065}, Hole{{0.020, 0.100, 0.0}, 0.0065},
                         Hole{{0.0365, 0.051, 0.0}, 0.010}, Hole{{0.025, 0.0705, 0.0}, 0.006}};
    sc.geometry.rims = {RimConstraint{0, 1, 0}, RimConstraint{1, 1, 1}};
    sc.material = plane_stress(kSteelE, 8000.0, dx, 8.015);
    sc.damage = DamageLaw{0.016, 0.02, 3.0, true};
    sc.loading.type = LoadingType::Displacement;
    sc.loading.groups = {DisplacementGroup{{true, true, true}, {0.0, -8e-4, 0.0}},
                         DisplacementGroup{{true, true, true}, {0.0, 8e-4, 0.0}}};
    sc.loading.adr_rate = rate;
    sc.solver.method = Method::Adaptive;
    sc.solver.implicit_steps = 100;
    sc.solver.schedule = LoadSchedule{sc.loading.total(), 5, 1500};
    sc.solver.deformation_horizon = 3.015 * dx;
    return sc;
}

}  // namespace builtin

/// Every built-in scenario: the six full-size experiments and a smaller
/// "_desk" variant of each with the same physics and resultant loads.
inline std::vector<Scenario> builtin_scenarios() {
    using namespace builtin;
    std::vector<Scenario> all = {
        bar2d("bar2d_transverse", 100, 10, 0.5),
        bar2d("bar2d_transverse_desk", 50, 5, 0.5),
        plate_hole("plate_hole_tension", 150, 50, 0.15),
        plate_hole("plate_hole_tension_desk", 75, 25, 0.15),
        bar3d("bar3d_cantilever", 100, 10, 10, 1.0),
        bar3d("bar3d_cantilever_desk", 50, 5, 5, 1.0),
        square_plate("square_plate_hole", 50, 0.05),
        square_plate("square_plate_hole_desk", 40, 0.05),
        three_point("three_point_bending", 200, 50, 0.24, 1e-7),
        three_point("three_point_bending_desk", 100, 25, 0.24, 1e-7),
        multi_hole("multi_hole_plate", 65, 120, 0.065, 1e-8),
        multi_hole("multi_hole_plate_desk", 26, 48, 0.065, 4e-8),
    };
    for (auto& sc : all) {
        canonicalize(sc);
        validate(sc);
    }
    return all;
}

inline std::vector<std::string> builtin_names() {
    std::vector<std::string> names;
    for (const auto& sc : builtin_scenarios()) names.push_back(sc.name);
    return names;
}

inline std::optional<Scenario> find_builtin(const std::string& name) {
    for (auto& sc : builtin_scenarios())
        if (sc.name == name) return sc;
    return std::nullopt;
}

/// A path to an existing file is parsed; anything else must name a built-in.
inline Scenario resolve_scenario(const std::string& arg) {
    if (std::filesystem::is_regular_file(arg)) return load_scenario_file(arg);
    if (auto sc = find_builtin(arg)) return *sc;
    std::string known;
    for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("'" + arg + "' is neither a scenario file nor a built-in (" + known + ")");
}

}  // namespace bbpd
