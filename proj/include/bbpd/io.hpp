#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bbpd/adaptive.hpp"
#include "bbpd/error.hpp"
#include "bbpd/runner.hpp"

namespace bbpd {

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

/// `id,x,y[,z],ux,uy[,uz],damage`, one row per real particle in id order.
inline std::string fields_csv(const FieldSnapshot& f) {
    static const char* axis = "xyz";
    std::string out = "id";
    for (int a = 0; a < f.dimension; ++a) out += std::string(",") + axis[a];
    for (int a = 0; a < f.dimension; ++a) out += std::string(",u") + axis[a];
    out += ",damage\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        out += std::to_string(f.id[i]);
        for (int a = 0; a < f.dimension; ++a) out += "," + detail::num(f.position[i][a]);
        for (int a = 0; a < f.dimension; ++a) out += "," + detail::num(f.displacement[i][a]);
        out += "," + detail::num(f.damage[i]) + "\n";
    }
    return out;
}

/// Legacy VTK unstructured grid of vertex cells with point data
/// "displacement" (vector) and "damage" (scalar).
inline std::string fields_vtk(const FieldSnapshot& f, const std::string& title = "bbpd fields") {
    const std::size_t n = f.size();
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << n << " double\n";
    for (std::size_t i = 0; i < n; ++i)
        out << detail::num(f.position[i][0]) << ' ' << detail::num(f.position[i][1]) << ' '
            << detail::num(f.position[i][2]) << '\n';
    out << "CELLS " << n << ' ' << 2 * n << '\n';
    for (std::size_t i = 0; i < n; ++i) out << "1 " << i << '\n';
    out << "CELL_TYPES " << n << '\n';
    for (std::size_t i = 0; i < n; ++i) out << "1\n";
    out << "POINT_DATA " << n << "\nVECTORS displacement double\n";
    for (std::size_t i = 0; i < n; ++i)
        out << detail::num(f.displacement[i][0]) << ' ' << detail::num(f.displacement[i][1]) << ' '
            << detail::num(f.displacement[i][2]) << '\n';
    out << "SCALARS damage double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < n; ++i) out << detail::num(f.damage[i]) << '\n';
    return out.str();
}

/// ADR convergence trace as `step,e_u` rows (header only for pure Newton runs).
inline std::string trace_csv(const RunReport& r) {
    std::string out = "step,e_u\n";
    for (const auto& p : r.trace) out += std::to_string(p.step) + "," + detail::num(p.e_u) + "\n";
    return out;
}

/// Run report. `reference_seconds` is the solver time of an explicit run of the
/// same scenario; r_a is emitted only when it is given.
inline nlohmann::ordered_json report_json(const std::string& scenario, const RunReport& r, const FieldSnapshot& f,
                                          std::optional<double> reference_seconds = std::nullopt) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["scenario"] = scenario;
    j["method"] = to_string(r.method);
    j["converged"] = r.converged;
    j["failure"] = r.failure;
    j["particles"] = f.size();

    ordered_json implicit_steps = ordered_json::array();
    for (const auto& s : r.steps)
        implicit_steps.push_back({{"level", s.level},
                                  {"iterations", s.iterations},
                                  {"cg_iterations", s.cg_iterations},
                                  {"residual", s.residual},
                                  {"converged", s.converged},
                                  {"halvings", s.halvings}});
    j["phases"] = {
        {"implicit", {{"steps", r.implicit_steps}, {"seconds", r.seconds_implicit}, {"increment", r.implicit_increment},
                      {"load_steps", implicit_steps}}},
        {"explicit", {{"steps", r.explicit_steps}, {"loading_steps", r.explicit_loading_steps},
                      {"seconds", r.seconds_explicit}, {"increment", r.explicit_increment}}},
        {"final", {{"ran", r.final_phase_ran}, {"iterations", r.final_iterations}, {"adr_fallback", r.final_phase_fallback},
                   {"seconds", r.seconds_final}}},
    };
    j["steps"] = {{"implicit", r.implicit_steps},
                  {"explicit", r.explicit_steps},
                  {"final", r.final_phase_ran ? 1 : 0},
                  {"total", r.implicit_steps + r.explicit_steps + (r.final_phase_ran ? 1 : 0)}};
    j["seconds"] = {{"setup", r.seconds_setup},
                    {"implicit", r.seconds_implicit},
                    {"explicit", r.seconds_explicit},
                    {"final", r.seconds_final},
                    {"solver", r.solver_seconds()},
                    {"total", r.seconds_setup + r.solver_seconds()}};

    std::optional<double> r_a;
    if (reference_seconds && *reference_seconds > 0.0 && r.solver_seconds() > 0.0)
        r_a = *reference_seconds / r.solver_seconds();
    j["reference_solver_seconds"] = detail::optional_number(reference_seconds);
    j["r_a"] = detail::optional_number(r_a);
    j["r_n"] = {{"time", detail::optional_number(r.r_n_time())}, {"steps", detail::optional_number(r.r_n_steps())}};
    j["e_achieved"] = {{"residual", r.residual}, {"e_u", r.e_u}};
    j["load"] = {{"total", r.load_total},
                 {"implicit_increment", r.implicit_increment},
                 {"explicit_increment", r.explicit_increment},
                 {"applied", r.applied_load()}};
    j["damage"] = {{"degraded_bonds", r.damage.degraded},
                   {"failed_bonds", r.damage.failed},
                   {"floating_particles", floating_count(f)}};
    return j;
}

/// Solver seconds of an earlier explicit run, read from its report file.
inline double reference_seconds_from_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read reference report '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("reference report '" + path.string() + "': " + e.what());
    }
    if (!j.contains("method") || j["method"] != "adr")
        throw ConfigError("reference report '" + path.string() + "' is not an explicit (adr) run");
    const auto& s = j["seconds"];
    if (!s.is_object() || !s.contains("solver") || !s["solver"].is_number())
        throw ConfigError("reference report '" + path.string() + "' has no seconds.solver entry");
    return s["solver"].get<double>();
}

struct OutputFiles {
    std::filesystem::path fields_csv, fields_vtk, report, trace;
};

/// Writes fields.csv, fields.vtk, report.json and trace.csv into `dir`.
inline OutputFiles write_outputs(const std::filesystem::path& dir, const std::string& scenario, const RunResult& res,
                                 std::optional<double> reference_seconds = std::nullopt) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    OutputFiles files{dir / "fields.csv", dir / "fields.vtk", dir / "report.json", dir / "trace.csv"};
    detail::write_text(files.fields_csv, fields_csv(res.fields));
    detail::write_text(files.fields_vtk, fields_vtk(res.fields, scenario));
    detail::write_text(files.report, report_json(scenario, res.report, res.fields, reference_seconds).dump(2) + "\n");
    detail::write_text(files.trace, trace_csv(res.report));
    return files;
}

}  // namespace bbpd
