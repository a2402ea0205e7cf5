// Command-line driver: run built-in or file scenarios and export the results.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bbpd/bbpd.hpp"

namespace {

constexpr int kConverged = 0;
constexpr int kConfigError = 1;
constexpr int kNotConverged = 2;

std::vector<std::size_t> parse_steps(const std::string& list) {
    std::vector<std::size_t> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || v == 0) throw bbpd::ConfigError("bad step count '" + item + "' in --sweep");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw bbpd::ConfigError("--sweep needs at least one step count");
    return out;
}

void print_summary(const std::string& name, const bbpd::RunResult& r, std::optional<double> reference) {
    const auto& rep = r.report;
    std::printf("%s [%s]: %s\n", name.c_str(), bbpd::to_string(rep.method).c_str(),
                rep.converged ? "converged" : "NOT converged");
    if (!rep.failure.empty()) std::printf("  note: %s\n", rep.failure.c_str());
    std::printf("  steps: implicit %zu, explicit %zu, final %s\n", rep.implicit_steps, rep.explicit_steps,
                rep.final_phase_ran ? (rep.final_phase_fallback ? "adr fallback" : "newton") : "none");
    std::printf("  solver seconds %.3f (setup %.3f)\n", rep.solver_seconds(), rep.seconds_setup);
    std::printf("  residual %.3e, e_u %.3e, failed bonds %zu\n", rep.residual, rep.e_u, rep.damage.failed);
    if (auto rn = rep.r_n_time()) std::printf("  r_n time %.4f, steps %.4f\n", *rn, *rep.r_n_steps());
    if (reference && rep.solver_seconds() > 0.0) std::printf("  r_a %.3f\n", *reference / rep.solver_seconds());
}

int run_command(const std::string& target, const std::string& method_name, std::size_t steps,
                const std::string& out_dir, const std::string& reference_path, const std::string& sweep) {
    const bbpd::Scenario sc = bbpd::resolve_scenario(target);
    const bbpd::Method method = method_name.empty() ? sc.solver.method : bbpd::parse_method(method_name);
    std::optional<double> reference;
    if (!reference_path.empty()) reference = bbpd::reference_seconds_from_report(reference_path);
    const std::vector<std::size_t> sweep_steps = sweep.empty() ? std::vector<std::size_t>{} : parse_steps(sweep);

    const bbpd::RunResult res = bbpd::run_scenario(sc, method, steps);
    bbpd::write_outputs(out_dir, sc.name, res, reference);
    print_summary(sc.name, res, reference);

    if (!sweep_steps.empty()) {
        // The sweep compares pure implicit runs against an explicit reference.
        const bbpd::RunResult ref = method == bbpd::Method::Adr ? res : bbpd::run_scenario(sc, bbpd::Method::Adr);
        const auto rows = bbpd::sweep_loading_steps(sc, sweep_steps, ref.fields);
        std::string csv = "steps,ok,converged,distance,seconds,failure\n";
        for (const auto& row : rows) {
            std::string why = row.failure;
            for (char& c : why)
                if (c == ',' || c == '\n') c = ';';
            char line[128];
            std::snprintf(line, sizeof line, "%zu,%d,%d,%.17g,%.17g,", row.steps, row.ok ? 1 : 0, row.converged ? 1 : 0,
                          row.distance, row.seconds);
            csv += line + why + "\n";
            std::printf("  sweep %zu steps: distance %.4e%s\n", row.steps, row.distance,
                        row.ok ? (row.converged ? "" : " (some steps unconverged)") : " (failed)");
        }
        std::printf("  sweep trend non-increasing: %s\n", bbpd::monotone_non_increasing(rows) ? "yes" : "no");
        bbpd::detail::write_text(std::filesystem::path(out_dir) / "sweep.csv", csv);
    }
    return res.report.converged ? kConverged : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bond-based peridynamics: implicit, explicit (ADR) and adaptive quasi-static solvers"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario and write fields.csv, fields.vtk, report.json, trace.csv");
    std::string target, method, out_dir = "out", reference, sweep;
    std::size_t steps = 0;
    run->add_option("scenario", target, "Scenario file or built-in name")->required();
    run->add_option("--method", method, "adr, implicit or adaptive (default: the scenario's)");
    run->add_option("--steps", steps, "Total load steps for implicit runs (default: the scenario's)");
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--reference", reference, "report.json of an adr run, used for r_a");
    run->add_option("--sweep", sweep, "Comma-separated implicit step counts compared against an adr run");

    app.add_subcommand("list", "List built-in scenarios");

    auto* show = app.add_subcommand("show", "Print a scenario with every default resolved");
    std::string show_target;
    show->add_option("scenario", show_target, "Scenario file or built-in name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) return run_command(target, method, steps, out_dir, reference, sweep);
        if (app.got_subcommand("list")) {
            for (const auto& sc : bbpd::builtin_scenarios())
                std::printf("%-28s %s\n", sc.name.c_str(), sc.description.c_str());
            return 0;
        }
        if (*show) {
            std::cout << bbpd::serialize(bbpd::resolve_scenario(show_target));
            return 0;
        }
    } catch (const bbpd::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kConfigError;
    } catch (const bbpd::SetupError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kConfigError;
    } catch (const bbpd::SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kNotConverged;
    }
    return kConfigError;
}
