// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0
//
// spdc-bench: design solver, Monte Carlo simulator, and fringe analyzer for
// the double-slit bench. Subcommands: design, simulate, analyze.
// Exit codes: 0 success, 1 infeasible design under --strict, 2 config error,
// 3 runtime error, 4 fit non-convergence.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "spdc/design.hpp"
#include "spdc/fringe.hpp"
#include "spdc/geometry.hpp"
#include "spdc/io.hpp"
#include "spdc/montecarlo.hpp"
#include "spdc/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitFit = 4;

struct ConfigSource {
    std::string path;
    bool paper = false;
    bool threshold = false;
};

void add_config_flags(CLI::App* cmd, ConfigSource& src) {
    auto* opt_config = cmd->add_option("--config", src.path, "Config JSON file");
    auto* opt_paper = cmd->add_flag("--paper", src.paper, "Use the built-in paper design");
    auto* opt_threshold =
        cmd->add_flag("--threshold", src.threshold, "Use the built-in threshold design");
    opt_config->excludes(opt_paper)->excludes(opt_threshold);
    opt_paper->excludes(opt_threshold);
}

spdc::io::RunConfig load_config(const ConfigSource& src) {
    if (src.paper) return spdc::io::parse_config(spdc::presets::paper_config_json());
    if (src.threshold) return spdc::io::parse_config(spdc::presets::threshold_config_json());
    if (src.path.empty()) {
        throw spdc::io::ConfigError("one of --config, --paper, --threshold is required");
    }
    return spdc::io::parse_config_file(src.path);
}

/// Axis grid spec: "lo:hi:n" (inclusive linspace, n may be 0) or a comma
/// list of values.
std::vector<double> parse_axis(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    const auto colon1 = text.find(':');
    try {
        if (colon1 != std::string::npos) {
            const auto colon2 = text.find(':', colon1 + 1);
            if (colon2 == std::string::npos) {
                throw spdc::io::ConfigError(flag + ": expected lo:hi:n");
            }
            const double lo = std::stod(text.substr(0, colon1));
            const double hi = std::stod(text.substr(colon1 + 1, colon2 - colon1 - 1));
            const long n = std::stol(text.substr(colon2 + 1));
            if (n < 0) throw spdc::io::ConfigError(flag + ": count must be non-negative");
            for (long i = 0; i < n; ++i) {
                values.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
            }
        } else {
            std::size_t pos = 0;
            while (pos <= text.size()) {
                const auto comma = text.find(',', pos);
                const std::string tok =
                    text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                : comma - pos);
                if (!tok.empty()) values.push_back(std::stod(tok));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        }
    } catch (const std::invalid_argument&) {
        throw spdc::io::ConfigError(flag + ": malformed grid spec '" + text + "'");
    }
    return values;
}

void print_si_and_paper_units(const char* name, double meters) {
    std::printf("  %-22s %.6g m  (%.4g mm)\n", name, meters, meters * 1e3);
}

void print_design_report(const spdc::OpticalLayout& layout) {
    const spdc::DesignParams p = spdc::params_from_layout(layout);
    const spdc::EntanglementMeasures m = spdc::entanglement_measures(layout);
    const spdc::FeasibilityReport r = spdc::check_feasibility(layout);
    std::printf("design report\n");
    std::printf("  %-22s %.6g m  (%.4g nm)\n", "wavelength", layout.wavelength,
                layout.wavelength * 1e9);
    std::printf("  %-22s %.6g rad  (%.4g mrad)\n", "phi0", layout.phi0, layout.phi0 * 1e3);
    print_si_and_paper_units("source_width w", layout.source_width);
    print_si_and_paper_units("slit_separation s", layout.slit_separation);
    print_si_and_paper_units("slit_distance d", layout.slit_distance);
    print_si_and_paper_units("crystal_thickness x", layout.crystal_thickness);
    print_si_and_paper_units("zone_axial_extent", spdc::zone_axial_extent(layout));
    print_si_and_paper_units("fringe_period", spdc::fringe_period(layout));
    std::printf("  %-22s %.6g\n", "w / wavelength", layout.source_width / layout.wavelength);
    std::printf("  %-22s f=%.6g g=%.6g h=%.6g\n", "recovered params", p.f, p.g, p.h);
    std::printf("  %-22s %.6g\n", "f*g^2*h", p.f * p.g * p.g * p.h);
    std::printf("  %-22s %.6g\n", "h*g^2", p.h * p.g * p.g);
    std::printf("  %-22s %.6g\n", "32*pi*f", 32.0 * 3.14159265358979323846 * p.f);
    std::printf("  %-22s K_pe=%.6g K_ae=%.6g ratio=%.6g%s\n", "entanglement", m.k_pe, m.k_ae,
                m.ratio, m.in_window ? " (in window)" : " (outside window)");
    std::printf("  %-22s resolution=%s (%.3g) discrimination=%s (%.3g rad)\n", "feasibility",
                r.resolution_ok ? "ok" : "FAIL", r.resolution_margin,
                r.discrimination_ok ? "ok" : "FAIL", r.discrimination_margin);
    std::printf("  %-22s width=%s (%.3g m) window=%s (%.3g)\n", "",
                r.width_ok ? "ok" : "FAIL", r.width_margin, r.window_ok ? "ok" : "FAIL",
                r.window_margin);
}

int cmd_design(const ConfigSource& src, const std::string& out_dir, bool strict,
               const std::optional<std::string>& axis_f, const std::optional<std::string>& axis_g,
               const std::optional<std::string>& axis_h,
               const std::optional<std::string>& axis_phi0) {
    const spdc::io::RunConfig config = load_config(src);
    const spdc::OpticalLayout base = spdc::io::effective_layout(config);

    const bool sweeping = axis_f || axis_g || axis_h || axis_phi0;
    if (sweeping) {
        spdc::SweepSpec spec;
        spec.wavelength = base.wavelength;
        spec.slit_distance = base.slit_distance;
        if (axis_f) spec.f_values = parse_axis(*axis_f, "--sweep-f");
        if (axis_g) spec.g_values = parse_axis(*axis_g, "--sweep-g");
        if (axis_h) spec.h_values = parse_axis(*axis_h, "--sweep-h");
        if (axis_phi0) spec.phi0_values = parse_axis(*axis_phi0, "--sweep-phi0");
        const std::vector<spdc::SweepRow> rows = spdc::sweep_designs(spec);
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            spdc::io::write_sweep_csv(out_dir + "/design.csv", rows);
        } else {
            std::fputs(spdc::io::sweep_csv(rows).c_str(), stdout);
        }
        std::fprintf(stderr, "sweep: %zu rows\n", rows.size());
        return kExitOk;
    }

    print_design_report(base);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        spdc::SweepRow row;
        row.params = spdc::params_from_layout(base);
        row.phi0 = base.phi0;
        row.layout = base;
        row.measures = spdc::entanglement_measures(base);
        row.report = spdc::check_feasibility(base);
        row.g2h = row.params.g * row.params.g * row.params.h;
        row.layout_valid = true;
        spdc::io::write_sweep_csv(out_dir + "/design.csv", {row});
    }
    if (strict) {
        const spdc::FeasibilityReport r = spdc::check_feasibility(base);
        if (!(r.resolution_ok && r.discrimination_ok && r.width_ok && r.window_ok)) {
            std::fprintf(stderr, "design is infeasible (--strict)\n");
            return kExitInfeasible;
        }
    }
    return kExitOk;
}

int cmd_simulate(const ConfigSource& src, std::optional<std::uint64_t> pairs,
                 std::optional<std::uint64_t> seed, std::optional<unsigned> workers,
                 std::string out_dir, bool x0_check, bool two_axis) {
    spdc::io::RunConfig config = load_config(src);
    if (pairs) config.n_pairs = *pairs;
    if (seed) config.seed = *seed;
    if (workers) config.workers = *workers;
    if (x0_check) config.mode.incoherent_x0 = true;
    if (two_axis) config.mode.two_axis = true;
    if (config.n_pairs < 1) {
        throw spdc::io::ConfigError("--pairs: must be at least 1");
    }
    if (out_dir.empty()) out_dir = config.output_dir;

    spdc::OpticalLayout layout = spdc::io::effective_layout(config);
    if (config.mode.incoherent_x0) layout.crystal_thickness = 0.0;

    std::filesystem::create_directories(out_dir);

    if (config.mode.two_axis) {
        const double ks = spdc::two_axis_deviation_ks(layout, config.n_pairs, config.seed);
        const std::vector<double> deltas =
            spdc::sample_deviations(layout, config.n_pairs, config.seed);
        double mean = 0.0;
        for (double d : deltas) mean += d;
        mean /= static_cast<double>(deltas.size());
        double var = 0.0;
        for (double d : deltas) var += (d - mean) * (d - mean);
        var /= static_cast<double>(deltas.size() - 1);
        nlohmann::json report = {{"n", config.n_pairs},
                                 {"seed", config.seed},
                                 {"ks_statistic", ks},
                                 {"delta_mean", mean},
                                 {"delta_stddev", std::sqrt(var)},
                                 {"phi0", layout.phi0}};
        spdc::io::detail::write_file(out_dir + "/two_axis_check.json", report.dump(2) + "\n");
        std::printf("two-axis deviation check: KS=%.3g mean=%.3g sd=%.6g (phi0=%.6g)\n", ks,
                    mean, std::sqrt(var), layout.phi0);
        return kExitOk;
    }

    spdc::RunOptions options;
    options.n_pairs = config.n_pairs;
    options.seed = config.seed;
    options.workers = config.workers;
    const spdc::RunResult result = spdc::run_experiment(layout, options);
    const unsigned used = config.workers != 0
                              ? config.workers
                              : std::max(1u, std::thread::hardware_concurrency());

    spdc::io::write_histogram_csv(out_dir + "/histogram.csv", result);
    spdc::io::write_metadata_json(out_dir + "/metadata.json", config, layout, result, used);

    const auto& c = result.counters;
    const std::uint64_t accessible = c.n_single_access + c.n_both_access;
    std::printf("simulated %llu pairs (seed %llu, digest %s)\n",
                static_cast<unsigned long long>(c.n_pairs_sampled),
                static_cast<unsigned long long>(result.seed), result.config_digest.c_str());
    std::printf("  blocked %llu, single-access %llu, both-access %llu\n",
                static_cast<unsigned long long>(c.n_blocked),
                static_cast<unsigned long long>(c.n_single_access),
                static_cast<unsigned long long>(c.n_both_access));
    if (accessible > 0) {
        const double both_share = static_cast<double>(c.n_both_access) / accessible;
        std::printf("  both-access share %.4f, double-slit count share %.4f\n", both_share,
                    spdc::double_slit_count_fraction(both_share));
    }
    std::printf("  outputs: %s/histogram.csv, %s/metadata.json\n", out_dir.c_str(),
                out_dir.c_str());
    return kExitOk;
}

int cmd_analyze(const std::string& histogram_path, const ConfigSource& src, std::string out_dir,
                bool force) {
    const spdc::io::HistogramData data = spdc::io::read_histogram_csv(histogram_path);
    const std::string sidecar =
        (std::filesystem::path(histogram_path).parent_path() / "metadata.json").string();

    spdc::OpticalLayout layout;
    const bool explicit_source = src.paper || src.threshold || !src.path.empty();
    if (explicit_source) {
        layout = spdc::io::effective_layout(load_config(src));
        if (std::filesystem::exists(sidecar)) {
            const spdc::io::MetadataDigests digests = spdc::io::read_metadata_digests(sidecar);
            if (!digests.layout.empty() && digests.layout != spdc::layout_digest(layout)) {
                if (!force) {
                    throw spdc::io::ConfigError(
                        "layout digest mismatch against " + sidecar +
                        " (simulated " + digests.layout + ", supplied " +
                        spdc::layout_digest(layout) + "); pass --force to analyze anyway");
                }
                std::fprintf(stderr, "warning: layout digest mismatch, proceeding (--force)\n");
            }
        }
    } else {
        layout = spdc::io::read_metadata_layout(sidecar);
    }

    const double hint = spdc::fringe_period(layout);
    const spdc::FringeAnalysis fit = spdc::fit_fringes(data.grid, data.total, layout, hint);
    const double margin = spdc::fringe_period_check(fit, layout);

    if (out_dir.empty()) {
        out_dir = std::filesystem::path(histogram_path).parent_path().string();
        if (out_dir.empty()) out_dir = ".";
    }
    std::filesystem::create_directories(out_dir);
    spdc::io::write_analysis_csv(out_dir + "/analysis.csv", fit, margin);
    spdc::io::write_plot_data(out_dir + "/plot_data.txt", data.grid, fit);

    std::printf("fringe fit: period=%.6g m (reference %.6g m, margin %+.3g)\n", fit.period,
                hint, margin);
    std::printf("  visibility=%.4f phase=%.4f rad fringe_fraction=%.4f residual=%.3g\n",
                fit.visibility, fit.phase, fit.fringe_fraction, fit.fit_residual);

    std::uint64_t gated = 0;
    for (std::uint64_t v : data.coinc_a) gated += v;
    if (gated > 10000) {
        const spdc::FringeAnalysis fit_a = spdc::fit_fringes(data.grid, data.coinc_a, layout, hint);
        std::printf("  A-bar-gated coincidences: visibility=%.4f fringe_fraction=%.4f\n",
                    fit_a.visibility, fit_a.fringe_fraction);
    }
    std::printf("  outputs: %s/analysis.csv, %s/plot_data.txt\n", out_dir.c_str(),
                out_dir.c_str());
    if (!fit.converged) {
        std::fprintf(stderr, "fit did not converge (spectrum peak %.6g m)\n",
                     fit.spectrum_peak_period);
        return kExitFit;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPDC double-slit bench: design solver, simulator, fringe analyzer"};
    app.require_subcommand(1);

    ConfigSource design_src, sim_src, ana_src;
    std::string design_out, sim_out, ana_out, ana_histogram;
    bool design_strict = false, sim_x0 = false, sim_two_axis = false, ana_force = false;
    std::optional<std::string> axis_f, axis_g, axis_h, axis_phi0;
    std::optional<std::uint64_t> sim_pairs, sim_seed;
    std::optional<unsigned> sim_workers;

    CLI::App* design = app.add_subcommand("design", "Evaluate or sweep the design algebra");
    add_config_flags(design, design_src);
    design->add_option("--out", design_out, "Output directory for design.csv");
    design->add_flag("--strict", design_strict, "Exit nonzero if the design is infeasible");
    design->add_option("--sweep-f", axis_f, "Grid over f: lo:hi:n or comma list");
    design->add_option("--sweep-g", axis_g, "Grid over g");
    design->add_option("--sweep-h", axis_h, "Grid over h");
    design->add_option("--sweep-phi0", axis_phi0, "Grid over phi0 [rad]");

    CLI::App* simulate = app.add_subcommand("simulate", "Run the Monte Carlo experiment");
    add_config_flags(simulate, sim_src);
    simulate->add_option("--pairs", sim_pairs, "Number of pairs (overrides config)");
    simulate->add_option("--seed", sim_seed, "RNG seed (overrides config)");
    simulate->add_option("--workers", sim_workers, "Worker threads, 0 = auto");
    simulate->add_option("--out", sim_out, "Output directory");
    simulate->add_flag("--x0-check", sim_x0, "Incoherent-source validation mode (x = 0)");
    simulate->add_flag("--two-axis", sim_two_axis, "Two-axis deviation-magnitude check");

    CLI::App* analyze = app.add_subcommand("analyze", "Fit fringes in a histogram CSV");
    analyze->add_option("histogram", ana_histogram, "Histogram CSV path")->required();
    add_config_flags(analyze, ana_src);
    analyze->add_option("--out", ana_out, "Output directory (default: histogram's directory)");
    analyze->add_flag("--force", ana_force, "Proceed despite digest mismatch");

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed()) {
            return cmd_design(design_src, design_out, design_strict, axis_f, axis_g, axis_h,
                              axis_phi0);
        }
        if (simulate->parsed()) {
            return cmd_simulate(sim_src, sim_pairs, sim_seed, sim_workers, sim_out, sim_x0,
                                sim_two_axis);
        }
        if (analyze->parsed()) {
            return cmd_analyze(ana_histogram, ana_src, ana_out, ana_force);
        }
    } catch (const spdc::io::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
