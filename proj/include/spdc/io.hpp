// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdc/design.hpp"
#include "spdc/fringe.hpp"
#include "spdc/layout.hpp"
#include "spdc/montecarlo.hpp"

namespace spdc::io {

/// Configuration or input-file problem; messages are path-qualified.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Explicit-layout entry: the six physics lengths/angles are required,
/// the plumbing fields optional (defaults: a = s/20, d' = 100 d,
/// rho = 2 phi0, D = 1 m).
struct LayoutSpec {
    double wavelength = 0.0;
    double phi0 = 0.0;
    double source_width = 0.0;
    double crystal_thickness = 0.0;
    double slit_distance = 0.0;
    double slit_separation = 0.0;
    std::optional<double> slit_width;
    std::optional<double> idler_distance;
    std::optional<double> detector_angular_radius;
    std::optional<double> screen_distance;
    bool operator==(const LayoutSpec&) const = default;
};

/// Design entry: the bench is derived via the f/g/h algebra; the optional
/// fields override the derived x and the plumbing defaults.
struct DesignSpec {
    double wavelength = 0.0;
    double phi0 = 0.0;
    double f = 1.0;
    double g = 1.0;
    double h = 1.0;
    double slit_distance = 0.0;
    std::optional<double> crystal_thickness;
    std::optional<double> slit_width;
    std::optional<double> idler_distance;
    std::optional<double> detector_angular_radius;
    std::optional<double> screen_distance;
    bool operator==(const DesignSpec&) const = default;
};

struct ModeFlags {
    bool incoherent_x0 = false;  // force x = 0 (source-washout validation)
    bool two_axis = false;       // two-axis deviation-magnitude validation
    bool operator==(const ModeFlags&) const = default;
};

struct RunConfig {
    std::optional<LayoutSpec> layout;
    std::optional<DesignSpec> design;
    std::uint64_t n_pairs = 1000000;
    std::uint64_t seed = 0;
    unsigned workers = 0;  // 0 = auto
    std::string output_dir = ".";
    ModeFlags mode;
    bool operator==(const RunConfig&) const = default;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const char* path,
                                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError(std::string(path) + "." + key + ": unknown key '" + key + "'");
        }
    }
}

inline double require_number(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) {
        throw ConfigError(path + "." + key + ": missing required key");
    }
    if (!obj[key].is_number()) {
        throw ConfigError(path + "." + key + ": expected a number");
    }
    return obj[key].get<double>();
}

inline std::optional<double> optional_number(const json& obj, const std::string& path,
                                             const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj[key].is_number()) {
        throw ConfigError(path + "." + key + ": expected a number");
    }
    return obj[key].get<double>();
}

inline std::uint64_t optional_count(const json& obj, const std::string& path, const char* key,
                                    std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned()) {
        throw ConfigError(path + "." + key + ": expected a non-negative integer");
    }
    return obj[key].get<std::uint64_t>();
}

}  // namespace detail

/// Parses and fully validates a config document. Unknown keys are rejected
/// (strict mode) with the offending key named; every failure message is
/// path-qualified.
inline RunConfig parse_config(const std::string& text) {
    using nlohmann::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("$: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("$: expected a JSON object");
    }
    detail::reject_unknown_keys(root, "$",
                                {"layout", "design", "n_pairs", "seed", "workers",
                                 "output_dir", "mode"});
    const bool has_layout = root.contains("layout");
    const bool has_design = root.contains("design");
    if (has_layout && has_design) {
        throw ConfigError("$: exactly one of 'layout' or 'design' must be present (both given)");
    }
    if (!has_layout && !has_design) {
        throw ConfigError("$: exactly one of 'layout' or 'design' must be present (none given)");
    }

    RunConfig config;
    if (has_layout) {
        const json& obj = root["layout"];
        if (!obj.is_object()) throw ConfigError("$.layout: expected an object");
        detail::reject_unknown_keys(obj, "$.layout",
                                    {"wavelength", "phi0", "source_width", "crystal_thickness",
                                     "slit_distance", "slit_separation", "slit_width",
                                     "idler_distance", "detector_angular_radius",
                                     "screen_distance"});
        LayoutSpec spec;
        spec.wavelength = detail::require_number(obj, "$.layout", "wavelength");
        spec.phi0 = detail::require_number(obj, "$.layout", "phi0");
        spec.source_width = detail::require_number(obj, "$.layout", "source_width");
        spec.crystal_thickness = detail::require_number(obj, "$.layout", "crystal_thickness");
        spec.slit_distance = detail::require_number(obj, "$.layout", "slit_distance");
        spec.slit_separation = detail::require_number(obj, "$.layout", "slit_separation");
        spec.slit_width = detail::optional_number(obj, "$.layout", "slit_width");
        spec.idler_distance = detail::optional_number(obj, "$.layout", "idler_distance");
        spec.detector_angular_radius =
            detail::optional_number(obj, "$.layout", "detector_angular_radius");
        spec.screen_distance = detail::optional_number(obj, "$.layout", "screen_distance");
        config.layout = spec;
    } else {
        const json& obj = root["design"];
        if (!obj.is_object()) throw ConfigError("$.design: expected an object");
        detail::reject_unknown_keys(obj, "$.design",
                                    {"wavelength", "phi0", "f", "g", "h", "slit_distance",
                                     "crystal_thickness", "slit_width", "idler_distance",
                                     "detector_angular_radius", "screen_distance"});
        DesignSpec spec;
        spec.wavelength = detail::require_number(obj, "$.design", "wavelength");
        spec.phi0 = detail::require_number(obj, "$.design", "phi0");
        spec.f = detail::require_number(obj, "$.design", "f");
        spec.g = detail::require_number(obj, "$.design", "g");
        spec.h = detail::require_number(obj, "$.design", "h");
        spec.slit_distance = detail::require_number(obj, "$.design", "slit_distance");
        spec.crystal_thickness = detail::optional_number(obj, "$.design", "crystal_thickness");
        spec.slit_width = detail::optional_number(obj, "$.design", "slit_width");
        spec.idler_distance = detail::optional_number(obj, "$.design", "idler_distance");
        spec.detector_angular_radius =
            detail::optional_number(obj, "$.design", "detector_angular_radius");
        spec.screen_distance = detail::optional_number(obj, "$.design", "screen_distance");
        config.design = spec;
    }

    config.n_pairs = detail::optional_count(root, "$", "n_pairs", config.n_pairs);
    if (config.n_pairs < 1) {
        throw ConfigError("$.n_pairs: must be at least 1");
    }
    config.seed = detail::optional_count(root, "$", "seed", config.seed);
    config.workers =
        static_cast<unsigned>(detail::optional_count(root, "$", "workers", config.workers));
    if (root.contains("output_dir")) {
        if (!root["output_dir"].is_string()) {
            throw ConfigError("$.output_dir: expected a string");
        }
        config.output_dir = root["output_dir"].get<std::string>();
    }
    if (root.contains("mode")) {
        const nlohmann::json& obj = root["mode"];
        if (!obj.is_object()) throw ConfigError("$.mode: expected an object");
        detail::reject_unknown_keys(obj, "$.mode", {"incoherent_x0", "two_axis"});
        for (const char* key : {"incoherent_x0", "two_axis"}) {
            if (obj.contains(key) && !obj[key].is_boolean()) {
                throw ConfigError(std::string("$.mode.") + key + ": expected a boolean");
            }
        }
        config.mode.incoherent_x0 = obj.value("incoherent_x0", false);
        config.mode.two_axis = obj.value("two_axis", false);
    }
    return config;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// Canonical JSON text; parse_config(serialize_config(c)) == c for every
/// valid config.
inline std::string serialize_config(const RunConfig& config) {
    nlohmann::json root;
    auto put_optional = [](nlohmann::json& obj, const char* key,
                           const std::optional<double>& v) {
        if (v) obj[key] = *v;
    };
    if (config.layout) {
        nlohmann::json obj;
        obj["wavelength"] = config.layout->wavelength;
        obj["phi0"] = config.layout->phi0;
        obj["source_width"] = config.layout->source_width;
        obj["crystal_thickness"] = config.layout->crystal_thickness;
        obj["slit_distance"] = config.layout->slit_distance;
        obj["slit_separation"] = config.layout->slit_separation;
        put_optional(obj, "slit_width", config.layout->slit_width);
        put_optional(obj, "idler_distance", config.layout->idler_distance);
        put_optional(obj, "detector_angular_radius", config.layout->detector_angular_radius);
        put_optional(obj, "screen_distance", config.layout->screen_distance);
        root["layout"] = obj;
    }
    if (config.design) {
        nlohmann::json obj;
        obj["wavelength"] = config.design->wavelength;
        obj["phi0"] = config.design->phi0;
        obj["f"] = config.design->f;
        obj["g"] = config.design->g;
        obj["h"] = config.design->h;
        obj["slit_distance"] = config.design->slit_distance;
        put_optional(obj, "crystal_thickness", config.design->crystal_thickness);
        put_optional(obj, "slit_width", config.design->slit_width);
        put_optional(obj, "idler_distance", config.design->idler_distance);
        put_optional(obj, "detector_angular_radius", config.design->detector_angular_radius);
        put_optional(obj, "screen_distance", config.design->screen_distance);
        root["design"] = obj;
    }
    root["n_pairs"] = config.n_pairs;
    root["seed"] = config.seed;
    root["workers"] = config.workers;
    root["output_dir"] = config.output_dir;
    root["mode"] = {{"incoherent_x0", config.mode.incoherent_x0},
                    {"two_axis", config.mode.two_axis}};
    return root.dump(2) + "\n";
}

/// Builds and validates the bench described by the config. Layout-invariant
/// violations surface as path-qualified ConfigErrors.
inline OpticalLayout effective_layout(const RunConfig& config) {
    try {
        if (config.layout) {
            const LayoutSpec& s = *config.layout;
            OpticalLayout layout;
            layout.wavelength = s.wavelength;
            layout.phi0 = s.phi0;
            layout.source_width = s.source_width;
            layout.crystal_thickness = s.crystal_thickness;
            layout.slit_distance = s.slit_distance;
            layout.slit_separation = s.slit_separation;
            layout.slit_width = s.slit_width.value_or(s.slit_separation / 20.0);
            layout.idler_distance = s.idler_distance.value_or(100.0 * s.slit_distance);
            layout.detector_angular_radius =
                s.detector_angular_radius.value_or(2.0 * s.phi0);
            layout.screen_distance = s.screen_distance.value_or(1.0);
            validate(layout);
            return layout;
        }
        const DesignSpec& s = *config.design;
        LayoutOverrides overrides;
        overrides.crystal_thickness = s.crystal_thickness;
        overrides.slit_width = s.slit_width;
        overrides.idler_distance = s.idler_distance;
        overrides.detector_angular_radius = s.detector_angular_radius;
        overrides.screen_distance = s.screen_distance;
        return layout_from_design(s.wavelength, s.phi0, DesignParams{s.f, s.g, s.h},
                                  s.slit_distance, overrides);
    } catch (const std::invalid_argument& e) {
        const char* section = config.layout ? "$.layout: " : "$.design: ";
        throw ConfigError(section + std::string(e.what()));
    }
}

namespace detail {
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(path + ": cannot open for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}
}  // namespace detail

inline constexpr const char* kHistogramHeader = "bin_center_m,total,coinc_A,coinc_B,no_coinc";

inline std::string histogram_csv(const RunResult& result) {
    std::string out(kHistogramHeader);
    out += "\n";
    for (int b = 0; b < result.grid.n_bins; ++b) {
        out += detail::fmt_double(result.grid.center(b));
        char buf[128];
        std::snprintf(buf, sizeof buf, ",%llu,%llu,%llu,%llu\n",
                      static_cast<unsigned long long>(result.total[b]),
                      static_cast<unsigned long long>(result.coinc_a[b]),
                      static_cast<unsigned long long>(result.coinc_b[b]),
                      static_cast<unsigned long long>(result.no_coinc[b]));
        out += buf;
    }
    return out;
}

inline void write_histogram_csv(const std::string& path, const RunResult& result) {
    detail::write_file(path, histogram_csv(result));
}

struct HistogramData {
    ScreenGrid grid;
    std::vector<std::uint64_t> total;
    std::vector<std::uint64_t> coinc_a;
    std::vector<std::uint64_t> coinc_b;
    std::vector<std::uint64_t> no_coinc;
};

/// Reads a histogram CSV in the simulator's bin format; errors are
/// qualified by path and line number.
inline HistogramData read_histogram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open histogram file");
    }
    std::string line;
    if (!std::getline(in, line) || line != kHistogramHeader) {
        throw ConfigError(path + ":1: expected header '" + kHistogramHeader + "'");
    }
    HistogramData data;
    std::vector<double> centers;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        double center;
        unsigned long long total, ca, cb, nc;
        if (std::sscanf(line.c_str(), "%lf,%llu,%llu,%llu,%llu", &center, &total, &ca, &cb,
                        &nc) != 5) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed row");
        }
        centers.push_back(center);
        data.total.push_back(total);
        data.coinc_a.push_back(ca);
        data.coinc_b.push_back(cb);
        data.no_coinc.push_back(nc);
    }
    if (centers.size() < 2) {
        throw ConfigError(path + ": histogram needs at least two bins");
    }
    data.grid.n_bins = static_cast<int>(centers.size());
    data.grid.bin_width = (centers.back() - centers.front()) / (centers.size() - 1);
    data.grid.window_half = -(centers.front() - 0.5 * data.grid.bin_width);
    return data;
}

inline std::string metadata_json(const RunConfig& config, const OpticalLayout& layout,
                                 const RunResult& result, unsigned workers_used) {
    nlohmann::json root;
    root["layout"] = {{"wavelength", layout.wavelength},
                      {"phi0", layout.phi0},
                      {"source_width", layout.source_width},
                      {"crystal_thickness", layout.crystal_thickness},
                      {"slit_distance", layout.slit_distance},
                      {"slit_separation", layout.slit_separation},
                      {"slit_width", layout.slit_width},
                      {"idler_distance", layout.idler_distance},
                      {"detector_angular_radius", layout.detector_angular_radius},
                      {"screen_distance", layout.screen_distance}};
    root["n_pairs"] = config.n_pairs;
    root["seed"] = result.seed;
    root["workers_used"] = workers_used;
    root["mode"] = {{"incoherent_x0", config.mode.incoherent_x0},
                    {"two_axis", config.mode.two_axis}};
    root["counters"] = {{"n_pairs_sampled", result.counters.n_pairs_sampled},
                        {"n_blocked", result.counters.n_blocked},
                        {"n_single_access", result.counters.n_single_access},
                        {"n_both_access", result.counters.n_both_access},
                        {"n_outside_window", result.counters.n_outside_window}};
    root["quantization"] = {{"transverse", result.quant_step_transverse},
                            {"axial", result.quant_step_axial}};
    root["digest"] = result.config_digest;
    root["layout_digest"] = layout_digest(layout);
    return root.dump(2) + "\n";
}

inline void write_metadata_json(const std::string& path, const RunConfig& config,
                                const OpticalLayout& layout, const RunResult& result,
                                unsigned workers_used) {
    detail::write_file(path, metadata_json(config, layout, result, workers_used));
}

/// Digest fields of a metadata sidecar.
struct MetadataDigests {
    std::string run;
    std::string layout;
};

inline MetadataDigests read_metadata_digests(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open metadata file");
    }
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": malformed JSON: " + e.what());
    }
    MetadataDigests digests;
    digests.run = root.value("digest", "");
    digests.layout = root.value("layout_digest", "");
    return digests;
}

/// Reads the layout echo of a metadata sidecar back into an OpticalLayout.
inline OpticalLayout read_metadata_layout(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open metadata file");
    }
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": malformed JSON: " + e.what());
    }
    if (!root.contains("layout") || !root["layout"].is_object()) {
        throw ConfigError(path + ": $.layout: missing layout echo");
    }
    const nlohmann::json& obj = root["layout"];
    OpticalLayout layout;
    auto get = [&](const char* key) {
        if (!obj.contains(key) || !obj[key].is_number()) {
            throw ConfigError(path + ": $.layout." + key + ": missing or non-numeric");
        }
        return obj[key].get<double>();
    };
    layout.wavelength = get("wavelength");
    layout.phi0 = get("phi0");
    layout.source_width = get("source_width");
    layout.crystal_thickness = get("crystal_thickness");
    layout.slit_distance = get("slit_distance");
    layout.slit_separation = get("slit_separation");
    layout.slit_width = get("slit_width");
    layout.idler_distance = get("idler_distance");
    layout.detector_angular_radius = get("detector_angular_radius");
    layout.screen_distance = get("screen_distance");
    validate(layout);
    return layout;
}

inline std::string analysis_csv(const FringeAnalysis& analysis, double period_margin) {
    std::string out =
        "period_m,visibility,phase_rad,fringe_fraction,fit_residual,raw_visibility,"
        "spectrum_peak_period_m,period_check_margin,converged\n";
    out += detail::fmt_double(analysis.period) + "," + detail::fmt_double(analysis.visibility) +
           "," + detail::fmt_double(analysis.phase) + "," +
           detail::fmt_double(analysis.fringe_fraction) + "," +
           detail::fmt_double(analysis.fit_residual) + "," +
           detail::fmt_double(analysis.raw_visibility) + "," +
           detail::fmt_double(analysis.spectrum_peak_period) + "," +
           detail::fmt_double(period_margin) + "," + (analysis.converged ? "1" : "0") + "\n";
    return out;
}

inline void write_analysis_csv(const std::string& path, const FringeAnalysis& analysis,
                               double period_margin) {
    detail::write_file(path, analysis_csv(analysis, period_margin));
}

/// Two-column whitespace-separated (position, model-fit) file for external
/// plotting alongside the raw histogram.
inline void write_plot_data(const std::string& path, const ScreenGrid& grid,
                            const FringeAnalysis& analysis) {
    std::string out;
    for (int b = 0; b < grid.n_bins && b < static_cast<int>(analysis.model.size()); ++b) {
        out += detail::fmt_double(grid.center(b));
        out += " ";
        out += detail::fmt_double(analysis.model[b]);
        out += "\n";
    }
    detail::write_file(path, out);
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "f,g,h,phi0,w,s,d,x,k_pe,k_ae,ratio,g2h,"
        "resolution_ok,discrimination_ok,width_ok,window_ok,"
        "resolution_margin,discrimination_margin,width_margin,window_margin\n";
    for (const SweepRow& row : rows) {
        out += detail::fmt_double(row.params.f) + "," + detail::fmt_double(row.params.g) + "," +
               detail::fmt_double(row.params.h) + "," + detail::fmt_double(row.phi0) + "," +
               detail::fmt_double(row.layout.source_width) + "," +
               detail::fmt_double(row.layout.slit_separation) + "," +
               detail::fmt_double(row.layout.slit_distance) + "," +
               detail::fmt_double(row.layout.crystal_thickness) + "," +
               detail::fmt_double(row.measures.k_pe) + "," +
               detail::fmt_double(row.measures.k_ae) + "," +
               detail::fmt_double(row.measures.ratio) + "," + detail::fmt_double(row.g2h) + "," +
               (row.report.resolution_ok ? "1" : "0") + "," +
               (row.report.discrimination_ok ? "1" : "0") + "," +
               (row.report.width_ok ? "1" : "0") + "," + (row.report.window_ok ? "1" : "0") +
               "," + detail::fmt_double(row.report.resolution_margin) + "," +
               detail::fmt_double(row.report.discrimination_margin) + "," +
               detail::fmt_double(row.report.width_margin) + "," +
               detail::fmt_double(row.report.window_margin) + "\n";
    }
    return out;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    detail::write_file(path, sweep_csv(rows));
}

}  // namespace spdc::io
