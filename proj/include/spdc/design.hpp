// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spdc/layout.hpp"

namespace spdc {

/// The three multipliers that turn the design inequalities into equations:
///   K_pe = f * K_ae          (degree of entanglement)
///   s/d  = 4 g phi0          (discriminating A from B)
///   lambda/s = 2 h * w/d     (double-slit pattern resolution)
/// Feasibility of the strict inequalities requires f > 1, g > 1/4, h > 1/2.
struct DesignParams {
    double f = 1.0;
    double g = 1.0;
    double h = 1.0;
};

/// Potential entanglement K_pe = x/lambda and actual entanglement
/// K_ae = (pi/2)/phi0, with the design-window flag 0.5 < K_ae/K_pe < 1.
struct EntanglementMeasures {
    double k_pe = 0.0;
    double k_ae = 0.0;
    double ratio = 0.0;  // k_ae / k_pe
    bool in_window = false;
};

/// Signed margins for the three design inequalities plus the entanglement
/// window; each flag equals the sign test of its margin.
struct FeasibilityReport {
    bool resolution_ok = false;      // lambda/s > w/d
    bool discrimination_ok = false;  // s/d > phi0
    bool width_ok = false;           // w < lambda/phi0
    bool window_ok = false;          // 0.5 < K_ae/K_pe < 1
    double resolution_margin = 0.0;      // lambda/s - w/d (dimensionless)
    double discrimination_margin = 0.0;  // s/d - phi0 [rad]
    double width_margin = 0.0;           // lambda/phi0 - w [m]
    double window_margin = 0.0;          // min(ratio - 0.5, 1 - ratio)
};

namespace detail {
inline void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + ": must be strictly positive");
    }
}
}  // namespace detail

/// phi0 = 1 / (32 pi f g^2 h).
inline double phi0_from_fgh(const DesignParams& p) {
    detail::require_positive(p.f, "f");
    detail::require_positive(p.g, "g");
    detail::require_positive(p.h, "h");
    return 1.0 / (32.0 * std::numbers::pi * p.f * p.g * p.g * p.h);
}

/// w = lambda / (8 g h phi0).
inline double width_from_design(double wavelength, double phi0, const DesignParams& p) {
    detail::require_positive(wavelength, "wavelength");
    detail::require_positive(phi0, "phi0");
    detail::require_positive(p.g, "g");
    detail::require_positive(p.h, "h");
    return wavelength / (8.0 * p.g * p.h * phi0);
}

/// Plumbing defaults for the fields the design algebra does not fix:
/// slit_width a = s/20, screen_distance D = 1 m, idler_distance d' = 100 d,
/// detector_angular_radius rho = 2 phi0.
struct LayoutOverrides {
    std::optional<double> crystal_thickness;  // explicit x override
    std::optional<double> slit_width;
    std::optional<double> screen_distance;
    std::optional<double> idler_distance;
    std::optional<double> detector_angular_radius;
};

namespace detail {
inline OpticalLayout build_layout_from_design(double wavelength, double phi0,
                                              const DesignParams& p, double slit_distance,
                                              const LayoutOverrides& ov) {
    OpticalLayout layout;
    layout.wavelength = wavelength;
    layout.phi0 = phi0;
    layout.slit_distance = slit_distance;
    layout.slit_separation = 4.0 * p.g * phi0 * slit_distance;
    layout.source_width = width_from_design(wavelength, phi0, p);
    // x tied to the design: the crystal is as thick as half the zone depth.
    layout.crystal_thickness = ov.crystal_thickness.value_or(
        layout.source_width * slit_distance / (2.0 * layout.slit_separation));
    layout.slit_width = ov.slit_width.value_or(layout.slit_separation / 20.0);
    layout.screen_distance = ov.screen_distance.value_or(1.0);
    layout.idler_distance = ov.idler_distance.value_or(100.0 * slit_distance);
    layout.detector_angular_radius = ov.detector_angular_radius.value_or(2.0 * phi0);
    return layout;
}
}  // namespace detail

/// Builds the full bench from (lambda, phi0, f, g, h, d):
///   s = 4 g phi0 d,  w = lambda/(8 g h phi0),  x = w d/(2 s),
/// with the plumbing defaults above. The f input does not enter the
/// geometry; the layout's effective f is recovered by params_from_layout.
/// Throws if the resulting layout violates any OpticalLayout invariant.
inline OpticalLayout layout_from_design(double wavelength, double phi0, const DesignParams& p,
                                        double slit_distance,
                                        const LayoutOverrides& overrides = {}) {
    detail::require_positive(slit_distance, "slit_distance");
    detail::require_positive(p.f, "f");
    OpticalLayout layout =
        detail::build_layout_from_design(wavelength, phi0, p, slit_distance, overrides);
    validate(layout);
    return layout;
}

/// Inverts the three defining equations:
///   g = (s/d)/(4 phi0),  h = (lambda/s)/(2 w/d),  f = (x/lambda)*(2 phi0/pi).
inline DesignParams params_from_layout(const OpticalLayout& layout) {
    DesignParams p;
    p.g = layout.slit_separation / (4.0 * layout.phi0 * layout.slit_distance);
    p.h = (layout.wavelength / layout.slit_separation) /
          (2.0 * layout.source_width / layout.slit_distance);
    p.f = (layout.crystal_thickness / layout.wavelength) *
          (2.0 * layout.phi0 / std::numbers::pi);
    return p;
}

inline EntanglementMeasures entanglement_measures(const OpticalLayout& layout) {
    EntanglementMeasures m;
    m.k_pe = layout.crystal_thickness / layout.wavelength;
    m.k_ae = (std::numbers::pi / 2.0) / layout.phi0;
    m.ratio = m.k_ae / m.k_pe;
    m.in_window = m.ratio > 0.5 && m.ratio < 1.0;
    return m;
}

/// Evaluates the three inequalities plus the entanglement window with signed
/// margins; infeasible designs return a report, never an error.
inline FeasibilityReport check_feasibility(const OpticalLayout& layout) {
    FeasibilityReport r;
    r.resolution_margin = layout.wavelength / layout.slit_separation -
                          layout.source_width / layout.slit_distance;
    r.discrimination_margin = layout.slit_separation / layout.slit_distance - layout.phi0;
    r.width_margin = layout.wavelength / layout.phi0 - layout.source_width;
    const EntanglementMeasures m = entanglement_measures(layout);
    r.window_margin = std::min(m.ratio - 0.5, 1.0 - m.ratio);
    r.resolution_ok = r.resolution_margin > 0.0;
    r.discrimination_ok = r.discrimination_margin > 0.0;
    r.width_ok = r.width_margin > 0.0;
    r.window_ok = r.window_margin > 0.0;
    return r;
}

/// One grid point of a design sweep. `layout_valid` records whether the
/// constructed bench satisfies the OpticalLayout invariants; rows are
/// evaluated either way so sweeps can explore infeasible territory.
struct SweepRow {
    DesignParams params;
    double phi0 = 0.0;
    OpticalLayout layout;
    EntanglementMeasures measures;
    FeasibilityReport report;
    double g2h = 0.0;
    bool layout_valid = false;
};

/// Grid axes for sweep_designs. Absent axes are resolved through the
/// identity phi0 * 32 pi f g^2 h = 1:
///   - phi0 absent: phi0 = phi0_from_fgh (absent f/g/h default to 1);
///   - phi0 present, h absent: h = 1/(32 pi f g^2 phi0);
///   - phi0 present, g absent (h given): g = sqrt(1/(32 pi f h phi0));
///   - phi0 present, g and h absent: g = h = (32 pi f phi0)^(-1/3).
/// When all four are given they are taken as-is (possibly inconsistent).
struct SweepSpec {
    double wavelength = 0.0;
    double slit_distance = 0.0;
    std::optional<std::vector<double>> f_values;
    std::optional<std::vector<double>> g_values;
    std::optional<std::vector<double>> h_values;
    std::optional<std::vector<double>> phi0_values;
    LayoutOverrides overrides;
};

/// Evaluates the design algebra over the grid, one row per point, ordered
/// lexicographically in (f, g, h, phi0) grid indices.
inline std::vector<SweepRow> sweep_designs(const SweepSpec& spec) {
    detail::require_positive(spec.wavelength, "wavelength");
    detail::require_positive(spec.slit_distance, "slit_distance");
    const std::vector<double> one{1.0};
    const bool have_f = spec.f_values.has_value();
    const bool have_g = spec.g_values.has_value();
    const bool have_h = spec.h_values.has_value();
    const bool have_phi0 = spec.phi0_values.has_value();
    const std::vector<double>& fs = have_f ? *spec.f_values : one;
    const std::vector<double>& gs = have_g ? *spec.g_values : one;
    const std::vector<double>& hs = have_h ? *spec.h_values : one;
    const std::vector<double>& phis = have_phi0 ? *spec.phi0_values : one;
    constexpr double k32pi = 32.0 * std::numbers::pi;

    std::vector<SweepRow> rows;
    rows.reserve(fs.size() * gs.size() * hs.size() * phis.size());
    for (double f : fs) {
        for (double g_in : gs) {
            for (double h_in : hs) {
                for (double phi_in : phis) {
                    DesignParams p{f, g_in, h_in};
                    double phi0;
                    if (!have_phi0) {
                        phi0 = phi0_from_fgh(p);
                    } else {
                        phi0 = phi_in;
                        if (!have_h && have_g) {
                            p.h = 1.0 / (k32pi * p.f * p.g * p.g * phi0);
                        } else if (!have_g && have_h) {
                            p.g = std::sqrt(1.0 / (k32pi * p.f * p.h * phi0));
                        } else if (!have_g && !have_h) {
                            p.g = p.h = std::cbrt(1.0 / (k32pi * p.f * phi0));
                        }
                    }
                    SweepRow row;
                    row.params = p;
                    row.phi0 = phi0;
                    row.layout = detail::build_layout_from_design(
                        spec.wavelength, phi0, p, spec.slit_distance, spec.overrides);
                    row.layout_valid = is_valid(row.layout);
                    row.measures = entanglement_measures(row.layout);
                    row.report = check_feasibility(row.layout);
                    row.g2h = p.g * p.g * p.h;
                    rows.push_back(row);
                }
            }
        }
    }
    return rows;
}

}  // namespace spdc
