// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>

#include "spdc/layout.hpp"

namespace spdc {

/// Which slits an emission point can illuminate through the source aperture.
enum class SlitAccess { None, AOnly, BOnly, Both };

/// Emission point inside the crystal. `transverse` is the signed distance y
/// from the optical axis, `depth` the distance zeta measured backward from
/// the aperture plane into the crystal (depth >= 0).
struct SourcePoint {
    double transverse = 0.0;  // y [m]
    double depth = 0.0;       // zeta [m]
};

/// Small-angle crossing of the aperture plane for the ray from (y, -zeta)
/// to the center of slit A (+s/2) or slit B (-s/2): y0 = y +- zeta*s/(2d).
/// Boundary points classify as accessible (closed intervals).
inline SlitAccess classify_slit_access(const SourcePoint& p, const OpticalLayout& layout) {
    const double shift = p.depth * layout.slit_separation / (2.0 * layout.slit_distance);
    const double half_aperture = 0.5 * layout.source_width;
    const bool sees_a = std::abs(p.transverse + shift) <= half_aperture;
    const bool sees_b = std::abs(p.transverse - shift) <= half_aperture;
    if (sees_a && sees_b) return SlitAccess::Both;
    if (sees_a) return SlitAccess::AOnly;
    if (sees_b) return SlitAccess::BOnly;
    return SlitAccess::None;
}

/// Widest single-access transverse extent, w/2 + (s/2d)*x. Sampling over
/// |y| <= this half-width never excludes an accessible point.
inline double sampling_half_width(const OpticalLayout& layout) {
    return 0.5 * layout.source_width +
           layout.crystal_thickness * layout.slit_separation / (2.0 * layout.slit_distance);
}

/// Area-weighted fraction of slit-accessible points that see both slits:
///   integral_0^x (w - zeta*s/d) dzeta / integral_0^x (w + zeta*s/d) dzeta.
/// The x -> 0 limit is 1 (every point sits at the aperture).
inline double both_access_fraction(const OpticalLayout& layout) {
    const double x = layout.crystal_thickness;
    if (x > zone_axial_extent(layout) * (1.0 + 1e-12)) {
        throw std::invalid_argument(
            "both_access_fraction: crystal_thickness exceeds w*d/s");
    }
    if (x == 0.0) return 1.0;
    const double w = layout.source_width;
    const double half_taper = layout.slit_separation * x * x / (2.0 * layout.slit_distance);
    return (w * x - half_taper) / (w * x + half_taper);
}

/// Share of counts beyond the slits that are double-slit counts when a
/// fraction p_both of accessible points feed two slits and the rest one:
/// 2p/(1+p).
inline double double_slit_count_fraction(double p_both) {
    if (!(p_both >= 0.0 && p_both <= 1.0)) {
        throw std::invalid_argument("double_slit_count_fraction: p_both must lie in [0,1]");
    }
    return 2.0 * p_both / (1.0 + p_both);
}

}  // namespace spdc
