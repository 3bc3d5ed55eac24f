// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace spdc {

/// Full geometric description of the bench, SI units (meters, radians).
///
/// The coordinate model is planar: one transverse axis y and the optical
/// axis z. The source is an aperture of width `source_width` at z = 0 with
/// the activation region a slab of depth `crystal_thickness` behind it
/// (z < 0). Slits are centered at y = +s/2 (slit A) and y = -s/2 (slit B)
/// at z = slit_distance; the screen sits `screen_distance` beyond the slit
/// plane, and the idler detectors at `idler_distance` on the far side of
/// the crystal.
struct OpticalLayout {
    double wavelength = 0.0;               // lambda [m]
    double phi0 = 0.0;                     // 1-d std dev of pair angular deviation [rad]
    double source_width = 0.0;             // w, aperture width at the crystal exit face [m]
    double crystal_thickness = 0.0;        // x, axial extent of the activation region [m]
    double slit_distance = 0.0;            // d, aperture plane to slit plane [m]
    double slit_separation = 0.0;          // s, center to center [m]
    double slit_width = 0.0;               // a [m]
    double idler_distance = 0.0;           // d', aperture plane to idler detectors [m]
    double detector_angular_radius = 0.0;  // rho [rad]
    double screen_distance = 0.0;          // D, slit plane to screen [m]
};

/// Fringe period of the two-slit pattern on the screen, lambda*D/s.
inline double fringe_period(const OpticalLayout& layout) {
    return layout.wavelength * layout.screen_distance / layout.slit_separation;
}

/// Axial depth w*d/s at which the view cones through the aperture to the
/// two slits stop overlapping.
inline double zone_axial_extent(const OpticalLayout& layout) {
    return layout.source_width * layout.slit_distance / layout.slit_separation;
}

/// Checks every layout invariant; throws std::invalid_argument naming the
/// offending field. crystal_thickness may be zero (emitters confined to the
/// aperture plane, used by the incoherent-source validation mode); every
/// other length and angle must be strictly positive.
inline void validate(const OpticalLayout& layout) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(name) + ": must be strictly positive");
        }
    };
    positive(layout.wavelength, "wavelength");
    positive(layout.phi0, "phi0");
    positive(layout.source_width, "source_width");
    positive(layout.slit_distance, "slit_distance");
    positive(layout.slit_separation, "slit_separation");
    positive(layout.slit_width, "slit_width");
    positive(layout.idler_distance, "idler_distance");
    positive(layout.detector_angular_radius, "detector_angular_radius");
    positive(layout.screen_distance, "screen_distance");
    if (!(layout.crystal_thickness >= 0.0) || !std::isfinite(layout.crystal_thickness)) {
        throw std::invalid_argument("crystal_thickness: must be non-negative");
    }
    if (layout.idler_distance < 100.0 * layout.slit_distance) {
        throw std::invalid_argument(
            "idler_distance: must be at least 100 * slit_distance (far-detector condition)");
    }
    if (!(layout.slit_separation / layout.slit_distance < 0.1)) {
        throw std::invalid_argument(
            "slit_separation: s/d must be below 0.1 rad (small-angle validity)");
    }
    if (!(layout.source_width / layout.slit_distance < 0.01)) {
        throw std::invalid_argument(
            "source_width: w/d must be below 0.01 rad (small-angle validity)");
    }
    if (layout.crystal_thickness > zone_axial_extent(layout) * (1.0 + 1e-12)) {
        throw std::invalid_argument(
            "crystal_thickness: exceeds w*d/s (points deeper than the zone apex "
            "see at most one slit)");
    }
}

inline bool is_valid(const OpticalLayout& layout) {
    try {
        validate(layout);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

}  // namespace spdc
