// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "spdc/geometry.hpp"
#include "spdc/histogram.hpp"
#include "spdc/layout.hpp"

namespace spdc {

inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

namespace detail {
/// hypot(axial, transverse) - axial, computed without cancellation.
inline double path_excess(double axial, double transverse) {
    return transverse * transverse / (std::hypot(axial, transverse) + axial);
}
}  // namespace detail

/// Single-slit diffraction envelope sinc^2(pi a u / lambda) with u the
/// direction sine of the screen point measured from the optical axis. Both
/// slits share this envelope (collimated-illumination Fraunhofer limit), so
/// the window of +-40 fringe periods spans exactly the central lobe plus
/// the first side lobes.
inline double slit_envelope(double y_screen, const OpticalLayout& layout) {
    const double u = y_screen / std::hypot(layout.screen_distance, y_screen);
    const double arg = std::numbers::pi * layout.slit_width * u / layout.wavelength;
    const double s = sinc(arg);
    return s * s;
}

/// Unnormalized screen intensity for an emission point with the given slit
/// access: coherent sum over the accessible slits of exp(i 2 pi L_j/lambda)
/// under the shared envelope, with L_j the exact origin->slit_j->screen
/// path length (the common axial length drops out of the sum).
inline double screen_intensity(const SourcePoint& origin, SlitAccess access, double y_screen,
                               const OpticalLayout& layout) {
    if (access == SlitAccess::None) {
        throw std::logic_error("screen_intensity: NONE-access origin cannot reach the screen");
    }
    const double source_leg = layout.slit_distance + origin.depth;
    const double k = 2.0 * std::numbers::pi / layout.wavelength;
    double re = 0.0, im = 0.0;
    for (int side = 0; side < 2; ++side) {
        const bool is_a = side == 0;
        if (is_a && access == SlitAccess::BOnly) continue;
        if (!is_a && access == SlitAccess::AOnly) continue;
        const double y_slit = (is_a ? 0.5 : -0.5) * layout.slit_separation;
        const double excess = detail::path_excess(source_leg, y_slit - origin.transverse) +
                              detail::path_excess(layout.screen_distance, y_screen - y_slit);
        re += std::cos(k * excess);
        im += std::sin(k * excess);
    }
    return slit_envelope(y_screen, layout) * (re * re + im * im);
}

/// Normalized probability density of the signal's screen coordinate for one
/// emission point, over the +-40-period screen window. Normalization uses
/// composite Simpson quadrature fine enough to resolve the fringes to
/// well below 1e-9 relative error.
class ScreenDensity {
public:
    ScreenDensity(const SourcePoint& origin, SlitAccess access, const OpticalLayout& layout)
        : origin_(origin), access_(access), layout_(&layout),
          grid_(ScreenGrid::for_layout(layout)) {
        constexpr int n_intervals = 1 << 16;
        const double h = (grid_.y_max() - grid_.y_min()) / n_intervals;
        double sum = screen_intensity(origin_, access_, grid_.y_min(), layout) +
                     screen_intensity(origin_, access_, grid_.y_max(), layout);
        for (int i = 1; i < n_intervals; ++i) {
            const double w = (i % 2 == 1) ? 4.0 : 2.0;
            sum += w * screen_intensity(origin_, access_, grid_.y_min() + i * h, layout);
        }
        normalization_ = sum * h / 3.0;
    }

    double operator()(double y_screen) const {
        if (y_screen < grid_.y_min() || y_screen > grid_.y_max()) return 0.0;
        return screen_intensity(origin_, access_, y_screen, *layout_) / normalization_;
    }

    const ScreenGrid& grid() const { return grid_; }

private:
    SourcePoint origin_;
    SlitAccess access_;
    const OpticalLayout* layout_;
    ScreenGrid grid_;
    double normalization_ = 1.0;
};

inline ScreenDensity signal_screen_density(const SourcePoint& origin, SlitAccess access,
                                           const OpticalLayout& layout) {
    return ScreenDensity(origin, access, layout);
}

/// Inverse-CDF sampler over a 2048-point tabulation of the screen density
/// (piecewise-constant cells, midpoint-sampled). The normalization constant
/// cancels, so the table stores raw intensities.
class DensityTable {
public:
    static constexpr int kCells = 2048;

    DensityTable(const SourcePoint& origin, SlitAccess access, const OpticalLayout& layout,
                 const ScreenGrid& grid)
        : y_min_(grid.y_min()), cell_width_((grid.y_max() - grid.y_min()) / kCells) {
        cumulative_.resize(kCells + 1);
        cumulative_[0] = 0.0;
        for (int i = 0; i < kCells; ++i) {
            const double mid = y_min_ + (i + 0.5) * cell_width_;
            cumulative_[i + 1] = cumulative_[i] + screen_intensity(origin, access, mid, layout);
        }
    }

    /// Maps a uniform u in [0,1) to a screen coordinate.
    double sample(double u) const {
        const double total = cumulative_.back();
        const double target = u * total;
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, target);
        const int cell = std::max(0, static_cast<int>(it - cumulative_.begin()) - 1);
        const double mass = cumulative_[cell + 1] - cumulative_[cell];
        const double frac = mass > 0.0 ? (target - cumulative_[cell]) / mass : 0.5;
        return y_min_ + (cell + frac) * cell_width_;
    }

private:
    double y_min_;
    double cell_width_;
    std::vector<double> cumulative_;
};

/// Density tables keyed by quantized origin (steps w/64 transverse, x/64
/// axial) and access class. Quantization bounds the table count; any worker
/// computing a cell produces bit-identical values, so lazy shared
/// construction preserves the determinism contract.
class DensityCache {
public:
    explicit DensityCache(const OpticalLayout& layout)
        : layout_(layout), grid_(ScreenGrid::for_layout(layout)),
          step_y_(layout.source_width / 64.0),
          step_z_(layout.crystal_thickness > 0.0 ? layout.crystal_thickness / 64.0 : 0.0) {}

    double quantization_step_transverse() const { return step_y_; }
    double quantization_step_axial() const { return step_z_; }
    const ScreenGrid& grid() const { return grid_; }

    const DensityTable& lookup(const SourcePoint& origin, SlitAccess access) {
        Key key;
        key.iy = static_cast<std::int32_t>(std::llround(origin.transverse / step_y_));
        key.iz = step_z_ > 0.0
                     ? static_cast<std::int32_t>(std::llround(origin.depth / step_z_))
                     : 0;
        key.access = static_cast<std::int32_t>(access);
        {
            std::shared_lock lock(mutex_);
            const auto it = tables_.find(key);
            if (it != tables_.end()) return *it->second;
        }
        std::unique_lock lock(mutex_);
        auto& slot = tables_[key];
        if (!slot) {
            const SourcePoint representative{key.iy * step_y_, key.iz * step_z_};
            slot = std::make_unique<DensityTable>(representative, access, layout_, grid_);
        }
        return *slot;
    }

private:
    struct Key {
        std::int32_t iy = 0;
        std::int32_t iz = 0;
        std::int32_t access = 0;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t v = static_cast<std::uint32_t>(k.iy);
            v = v * 0x9E3779B97F4A7C15ull + static_cast<std::uint32_t>(k.iz);
            v = v * 0x9E3779B97F4A7C15ull + static_cast<std::uint32_t>(k.access);
            return static_cast<std::size_t>(v ^ (v >> 32));
        }
    };

    OpticalLayout layout_;
    ScreenGrid grid_;
    double step_y_;
    double step_z_;
    std::shared_mutex mutex_;
    std::unordered_map<Key, std::unique_ptr<DensityTable>, KeyHash> tables_;
};

}  // namespace spdc
