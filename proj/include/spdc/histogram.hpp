// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spdc/layout.hpp"

namespace spdc {

/// Screen binning contract: window of +-40 fringe periods about the axis,
/// bin width one twentieth of a period (1600 bins).
struct ScreenGrid {
    double window_half = 0.0;  // [m]
    double bin_width = 0.0;    // [m]
    int n_bins = 0;

    static ScreenGrid for_layout(const OpticalLayout& layout) {
        const double period = fringe_period(layout);
        ScreenGrid grid;
        grid.window_half = 40.0 * period;
        grid.bin_width = period / 20.0;
        grid.n_bins = 1600;
        return grid;
    }

    double y_min() const { return -window_half; }
    double y_max() const { return window_half; }
    double center(int i) const { return y_min() + (i + 0.5) * bin_width; }

    /// Bin index for an in-window coordinate; the upper window edge folds
    /// into the last bin. Returns -1 outside the window.
    int bin_index(double y) const {
        if (y < y_min() || y > y_max()) return -1;
        int i = static_cast<int>((y - y_min()) / bin_width);
        if (i >= n_bins) i = n_bins - 1;
        return i;
    }
};

}  // namespace spdc
