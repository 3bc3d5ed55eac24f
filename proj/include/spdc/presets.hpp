// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace spdc::presets {

/// The concrete 702 nm design: phi0 = 2 mrad, s/d = 6 phi0, d = 600 mm,
/// giving s = 7.2 mm, w = 1.75e-2 mm, x = 0.73 mm. Identical content ships
/// in configs/paper.json.
inline const char* paper_config_json() {
    return R"({
  "design": {
    "wavelength": 702e-9,
    "phi0": 2.0e-3,
    "f": 1.320,
    "g": 1.5,
    "h": 1.671,
    "slit_distance": 0.6
  },
  "n_pairs": 1000000,
  "seed": 20260809,
  "workers": 0
}
)";
}

/// Marginal design f = g = h = 1: phi0 = 1/(32 pi) ~ 10 mrad, w ~ 12.57
/// wavelengths. Identical content ships in configs/threshold.json.
inline const char* threshold_config_json() {
    return R"({
  "design": {
    "wavelength": 702e-9,
    "phi0": 9.947183943243459e-3,
    "f": 1.0,
    "g": 1.0,
    "h": 1.0,
    "slit_distance": 0.6
  },
  "n_pairs": 1000000,
  "seed": 20260809,
  "workers": 0
}
)";
}

}  // namespace spdc::presets
