// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "spdc/histogram.hpp"
#include "spdc/layout.hpp"
#include "spdc/screen.hpp"

namespace spdc {

/// Fitted fringe parameters of a screen histogram.
///
/// The fit model is I(y) = kappa*E(y)*[1 + V cos(2 pi y/period + phase)] + B(y)
/// with E the layout's single-slit sinc^2 envelope and B a smooth 3-knot
/// component. `visibility` is the modulated share V*massE/(massE+massB) of
/// the total mass; `fringe_fraction` = 2v/(1+v) converts it into the
/// double-slit count share (a fully modulated component feeds counts
/// through two slits, so its flux counts double against the smooth rest).
struct FringeAnalysis {
    double period = 0.0;           // [m]
    double visibility = 0.0;       // in [0, 1]
    double phase = 0.0;            // in (-pi, pi]
    double fringe_fraction = 0.0;  // in [0, 1]
    double fit_residual = 0.0;     // normalized RMS
    double raw_visibility = 0.0;   // (max-min)/(max+min) diagnostic, extrema-biased
    double spectrum_peak_period = 0.0;  // dominant in-band spectral period, 0 if none
    bool converged = false;
    std::vector<double> model;  // fitted model per bin, for plot output
};

namespace detail {

constexpr int kFitParams = 6;  // envelope, cos, sin, 3 background knots

/// Solves A x = b for a small symmetric system by Gaussian elimination with
/// partial pivoting. Returns false if singular.
inline bool solve_dense(std::array<std::array<double, kFitParams>, kFitParams> a,
                        std::array<double, kFitParams> b, std::array<double, kFitParams>& x) {
    for (int col = 0; col < kFitParams; ++col) {
        int pivot = col;
        for (int r = col + 1; r < kFitParams; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < kFitParams; ++r) {
            const double factor = a[r][col] / a[col][col];
            for (int c = col; c < kFitParams; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    for (int col = kFitParams - 1; col >= 0; --col) {
        double acc = b[col];
        for (int c = col + 1; c < kFitParams; ++c) acc -= a[col][c] * x[c];
        x[col] = acc / a[col][col];
    }
    return true;
}

struct TrialFit {
    double sse = std::numeric_limits<double>::infinity();
    std::array<double, kFitParams> beta{};
};

/// Linear least squares at a fixed period: regressors are the envelope, the
/// bin-averaged quadrature pair, and a quadratic Bernstein background. A
/// small ridge on the background knots breaks the envelope/background
/// degeneracy in favor of the envelope.
inline TrialFit fit_at_period(const std::vector<double>& y, const std::vector<double>& counts,
                              const std::vector<double>& envelope, double bin_width,
                              double period) {
    const std::size_t n = y.size();
    const double omega = 2.0 * std::numbers::pi / period;
    const double bin_factor = sinc(std::numbers::pi * bin_width / period);
    const double span = y.back() - y.front();

    std::array<std::array<double, kFitParams>, kFitParams> ata{};
    std::array<double, kFitParams> atb{};
    std::array<double, kFitParams> row{};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = (y[k] - y.front()) / span;
        row[0] = envelope[k];
        row[1] = bin_factor * envelope[k] * std::cos(omega * y[k]);
        row[2] = bin_factor * envelope[k] * std::sin(omega * y[k]);
        row[3] = (1.0 - t) * (1.0 - t);
        row[4] = 2.0 * t * (1.0 - t);
        row[5] = t * t;
        for (int i = 0; i < kFitParams; ++i) {
            for (int j = i; j < kFitParams; ++j) ata[i][j] += row[i] * row[j];
            atb[i] += row[i] * counts[k];
        }
    }
    for (int i = 0; i < kFitParams; ++i) {
        for (int j = 0; j < i; ++j) ata[i][j] = ata[j][i];
    }
    double diag_scale = 0.0;
    for (int i = 0; i < kFitParams; ++i) diag_scale = std::max(diag_scale, ata[i][i]);
    for (int i = 3; i < kFitParams; ++i) ata[i][i] += 1e-9 * diag_scale;

    TrialFit fit;
    if (!solve_dense(ata, atb, fit.beta)) return fit;

    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = (y[k] - y.front()) / span;
        const double model = fit.beta[0] * envelope[k] +
                             fit.beta[1] * bin_factor * envelope[k] * std::cos(omega * y[k]) +
                             fit.beta[2] * bin_factor * envelope[k] * std::sin(omega * y[k]) +
                             fit.beta[3] * (1.0 - t) * (1.0 - t) +
                             fit.beta[4] * 2.0 * t * (1.0 - t) + fit.beta[5] * t * t;
        const double r = counts[k] - model;
        sse += r * r;
    }
    fit.sse = sse;
    return fit;
}

/// Dominant spatial period of the mean-subtracted histogram within
/// [lo, hi], by direct DFT power; returns 0 if the band is empty.
inline double spectrum_peak_period(const std::vector<double>& y, const std::vector<double>& counts,
                                   double bin_width, double lo, double hi) {
    const std::size_t n = y.size();
    const double span = n * bin_width;
    double mean = 0.0;
    for (double c : counts) mean += c;
    mean /= static_cast<double>(n);

    double best_power = -1.0;
    double best_period = 0.0;
    const int m_lo = std::max(1, static_cast<int>(std::ceil(span / hi)));
    const int m_hi = std::min(static_cast<int>(n / 2), static_cast<int>(std::floor(span / lo)));
    for (int m = m_lo; m <= m_hi; ++m) {
        const double omega = 2.0 * std::numbers::pi * m / span;
        double re = 0.0, im = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            re += (counts[k] - mean) * std::cos(omega * y[k]);
            im += (counts[k] - mean) * std::sin(omega * y[k]);
        }
        const double power = re * re + im * im;
        if (power > best_power) {
            best_power = power;
            best_period = span / m;
        }
    }
    return best_period;
}

}  // namespace detail

/// Fits fringe period, visibility, phase, and the double-slit fraction of a
/// binned screen histogram. The period search is initialized from the hint
/// and from the dominant in-band spectral peak, and is confined to
/// [hint/2, 2*hint] (guards against harmonic lock-in). A degenerate flat
/// histogram returns visibility 0 with the hint as period; a period search
/// that runs into the band boundary returns converged = false with the
/// spectrum diagnostics filled in.
inline FringeAnalysis fit_fringes(const ScreenGrid& grid, const std::vector<double>& counts,
                                  const OpticalLayout& layout, double period_hint) {
    if (static_cast<int>(counts.size()) != grid.n_bins) {
        throw std::invalid_argument("fit_fringes: counts size does not match grid");
    }
    if (!(period_hint > 0.0)) {
        throw std::invalid_argument("fit_fringes: period hint must be positive");
    }
    FringeAnalysis out;
    out.period = period_hint;

    const int n = grid.n_bins;
    std::vector<double> y(n), envelope(n);
    for (int k = 0; k < n; ++k) {
        y[k] = grid.center(k);
        envelope[k] = slit_envelope(y[k], layout);
    }
    double total = 0.0, cmin = counts[0], cmax = counts[0];
    for (double c : counts) {
        total += c;
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
    }
    if (!(total > 0.0) || cmax == cmin) {
        out.converged = true;  // flat histogram: no modulation to fit
        return out;
    }
    {
        // Raw-extrema diagnostic over the central ten periods.
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int k = 0; k < n; ++k) {
            if (std::abs(y[k]) > 5.0 * period_hint) continue;
            lo = std::min(lo, counts[k]);
            hi = std::max(hi, counts[k]);
        }
        if (hi > 0.0 && hi + lo > 0.0) out.raw_visibility = (hi - lo) / (hi + lo);
    }

    const double band_lo = 0.5 * period_hint;
    const double band_hi = 2.0 * period_hint;
    out.spectrum_peak_period =
        detail::spectrum_peak_period(y, counts, grid.bin_width, band_lo, band_hi);

    // Coarse scan (uniform in frequency) around each candidate, then golden
    // section on the surviving bracket.
    auto sse_at = [&](double period) {
        return detail::fit_at_period(y, counts, envelope, grid.bin_width, period).sse;
    };
    double best_period = period_hint;
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<double> candidates{period_hint};
    if (out.spectrum_peak_period > 0.0) candidates.push_back(out.spectrum_peak_period);
    for (double cand : candidates) {
        const double f_lo = 1.0 / std::min(band_hi, cand * 1.3);
        const double f_hi = 1.0 / std::max(band_lo, cand / 1.3);
        constexpr int kScan = 160;
        for (int i = 0; i <= kScan; ++i) {
            const double f = f_lo + (f_hi - f_lo) * i / kScan;
            const double period = 1.0 / f;
            const double sse = sse_at(period);
            if (sse < best_sse) {
                best_sse = sse;
                best_period = period;
            }
        }
    }
    {
        // Golden-section refinement in frequency around the scan winner.
        double a = std::max(1.0 / band_hi, 1.0 / best_period * 0.99);
        double b = std::min(1.0 / band_lo, 1.0 / best_period * 1.01);
        constexpr double kGolden = 0.6180339887498949;
        double x1 = b - kGolden * (b - a);
        double x2 = a + kGolden * (b - a);
        double f1 = sse_at(1.0 / x1);
        double f2 = sse_at(1.0 / x2);
        for (int it = 0; it < 80; ++it) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - kGolden * (b - a);
                f1 = sse_at(1.0 / x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + kGolden * (b - a);
                f2 = sse_at(1.0 / x2);
            }
        }
        const double refined = 1.0 / (0.5 * (a + b));
        const double sse = sse_at(refined);
        if (sse < best_sse) {
            best_sse = sse;
            best_period = refined;
        }
    }

    const detail::TrialFit fit =
        detail::fit_at_period(y, counts, envelope, grid.bin_width, best_period);
    const double kappa = fit.beta[0];
    const double amplitude = std::hypot(fit.beta[1], fit.beta[2]);

    out.model.resize(n);
    {
        const double omega = 2.0 * std::numbers::pi / best_period;
        const double bin_factor = sinc(std::numbers::pi * grid.bin_width / best_period);
        const double span = y.back() - y.front();
        for (int k = 0; k < n; ++k) {
            const double t = (y[k] - y.front()) / span;
            out.model[k] = fit.beta[0] * envelope[k] +
                           fit.beta[1] * bin_factor * envelope[k] * std::cos(omega * y[k]) +
                           fit.beta[2] * bin_factor * envelope[k] * std::sin(omega * y[k]) +
                           fit.beta[3] * (1.0 - t) * (1.0 - t) +
                           fit.beta[4] * 2.0 * t * (1.0 - t) + fit.beta[5] * t * t;
        }
    }

    out.period = best_period;
    out.fit_residual = std::sqrt(fit.sse / n) / (total / n);
    out.converged = std::isfinite(fit.sse) &&
                    best_period > band_lo * (1.0 + 1e-6) && best_period < band_hi * (1.0 - 1e-6);

    if (kappa <= 0.0 || amplitude <= 0.0) {
        return out;  // no envelope mass resolved; visibility stays 0
    }
    const double v_model = std::min(amplitude / kappa, 1.0);
    out.phase = std::atan2(-fit.beta[2], fit.beta[1]);

    double mass_e = 0.0, mass_b = 0.0;
    const double span = y.back() - y.front();
    for (int k = 0; k < n; ++k) {
        mass_e += kappa * envelope[k];
        const double t = (y[k] - y.front()) / span;
        mass_b += fit.beta[3] * (1.0 - t) * (1.0 - t) + fit.beta[4] * 2.0 * t * (1.0 - t) +
                  fit.beta[5] * t * t;
    }
    mass_b = std::max(mass_b, 0.0);
    if (mass_e > 0.0) {
        out.visibility = std::clamp(v_model * mass_e / (mass_e + mass_b), 0.0, 1.0);
    }
    out.fringe_fraction = 2.0 * out.visibility / (1.0 + out.visibility);
    return out;
}

inline FringeAnalysis fit_fringes(const ScreenGrid& grid, const std::vector<std::uint64_t>& counts,
                                  const OpticalLayout& layout, double period_hint) {
    std::vector<double> as_double(counts.begin(), counts.end());
    return fit_fringes(grid, as_double, layout, period_hint);
}

/// Relative deviation of the fitted period from the layout's lambda*D/s.
inline double fringe_period_check(const FringeAnalysis& analysis, const OpticalLayout& layout) {
    const double reference = fringe_period(layout);
    return (analysis.period - reference) / reference;
}

/// Double-slit share of the histogram's counts, from the fringe/smooth
/// decomposition of the total histogram.
inline double double_slit_fraction_estimate(const ScreenGrid& grid,
                                            const std::vector<std::uint64_t>& counts,
                                            const OpticalLayout& layout) {
    return fit_fringes(grid, counts, layout, fringe_period(layout)).fringe_fraction;
}

}  // namespace spdc
