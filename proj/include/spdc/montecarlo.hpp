// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spdc/fringe.hpp"
#include "spdc/geometry.hpp"
#include "spdc/histogram.hpp"
#include "spdc/layout.hpp"
#include "spdc/rng.hpp"
#include "spdc/screen.hpp"

namespace spdc {

/// One sampled emission event. The idler angle is -signal_angle + delta
/// with delta the Gaussian(0, phi0) correlation deviation.
struct PhotonPair {
    SourcePoint origin;
    double signal_angle = 0.0;  // theta_s [rad]
    double idler_angle = 0.0;   // theta_i [rad]
};

enum class IdlerOutcome { DetABar, DetBBar, Miss };

/// One completed trial. The sequence tags realize the delayed idler
/// resolution: every screen (signal) detection is ordered before any idler
/// detector fires, so idler_seq > signal_seq for every record.
struct DetectionRecord {
    double screen_position = 0.0;
    SlitAccess slit_access = SlitAccess::None;
    IdlerOutcome idler_outcome = IdlerOutcome::Miss;
    std::uint64_t signal_seq = 0;
    std::uint64_t idler_seq = 0;
};

struct RunCounters {
    std::uint64_t n_pairs_sampled = 0;
    std::uint64_t n_blocked = 0;        // NONE access
    std::uint64_t n_single_access = 0;
    std::uint64_t n_both_access = 0;
    std::uint64_t n_outside_window = 0;  // tallied but unbinned
};

struct RunOptions {
    std::uint64_t n_pairs = 0;
    std::uint64_t seed = 0;
    unsigned workers = 0;       // 0 = hardware concurrency
    bool keep_records = false;  // retain per-trial records (small runs only)
};

/// Immutable result of a run: the total histogram plus the three
/// idler-gated histograms on the same binning, and the trial counters.
/// total equals coinc_a + coinc_b + no_coinc bin-wise by construction, and
/// the whole result is a pure function of (layout, n_pairs, seed).
struct RunResult {
    ScreenGrid grid;
    std::vector<std::uint64_t> total;
    std::vector<std::uint64_t> coinc_a;
    std::vector<std::uint64_t> coinc_b;
    std::vector<std::uint64_t> no_coinc;
    RunCounters counters;
    std::uint64_t seed = 0;
    std::string config_digest;
    double quant_step_transverse = 0.0;
    double quant_step_axial = 0.0;
    std::vector<DetectionRecord> records;  // populated only when requested
};

namespace detail {

struct SampledPair {
    PhotonPair pair;
    double deviation = 0.0;        // in-plane delta
    double deviation_axis2 = 0.0;  // second axis, two-axis validation only
};

/// Frozen per-pair draw order: transverse, depth, signal angle, the
/// Box-Muller pair, then (on demand) the screen-position uniform.
inline SampledPair sample_pair_impl(rng::PairStream& stream, const OpticalLayout& layout) {
    SampledPair s;
    const double half_width = sampling_half_width(layout);
    s.pair.origin.transverse = stream.next_uniform(-half_width, half_width);
    s.pair.origin.depth = stream.next_double() * layout.crystal_thickness;
    const double theta_max =
        layout.slit_separation / (2.0 * layout.slit_distance) + 3.0 * layout.phi0;
    s.pair.signal_angle = stream.next_uniform(-theta_max, theta_max);
    const auto [g1, g2] = stream.next_gaussian2();
    s.deviation = layout.phi0 * g1;
    s.deviation_axis2 = layout.phi0 * g2;
    s.pair.idler_angle = -s.pair.signal_angle + s.deviation;
    return s;
}

/// FNV-1a 64 over the canonical run description; hex string.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string canonical_layout_string(const OpticalLayout& l) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "lambda=%.17g;phi0=%.17g;w=%.17g;x=%.17g;d=%.17g;s=%.17g;a=%.17g;"
                  "dprime=%.17g;rho=%.17g;D=%.17g",
                  l.wavelength, l.phi0, l.source_width, l.crystal_thickness, l.slit_distance,
                  l.slit_separation, l.slit_width, l.idler_distance, l.detector_angular_radius,
                  l.screen_distance);
    return buf;
}

}  // namespace detail

inline PhotonPair sample_pair(rng::PairStream& stream, const OpticalLayout& layout) {
    return detail::sample_pair_impl(stream, layout).pair;
}

/// Digest identifying the physics of a run (layout, pair count, seed);
/// independent of worker count and output paths.
inline std::string run_digest(const OpticalLayout& layout, std::uint64_t n_pairs,
                              std::uint64_t seed) {
    char tail[96];
    std::snprintf(tail, sizeof tail, ";n_pairs=%llu;seed=%llu",
                  static_cast<unsigned long long>(n_pairs),
                  static_cast<unsigned long long>(seed));
    return detail::fnv1a_hex(detail::canonical_layout_string(layout) + tail);
}

/// Digest of the layout alone (used by analyze to cross-check inputs).
inline std::string layout_digest(const OpticalLayout& layout) {
    return detail::fnv1a_hex(detail::canonical_layout_string(layout));
}

/// Idler outcome by transverse position at the d' plane, in the idler-side
/// image coordinate y_i = y - d'*theta_i (a signal aimed at slit A maps to
/// positive y_i; physically the idler travels to the opposite side of the
/// axis). Detector A-bar images slit A at +(s/2d)*d', B-bar at the mirror
/// position, each with half-width rho*d'; gates are closed intervals.
inline IdlerOutcome propagate_idler(const PhotonPair& pair, const OpticalLayout& layout) {
    const double y_image = pair.origin.transverse - layout.idler_distance * pair.idler_angle;
    const double center = layout.slit_separation / (2.0 * layout.slit_distance) *
                          layout.idler_distance;
    const double half_width = layout.detector_angular_radius * layout.idler_distance;
    if (std::abs(y_image - center) <= half_width) return IdlerOutcome::DetABar;
    if (std::abs(y_image + center) <= half_width) return IdlerOutcome::DetBBar;
    return IdlerOutcome::Miss;
}

/// Runs the full experiment: sample pairs, classify slit access, draw the
/// screen coordinate from the tabulated two-path density, resolve the idler,
/// and accumulate the gated histograms. Deterministic for fixed
/// (layout, n_pairs, seed) regardless of worker count.
inline RunResult run_experiment(const OpticalLayout& layout, const RunOptions& options) {
    validate(layout);
    if (options.n_pairs < 1) {
        throw std::invalid_argument("run_experiment: n_pairs must be at least 1");
    }

    DensityCache cache(layout);
    const ScreenGrid grid = cache.grid();

    unsigned workers = options.workers != 0 ? options.workers
                                            : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, options.n_pairs));

    struct Local {
        RunCounters counters;
        std::vector<std::uint64_t> total, coinc_a, coinc_b, no_coinc;
        std::vector<std::pair<std::uint64_t, DetectionRecord>> records;
    };
    std::vector<Local> locals(workers);
    for (auto& l : locals) {
        l.total.assign(grid.n_bins, 0);
        l.coinc_a.assign(grid.n_bins, 0);
        l.coinc_b.assign(grid.n_bins, 0);
        l.no_coinc.assign(grid.n_bins, 0);
    }

    auto worker_body = [&](unsigned widx, std::uint64_t begin, std::uint64_t end) {
        Local& local = locals[widx];
        for (std::uint64_t i = begin; i < end; ++i) {
            rng::PairStream stream(options.seed, i);
            const detail::SampledPair s = detail::sample_pair_impl(stream, layout);
            ++local.counters.n_pairs_sampled;
            const SlitAccess access = classify_slit_access(s.pair.origin, layout);
            if (access == SlitAccess::None) {
                ++local.counters.n_blocked;
                continue;
            }
            if (access == SlitAccess::Both) {
                ++local.counters.n_both_access;
            } else {
                ++local.counters.n_single_access;
            }
            const double u = stream.next_double();
            const double y_screen = cache.lookup(s.pair.origin, access).sample(u);
            const IdlerOutcome outcome = propagate_idler(s.pair, layout);
            const int bin = grid.bin_index(y_screen);
            if (bin < 0) {
                ++local.counters.n_outside_window;
            } else {
                ++local.total[bin];
                switch (outcome) {
                    case IdlerOutcome::DetABar: ++local.coinc_a[bin]; break;
                    case IdlerOutcome::DetBBar: ++local.coinc_b[bin]; break;
                    case IdlerOutcome::Miss: ++local.no_coinc[bin]; break;
                }
            }
            if (options.keep_records) {
                local.records.emplace_back(
                    i, DetectionRecord{y_screen, access, outcome, 0, 0});
            }
        }
    };

    if (workers == 1) {
        worker_body(0, 0, options.n_pairs);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned widx = 0; widx < workers; ++widx) {
            const std::uint64_t begin = options.n_pairs * widx / workers;
            const std::uint64_t end = options.n_pairs * (widx + 1) / workers;
            threads.emplace_back(worker_body, widx, begin, end);
        }
        for (auto& t : threads) t.join();
    }

    RunResult result;
    result.grid = grid;
    result.total.assign(grid.n_bins, 0);
    result.coinc_a.assign(grid.n_bins, 0);
    result.coinc_b.assign(grid.n_bins, 0);
    result.no_coinc.assign(grid.n_bins, 0);
    result.seed = options.seed;
    result.config_digest = run_digest(layout, options.n_pairs, options.seed);
    result.quant_step_transverse = cache.quantization_step_transverse();
    result.quant_step_axial = cache.quantization_step_axial();
    for (const Local& l : locals) {
        result.counters.n_pairs_sampled += l.counters.n_pairs_sampled;
        result.counters.n_blocked += l.counters.n_blocked;
        result.counters.n_single_access += l.counters.n_single_access;
        result.counters.n_both_access += l.counters.n_both_access;
        result.counters.n_outside_window += l.counters.n_outside_window;
        for (int b = 0; b < grid.n_bins; ++b) {
            result.total[b] += l.total[b];
            result.coinc_a[b] += l.coinc_a[b];
            result.coinc_b[b] += l.coinc_b[b];
            result.no_coinc[b] += l.no_coinc[b];
        }
    }
    if (options.keep_records) {
        // Worker ranges are contiguous and ascending, so concatenation in
        // worker order is already sorted by pair index.
        std::size_t n_accepted = 0;
        for (const Local& l : locals) n_accepted += l.records.size();
        result.records.reserve(n_accepted);
        std::uint64_t ordinal = 0;
        for (const Local& l : locals) {
            for (const auto& [pair_index, rec] : l.records) {
                DetectionRecord tagged = rec;
                tagged.signal_seq = ordinal;
                tagged.idler_seq = n_accepted + ordinal;
                result.records.push_back(tagged);
                ++ordinal;
            }
        }
    }
    return result;
}

/// Validation mode isolating source-width fringe washout: all emitters on
/// the aperture plane (x = 0, hence BOTH access everywhere), fitted
/// visibility of the total histogram. The extended-incoherent-source
/// expectation is |sinc(pi w s / (lambda d))|.
inline double incoherent_source_visibility_check(OpticalLayout layout, std::uint64_t n_pairs,
                                                 std::uint64_t seed, unsigned workers = 0) {
    layout.crystal_thickness = 0.0;
    RunOptions options;
    options.n_pairs = n_pairs;
    options.seed = seed;
    options.workers = workers;
    const RunResult result = run_experiment(layout, options);
    const FringeAnalysis fit =
        fit_fringes(result.grid, result.total, layout, fringe_period(layout));
    return fit.visibility;
}

/// Planar correlation deviations delta for n pairs (moment checks).
inline std::vector<double> sample_deviations(const OpticalLayout& layout, std::uint64_t n,
                                             std::uint64_t seed) {
    std::vector<double> deltas;
    deltas.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        rng::PairStream stream(seed, i);
        deltas.push_back(detail::sample_pair_impl(stream, layout).deviation);
    }
    return deltas;
}

/// Kolmogorov-Smirnov statistic of the two-axis deviation magnitude |delta|
/// against its Rayleigh CDF 1 - exp(-(r/phi0)^2/2).
inline double two_axis_deviation_ks(const OpticalLayout& layout, std::uint64_t n,
                                    std::uint64_t seed) {
    std::vector<double> magnitudes;
    magnitudes.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        rng::PairStream stream(seed, i);
        const detail::SampledPair s = detail::sample_pair_impl(stream, layout);
        magnitudes.push_back(std::hypot(s.deviation, s.deviation_axis2));
    }
    std::sort(magnitudes.begin(), magnitudes.end());
    double ks = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double r = magnitudes[i] / layout.phi0;
        const double cdf = -std::expm1(-0.5 * r * r);
        ks = std::max(ks, std::max(std::abs(cdf - i * inv_n), std::abs(cdf - (i + 1) * inv_n)));
    }
    return ks;
}

}  // namespace spdc
