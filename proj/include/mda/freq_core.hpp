#pragma once

#include <cstdint>
#include <vector>

#include "mda/errors.hpp"

namespace mda {

/// Sampling rate, transform length, and the derived bin resolution.
/// The coordinate system for all bin indices in the library.
struct FrequencyGrid {
    double sample_rate_hz = 0.0;  // f_s
    std::int64_t fft_size = 0;    // N_fft
    double resolution_hz = 0.0;   // f_res = f_s / N_fft
};

/// Decomposition of a frequency into integer and fractional bin index:
/// f = (m + delta) * f_res with 0 <= delta < 1.
struct FrequencyIndex {
    std::int64_t integer_part = 0;  // m
    double fractional_part = 0.0;   // delta
};

/// Presampling comb: repetition rate and its (alpha, epsilon) bin-index
/// decomposition on the grid it was derived on.
struct CombSpec {
    double rep_rate_hz = 0.0;  // f_c = (alpha + epsilon) * f_res
    std::int64_t alpha = 0;
    double epsilon = 0.0;  // in [0, 1)
};

/// One order's deviation, in bins and in Hz.
struct DeviationRecord {
    int order = 0;               // n
    double deviation_bins = 0.0; // in [-0.5, 0.5]
    double deviation_hz = 0.0;   // deviation_bins * f_res
};

/// Validates and derives resolution_hz = sample_rate_hz / fft_size.
FrequencyGrid make_grid(double sample_rate_hz, std::int64_t fft_size);

/// Derives (alpha, epsilon) for a repetition rate on a grid. Values within
/// 1e-6 of an integer bin index snap to that integer; epsilon additionally
/// snaps to the nearest multiple of 1e-6 when within 1e-9 of it, so that
/// exact-tie test points (e.g. epsilon = 0.1) survive the division.
CombSpec comb_from_rate(double rep_rate_hz, const FrequencyGrid& grid);

/// Splits freq_hz into (m, delta) on the grid; near-integer indices
/// (within 1e-6 of a bin) snap to delta = 0.
FrequencyIndex index_of(double freq_hz, const FrequencyGrid& grid);

/// Fractional part with the floor convention: result in [0, 1) for all x.
double frac_mod1(double x);

/// Nearest integer with exact halves rounding toward +infinity.
std::int64_t round_half_up(double x);

/// Single-measurement deviation in bins: round_half_up(delta) - delta.
double delta_single(double delta);

/// Per-order deviation in bins for copy n of a tone with fractional index
/// delta under comb fraction epsilon.
double delta_order(double delta, double epsilon, int n);

/// Mean of delta_order over n = 0 .. order_count-1 (the baseband copy
/// participates in the average).
double delta_mda(double delta, double epsilon, int order_count);

/// Frequency of the n-th spectral copy: f_in - n * f_c.
/// Throws fold_error when the result would be <= 0.
double copy_frequency(double f_in_hz, const CombSpec& comb, int n);

/// Inverse of copy_frequency: f + n * f_c.
double reconstruct(double f_meas_zone_hz, const CombSpec& comb, int n);

} // namespace mda
