#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mda/freq_core.hpp"

namespace mda {

/// A block of real samples tied to the grid it was synthesized on.
struct SampleBlock {
    std::vector<double> samples;
    FrequencyGrid grid;
};

/// One-sided magnitude spectrum, bins 0 .. fft_size/2.
struct Spectrum {
    std::vector<double> magnitudes;
    FrequencyGrid grid;
};

/// A detected spectral peak at an interior bin.
struct Peak {
    std::int64_t bin = 0;
    double magnitude = 0.0;
    std::optional<double> refined_offset_bins;  // set by quadratic refinement
};

/// Result of the three-point parabola fit around a peak bin.
struct QuadResult {
    double offset_bins = 0.0;  // clamped to [-0.5, 0.5]
    bool degenerate = false;   // flat neighborhood, offset forced to 0
};

/// |DFT| of the block, one-sided. Supports arbitrary (composite) lengths.
Spectrum magnitude_spectrum(const SampleBlock& block);

/// All interior local maxima within |rel_threshold_db| of the global
/// maximum, greedily thinned so no two returned peaks are closer than
/// min_separation_bins (the larger wins); sorted by bin. Runs of equal
/// values flanked by lower neighbors report their lowest bin, so a tone at
/// an exact half-bin offset deterministically yields the lower bin.
std::vector<Peak> find_peaks(const Spectrum& spec, double rel_threshold_db,
                             std::int64_t min_separation_bins);

/// Vertex of the parabola through (bin-1, bin, bin+1) magnitudes:
/// offset = 0.5 (m[k-1] - m[k+1]) / (m[k-1] - 2 m[k] + m[k+1]).
QuadResult quad_interp(const Spectrum& spec, std::int64_t bin);

namespace detail {
/// Forward real-to-complex DFT (interleaved re/im output, fft_size/2 + 1
/// pairs). Exposed for the presampling decimator.
void rfft(const std::vector<double>& in, std::vector<double>& out_reim);
/// Inverse: first n_out/2 + 1 complex bins -> n_out real samples, unscaled
/// (caller divides by the forward length).
void irfft_truncated(const std::vector<double>& reim, std::int64_t n_out,
                     std::vector<double>& out);
} // namespace detail

} // namespace mda
