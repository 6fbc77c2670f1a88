#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mda/freq_core.hpp"
#include "mda/spectral.hpp"

namespace mda {

/// One input tone fed to the presampler.
struct ToneSpec {
    double freq_hz = 0.0;
    double amplitude = 1.0;
    double phase_rad = 0.0;
};

enum class PulseKind { ideal_comb, gaussian };

/// Spectral envelope of the presampling pulse train. The ideal comb has a
/// flat harmonic spectrum; the gaussian shape rolls off as
/// exp(-2 (pi n f_c sigma_t)^2).
struct PulseShape {
    PulseKind kind = PulseKind::ideal_comb;
    double rms_width_s = 0.0;  // sigma_t, gaussian only
};

/// Additive white Gaussian noise calibrated to a spectral-domain SNR.
/// An infinite spectral_snr_db disables the noise path.
struct NoiseSpec {
    double spectral_snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

/// One spectral line of the mixer output, with provenance.
struct MixedLine {
    double freq_hz = 0.0;
    double relative_amplitude = 0.0;  // tone amplitude times harmonic envelope
    double phase_rad = 0.0;
    int tone_index = 0;
    int sign = 0;   // -1 difference line, +1 sum line, 0 the tone itself
    int order = 0;  // comb harmonic n
    bool folded = false;  // negative difference reflected through DC
};

enum class PresampleMethod { analytic, oversampled };

/// Sum of the configured cosines on the ADC grid.
SampleBlock synth_tones(const std::vector<ToneSpec>& tones, const FrequencyGrid& grid);

/// Every mixer line |f_j +- n f_c| inside (0, f_s/2), one entry per
/// (tone, sign, n), amplitude A_j * c_n. Folded difference lines carry a
/// negated phase and the folded flag.
std::vector<MixedLine> mixed_line_table(const std::vector<ToneSpec>& tones,
                                        const CombSpec& comb, const PulseShape& pulse,
                                        const FrequencyGrid& grid);

/// Models the mixer output delivered to the ADC. The analytic method
/// synthesizes the band-limited line table directly on the ADC grid; the
/// oversampled method renders tones and pulse train on an
/// oversample_factor-times denser grid, multiplies pointwise, applies a
/// brick-wall low-pass at f_s/2 by transform truncation, and decimates.
/// Both share the same per-harmonic phases, so their line phases agree.
SampleBlock presample(const std::vector<ToneSpec>& tones, const CombSpec& comb,
                      const PulseShape& pulse, const FrequencyGrid& grid,
                      PresampleMethod method, int oversample_factor = 16);

/// Adds white Gaussian samples with sigma^2 = ref^2 * N / (2 * 10^(S/10)),
/// which makes the reference tone's expected peak-bin power exceed the
/// mean noise-bin power by S dB. Deterministic for a given seed.
SampleBlock add_noise(const SampleBlock& block, const NoiseSpec& noise,
                      double reference_amplitude);

/// Harmonic envelope coefficient c_n for a pulse shape.
double harmonic_envelope(const PulseShape& pulse, const CombSpec& comb, int n);

/// Fixed pseudo-random phase of comb harmonic n (zero for n = 0); shared by
/// both presampling methods.
double comb_harmonic_phase(int n);

namespace rng {
/// SplitMix64 mixing step; the stable hash used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);
/// Uniform double in [0, 1) from a hashed 64-bit value.
double hash01(std::uint64_t x);
/// Combines a base seed and an index into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);
} // namespace rng

} // namespace mda
