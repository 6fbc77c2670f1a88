#include "mda/signal_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace mda {

namespace rng {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double hash01(std::uint64_t x) {
    // Top 53 bits -> uniform double in [0, 1).
    return static_cast<double>(splitmix64(x) >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index));
}

} // namespace rng

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Accumulates amp * cos(2*pi*cycles_per_sample*k + phase) into x. A complex
// rotation recurrence is reseeded from the exact angle every block, keeping
// drift around 1e-13 relative while staying much cheaper than sincos per
// sample. Bit-deterministic for identical inputs.
void accumulate_cosine(std::vector<double>& x, double amp, double cycles_per_sample,
                       double phase) {
    const std::size_t n = x.size();
    const double step = kTwoPi * frac_mod1(cycles_per_sample);
    const double wr = std::cos(step), wi = std::sin(step);
    constexpr std::size_t kReseed = 4096;
    for (std::size_t k0 = 0; k0 < n; k0 += kReseed) {
        const double ang =
            kTwoPi * frac_mod1(cycles_per_sample * static_cast<double>(k0)) + phase;
        double zr = std::cos(ang), zi = std::sin(ang);
        const std::size_t end = std::min(n, k0 + kReseed);
        for (std::size_t k = k0; k < end; ++k) {
            x[k] += amp * zr;
            const double t = zr * wr - zi * wi;
            zi = zr * wi + zi * wr;
            zr = t;
        }
    }
}

void validate_tones(const std::vector<ToneSpec>& tones, const FrequencyGrid& grid) {
    for (const auto& t : tones) {
        if (!(t.freq_hz > 0.0) || !(t.freq_hz < grid.sample_rate_hz / 2.0))
            throw config_error("tone at " + std::to_string(t.freq_hz) +
                               " Hz is outside (0, f_s/2)");
        if (!(t.amplitude > 0.0))
            throw config_error("tone amplitude must be positive");
    }
}

void validate_pulse(const PulseShape& pulse, const CombSpec& comb,
                    const FrequencyGrid& grid) {
    if (pulse.kind == PulseKind::ideal_comb)
        return;
    if (!(pulse.rms_width_s > 0.0))
        throw config_error("gaussian pulse requires rms_width_s > 0");
    // The harmonic envelope may droop at most 3 dB across the simulated
    // band, else the flat-comb model assumptions do not hold.
    const int n_edge =
        static_cast<int>(std::floor(grid.sample_rate_hz / 2.0 / comb.rep_rate_hz));
    const double c_edge = harmonic_envelope(pulse, comb, n_edge);
    if (c_edge < std::pow(10.0, -3.0 / 20.0))
        throw config_error("gaussian pulse too wide: harmonic envelope droops " +
                           std::to_string(-20.0 * std::log10(c_edge)) +
                           " dB at the band edge (limit 3 dB)");
}

} // namespace

double harmonic_envelope(const PulseShape& pulse, const CombSpec& comb, int n) {
    if (pulse.kind == PulseKind::ideal_comb)
        return 1.0;
    const double a = std::numbers::pi * static_cast<double>(n) * comb.rep_rate_hz *
                     pulse.rms_width_s;
    return std::exp(-2.0 * a * a);
}

double comb_harmonic_phase(int n) {
    if (n == 0)
        return 0.0;
    return kTwoPi * rng::hash01(static_cast<std::uint64_t>(n));
}

SampleBlock synth_tones(const std::vector<ToneSpec>& tones, const FrequencyGrid& grid) {
    validate_tones(tones, grid);
    SampleBlock block;
    block.grid = grid;
    block.samples.assign(static_cast<std::size_t>(grid.fft_size), 0.0);
    for (const auto& t : tones)
        accumulate_cosine(block.samples, t.amplitude, t.freq_hz / grid.sample_rate_hz,
                          t.phase_rad);
    return block;
}

std::vector<MixedLine> mixed_line_table(const std::vector<ToneSpec>& tones,
                                        const CombSpec& comb, const PulseShape& pulse,
                                        const FrequencyGrid& grid) {
    validate_tones(tones, grid);
    validate_pulse(pulse, comb, grid);
    const double nyquist = grid.sample_rate_hz / 2.0;
    std::vector<MixedLine> table;
    for (std::size_t j = 0; j < tones.size(); ++j) {
        const auto& t = tones[j];
        table.push_back({t.freq_hz, t.amplitude, t.phase_rad, static_cast<int>(j), 0, 0,
                         false});
        // Harmonics stop once both the difference line has folded past the
        // band edge and the sum line has left the band: n f_c > f_s/2 + f.
        const int n_stop =
            static_cast<int>(std::ceil((nyquist + t.freq_hz) / comb.rep_rate_hz));
        for (int n = 1; n <= n_stop; ++n) {
            const double c = harmonic_envelope(pulse, comb, n);
            if (c < 1e-15)
                break;
            const double amp = t.amplitude * c;
            const double theta = comb_harmonic_phase(n);
            const double diff = t.freq_hz - static_cast<double>(n) * comb.rep_rate_hz;
            const double sum = t.freq_hz + static_cast<double>(n) * comb.rep_rate_hz;
            if (diff > 0.0 && diff < nyquist) {
                table.push_back({diff, amp, t.phase_rad - theta, static_cast<int>(j), -1,
                                 n, false});
            } else if (diff < 0.0 && -diff < nyquist) {
                table.push_back({-diff, amp, -(t.phase_rad - theta), static_cast<int>(j),
                                 -1, n, true});
            }
            if (sum < nyquist)
                table.push_back({sum, amp, t.phase_rad + theta, static_cast<int>(j), +1,
                                 n, false});
        }
    }
    return table;
}

SampleBlock presample(const std::vector<ToneSpec>& tones, const CombSpec& comb,
                      const PulseShape& pulse, const FrequencyGrid& grid,
                      PresampleMethod method, int oversample_factor) {
    if (method == PresampleMethod::analytic) {
        const auto table = mixed_line_table(tones, comb, pulse, grid);
        SampleBlock block;
        block.grid = grid;
        block.samples.assign(static_cast<std::size_t>(grid.fft_size), 0.0);
        for (const auto& line : table)
            accumulate_cosine(block.samples, line.relative_amplitude,
                              line.freq_hz / grid.sample_rate_hz, line.phase_rad);
        return block;
    }

    validate_tones(tones, grid);
    validate_pulse(pulse, comb, grid);
    if (oversample_factor < 2)
        throw config_error("oversample_factor must be >= 2");
    const double dense_rate = static_cast<double>(oversample_factor) * grid.sample_rate_hz;
    if (pulse.kind == PulseKind::gaussian) {
        // The dense grid must still resolve the pulse: at least 4 samples
        // across its full width at half maximum.
        const double fwhm = 2.0 * std::sqrt(2.0 * std::numbers::ln2) * pulse.rms_width_s;
        if (fwhm * dense_rate < 4.0)
            throw config_error("gaussian pulse too narrow for the oversampled grid: " +
                               std::to_string(fwhm * dense_rate) +
                               " samples per FWHM (need >= 4); raise oversample_factor");
    }

    double f_max = 0.0;
    for (const auto& t : tones)
        f_max = std::max(f_max, t.freq_hz);
    const double nyquist = grid.sample_rate_hz / 2.0;
    // Same harmonic span as the analytic line table, so the two methods
    // model the same set of in-band lines.
    const int n_harm =
        static_cast<int>(std::ceil((nyquist + f_max) / comb.rep_rate_hz)) + 8;
    // Every mixing product must stay below the dense-grid Nyquist, or the
    // out-of-band tail would alias instead of being cut by the brick wall.
    if (f_max + static_cast<double>(n_harm) * comb.rep_rate_hz >= dense_rate / 2.0)
        throw config_error(
            "oversample_factor too small: mixing products of comb harmonic " +
            std::to_string(n_harm) + " reach past the dense-grid Nyquist");

    const std::size_t n_dense =
        static_cast<std::size_t>(grid.fft_size) * static_cast<std::size_t>(oversample_factor);
    std::vector<double> dense(n_dense, 0.0);
    for (const auto& t : tones)
        accumulate_cosine(dense, t.amplitude, t.freq_hz / dense_rate, t.phase_rad);

    std::vector<double> comb_train(n_dense, 1.0);  // n = 0 term of the series
    for (int n = 1; n <= n_harm; ++n) {
        const double c = harmonic_envelope(pulse, comb, n);
        if (c < 1e-15)
            break;
        accumulate_cosine(comb_train, 2.0 * c,
                          static_cast<double>(n) * comb.rep_rate_hz / dense_rate,
                          comb_harmonic_phase(n));
    }
    for (std::size_t k = 0; k < n_dense; ++k)
        dense[k] *= comb_train[k];

    // Brick-wall low-pass at f_s/2 and decimation in one step: keep the
    // first fft_size/2 + 1 bins of the dense transform.
    std::vector<double> reim;
    detail::rfft(dense, reim);
    SampleBlock block;
    block.grid = grid;
    detail::irfft_truncated(reim, grid.fft_size, block.samples);
    const double scale = 1.0 / static_cast<double>(n_dense);
    for (double& v : block.samples)
        v *= scale;
    return block;
}

SampleBlock add_noise(const SampleBlock& block, const NoiseSpec& noise,
                      double reference_amplitude) {
    if (std::isinf(noise.spectral_snr_db) && noise.spectral_snr_db > 0.0)
        return block;
    if (!std::isfinite(noise.spectral_snr_db))
        throw config_error("spectral_snr_db must be finite or +infinity");
    if (!(reference_amplitude > 0.0))
        throw config_error("noise reference amplitude must be positive");

    const double n_fft = static_cast<double>(block.grid.fft_size);
    const double sigma2 = reference_amplitude * reference_amplitude * n_fft /
                          (2.0 * std::pow(10.0, noise.spectral_snr_db / 10.0));
    const double sigma = std::sqrt(sigma2);

    SampleBlock out = block;
    // Box-Muller over a fixed-width engine: bit-reproducible everywhere,
    // unlike std::normal_distribution.
    std::mt19937_64 engine(noise.seed);
    auto uniform01 = [&engine]() {
        return (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    };
    const std::size_t n = out.samples.size();
    for (std::size_t k = 0; k < n; k += 2) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        out.samples[k] += sigma * r * std::cos(kTwoPi * u2);
        if (k + 1 < n)
            out.samples[k + 1] += sigma * r * std::sin(kTwoPi * u2);
    }
    return out;
}

} // namespace mda
