#include "mda/freq_core.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mda {

namespace {

// Snap tolerance for index decompositions: values this close to an integer
// bin are treated as exactly on it (guards against representational drift
// in exact-grid cases like 1.321e9 / 200e3).
constexpr double kIndexSnap = 1e-6;

} // namespace

FrequencyGrid make_grid(double sample_rate_hz, std::int64_t fft_size) {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
        throw config_error("grid: sample_rate_hz must be positive and finite");
    if (fft_size < 2)
        throw config_error("grid: fft_size must be at least 2");
    FrequencyGrid g;
    g.sample_rate_hz = sample_rate_hz;
    g.fft_size = fft_size;
    g.resolution_hz = sample_rate_hz / static_cast<double>(fft_size);
    return g;
}

CombSpec comb_from_rate(double rep_rate_hz, const FrequencyGrid& grid) {
    if (!(rep_rate_hz > 0.0) || !std::isfinite(rep_rate_hz))
        throw config_error("comb: rep_rate_hz must be positive and finite");
    const double q = rep_rate_hz / grid.resolution_hz;
    const double r = std::round(q);
    CombSpec c;
    c.rep_rate_hz = rep_rate_hz;
    if (std::abs(q - r) <= kIndexSnap) {
        c.alpha = static_cast<std::int64_t>(r);
        c.epsilon = 0.0;
    } else {
        c.alpha = static_cast<std::int64_t>(std::floor(q));
        c.epsilon = q - std::floor(q);
        // Snap epsilon onto the 1e-6 grid when the division drifted by no
        // more than 1e-9; exact ties (e.g. delta - 5*0.1 = -0.5) then land
        // on representable values and the tie rule fires deterministically.
        const double snapped = std::round(c.epsilon * 1e6) / 1e6;
        if (std::abs(c.epsilon - snapped) <= 1e-9 && snapped < 1.0)
            c.epsilon = snapped;
    }
    return c;
}

FrequencyIndex index_of(double freq_hz, const FrequencyGrid& grid) {
    if (freq_hz < 0.0 || !std::isfinite(freq_hz))
        throw config_error("index_of: frequency must be non-negative and finite, got " +
                           std::to_string(freq_hz));
    const double q = freq_hz / grid.resolution_hz;
    const double r = std::round(q);
    FrequencyIndex idx;
    if (std::abs(q - r) <= kIndexSnap) {
        idx.integer_part = static_cast<std::int64_t>(r);
        idx.fractional_part = 0.0;
    } else {
        idx.integer_part = static_cast<std::int64_t>(std::floor(q));
        idx.fractional_part = q - std::floor(q);
    }
    return idx;
}

double frac_mod1(double x) {
    double r = x - std::floor(x);
    // x slightly below an integer can round up to 1.0; wrap to keep the
    // contract result in [0, 1) (mod-1 topology: 1 - tiny ~ 0).
    if (r >= 1.0)
        r = 0.0;
    return r;
}

std::int64_t round_half_up(double x) {
    // floor(x) + (frac >= 0.5): immune to the x + 0.5 rounding pitfall near
    // representable values just below .5 ties.
    const double f = std::floor(x);
    return static_cast<std::int64_t>(f) + (x - f >= 0.5 ? 1 : 0);
}

double delta_single(double delta) {
    const double u = frac_mod1(delta);
    return static_cast<double>(round_half_up(u)) - u;
}

double delta_order(double delta, double epsilon, int n) {
    const double u = frac_mod1(delta - static_cast<double>(n) * epsilon);
    return static_cast<double>(round_half_up(u)) - u;
}

double delta_mda(double delta, double epsilon, int order_count) {
    if (order_count < 1)
        throw config_error("delta_mda: order_count must be >= 1");
    double sum = 0.0;
    for (int n = 0; n < order_count; ++n)
        sum += delta_order(delta, epsilon, n);
    return sum / static_cast<double>(order_count);
}

double copy_frequency(double f_in_hz, const CombSpec& comb, int n) {
    if (n < 0)
        throw config_error("copy_frequency: order must be >= 0");
    const double f = f_in_hz - static_cast<double>(n) * comb.rep_rate_hz;
    if (!(f > 0.0))
        throw fold_error("copy_frequency: order " + std::to_string(n) +
                         " folds through DC (" + std::to_string(f_in_hz) + " Hz - " +
                         std::to_string(n) + " * " + std::to_string(comb.rep_rate_hz) +
                         " Hz <= 0)");
    return f;
}

double reconstruct(double f_meas_zone_hz, const CombSpec& comb, int n) {
    if (n < 0)
        throw config_error("reconstruct: order must be >= 0");
    if (f_meas_zone_hz < 0.0)
        throw config_error("reconstruct: zone frequency must be >= 0");
    return f_meas_zone_hz + static_cast<double>(n) * comb.rep_rate_hz;
}

} // namespace mda
