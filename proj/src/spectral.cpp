#include "mda/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace mda {

namespace {

// FFTW planning is not thread-safe; executing a plan on fresh arrays is.
// Plans are cached per transform length, created with FFTW_ESTIMATE for
// reproducible plan selection and FFTW_UNALIGNED so they run on any
// caller-owned buffer.
std::mutex g_plan_mutex;

fftw_plan r2c_plan(std::int64_t n) {
    static std::map<std::int64_t, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;
    std::vector<double> in(static_cast<std::size_t>(n));
    std::vector<double> out(2 * (static_cast<std::size_t>(n) / 2 + 1));
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                       reinterpret_cast<fftw_complex*>(out.data()),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(n, p);
    return p;
}

fftw_plan c2r_plan(std::int64_t n) {
    static std::map<std::int64_t, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;
    std::vector<double> in(2 * (static_cast<std::size_t>(n) / 2 + 1));
    std::vector<double> out(static_cast<std::size_t>(n));
    fftw_plan p = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                       reinterpret_cast<fftw_complex*>(in.data()),
                                       out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(n, p);
    return p;
}

} // namespace

namespace detail {

void rfft(const std::vector<double>& in, std::vector<double>& out_reim) {
    const auto n = static_cast<std::int64_t>(in.size());
    out_reim.assign(2 * (static_cast<std::size_t>(n) / 2 + 1), 0.0);
    // FFTW takes a non-const pointer but r2c with FFTW_ESTIMATE does not
    // modify its input.
    fftw_execute_dft_r2c(r2c_plan(n), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out_reim.data()));
}

void irfft_truncated(const std::vector<double>& reim, std::int64_t n_out,
                     std::vector<double>& out) {
    const std::size_t need = 2 * (static_cast<std::size_t>(n_out) / 2 + 1);
    std::vector<double> in(reim.begin(), reim.begin() + static_cast<std::ptrdiff_t>(
                                             std::min(need, reim.size())));
    in.resize(need, 0.0);
    // The Nyquist bin of a real transform must be purely real; truncation
    // can leave a residual imaginary part from out-of-band content.
    in[need - 1] = 0.0;
    out.assign(static_cast<std::size_t>(n_out), 0.0);
    fftw_execute_dft_c2r(c2r_plan(n_out), reinterpret_cast<fftw_complex*>(in.data()),
                         out.data());
}

} // namespace detail

Spectrum magnitude_spectrum(const SampleBlock& block) {
    if (static_cast<std::int64_t>(block.samples.size()) != block.grid.fft_size)
        throw config_error("magnitude_spectrum: block has " +
                           std::to_string(block.samples.size()) + " samples, grid expects " +
                           std::to_string(block.grid.fft_size));
    std::vector<double> reim;
    detail::rfft(block.samples, reim);
    Spectrum s;
    s.grid = block.grid;
    const std::size_t bins = reim.size() / 2;
    s.magnitudes.resize(bins);
    for (std::size_t k = 0; k < bins; ++k)
        s.magnitudes[k] = std::hypot(reim[2 * k], reim[2 * k + 1]);
    return s;
}

std::vector<Peak> find_peaks(const Spectrum& spec, double rel_threshold_db,
                             std::int64_t min_separation_bins) {
    if (rel_threshold_db > 0.0)
        throw config_error("find_peaks: rel_threshold_db must be <= 0");
    if (min_separation_bins < 1)
        throw config_error("find_peaks: min_separation_bins must be >= 1");

    const auto& m = spec.magnitudes;
    const auto n = static_cast<std::int64_t>(m.size());
    std::vector<Peak> candidates;
    if (n < 3)
        return candidates;

    // Interior local maxima; a run of equal values flanked by strictly
    // lower neighbors counts once, at its lowest bin.
    std::int64_t i = 1;
    while (i < n - 1) {
        if (m[static_cast<std::size_t>(i)] > m[static_cast<std::size_t>(i - 1)]) {
            std::int64_t j = i;
            while (j + 1 < n && m[static_cast<std::size_t>(j + 1)] ==
                                    m[static_cast<std::size_t>(i)])
                ++j;
            if (j < n - 1 && m[static_cast<std::size_t>(j + 1)] <
                                 m[static_cast<std::size_t>(i)])
                candidates.push_back({i, m[static_cast<std::size_t>(i)], std::nullopt});
            i = j + 1;
        } else {
            ++i;
        }
    }
    if (candidates.empty())
        return candidates;

    const double global_max = *std::max_element(m.begin(), m.end());
    const double floor_mag = global_max * std::pow(10.0, rel_threshold_db / 20.0);
    std::erase_if(candidates, [&](const Peak& p) { return p.magnitude < floor_mag; });

    // Greedy thinning, larger magnitude first (ties resolved to the lower
    // bin for determinism); peaks exactly min_separation_bins apart coexist.
    std::vector<Peak> by_mag = candidates;
    std::sort(by_mag.begin(), by_mag.end(), [](const Peak& a, const Peak& b) {
        if (a.magnitude != b.magnitude)
            return a.magnitude > b.magnitude;
        return a.bin < b.bin;
    });
    std::vector<Peak> kept;
    for (const Peak& p : by_mag) {
        const bool blocked = std::any_of(kept.begin(), kept.end(), [&](const Peak& q) {
            return std::abs(q.bin - p.bin) < min_separation_bins;
        });
        if (!blocked)
            kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end(),
              [](const Peak& a, const Peak& b) { return a.bin < b.bin; });
    return kept;
}

QuadResult quad_interp(const Spectrum& spec, std::int64_t bin) {
    const auto n = static_cast<std::int64_t>(spec.magnitudes.size());
    if (bin < 1 || bin > n - 2)
        throw config_error("quad_interp: bin " + std::to_string(bin) +
                           " is not interior to the spectrum");
    const double a = spec.magnitudes[static_cast<std::size_t>(bin - 1)];
    const double b = spec.magnitudes[static_cast<std::size_t>(bin)];
    const double c = spec.magnitudes[static_cast<std::size_t>(bin + 1)];
    if (b < a || b < c)
        throw config_error("quad_interp: bin " + std::to_string(bin) +
                           " is not a local maximum");
    // an equal top pair is exactly a half-bin vertex; computing it through
    // the quotient would round off the tie
    if (b == c && b > a)
        return {0.5, false};
    if (b == a && b > c)
        return {-0.5, false};
    const double den = a - 2.0 * b + c;
    if (den == 0.0)
        return {0.0, true};
    const double offset = 0.5 * (a - c) / den;
    return {std::clamp(offset, -0.5, 0.5), false};
}

} // namespace mda
