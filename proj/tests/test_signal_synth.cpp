#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mda/errors.hpp"
#include "mda/signal_synth.hpp"
#include "mda/spectral.hpp"

using namespace mda;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

FrequencyGrid ref_grid() { return make_grid(20e9, 100000); }
CombSpec ref_comb() { return comb_from_rate(100.02e6, ref_grid()); }

FrequencyGrid small_grid() { return make_grid(1e6, 5000); }
CombSpec small_comb() { return comb_from_rate(10020.0, small_grid()); }

} // namespace

TEST_CASE("seed hashing") {
    SUBCASE("splitmix64 reference vector") {
        // first output of the reference generator seeded with 0
        CHECK(rng::splitmix64(0) == 0xE220A8397B1DCDAFull);
    }
    SUBCASE("hash01 stays in [0,1) and is roughly centered") {
        double sum = 0.0;
        for (std::uint64_t i = 0; i < 4096; ++i) {
            const double u = rng::hash01(i);
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            sum += u;
        }
        CHECK(sum / 4096.0 == doctest::Approx(0.5).epsilon(0.05));
    }
    SUBCASE("derive_seed separates streams") {
        CHECK(rng::derive_seed(1, 0) != rng::derive_seed(1, 1));
        CHECK(rng::derive_seed(1, 0) != rng::derive_seed(2, 0));
        CHECK(rng::derive_seed(42, 17) == rng::derive_seed(42, 17));
    }
}

TEST_CASE("comb harmonic phases") {
    CHECK(comb_harmonic_phase(0) == 0.0);
    for (int n = 1; n < 200; ++n) {
        const double th = comb_harmonic_phase(n);
        CHECK(th >= 0.0);
        CHECK(th < kTau);
        CHECK(th == kTau * rng::hash01(static_cast<std::uint64_t>(n)));
    }
}

TEST_CASE("synth_tones materializes the cosine sum") {
    const auto grid = make_grid(1000.0, 4000);
    ToneSpec t{250.0, 2.0, 0.5};  // quarter rate
    const auto block = synth_tones({t}, grid);
    REQUIRE(block.samples.size() == 4000);
    for (std::size_t n = 0; n < block.samples.size(); ++n) {
        const double want =
            2.0 * std::cos(kTau * 0.25 * static_cast<double>(n) + 0.5);
        CHECK(std::abs(block.samples[n] - want) < 1e-10);
    }
}

TEST_CASE("synth_tones with no tones is silent") {
    const auto block = synth_tones({}, small_grid());
    for (double s : block.samples)
        CHECK(s == 0.0);
}

TEST_CASE("synth_tones validates its inputs") {
    const auto grid = small_grid();
    CHECK_THROWS_AS(synth_tones({{0.0, 1.0, 0.0}}, grid), config_error);
    CHECK_THROWS_AS(synth_tones({{5e5, 1.0, 0.0}}, grid), config_error);  // == f_s/2
    CHECK_THROWS_AS(synth_tones({{6e5, 1.0, 0.0}}, grid), config_error);
    CHECK_THROWS_AS(synth_tones({{1e5, 0.0, 0.0}}, grid), config_error);
    CHECK_THROWS_AS(synth_tones({{1e5, -1.0, 0.0}}, grid), config_error);
}

TEST_CASE("reference tones land on bins 6605 and 18870") {
    const auto block =
        synth_tones({{1.321e9, 1.0, 0.0}, {3.774e9, 1.0, 0.0}}, ref_grid());
    const auto spec = magnitude_spectrum(block);
    CHECK(spec.magnitudes[6605] == doctest::Approx(50000.0).epsilon(1e-9));
    CHECK(spec.magnitudes[18870] == doctest::Approx(50000.0).epsilon(1e-9));
    // nothing else anywhere near that tall
    double third = 0.0;
    for (std::size_t k = 0; k < spec.magnitudes.size(); ++k)
        if (k != 6605 && k != 18870)
            third = std::max(third, spec.magnitudes[k]);
    CHECK(third < 1e-4 * 50000.0);
}

TEST_CASE("harmonic envelope") {
    const auto comb = ref_comb();
    SUBCASE("ideal comb is flat") {
        PulseShape p;  // ideal
        for (int n : {0, 1, 50, 500})
            CHECK(harmonic_envelope(p, comb, n) == 1.0);
    }
    SUBCASE("gaussian envelope follows the stated formula") {
        PulseShape p{PulseKind::gaussian, 5e-12};
        CHECK(harmonic_envelope(p, comb, 0) == 1.0);
        CHECK(harmonic_envelope(p, comb, 10) ==
              doctest::Approx(0.9995064443).epsilon(1e-8));
        const double a = std::numbers::pi * 25.0 * comb.rep_rate_hz * 5e-12;
        CHECK(harmonic_envelope(p, comb, 25) ==
              doctest::Approx(std::exp(-2.0 * a * a)).epsilon(1e-12));
        CHECK(harmonic_envelope(p, comb, 50) < harmonic_envelope(p, comb, 25));
    }
}

TEST_CASE("mixed_line_table on the reference configuration") {
    const auto grid = ref_grid();
    const auto comb = ref_comb();
    const double phi = 0.7;
    const auto table = mixed_line_table({{1.321e9, 1.0, phi}}, comb, {}, grid);

    SUBCASE("every line is strictly inside the band") {
        for (const auto& l : table) {
            CHECK(l.freq_hz > 0.0);
            CHECK(l.freq_hz < 10e9);
            CHECK(l.relative_amplitude == 1.0);  // ideal comb, unit tone
        }
    }
    SUBCASE("provenance is unique") {
        auto key = [](const MixedLine& l) {
            return std::tuple{l.tone_index, l.sign, l.order};
        };
        for (std::size_t i = 0; i < table.size(); ++i)
            for (std::size_t j = i + 1; j < table.size(); ++j)
                CHECK(key(table[i]) != key(table[j]));
    }
    SUBCASE("the advertised lines are present") {
        auto find = [&](int sign, int order) {
            for (const auto& l : table)
                if (l.sign == sign && l.order == order)
                    return l;
            FAIL("line not found");
            return MixedLine{};
        };
        const auto self = find(0, 0);
        CHECK(self.freq_hz == 1.321e9);
        CHECK(self.phase_rad == phi);
        CHECK(!self.folded);

        const auto d1 = find(-1, 1);
        CHECK(d1.freq_hz == doctest::Approx(1.22098e9).epsilon(1e-9));
        CHECK(d1.phase_rad == phi - comb_harmonic_phase(1));
        CHECK(!d1.folded);

        const auto s1 = find(+1, 1);
        CHECK(s1.freq_hz == doctest::Approx(1.42102e9).epsilon(1e-9));
        CHECK(s1.phase_rad == phi + comb_harmonic_phase(1));
        CHECK(!s1.folded);

        // first harmonic past the tone: reflected through DC, phase negated
        const auto f14 = find(-1, 14);
        CHECK(f14.folded);
        CHECK(f14.freq_hz ==
              doctest::Approx(14.0 * 100.02e6 - 1.321e9).epsilon(1e-12));
        CHECK(f14.phase_rad == -(phi - comb_harmonic_phase(14)));
    }
    SUBCASE("line census") {
        int diffs = 0, folds = 0, sums = 0, self = 0;
        for (const auto& l : table) {
            if (l.sign == 0)
                ++self;
            else if (l.sign == +1)
                ++sums;
            else if (l.folded)
                ++folds;
            else
                ++diffs;
        }
        CHECK(self == 1);
        CHECK(diffs == 13);   // n = 1 .. 13 stay positive
        CHECK(folds == 100);  // n = 14 .. 113 reflect into the band
        CHECK(sums == 86);    // n = 1 .. 86 stay below Nyquist
        CHECK(table.size() == 200);
    }
}

TEST_CASE("mixed_line_table: second reference tone census") {
    const auto table =
        mixed_line_table({{3.774e9, 1.0, 0.0}}, ref_comb(), {}, ref_grid());
    int diffs = 0, folds = 0, sums = 0;
    for (const auto& l : table) {
        if (l.sign == -1)
            (l.folded ? folds : diffs)++;
        if (l.sign == +1)
            ++sums;
    }
    CHECK(diffs == 37);
    CHECK(folds == 100);
    CHECK(sums == 62);
}

TEST_CASE("mixed_line_table: gaussian envelope scales line amplitudes") {
    PulseShape p{PulseKind::gaussian, 5e-12};
    const auto comb = ref_comb();
    const auto table = mixed_line_table({{1.321e9, 0.8, 0.0}}, comb, p, ref_grid());
    for (const auto& l : table) {
        const double c = harmonic_envelope(p, comb, l.order);
        CHECK(l.relative_amplitude == doctest::Approx(0.8 * c).epsilon(1e-15));
    }
}

TEST_CASE("gaussian pulse droop validation") {
    const auto grid = ref_grid();
    const auto comb = ref_comb();
    // at 20 ps the envelope is down ~6.7 dB at the 99th harmonic
    CHECK_THROWS_WITH_AS(
        mixed_line_table({{1.321e9, 1.0, 0.0}}, comb, {PulseKind::gaussian, 2e-11}, grid),
        doctest::Contains("droops"), config_error);
    CHECK_NOTHROW(mixed_line_table({{1.321e9, 1.0, 0.0}}, comb,
                                   {PulseKind::gaussian, 5e-12}, grid));
    CHECK_THROWS_AS(mixed_line_table({{1.321e9, 1.0, 0.0}}, comb,
                                     {PulseKind::gaussian, 0.0}, grid),
                    config_error);
}

TEST_CASE("analytic presample puts difference-line energy where the table says") {
    const auto grid = small_grid();
    const auto comb = small_comb();
    const auto block =
        presample({{353200.0, 1.0, 0.0}}, comb, {}, grid, PresampleMethod::analytic);
    REQUIRE(block.samples.size() == 5000);
    const auto spec = magnitude_spectrum(block);

    // the tone itself sits exactly on bin 1766; neighbors only contribute
    // percent-level leakage
    CHECK(spec.magnitudes[1766] == doctest::Approx(2500.0).epsilon(0.04));

    // every difference line up to order 9 is discernible near its bin
    for (int n = 1; n <= 9; ++n) {
        const double pos = (353200.0 - n * comb.rep_rate_hz) / grid.resolution_hz;
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double m = std::max(spec.magnitudes[lo], spec.magnitudes[lo + 1]);
        CHECK(m > 0.5 * 2500.0);
    }
}

TEST_CASE("presample with no tones is silent") {
    const auto a = presample({}, small_comb(), {}, small_grid(),
                             PresampleMethod::analytic);
    for (double s : a.samples)
        CHECK(s == 0.0);
    const auto o = presample({}, small_comb(), {}, small_grid(),
                             PresampleMethod::oversampled, 4);
    for (double s : o.samples)
        CHECK(s == 0.0);
}

TEST_CASE("presample methods agree at the measured bins") {
    const auto grid = small_grid();
    const auto comb = small_comb();
    // One exact-bin tone and one deliberately fractional tone, both chosen
    // so no fold family lands near their difference lines. The two models
    // are allowed to differ on peak flanks: the filter-then-decimate path
    // keeps skirts of lines it cuts at the band edge and loses the mirror
    // interference a direct low-rate rendering sees, a ~1%-of-peak effect.
    for (double f : {353200.0, 328155.0}) {
        const auto a = magnitude_spectrum(
            presample({{f, 1.0, 0.9}}, comb, {}, grid, PresampleMethod::analytic));
        const auto o = magnitude_spectrum(presample({{f, 1.0, 0.9}}, comb, {}, grid,
                                                    PresampleMethod::oversampled, 16));
        for (int n = 0; n <= 9; ++n) {
            const double pos = (f - n * comb.rep_rate_hz) / grid.resolution_hz;
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            // top bin of the line's own lobe
            const std::size_t k =
                a.magnitudes[lo] >= a.magnitudes[lo + 1] ? lo : lo + 1;
            CHECK(std::abs(o.magnitudes[k] - a.magnitudes[k]) <=
                  0.05 * a.magnitudes[k]);
        }
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t k = 100; k <= 2400; ++k) {
            const double d = o.magnitudes[k] - a.magnitudes[k];
            acc += d * d;
            ++cnt;
        }
        CHECK(std::sqrt(acc / static_cast<double>(cnt)) < 0.02 * 2500.0);
    }
}

TEST_CASE("presample is deterministic") {
    const auto grid = small_grid();
    const auto comb = small_comb();
    const std::vector<ToneSpec> tones{{353200.0, 1.0, 0.3}};
    const auto a1 = presample(tones, comb, {}, grid, PresampleMethod::analytic);
    const auto a2 = presample(tones, comb, {}, grid, PresampleMethod::analytic);
    CHECK(a1.samples == a2.samples);
    const auto o1 = presample(tones, comb, {}, grid, PresampleMethod::oversampled, 8);
    const auto o2 = presample(tones, comb, {}, grid, PresampleMethod::oversampled, 8);
    CHECK(o1.samples == o2.samples);
}

TEST_CASE("oversampled-grid validation") {
    const auto grid = small_grid();
    const auto comb = small_comb();
    const std::vector<ToneSpec> tones{{353200.0, 1.0, 0.0}};
    SUBCASE("factor below 2") {
        CHECK_THROWS_AS(
            presample(tones, comb, {}, grid, PresampleMethod::oversampled, 1),
            config_error);
    }
    SUBCASE("mixing products must clear the dense Nyquist") {
        CHECK_THROWS_WITH_AS(
            presample(tones, comb, {}, grid, PresampleMethod::oversampled, 2),
            doctest::Contains("dense-grid Nyquist"), config_error);
        CHECK_NOTHROW(
            presample(tones, comb, {}, grid, PresampleMethod::oversampled, 4));
    }
    SUBCASE("pulse must span at least 4 dense samples") {
        CHECK_THROWS_WITH_AS(presample(tones, comb, {PulseKind::gaussian, 5e-8}, grid,
                                       PresampleMethod::oversampled, 16),
                             doctest::Contains("too narrow"), config_error);
    }
}

TEST_CASE("noise calibration") {
    SUBCASE("sample variance matches the stated sigma") {
        SampleBlock zeros;
        zeros.grid = ref_grid();
        zeros.samples.assign(100000, 0.0);
        const auto noisy = add_noise(zeros, {77.0, 11}, 1.0);
        double mean = 0.0;
        for (double s : noisy.samples)
            mean += s;
        mean /= 1e5;
        double var = 0.0;
        for (double s : noisy.samples)
            var += (s - mean) * (s - mean);
        var /= 1e5;
        const double want = 1e5 / (2.0 * std::pow(10.0, 7.7));
        CHECK(var == doctest::Approx(want).epsilon(0.02));
    }
    SUBCASE("measured spectral SNR within 1 dB over 20 seeds") {
        const auto grid = ref_grid();
        const auto clean = synth_tones({{4e9, 1.0, 0.0}}, grid);  // exact bin 20000
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto spec = magnitude_spectrum(add_noise(clean, {77.0, seed}, 1.0));
            const double peak = spec.magnitudes[20000];
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t k = 1; k + 1 < spec.magnitudes.size(); ++k) {
                if (k >= 20000 - 5 && k <= 20000 + 5)
                    continue;
                acc += spec.magnitudes[k] * spec.magnitudes[k];
                ++cnt;
            }
            // per-quadrature noise power: |X|^2 averages twice the
            // variance of each quadrature
            const double snr_db =
                10.0 * std::log10(peak * peak / (acc / static_cast<double>(cnt) / 2.0));
            CHECK(snr_db == doctest::Approx(77.0).epsilon(0.013));
        }
    }
}

TEST_CASE("add_noise determinism and pass-through") {
    SampleBlock block;
    block.grid = small_grid();
    block.samples.assign(5000, 0.25);
    SUBCASE("same seed, same samples") {
        const auto a = add_noise(block, {60.0, 99}, 1.0);
        const auto b = add_noise(block, {60.0, 99}, 1.0);
        CHECK(a.samples == b.samples);
    }
    SUBCASE("different seeds differ") {
        const auto a = add_noise(block, {60.0, 99}, 1.0);
        const auto b = add_noise(block, {60.0, 100}, 1.0);
        CHECK(a.samples != b.samples);
    }
    SUBCASE("infinite SNR is the identity") {
        NoiseSpec off;  // default +inf
        const auto a = add_noise(block, off, 1.0);
        CHECK(a.samples == block.samples);
    }
    SUBCASE("bad parameters") {
        CHECK_THROWS_AS(
            add_noise(block, {-std::numeric_limits<double>::infinity(), 0}, 1.0),
            config_error);
        CHECK_THROWS_AS(
            add_noise(block, {std::numeric_limits<double>::quiet_NaN(), 0}, 1.0),
            config_error);
        CHECK_THROWS_AS(add_noise(block, {60.0, 0}, 0.0), config_error);
    }
}
