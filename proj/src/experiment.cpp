#include "mda/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace mda {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number())
        throw config_error("config: missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

std::int64_t require_integer(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw config_error("config: missing or non-integer field '" + key + "'");
    return j[key].get<std::int64_t>();
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.tones.empty())
        throw config_error("config: at least one tone is required");
    for (const auto& t : cfg.tones) {
        if (!(t.freq_hz > 0.0) || !(t.freq_hz < cfg.grid.sample_rate_hz / 2.0))
            throw config_error("config: tone at " + std::to_string(t.freq_hz) +
                               " Hz is outside (0, f_s/2)");
        if (!(t.amplitude > 0.0))
            throw config_error("config: tone amplitudes must be positive");
    }
    if (cfg.order_count < 1)
        throw config_error("config: order_count must be >= 1");
    if (cfg.peaks.rel_threshold_db > 0.0)
        throw config_error("config: peaks.rel_threshold_db must be <= 0");
    if (cfg.peaks.min_separation_bins < 1)
        throw config_error("config: peaks.min_separation_bins must be >= 1");
    if (cfg.oversample_factor < 2)
        throw config_error("config: oversample_factor must be >= 2");
    if (cfg.noise_reference_amplitude && !(*cfg.noise_reference_amplitude > 0.0))
        throw config_error("config: noise.reference_amplitude must be positive");
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw config_error("config: top level must be a JSON object");

    ExperimentConfig cfg;
    if (!j.contains("grid") || !j.contains("comb") || !j.contains("tones") ||
        !j.contains("order_count"))
        throw config_error("config: required fields are grid, comb, tones, order_count");

    cfg.grid = make_grid(require_number(j["grid"], "sample_rate_hz"),
                         require_integer(j["grid"], "fft_size"));
    cfg.comb = comb_from_rate(require_number(j["comb"], "rep_rate_hz"), cfg.grid);

    if (!j["tones"].is_array())
        throw config_error("config: tones must be an array");
    for (const auto& tj : j["tones"]) {
        ToneSpec t;
        t.freq_hz = require_number(tj, "freq_hz");
        t.amplitude = tj.value("amplitude", 1.0);
        t.phase_rad = tj.value("phase_rad", 0.0);
        cfg.tones.push_back(t);
    }

    if (j.contains("noise") && !j["noise"].is_null()) {
        const auto& nj = j["noise"];
        cfg.noise.spectral_snr_db = require_number(nj, "spectral_snr_db");
        cfg.noise.seed = nj.value("seed", std::uint64_t{0});
        if (nj.contains("reference_amplitude"))
            cfg.noise_reference_amplitude = nj["reference_amplitude"].get<double>();
    }

    if (j.contains("pulse") && !j["pulse"].is_null()) {
        const auto& pj = j["pulse"];
        const std::string kind = pj.value("kind", "ideal-comb");
        if (kind == "ideal-comb") {
            cfg.pulse.kind = PulseKind::ideal_comb;
        } else if (kind == "gaussian") {
            cfg.pulse.kind = PulseKind::gaussian;
            cfg.pulse.rms_width_s = require_number(pj, "rms_width_s");
        } else {
            throw config_error("config: pulse.kind must be 'ideal-comb' or 'gaussian'");
        }
    }

    cfg.order_count = static_cast<int>(require_integer(j, "order_count"));

    const std::string est = j.value("estimator", "mda");
    if (est == "mda")
        cfg.estimator = EstimatorKind::mda;
    else if (est == "mda-quad")
        cfg.estimator = EstimatorKind::mda_quad;
    else
        throw config_error("config: estimator must be 'mda' or 'mda-quad'");

    if (j.contains("peaks") && !j["peaks"].is_null()) {
        cfg.peaks.rel_threshold_db = j["peaks"].value("rel_threshold_db", -40.0);
        cfg.peaks.min_separation_bins =
            j["peaks"].value("min_separation_bins", std::int64_t{50});
    }

    const std::string method = j.value("method", "analytic");
    if (method == "analytic")
        cfg.method = PresampleMethod::analytic;
    else if (method == "oversampled")
        cfg.method = PresampleMethod::oversampled;
    else
        throw config_error("config: method must be 'analytic' or 'oversampled'");
    cfg.oversample_factor = static_cast<int>(j.value("oversample_factor", std::int64_t{16}));

    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw io_error("error reading config file: " + path);
    return parse_config(buf.str());
}

std::string config_echo_json(const ExperimentConfig& cfg) {
    json j;
    j["grid"] = {{"sample_rate_hz", cfg.grid.sample_rate_hz},
                 {"fft_size", cfg.grid.fft_size},
                 {"resolution_hz", cfg.grid.resolution_hz}};
    j["comb"] = {{"rep_rate_hz", cfg.comb.rep_rate_hz},
                 {"alpha", cfg.comb.alpha},
                 {"epsilon", cfg.comb.epsilon}};
    j["tones"] = json::array();
    for (const auto& t : cfg.tones)
        j["tones"].push_back({{"freq_hz", t.freq_hz},
                              {"amplitude", t.amplitude},
                              {"phase_rad", t.phase_rad}});
    if (std::isfinite(cfg.noise.spectral_snr_db)) {
        j["noise"] = {{"spectral_snr_db", cfg.noise.spectral_snr_db},
                      {"seed", cfg.noise.seed},
                      {"reference_amplitude", resolve_reference_amplitude(cfg)}};
    } else {
        j["noise"] = nullptr;
    }
    if (cfg.pulse.kind == PulseKind::ideal_comb)
        j["pulse"] = {{"kind", "ideal-comb"}};
    else
        j["pulse"] = {{"kind", "gaussian"}, {"rms_width_s", cfg.pulse.rms_width_s}};
    j["order_count"] = cfg.order_count;
    j["estimator"] = cfg.estimator == EstimatorKind::mda ? "mda" : "mda-quad";
    j["peaks"] = {{"rel_threshold_db", cfg.peaks.rel_threshold_db},
                  {"min_separation_bins", cfg.peaks.min_separation_bins}};
    j["method"] = cfg.method == PresampleMethod::analytic ? "analytic" : "oversampled";
    j["oversample_factor"] = cfg.oversample_factor;
    return j.dump(2);
}

double resolve_reference_amplitude(const ExperimentConfig& cfg) {
    if (cfg.noise_reference_amplitude)
        return *cfg.noise_reference_amplitude;
    double a = 0.0;
    for (const auto& t : cfg.tones)
        a = std::max(a, t.amplitude);
    return a;
}

SweepResult run_delta_sweep(double epsilon, int order_count, int steps) {
    if (steps < 2)
        throw config_error("sweep: steps must be >= 2");
    if (order_count < 1)
        throw config_error("sweep: order_count must be >= 1");
    SweepResult res;
    res.epsilon = epsilon;
    res.order_count = order_count;
    res.rows.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const double d = static_cast<double>(k) / static_cast<double>(steps - 1);
        res.rows.push_back({d, delta_single(d), delta_mda(d, epsilon, order_count)});
    }
    return res;
}

ChainResult run_full_chain(const ExperimentConfig& cfg) {
    validate_config(cfg);

    SampleBlock block =
        presample(cfg.tones, cfg.comb, cfg.pulse, cfg.grid, cfg.method, cfg.oversample_factor);
    if (std::isfinite(cfg.noise.spectral_snr_db))
        block = add_noise(block, cfg.noise, resolve_reference_amplitude(cfg));

    ChainResult result;
    result.spectrum = magnitude_spectrum(block);
    const auto peaks = find_peaks(result.spectrum, cfg.peaks.rel_threshold_db,
                                  cfg.peaks.min_separation_bins);

    // Keep only peaks inside the difference-line windows the configured
    // tones imply: the copies' zone indices are known operating parameters
    // of the receiver, and sum/fold lines elsewhere in the spectrum do not
    // participate in reconstruction.
    std::set<std::size_t> keep;
    for (const auto& tone : cfg.tones) {
        for (int n = 0; n < cfg.order_count; ++n) {
            const double expect_bin =
                copy_frequency(tone.freq_hz, cfg.comb, n) / cfg.grid.resolution_hz;
            for (std::size_t p = 0; p < peaks.size(); ++p) {
                if (std::abs(static_cast<double>(peaks[p].bin) - expect_bin) <= 2.5)
                    keep.insert(p);
            }
        }
    }
    std::vector<Peak> curated;
    curated.reserve(keep.size());
    for (std::size_t p : keep)
        curated.push_back(peaks[p]);

    if (curated.empty())
        throw estimation_error("no spectral peaks found in any expected copy window");
    auto assoc = associate_orders(curated, cfg.comb, cfg.grid, cfg.order_count);
    result.diagnostics = assoc.diagnostics;

    std::map<int, std::vector<ZoneMeasurement>> clusters;
    for (auto& [cid, zone] : assoc.assignments)
        clusters[cid].push_back(zone);

    for (std::size_t j = 0; j < cfg.tones.size(); ++j) {
        const double truth = cfg.tones[j].freq_hz;
        const std::vector<ZoneMeasurement>* best = nullptr;
        double best_err = cfg.comb.rep_rate_hz / 2.0;
        for (const auto& [cid, zones] : clusters) {
            double mean = 0.0;
            for (const auto& z : zones)
                mean += z.reconstructed_hz;
            mean /= static_cast<double>(zones.size());
            const double err = std::abs(mean - truth);
            if (err < best_err) {
                best_err = err;
                best = &zones;
            }
        }
        if (!best)
            throw estimation_error("tone at " + std::to_string(truth) +
                                   " Hz was not recovered from the spectrum");
        std::vector<ZoneMeasurement> zones = *best;
        for (auto& z : zones)
            z.deviation_hz = z.reconstructed_hz - truth;
        ToneReport rep;
        rep.tone_index = j;
        rep.truth_hz = truth;
        rep.estimate = cfg.estimator == EstimatorKind::mda
                           ? mda_estimate(zones, cfg.comb)
                           : mda_quad_estimate(result.spectrum, zones, cfg.comb);
        result.tones.push_back(std::move(rep));
    }
    return result;
}

ExperimentConfig monte_carlo_trial_config(const ExperimentConfig& cfg,
                                          std::uint64_t base_seed, int trial) {
    ExperimentConfig t = cfg;
    const std::uint64_t trial_seed =
        rng::derive_seed(base_seed, static_cast<std::uint64_t>(trial));
    t.noise.seed = trial_seed;
    // Independent random tone phases per trial: the acquisition phase is
    // not a controlled quantity, and freezing it would correlate the trials.
    for (std::size_t j = 0; j < t.tones.size(); ++j)
        t.tones[j].phase_rad =
            2.0 * std::numbers::pi *
            rng::hash01(rng::derive_seed(trial_seed, 1000 + static_cast<std::uint64_t>(j)));
    return t;
}

McSummary run_monte_carlo(const ExperimentConfig& cfg, int trials,
                          std::uint64_t base_seed, int threads) {
    if (trials < 1)
        throw config_error("montecarlo: trials must be >= 1");
    validate_config(cfg);

    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int t = next.fetch_add(1);
            if (t >= trials)
                return;
            TrialResult& out = results[static_cast<std::size_t>(t)];
            const ExperimentConfig trial_cfg = monte_carlo_trial_config(cfg, base_seed, t);
            out.seed = trial_cfg.noise.seed;
            try {
                out.tones = run_full_chain(trial_cfg).tones;
            } catch (const estimation_error& e) {
                out.failure = e.what();
            }
        }
    };

    int n_threads = threads;
    if (n_threads <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        n_threads = hw == 0 ? 1 : static_cast<int>(hw);
    }
    n_threads = std::min(n_threads, trials);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    // Deterministic reduction in trial order, independent of scheduling.
    McSummary summary;
    summary.base_seed = base_seed;
    summary.trials = trials;
    const std::size_t n_tones = cfg.tones.size();
    std::vector<double> sum(n_tones, 0.0), sumsq(n_tones, 0.0), maxabs(n_tones, 0.0);
    std::vector<int> ok(n_tones, 0);
    std::string first_failure;
    for (const auto& r : results) {
        if (r.failure) {
            ++summary.failures;
            if (first_failure.empty())
                first_failure = *r.failure;
            continue;
        }
        for (const auto& rep : r.tones) {
            const std::size_t j = rep.tone_index;
            const double dev = rep.estimate.avg_deviation_hz.value_or(0.0);
            sum[j] += dev;
            sumsq[j] += dev * dev;
            maxabs[j] = std::max(maxabs[j], std::abs(dev));
            ++ok[j];
        }
    }
    if (summary.failures == trials)
        throw estimation_error("all " + std::to_string(trials) +
                               " trials failed; first failure: " + first_failure);
    for (std::size_t j = 0; j < n_tones; ++j) {
        McToneStats s;
        s.tone_index = j;
        s.truth_hz = cfg.tones[j].freq_hz;
        s.trials = ok[j];
        s.failures = trials - ok[j];
        if (ok[j] > 0) {
            s.rms_hz = std::sqrt(sumsq[j] / static_cast<double>(ok[j]));
            s.mean_hz = sum[j] / static_cast<double>(ok[j]);
            s.max_abs_hz = maxabs[j];
        }
        summary.per_tone.push_back(s);
    }
    return summary;
}

} // namespace mda
