#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mda/estimator.hpp"
#include "mda/freq_core.hpp"
#include "mda/signal_synth.hpp"
#include "mda/spectral.hpp"

namespace mda {

enum class EstimatorKind { mda, mda_quad };

struct PeakParams {
    double rel_threshold_db = -40.0;
    std::int64_t min_separation_bins = 50;
};

/// Fully pinned description of one simulation run. Physical parameters have
/// no defaults; only the peak-finder, estimator, and method knobs do.
struct ExperimentConfig {
    FrequencyGrid grid;
    CombSpec comb;
    std::vector<ToneSpec> tones;
    NoiseSpec noise;  // +inf spectral_snr_db = noise disabled
    std::optional<double> noise_reference_amplitude;  // default: largest tone
    PulseShape pulse;
    int order_count = 1;
    EstimatorKind estimator = EstimatorKind::mda;
    PeakParams peaks;
    PresampleMethod method = PresampleMethod::analytic;
    int oversample_factor = 16;
};

struct SweepRow {
    double delta = 0.0;
    double dev1_bins = 0.0;    // single-measurement deviation
    double devavg_bins = 0.0;  // averaged deviation
};

struct SweepResult {
    double epsilon = 0.0;
    int order_count = 0;
    std::vector<SweepRow> rows;
};

/// Per-tone outcome of one full-chain run.
struct ToneReport {
    std::size_t tone_index = 0;
    double truth_hz = 0.0;
    MdaEstimate estimate;
};

struct ChainResult {
    Spectrum spectrum;
    std::vector<ToneReport> tones;
    std::vector<std::string> diagnostics;  // dropped-cluster notes etc.
};

/// One Monte Carlo trial: the derived seed and either per-tone estimates or
/// a failure diagnostic.
struct TrialResult {
    std::uint64_t seed = 0;
    std::vector<ToneReport> tones;
    std::optional<std::string> failure;
};

struct McToneStats {
    std::size_t tone_index = 0;
    double truth_hz = 0.0;
    double rms_hz = 0.0;
    double mean_hz = 0.0;
    double max_abs_hz = 0.0;
    int trials = 0;  // trials contributing (successes)
    int failures = 0;
};

struct McSummary {
    std::uint64_t base_seed = 0;
    int trials = 0;
    int failures = 0;
    std::vector<McToneStats> per_tone;
};

/// Loads and validates a JSON experiment configuration from a file.
ExperimentConfig load_config(const std::string& path);

/// Parses a configuration from JSON text (same schema as load_config).
ExperimentConfig parse_config(const std::string& text);

/// Serializes the fully resolved configuration (defaults materialized,
/// derived comb decomposition included) back to JSON text.
std::string config_echo_json(const ExperimentConfig& cfg);

/// Noise reference amplitude: explicit value or the largest tone amplitude.
double resolve_reference_amplitude(const ExperimentConfig& cfg);

/// Closed-form sweep of the two deviation curves over delta = k/(steps-1).
SweepResult run_delta_sweep(double epsilon, int order_count, int steps);

/// Executes synth -> presample -> noise -> FFT -> peaks -> association ->
/// estimation, and attaches ground-truth deviations from the configured
/// tones. Peaks are pre-filtered to the difference-line windows implied by
/// the configured tones (the spectral copies' zone indices are treated as
/// known, matching the operating assumption of the method).
ChainResult run_full_chain(const ExperimentConfig& cfg);

/// Runs trials full chains with per-trial seeds (and per-trial random tone
/// phases) derived from base_seed, and aggregates per-tone deviation
/// statistics. The summary is identical for any thread count.
McSummary run_monte_carlo(const ExperimentConfig& cfg, int trials,
                          std::uint64_t base_seed, int threads = 0);

/// The per-trial configuration used by run_monte_carlo (exposed so tests
/// can reproduce individual trials).
ExperimentConfig monte_carlo_trial_config(const ExperimentConfig& cfg,
                                          std::uint64_t base_seed, int trial);

} // namespace mda
