#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mda/freq_core.hpp"
#include "mda/spectral.hpp"

namespace mda {

/// One per-order measurement of a tone: where its n-th spectral copy was
/// found and what fundamental frequency that implies.
struct ZoneMeasurement {
    int order = 0;                              // n
    std::int64_t measured_bin = 0;
    std::optional<double> refined_offset_bins;  // quad refinement, if applied
    double zone_freq_hz = 0.0;                  // (bin + offset) * f_res
    double reconstructed_hz = 0.0;              // zone_freq_hz + n * f_c
    std::optional<double> deviation_hz;         // vs. ground truth when known
    bool quad_degenerate = false;
};

/// A tone's final estimate: the per-order records and their average.
struct MdaEstimate {
    std::vector<ZoneMeasurement> zones;
    double estimate_hz = 0.0;                // mean of reconstructed_hz
    std::optional<double> avg_deviation_hz;  // estimate - truth when known
    int order_count = 0;
};

/// associate_orders output: per-cluster order assignments plus diagnostics
/// for clusters that had peaks but not a full set of orders.
struct AssociationResult {
    std::vector<std::pair<int, ZoneMeasurement>> assignments;  // (cluster id, zone)
    std::vector<std::string> diagnostics;
};

/// Closed-form per-order deviations and their average for a tone on a grid.
struct PredictedDeviation {
    std::vector<DeviationRecord> orders;
    double average_bins = 0.0;
    double average_hz = 0.0;
};

/// Groups detected peaks into tone clusters by reconstructing every
/// (peak, order) candidate and clustering the candidates that agree within
/// rep_rate/2; returns exactly one measurement per order for every complete
/// cluster. Throws estimation_error when no cluster reaches order_count
/// consistent members, and ambiguity_error when one peak is claimed by two
/// complete clusters.
AssociationResult associate_orders(const std::vector<Peak>& peaks, const CombSpec& comb,
                                   const FrequencyGrid& grid, int order_count);

/// Averages the reconstructed frequencies of one measurement per order
/// 0 .. N-1. When every zone carries a ground-truth deviation, the estimate
/// deviation is attached as estimate - truth.
MdaEstimate mda_estimate(const std::vector<ZoneMeasurement>& zones, const CombSpec& comb);

/// Re-refines every zone with quad_interp at its measured bin, recomputes
/// the reconstructions, then averages as mda_estimate. Degenerate fits are
/// flagged per zone and contribute their unrefined position.
MdaEstimate mda_quad_estimate(const Spectrum& spec,
                              const std::vector<ZoneMeasurement>& zones,
                              const CombSpec& comb);

/// The closed-form deviation oracle the measured pipeline is checked
/// against. Validates that every order has a usable (non-folded) copy.
PredictedDeviation predict_deviation(double f_in_hz, const CombSpec& comb,
                                     const FrequencyGrid& grid, int order_count);

} // namespace mda
