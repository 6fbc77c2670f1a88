#include "mda/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace mda {

namespace {

struct Candidate {
    double reconstructed_hz;
    std::size_t peak_index;
    int order;
};

// Recovers the ground truth a deviation was computed against. The
// subtraction reconstructed - truth is exact (the two differ by well under
// a factor of two), so truth round-trips bit-for-bit.
std::optional<double> truth_of(const std::vector<ZoneMeasurement>& zones) {
    for (const auto& z : zones)
        if (z.deviation_hz)
            return z.reconstructed_hz - *z.deviation_hz;
    return std::nullopt;
}

MdaEstimate average_zones(std::vector<ZoneMeasurement> zones,
                          std::optional<double> truth) {
    std::sort(zones.begin(), zones.end(),
              [](const ZoneMeasurement& a, const ZoneMeasurement& b) {
                  return a.order < b.order;
              });
    const int n = static_cast<int>(zones.size());
    for (int i = 0; i < n; ++i) {
        if (zones[static_cast<std::size_t>(i)].order != i)
            throw config_error("mda_estimate: need exactly one measurement per order "
                               "0.." + std::to_string(n - 1) + ", got a " +
                               (zones[static_cast<std::size_t>(i)].order < i
                                    ? std::string("duplicate")
                                    : std::string("gap")) +
                               " at order " + std::to_string(i));
    }
    double sum = 0.0;
    for (const auto& z : zones)
        sum += z.reconstructed_hz;
    MdaEstimate est;
    est.estimate_hz = sum / static_cast<double>(n);
    est.order_count = n;
    if (truth) {
        for (auto& z : zones)
            z.deviation_hz = z.reconstructed_hz - *truth;
        est.avg_deviation_hz = est.estimate_hz - *truth;
    }
    est.zones = std::move(zones);
    return est;
}

} // namespace

AssociationResult associate_orders(const std::vector<Peak>& peaks, const CombSpec& comb,
                                   const FrequencyGrid& grid, int order_count) {
    if (order_count < 1)
        throw config_error("associate_orders: order_count must be >= 1");
    if (peaks.empty())
        throw estimation_error("associate_orders: no peaks to associate");

    // Every (peak, order) pair proposes a fundamental; correct pairs of one
    // tone agree within a bin, wrong orders disagree by multiples of f_c.
    std::vector<Candidate> cands;
    cands.reserve(peaks.size() * static_cast<std::size_t>(order_count));
    for (std::size_t p = 0; p < peaks.size(); ++p) {
        const double f = static_cast<double>(peaks[p].bin) * grid.resolution_hz;
        for (int n = 0; n < order_count; ++n)
            cands.push_back({reconstruct(f, comb, n), p, n});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.reconstructed_hz < b.reconstructed_hz;
    });

    // Coarse clusters: split where consecutive candidates are more than
    // rep_rate/2 apart.
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= cands.size(); ++i) {
        if (i == cands.size() || cands[i].reconstructed_hz - cands[i - 1].reconstructed_hz >
                                     comb.rep_rate_hz / 2.0) {
            ranges.emplace_back(start, i);
            start = i;
        }
    }

    AssociationResult result;
    int cluster_id = 0;
    std::map<std::size_t, int> peak_owner;  // peak index -> cluster that used it
    for (const auto& [lo, hi] : ranges) {
        // Median-consistency filter: members of a genuine cluster sit within
        // one bin of each other around the tone; stray candidates whose
        // reconstruction only coincidentally landed nearby are much farther
        // out. Two bins of slack covers worst-case per-order deviations.
        std::vector<double> vals;
        for (std::size_t i = lo; i < hi; ++i)
            vals.push_back(cands[i].reconstructed_hz);
        std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2),
                         vals.end());
        const double median = vals[vals.size() / 2];
        const double tol = 2.0 * grid.resolution_hz;

        std::map<int, const Candidate*> per_order;  // best candidate per order
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& c = cands[i];
            if (std::abs(c.reconstructed_hz - median) > tol)
                continue;
            auto it = per_order.find(c.order);
            if (it == per_order.end() ||
                std::abs(c.reconstructed_hz - median) <
                    std::abs(it->second->reconstructed_hz - median))
                per_order[c.order] = &c;
        }
        if (static_cast<int>(per_order.size()) < order_count) {
            if (!per_order.empty())
                result.diagnostics.push_back(
                    "cluster near " +
                    std::to_string(per_order.begin()->second->reconstructed_hz) +
                    " Hz dropped: only " + std::to_string(per_order.size()) + " of " +
                    std::to_string(order_count) + " orders present");
            continue;
        }

        for (const auto& [order, cand] : per_order) {
            auto owner = peak_owner.find(cand->peak_index);
            if (owner != peak_owner.end() && owner->second != cluster_id)
                throw ambiguity_error(
                    "peak at bin " + std::to_string(peaks[cand->peak_index].bin) +
                    " is consistent with two tone clusters (" +
                    std::to_string(owner->second) + " and " + std::to_string(cluster_id) +
                    ")");
            peak_owner[cand->peak_index] = cluster_id;
            ZoneMeasurement z;
            z.order = order;
            z.measured_bin = peaks[cand->peak_index].bin;
            z.refined_offset_bins = peaks[cand->peak_index].refined_offset_bins;
            z.zone_freq_hz = (static_cast<double>(z.measured_bin) +
                              z.refined_offset_bins.value_or(0.0)) *
                             grid.resolution_hz;
            z.reconstructed_hz = reconstruct(z.zone_freq_hz, comb, order);
            result.assignments.emplace_back(cluster_id, z);
        }
        ++cluster_id;
    }

    if (result.assignments.empty())
        throw estimation_error("associate_orders: no cluster had all " +
                               std::to_string(order_count) + " orders");
    return result;
}

MdaEstimate mda_estimate(const std::vector<ZoneMeasurement>& zones, const CombSpec& comb) {
    (void)comb;  // reconstructions are already attached to the zones
    if (zones.empty())
        throw config_error("mda_estimate: no zones");
    return average_zones(zones, truth_of(zones));
}

MdaEstimate mda_quad_estimate(const Spectrum& spec,
                              const std::vector<ZoneMeasurement>& zones,
                              const CombSpec& comb) {
    if (zones.empty())
        throw config_error("mda_quad_estimate: no zones");
    const auto truth = truth_of(zones);
    std::vector<ZoneMeasurement> refined = zones;
    for (auto& z : refined) {
        const QuadResult q = quad_interp(spec, z.measured_bin);
        z.quad_degenerate = q.degenerate;
        z.refined_offset_bins = q.offset_bins;
        z.zone_freq_hz =
            (static_cast<double>(z.measured_bin) + q.offset_bins) * spec.grid.resolution_hz;
        z.reconstructed_hz = reconstruct(z.zone_freq_hz, comb, z.order);
        z.deviation_hz.reset();
    }
    return average_zones(std::move(refined), truth);
}

PredictedDeviation predict_deviation(double f_in_hz, const CombSpec& comb,
                                     const FrequencyGrid& grid, int order_count) {
    if (order_count < 1)
        throw config_error("predict_deviation: order_count must be >= 1");
    const FrequencyIndex idx = index_of(f_in_hz, grid);
    PredictedDeviation out;
    out.orders.reserve(static_cast<std::size_t>(order_count));
    for (int n = 0; n < order_count; ++n) {
        copy_frequency(f_in_hz, comb, n);  // throws fold_error on unusable orders
        DeviationRecord rec;
        rec.order = n;
        rec.deviation_bins = delta_order(idx.fractional_part, comb.epsilon, n);
        rec.deviation_hz = rec.deviation_bins * grid.resolution_hz;
        out.orders.push_back(rec);
    }
    out.average_bins = delta_mda(idx.fractional_part, comb.epsilon, order_count);
    out.average_hz = out.average_bins * grid.resolution_hz;
    return out;
}

} // namespace mda
