#pragma once

#include <set>
#include <string>

#include "mda/experiment.hpp"

namespace mda {

enum class OutputFormat { csv, json, svg_plot_data };

/// The artifacts one run can emit; unset members are skipped.
struct RunOutputs {
    const SweepResult* sweep = nullptr;
    const ChainResult* chain = nullptr;
    const McSummary* montecarlo = nullptr;
    const ExperimentConfig* config = nullptr;  // echoed into montecarlo output
};

void write_sweep_csv(const SweepResult& sweep, const std::string& path);
void write_sweep_svg(const SweepResult& sweep, const std::string& path);
void write_spectrum_csv(const Spectrum& spec, const std::string& path);
void write_spectrum_svg(const Spectrum& spec, const std::string& path);
void write_zones_json(const ChainResult& chain, const std::string& path);
void write_zones_svg(const ChainResult& chain, const std::string& path);
void write_montecarlo_json(const McSummary& mc, const ExperimentConfig* cfg,
                           const std::string& path);

/// Writes every set member of results into out_dir in the requested
/// formats (sweep.csv/svg, spectrum.csv/svg, zones.json/svg,
/// montecarlo.json). Creates out_dir if needed.
void emit_outputs(const RunOutputs& results, const std::string& out_dir,
                  const std::set<OutputFormat>& formats);

} // namespace mda
