#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"

#include "mda/errors.hpp"
#include "mda/estimator.hpp"
#include "mda/experiment.hpp"
#include "mda/outputs.hpp"

namespace {

void print_tone_summary(const mda::ChainResult& chain) {
    for (const auto& rep : chain.tones) {
        std::printf("tone %zu: truth %.9g Hz  estimate %.9g Hz", rep.tone_index,
                    rep.truth_hz, rep.estimate.estimate_hz);
        if (rep.estimate.avg_deviation_hz)
            std::printf("  avg deviation %+.6g Hz", *rep.estimate.avg_deviation_hz);
        std::printf("\n");
    }
    for (const auto& d : chain.diagnostics)
        std::printf("note: %s\n", d.c_str());
}

int run(int argc, char** argv) {
    CLI::App app{"frequency estimation by comb presampling and multi-order deviation averaging"};
    app.require_subcommand(1);

    auto* sweep = app.add_subcommand(
        "sweep", "closed-form deviation curves over the fractional index delta");
    double sw_epsilon = 0.1;
    int sw_orders = 10, sw_steps = 1001;
    std::string sw_out, sw_svg;
    sweep->add_option("--epsilon", sw_epsilon, "fractional part of the comb index")
        ->required();
    sweep->add_option("--orders", sw_orders, "averaging order count N")->required();
    sweep->add_option("--steps", sw_steps, "delta samples on [0,1]")->required();
    sweep->add_option("--out", sw_out, "output CSV path")->required();
    sweep->add_option("--svg", sw_svg, "optional SVG plot path");

    auto* sim = app.add_subcommand("simulate", "run the full signal chain once");
    std::string sim_config, sim_outdir, sim_method;
    bool sim_no_noise = false;
    sim->add_option("--config", sim_config, "experiment configuration (JSON)")
        ->required();
    sim->add_option("--out-dir", sim_outdir, "directory for spectrum/zones outputs")
        ->required();
    sim->add_flag("--no-noise", sim_no_noise, "disable the additive noise stage");
    sim->add_option("--method", sim_method, "presampling model")
        ->check(CLI::IsMember({"analytic", "oversampled"}));

    auto* mc = app.add_subcommand("montecarlo",
                                  "repeated noisy runs with per-tone RMS statistics");
    std::string mc_config, mc_out;
    int mc_trials = 0, mc_threads = 0;
    std::uint64_t mc_seed = 0;
    mc->add_option("--config", mc_config, "experiment configuration (JSON)")->required();
    mc->add_option("--trials", mc_trials, "number of trials")->required();
    mc->add_option("--seed", mc_seed, "base seed; trial t uses a derived stream")
        ->required();
    mc->add_option("--out", mc_out, "output JSON path")->required();
    mc->add_option("--threads", mc_threads, "worker threads (0 = hardware)");

    auto* pred = app.add_subcommand(
        "predict", "closed-form per-order deviations for one input frequency");
    double pred_freq = 0.0;
    std::string pred_config;
    pred->add_option("--freq-hz", pred_freq, "input frequency in Hz")->required();
    pred->add_option("--config", pred_config, "configuration providing grid/comb/orders")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (*sweep) {
        const auto res = mda::run_delta_sweep(sw_epsilon, sw_orders, sw_steps);
        mda::write_sweep_csv(res, sw_out);
        if (!sw_svg.empty())
            mda::write_sweep_svg(res, sw_svg);
        double m1 = 0.0, ma = 0.0;
        for (const auto& r : res.rows) {
            m1 = std::max(m1, std::abs(r.dev1_bins));
            ma = std::max(ma, std::abs(r.devavg_bins));
        }
        std::printf("wrote %s: %zu rows, max|dev1| %.6g bins, max|devavg| %.6g bins\n",
                    sw_out.c_str(), res.rows.size(), m1, ma);
    } else if (*sim) {
        auto cfg = mda::load_config(sim_config);
        if (sim_no_noise)
            cfg.noise.spectral_snr_db = std::numeric_limits<double>::infinity();
        if (sim_method == "analytic")
            cfg.method = mda::PresampleMethod::analytic;
        else if (sim_method == "oversampled")
            cfg.method = mda::PresampleMethod::oversampled;
        const auto chain = mda::run_full_chain(cfg);
        mda::RunOutputs outs;
        outs.chain = &chain;
        outs.config = &cfg;
        mda::emit_outputs(outs, sim_outdir,
                          {mda::OutputFormat::csv, mda::OutputFormat::json,
                           mda::OutputFormat::svg_plot_data});
        print_tone_summary(chain);
        std::printf("outputs in %s\n", sim_outdir.c_str());
    } else if (*mc) {
        const auto cfg = mda::load_config(mc_config);
        const auto summary = mda::run_monte_carlo(cfg, mc_trials, mc_seed, mc_threads);
        mda::write_montecarlo_json(summary, &cfg, mc_out);
        for (const auto& s : summary.per_tone)
            std::printf("tone %zu (%.9g Hz): rms %.6g Hz  mean %+.6g Hz  max|.| %.6g Hz"
                        "  (%d trials, %d failures)\n",
                        s.tone_index, s.truth_hz, s.rms_hz, s.mean_hz, s.max_abs_hz,
                        s.trials, s.failures);
        std::printf("wrote %s\n", mc_out.c_str());
    } else if (*pred) {
        const auto cfg = mda::load_config(pred_config);
        const auto p =
            mda::predict_deviation(pred_freq, cfg.comb, cfg.grid, cfg.order_count);
        std::printf("order,copy_freq_hz,deviation_bins,deviation_hz\n");
        for (const auto& rec : p.orders)
            std::printf("%d,%.17g,%.17g,%.17g\n", rec.order,
                        mda::copy_frequency(pred_freq, cfg.comb, rec.order),
                        rec.deviation_bins, rec.deviation_hz);
        std::printf("average,,%.17g,%.17g\n", p.average_bins, p.average_hz);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mda::config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const mda::estimation_error& e) {
        std::cerr << "estimation failure: " << e.what() << "\n";
        return 3;
    } catch (const mda::io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const mda::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
