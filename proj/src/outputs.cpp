#include "mda/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mda {

namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open for writing: " + path);
    return out;
}

void check_write(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out)
        throw io_error("error while writing: " + path);
}

// --- minimal SVG line/stem charts -------------------------------------

constexpr int kWidth = 900, kHeight = 420, kMargin = 60;

struct Axes {
    double x0, x1, y0, y1;
    double px(double x) const {
        return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin);
    }
    double py(double y) const {
        return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin);
    }
};

std::string svg_open() {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return s.str();
}

void svg_frame(std::ostringstream& s, const Axes& ax, const std::string& x_label,
               const std::string& y_label) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" "
                  "stroke=\"#333\"/>\n",
                  kMargin, kMargin, kWidth - 2 * kMargin, kHeight - 2 * kMargin);
    s << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"13\" text-anchor=\"middle\">%s"
                  "</text>\n",
                  kWidth / 2, kHeight - 16, x_label.c_str());
    s << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"16\" y=\"%d\" font-size=\"13\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 16 %d)\">%s</text>\n",
                  kHeight / 2, kHeight / 2, y_label.c_str());
    s << buf;
    // corner tick labels
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"11\">%.6g</text>\n"
                  "<text x=\"%d\" y=\"%d\" font-size=\"11\" text-anchor=\"end\">%.6g"
                  "</text>\n",
                  kMargin, kHeight - kMargin + 16, ax.x0, kWidth - kMargin,
                  kHeight - kMargin + 16, ax.x1);
    s << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"11\" text-anchor=\"end\">%.6g"
                  "</text>\n"
                  "<text x=\"%d\" y=\"%d\" font-size=\"11\" text-anchor=\"end\">%.6g"
                  "</text>\n",
                  kMargin - 4, kHeight - kMargin, ax.y0, kMargin - 4, kMargin + 10,
                  ax.y1);
    s << buf;
}

void svg_polyline(std::ostringstream& s, const Axes& ax,
                  const std::vector<std::pair<double, double>>& pts,
                  const std::string& color) {
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    char buf[48];
    for (const auto& [x, y] : pts) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", ax.px(x), ax.py(y));
        s << buf;
    }
    s << "\"/>\n";
}

} // namespace

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
    auto out = open_out(path);
    out << "delta,dev1_bins,devavg_bins\n";
    for (const auto& r : sweep.rows)
        out << num(r.delta) << ',' << num(r.dev1_bins) << ',' << num(r.devavg_bins)
            << '\n';
    check_write(out, path);
}

void write_sweep_svg(const SweepResult& sweep, const std::string& path) {
    auto out = open_out(path);
    std::ostringstream s;
    s << svg_open();
    Axes ax{0.0, 1.0, -0.55, 0.55};
    svg_frame(s, ax, "delta (fractional bin index)", "deviation (bins)");
    svg_polyline(s, ax, {{0.0, 0.0}, {1.0, 0.0}}, "#bbb");
    std::vector<std::pair<double, double>> dev1, devavg;
    for (const auto& r : sweep.rows) {
        dev1.emplace_back(r.delta, r.dev1_bins);
        devavg.emplace_back(r.delta, r.devavg_bins);
    }
    svg_polyline(s, ax, dev1, "#4878cf");
    svg_polyline(s, ax, devavg, "#d65f5f");
    s << "<text x=\"" << kWidth - kMargin - 220 << "\" y=\"" << kMargin + 18
      << "\" font-size=\"12\" fill=\"#4878cf\">single-measurement deviation</text>\n"
      << "<text x=\"" << kWidth - kMargin - 220 << "\" y=\"" << kMargin + 34
      << "\" font-size=\"12\" fill=\"#d65f5f\">averaged deviation (N="
      << sweep.order_count << ")</text>\n</svg>\n";
    out << s.str();
    check_write(out, path);
}

void write_spectrum_csv(const Spectrum& spec, const std::string& path) {
    auto out = open_out(path);
    out << "bin,freq_hz,magnitude\n";
    for (std::size_t k = 0; k < spec.magnitudes.size(); ++k)
        out << k << ',' << num(static_cast<double>(k) * spec.grid.resolution_hz) << ','
            << num(spec.magnitudes[k]) << '\n';
    check_write(out, path);
}

void write_spectrum_svg(const Spectrum& spec, const std::string& path) {
    auto out = open_out(path);
    std::ostringstream s;
    s << svg_open();
    const double max_mag =
        spec.magnitudes.empty()
            ? 1.0
            : *std::max_element(spec.magnitudes.begin(), spec.magnitudes.end());
    const double floor_db = -120.0;
    const double nyq = spec.grid.sample_rate_hz / 2.0;
    Axes ax{0.0, nyq, floor_db, 0.0};
    svg_frame(s, ax, "frequency (Hz)", "magnitude (dB rel. max)");
    // max-pool decimation keeps every peak visible at plot resolution
    const std::size_t buckets = 1600;
    const std::size_t n = spec.magnitudes.size();
    std::vector<std::pair<double, double>> pts;
    if (n > 0 && max_mag > 0.0) {
        const std::size_t per = std::max<std::size_t>(1, n / buckets);
        for (std::size_t k0 = 0; k0 < n; k0 += per) {
            double m = 0.0;
            const std::size_t end = std::min(n, k0 + per);
            for (std::size_t k = k0; k < end; ++k)
                m = std::max(m, spec.magnitudes[k]);
            const double db =
                std::max(floor_db, 20.0 * std::log10(std::max(m / max_mag, 1e-300)));
            pts.emplace_back(static_cast<double>(k0) * spec.grid.resolution_hz, db);
        }
    }
    svg_polyline(s, ax, pts, "#4878cf");
    s << "</svg>\n";
    out << s.str();
    check_write(out, path);
}

void write_zones_json(const ChainResult& chain, const std::string& path) {
    json j;
    j["tones"] = json::array();
    for (const auto& rep : chain.tones) {
        json t;
        t["truth_hz"] = rep.truth_hz;
        t["estimate_hz"] = rep.estimate.estimate_hz;
        if (rep.estimate.avg_deviation_hz)
            t["avg_deviation_hz"] = *rep.estimate.avg_deviation_hz;
        else
            t["avg_deviation_hz"] = nullptr;
        t["zones"] = json::array();
        for (const auto& z : rep.estimate.zones) {
            json zj;
            zj["order"] = z.order;
            zj["measured_bin"] = z.measured_bin;
            if (z.refined_offset_bins)
                zj["refined_offset_bins"] = *z.refined_offset_bins;
            else
                zj["refined_offset_bins"] = nullptr;
            zj["zone_freq_hz"] = z.zone_freq_hz;
            zj["reconstructed_hz"] = z.reconstructed_hz;
            if (z.deviation_hz)
                zj["deviation_hz"] = *z.deviation_hz;
            else
                zj["deviation_hz"] = nullptr;
            zj["quad_degenerate"] = z.quad_degenerate;
            t["zones"].push_back(zj);
        }
        j["tones"].push_back(t);
    }
    if (!chain.diagnostics.empty())
        j["diagnostics"] = chain.diagnostics;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    check_write(out, path);
}

void write_zones_svg(const ChainResult& chain, const std::string& path) {
    static const char* kPalette[] = {"#4878cf", "#d65f5f", "#6acc65", "#956cb4",
                                     "#c4ad66", "#77bedb"};
    auto out = open_out(path);
    std::ostringstream s;
    s << svg_open();
    double max_abs = 0.0;
    int max_order = 1;
    for (const auto& rep : chain.tones)
        for (const auto& z : rep.estimate.zones) {
            max_abs = std::max(max_abs, std::abs(z.deviation_hz.value_or(0.0)));
            max_order = std::max(max_order, z.order);
        }
    if (max_abs == 0.0)
        max_abs = 1.0;
    Axes ax{-0.5, max_order + 0.5, -1.15 * max_abs, 1.15 * max_abs};
    svg_frame(s, ax, "copy order n", "per-order deviation (Hz)");
    svg_polyline(s, ax, {{-0.5, 0.0}, {max_order + 0.5, 0.0}}, "#bbb");
    char buf[256];
    for (std::size_t j = 0; j < chain.tones.size(); ++j) {
        const char* color = kPalette[j % (sizeof kPalette / sizeof *kPalette)];
        const double dx = 0.12 * (static_cast<double>(j) -
                                  0.5 * (static_cast<double>(chain.tones.size()) - 1.0));
        for (const auto& z : chain.tones[j].estimate.zones) {
            const double x = static_cast<double>(z.order) + dx;
            const double y = z.deviation_hz.value_or(0.0);
            std::snprintf(buf, sizeof buf,
                          "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                          "stroke=\"%s\" stroke-width=\"2\"/>\n"
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n",
                          ax.px(x), ax.py(0.0), ax.px(x), ax.py(y), color, ax.px(x),
                          ax.py(y), color);
            s << buf;
        }
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"%s\">tone %zu: "
                      "%.9g Hz</text>\n",
                      kWidth - kMargin - 240, kMargin + 18 + 16 * static_cast<int>(j),
                      color, j, chain.tones[j].truth_hz);
        s << buf;
    }
    s << "</svg>\n";
    out << s.str();
    check_write(out, path);
}

void write_montecarlo_json(const McSummary& mc, const ExperimentConfig* cfg,
                           const std::string& path) {
    json j;
    j["base_seed"] = mc.base_seed;
    j["trials"] = mc.trials;
    j["failures"] = mc.failures;
    j["per_tone"] = json::array();
    for (const auto& s : mc.per_tone) {
        j["per_tone"].push_back({{"tone_index", s.tone_index},
                                 {"truth_hz", s.truth_hz},
                                 {"rms_hz", s.rms_hz},
                                 {"mean_hz", s.mean_hz},
                                 {"max_abs_hz", s.max_abs_hz},
                                 {"trials", s.trials},
                                 {"failures", s.failures}});
    }
    if (cfg)
        j["config"] = json::parse(config_echo_json(*cfg));
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    check_write(out, path);
}

void emit_outputs(const RunOutputs& results, const std::string& out_dir,
                  const std::set<OutputFormat>& formats) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw io_error("cannot create output directory " + out_dir + ": " + ec.message());
    const auto path = [&](const char* name) { return out_dir + "/" + name; };
    if (results.sweep) {
        if (formats.count(OutputFormat::csv))
            write_sweep_csv(*results.sweep, path("sweep.csv"));
        if (formats.count(OutputFormat::svg_plot_data))
            write_sweep_svg(*results.sweep, path("sweep.svg"));
    }
    if (results.chain) {
        if (formats.count(OutputFormat::csv))
            write_spectrum_csv(results.chain->spectrum, path("spectrum.csv"));
        if (formats.count(OutputFormat::json))
            write_zones_json(*results.chain, path("zones.json"));
        if (formats.count(OutputFormat::svg_plot_data)) {
            write_spectrum_svg(results.chain->spectrum, path("spectrum.svg"));
            write_zones_svg(*results.chain, path("zones.svg"));
        }
    }
    if (results.montecarlo && formats.count(OutputFormat::json))
        write_montecarlo_json(*results.montecarlo, results.config, path("montecarlo.json"));
}

} // namespace mda
