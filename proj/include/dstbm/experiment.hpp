#pragma once

// Batch orchestration on top of the engine: detection-schedule x seed sweeps,
// synthetic ground truth, result tables and SVG accuracy charts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dstbm/engine.hpp"
#include "dstbm/error.hpp"
#include "dstbm/trace.hpp"

namespace dstbm {

inline const std::vector<int> default_schedules{0, 15, 35, 50};

struct SweepSpec {
    ScenarioConfig base;
    std::vector<int> schedules;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;

    void validate() const {
        if (schedules.empty()) throw ConfigError("sweep needs at least one detection schedule");
        if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
        for (int ds : schedules) {
            if (ds < 0) throw ConfigError("detection schedules must be >= 0");
        }
        base.validate();
    }
};

struct ResultRow {
    int ds = 0;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    ConfusionCounts counts;
    std::optional<double> p_a;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr std::string_view results_header = "ds,seed,window,tp,tn,fp,fn,p_a";

inline std::vector<ResultRow> result_rows(const AccuracyReport& report) {
    std::vector<ResultRow> rows;
    rows.reserve(report.windows.size());
    for (const auto& w : report.windows) {
        rows.push_back(ResultRow{report.config.sensing.schedule_ds, report.config.seed, w.index,
                                 w.counts, w.p_a});
    }
    return rows;
}

// Empty p_a field marks a window without resolved decisions.
inline std::string results_csv(const std::vector<ResultRow>& rows) {
    std::string out(results_header);
    out.push_back('\n');
    for (const auto& r : rows) {
        out += std::to_string(r.ds) + "," + std::to_string(r.seed) + "," +
               std::to_string(r.window) + "," + std::to_string(r.counts.tp) + "," +
               std::to_string(r.counts.tn) + "," + std::to_string(r.counts.fp) + "," +
               std::to_string(r.counts.fn) + ",";
        if (r.p_a) out += format_fixed(*r.p_a, 15);
        out.push_back('\n');
    }
    return out;
}

struct SweepCell {
    int ds = 0;
    std::uint64_t seed = 0;
    AccuracyReport report;
};

struct SeriesPoint {
    std::size_t window = 0;
    std::optional<double> mean_p_a; // over seeds with data
    std::size_t seeds_with_data = 0;
};

struct ScheduleSummary {
    int ds = 0;
    std::vector<SeriesPoint> series;
    std::optional<double> mean_p_a; // mean over seeds of overall P_a
};

struct SweepResult {
    std::vector<SweepCell> cells; // ascending (ds, seed)
    std::vector<ScheduleSummary> summaries;

    std::vector<ResultRow> rows() const {
        std::vector<ResultRow> out;
        for (const auto& c : cells) {
            auto r = result_rows(c.report);
            out.insert(out.end(), r.begin(), r.end());
        }
        return out;
    }

    const ScheduleSummary& summary(int ds) const {
        for (const auto& s : summaries) {
            if (s.ds == ds) return s;
        }
        throw Error("no summary for ds=" + std::to_string(ds));
    }

    const AccuracyReport& report(int ds, std::uint64_t seed) const {
        for (const auto& c : cells) {
            if (c.ds == ds && c.seed == seed) return c.report;
        }
        throw Error("no cell for ds=" + std::to_string(ds) + ", seed=" + std::to_string(seed));
    }
};

// Means over seeds, summed in cell order.
inline std::vector<ScheduleSummary> summarize(const std::vector<SweepCell>& cells,
                                              const std::vector<int>& schedules) {
    std::vector<ScheduleSummary> out;
    for (int ds : schedules) {
        if (std::any_of(out.begin(), out.end(), [&](const auto& s) { return s.ds == ds; })) {
            continue;
        }
        ScheduleSummary summary{ds, {}, std::nullopt};
        std::map<std::size_t, std::pair<double, std::size_t>> by_window;
        double overall = 0.0;
        std::size_t overall_n = 0;
        for (const auto& c : cells) {
            if (c.ds != ds) continue;
            for (const auto& w : c.report.windows) {
                auto& acc = by_window[w.index];
                if (w.p_a) {
                    acc.first += *w.p_a;
                    ++acc.second;
                }
            }
            if (c.report.p_a) {
                overall += *c.report.p_a;
                ++overall_n;
            }
        }
        for (const auto& [w, acc] : by_window) {
            summary.series.push_back(SeriesPoint{
                w,
                acc.second ? std::optional<double>(acc.first / static_cast<double>(acc.second))
                           : std::nullopt,
                acc.second});
        }
        if (overall_n) summary.mean_p_a = overall / static_cast<double>(overall_n);
        out.push_back(std::move(summary));
    }
    return out;
}

// Cells are independent; `threads` = 0 picks the hardware concurrency.
inline SweepResult run_sweep(const SweepSpec& spec, const OccupancyTrace* truth,
                             unsigned threads = 0) {
    spec.validate();
    auto seeds = spec.seeds;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    auto schedules = spec.schedules;
    std::sort(schedules.begin(), schedules.end());
    schedules.erase(std::unique(schedules.begin(), schedules.end()), schedules.end());

    std::vector<SweepCell> cells;
    for (int ds : schedules) {
        for (auto seed : seeds) cells.push_back(SweepCell{ds, seed, {}});
    }
    std::vector<std::exception_ptr> errors(cells.size());

    auto work = [&](std::size_t i) {
        try {
            ScenarioConfig cfg = spec.base;
            cfg.sensing.schedule_ds = cells[i].ds;
            if (cfg.sensing.scan_offset >= std::max(cells[i].ds, 1)) cfg.sensing.scan_offset = 0;
            cfg.seed = cells[i].seed;
            cfg.keep_log = false;
            cfg.record_trace = false;
            cells[i].report = run(cfg, truth).report;
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < cells.size(); i += threads) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SweepResult result;
    result.summaries = summarize(cells, schedules);
    result.cells = std::move(cells);
    return result;
}

// ClosedLoop run whose per-minute occupancy becomes a ground-truth trace.
inline OccupancyTrace synthesize_trace(ScenarioConfig cfg) {
    cfg.mode = Mode::ClosedLoop;
    cfg.record_trace = true;
    cfg.keep_log = false;
    return std::move(*run(cfg).trace);
}

inline std::string mean_series_csv(const SweepResult& result) {
    std::string out = "ds,window,mean_p_a,seeds\n";
    for (const auto& s : result.summaries) {
        for (const auto& p : s.series) {
            out += std::to_string(s.ds) + "," + std::to_string(p.window) + ",";
            if (p.mean_p_a) out += format_fixed(*p.mean_p_a, 15);
            out += "," + std::to_string(p.seeds_with_data) + "\n";
        }
    }
    return out;
}

inline std::string summary_csv(const SweepResult& result) {
    std::string out = "ds,mean_p_a\n";
    for (const auto& s : result.summaries) {
        out += std::to_string(s.ds) + ",";
        if (s.mean_p_a) out += format_fixed(*s.mean_p_a, 15);
        out.push_back('\n');
    }
    return out;
}

// A case where a longer schedule scored strictly better than a shorter one.
struct Inversion {
    int shorter_ds = 0;
    int longer_ds = 0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> window; // nullopt: overall P_a of the run
    double shorter_p_a = 0.0;
    double longer_p_a = 0.0;
};

inline std::vector<Inversion> find_inversions(const SweepResult& result) {
    std::vector<int> ds;
    for (const auto& s : result.summaries) ds.push_back(s.ds);
    std::sort(ds.begin(), ds.end());
    std::vector<std::uint64_t> seeds;
    for (const auto& c : result.cells) {
        if (std::find(seeds.begin(), seeds.end(), c.seed) == seeds.end()) seeds.push_back(c.seed);
    }

    std::vector<Inversion> out;
    for (std::size_t a = 0; a < ds.size(); ++a) {
        for (std::size_t b = a + 1; b < ds.size(); ++b) {
            for (auto seed : seeds) {
                const auto& lo = result.report(ds[a], seed);
                const auto& hi = result.report(ds[b], seed);
                if (lo.p_a && hi.p_a && *hi.p_a > *lo.p_a) {
                    out.push_back({ds[a], ds[b], seed, std::nullopt, *lo.p_a, *hi.p_a});
                }
                const auto n = std::min(lo.windows.size(), hi.windows.size());
                for (std::size_t w = 0; w < n; ++w) {
                    const auto& pl = lo.windows[w].p_a;
                    const auto& ph = hi.windows[w].p_a;
                    if (pl && ph && *ph > *pl) out.push_back({ds[a], ds[b], seed, w, *pl, *ph});
                }
            }
        }
    }
    return out;
}

// Line chart of the mean per-window accuracy, one polyline per schedule.
inline std::string render_svg(const SweepResult& result, std::string_view title = "Prediction accuracy") {
    constexpr double width = 720, height = 420;
    constexpr double left = 70, right = 150, top = 40, bottom = 60;
    constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    std::size_t max_window = 0;
    double y_lo = 1.0, y_hi = 0.0;
    for (const auto& s : result.summaries) {
        for (const auto& p : s.series) {
            max_window = std::max(max_window, p.window);
            if (p.mean_p_a) {
                y_lo = std::min(y_lo, *p.mean_p_a);
                y_hi = std::max(y_hi, *p.mean_p_a);
            }
        }
    }
    if (y_lo > y_hi) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    y_lo = std::max(0.0, std::floor(y_lo * 20.0 - 1.0) / 20.0);
    y_hi = std::min(1.0, std::ceil(y_hi * 20.0 + 1.0) / 20.0);
    if (y_hi <= y_lo) y_hi = std::min(1.0, y_lo + 0.05);

    // Windows are plotted 1-based ("week 1" is window 0).
    const double x_span = static_cast<double>(std::max<std::size_t>(max_window, 1));
    auto px = [&](std::size_t w) { return left + plot_w * static_cast<double>(w) / x_span; };
    auto py = [&](double v) { return top + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo)); };
    auto f = [](double v) { return format_fixed(v, 2); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(width) + "\" height=\"" +
           f(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + f(left) + "\" y=\"24\" font-size=\"15\">" + std::string(title) + "</text>\n";
    svg += "<line x1=\"" + f(left) + "\" y1=\"" + f(top + plot_h) + "\" x2=\"" + f(left + plot_w) +
           "\" y2=\"" + f(top + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + f(left) + "\" y1=\"" + f(top) + "\" x2=\"" + f(left) + "\" y2=\"" +
           f(top + plot_h) + "\" stroke=\"black\"/>\n";
    for (std::size_t w = 0; w <= max_window; ++w) {
        svg += "<text x=\"" + f(px(w)) + "\" y=\"" + f(top + plot_h + 18) +
               "\" text-anchor=\"middle\">" + std::to_string(w + 1) + "</text>\n";
    }
    for (double v = y_lo; v <= y_hi + 1e-9; v += 0.05) {
        svg += "<line x1=\"" + f(left - 4) + "\" y1=\"" + f(py(v)) + "\" x2=\"" + f(left + plot_w) +
               "\" y2=\"" + f(py(v)) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + f(left - 8) + "\" y=\"" + f(py(v) + 4) + "\" text-anchor=\"end\">" +
               format_fixed(v, 2) + "</text>\n";
    }
    svg += "<text x=\"" + f(left + plot_w / 2) + "\" y=\"" + f(height - 16) +
           "\" text-anchor=\"middle\">Time (week)</text>\n";
    svg += "<text transform=\"translate(18," + f(top + plot_h / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">Accuracy</text>\n";

    for (std::size_t i = 0; i < result.summaries.size(); ++i) {
        const auto& s = result.summaries[i];
        const std::string color = palette[i % std::size(palette)];
        std::string points;
        std::string markers;
        for (const auto& p : s.series) {
            if (!p.mean_p_a) continue;
            if (!points.empty()) points.push_back(' ');
            points += f(px(p.window)) + "," + f(py(*p.mean_p_a));
            markers += "<circle cx=\"" + f(px(p.window)) + "\" cy=\"" + f(py(*p.mean_p_a)) +
                       "\" r=\"3\" fill=\"" + color + "\" data-ds=\"" + std::to_string(s.ds) +
                       "\" data-window=\"" + std::to_string(p.window) + "\" data-p-a=\"" +
                       format_fixed(*p.mean_p_a, 15) + "\"/>\n";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" +
               points + "\"/>\n";
        svg += markers;
        const double ly = top + 16.0 * static_cast<double>(i);
        svg += "<line x1=\"" + f(left + plot_w + 16) + "\" y1=\"" + f(ly) + "\" x2=\"" +
               f(left + plot_w + 36) + "\" y2=\"" + f(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + f(left + plot_w + 42) + "\" y=\"" + f(ly + 4) + "\">D_s=" +
               std::to_string(s.ds) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace dstbm
