// dstbm: run, sweep and synthesize parking-detection evaluation scenarios.
//
//   dstbm run   --mode closed-loop --spots 20 --ds 0 --seed 1 --out out/
//   dstbm sweep --ds 0,15,35,50 --seed 1-20 --out sweep/ --plot sweep/accuracy.svg
//   dstbm synth --spots 20 --seed 7 --out truth.csv
//
// Exit codes: 0 ok, 1 runtime error, 2 usage error.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dstbm/dstbm.hpp"

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string mode = "closed-loop";
    std::string trace_path;
    std::vector<int> ds;
    double lambda = dstbm::ScenarioConfig{}.lambda;
    double mu = dstbm::ScenarioConfig{}.mu;
    double sigma = dstbm::ScenarioConfig{}.sigma;
    double region_length = dstbm::ScenarioConfig{}.region_length;
    double v_lo = dstbm::ScenarioConfig{}.v_lo;
    double v_hi = dstbm::ScenarioConfig{}.v_hi;
    int spots = dstbm::ScenarioConfig{}.spots;
    std::int64_t horizon = dstbm::ScenarioConfig{}.horizon;
    std::int64_t window = dstbm::ScenarioConfig{}.window;
    int scan_offset = 0;
    std::vector<std::string> seeds;
    std::string out;
    std::string plot;
    bool exclude_warmup = false;
    std::uint64_t truth_seed = 7;
    unsigned threads = 0;
};

std::uint64_t parse_u64(const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw UsageError("--seed: '" + text + "' is not a non-negative integer");
    }
    return v;
}

// "3", "1,2,5" or "1-20".
std::vector<std::uint64_t> expand_seeds(const std::vector<std::string>& tokens) {
    std::vector<std::uint64_t> seeds;
    for (const auto& tok : tokens) {
        const auto dash = tok.find('-', 1);
        if (dash == std::string::npos) {
            seeds.push_back(parse_u64(tok));
            continue;
        }
        const auto lo = parse_u64(tok.substr(0, dash));
        const auto hi = parse_u64(tok.substr(dash + 1));
        if (hi < lo || hi - lo > 100000) throw UsageError("--seed: bad range '" + tok + "'");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    return seeds;
}

void add_scenario_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--mode", o.mode, "Ground truth source")
        ->check(CLI::IsMember({"trace", "closed-loop"}))
        ->capture_default_str();
    cmd->add_option("--trace", o.trace_path, "Ground-truth trace CSV (trace mode)");
    cmd->add_option("--ds", o.ds, "Detection schedule(s) in minutes, 0 = fixed sensing")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda", o.lambda, "Arrival rate, cars per minute")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--mu", o.mu, "Mean parking duration, minutes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--sigma", o.sigma, "Parking duration std deviation, minutes")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--region-length", o.region_length, "Entrance-to-spot distance, metres")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--v-lo", o.v_lo, "Lowest driver velocity, m/min")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--v-hi", o.v_hi, "Highest driver velocity, m/min")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--spots", o.spots, "Parking spots (closed-loop mode)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--horizon", o.horizon, "Simulated minutes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--window", o.window, "Aggregation window, minutes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--scan-offset", o.scan_offset, "Minute of each period at which scans occur")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--seed", o.seeds, "Seed, list (1,2,3) or range (1-20)")->delimiter(',');
    cmd->add_flag("--exclude-warmup", o.exclude_warmup,
                  "Drop decisions made before the first mobile scan from accuracy");
}

dstbm::ScenarioConfig scenario_from(const Options& o) {
    dstbm::ScenarioConfig cfg;
    cfg.mode = o.mode == "trace" ? dstbm::Mode::TraceDriven : dstbm::Mode::ClosedLoop;
    cfg.lambda = o.lambda;
    cfg.mu = o.mu;
    cfg.sigma = o.sigma;
    cfg.region_length = o.region_length;
    cfg.v_lo = o.v_lo;
    cfg.v_hi = o.v_hi;
    cfg.spots = o.spots;
    cfg.horizon = o.horizon;
    cfg.window = std::min(o.window, o.horizon);
    cfg.sensing.schedule_ds = o.ds.empty() ? 0 : o.ds.front();
    cfg.sensing.scan_offset = o.scan_offset;
    cfg.exclude_warmup = o.exclude_warmup;
    if (cfg.v_lo > cfg.v_hi) throw UsageError("--v-lo must not exceed --v-hi");
    try {
        cfg.validate();
    } catch (const dstbm::ConfigError& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

nlohmann::json scenario_json(const dstbm::ScenarioConfig& c) {
    return {{"mode", std::string(dstbm::to_string(c.mode))},
            {"lambda", c.lambda},
            {"mu", c.mu},
            {"sigma", c.sigma},
            {"ds", c.sensing.schedule_ds},
            {"scan_offset", c.sensing.scan_offset},
            {"region_length", c.region_length},
            {"v_lo", c.v_lo},
            {"v_hi", c.v_hi},
            {"spots", c.spots},
            {"horizon", c.horizon},
            {"window", c.window},
            {"seed", c.seed},
            {"exclude_warmup", c.exclude_warmup}};
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dstbm::Error("cannot write " + path.string());
    out << content;
    if (!out) throw dstbm::Error("failed writing " + path.string());
}

std::optional<dstbm::OccupancyTrace> load_trace(const Options& o) {
    if (o.mode != "trace") {
        if (!o.trace_path.empty()) throw UsageError("--trace is only valid with --mode trace");
        return std::nullopt;
    }
    if (o.trace_path.empty()) return std::nullopt;
    std::ifstream in(o.trace_path, std::ios::binary);
    if (!in) throw dstbm::Error("cannot open trace " + o.trace_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return dstbm::parse_trace(buf.str(), fs::path(o.trace_path).stem().string());
}

int cmd_run(const Options& o) {
    if (o.ds.size() > 1) throw UsageError("run takes a single --ds value (use sweep for lists)");
    auto cfg = scenario_from(o);
    const auto seeds = o.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : expand_seeds(o.seeds);
    if (seeds.size() != 1) throw UsageError("run takes a single --seed value");
    cfg.seed = seeds.front();
    const auto truth = load_trace(o);
    if (cfg.mode == dstbm::Mode::TraceDriven && !truth) {
        throw UsageError("--mode trace requires --trace PATH");
    }

    const auto result = dstbm::run(cfg, truth ? &*truth : nullptr);
    const fs::path out = o.out.empty() ? fs::path("out") : fs::path(o.out);
    write_file(out / "results.csv", dstbm::results_csv(dstbm::result_rows(result.report)));
    write_file(out / "events.csv", dstbm::event_log_csv(result.log));

    const auto& r = result.report;
    auto summary = scenario_json(cfg);
    if (truth) {
        // the trace, not --spots, defines the region
        summary["spots"] = truth->spot_count();
        summary["trace"] = o.trace_path;
    }
    summary["decisions"] = r.decisions;
    summary["resolved"] = r.resolved;
    summary["unresolved"] = r.unresolved;
    summary["warmup_decisions"] = r.warmup_decisions;
    summary["tp"] = r.overall.tp;
    summary["tn"] = r.overall.tn;
    summary["fp"] = r.overall.fp;
    summary["fn"] = r.overall.fn;
    summary["p_a"] = r.p_a ? nlohmann::json(*r.p_a) : nlohmann::json(nullptr);
    write_file(out / "scenario.json", summary.dump(2) + "\n");

    std::cout << "decisions " << r.decisions << ", resolved " << r.resolved << "\n";
    std::cout << "P_a " << (r.p_a ? dstbm::format_fixed(*r.p_a, 6) : std::string("no data"))
              << "\n";
    return 0;
}

int cmd_sweep(const Options& o) {
    dstbm::SweepSpec spec;
    spec.base = scenario_from(o);
    spec.schedules = o.ds.empty() ? dstbm::default_schedules : o.ds;
    spec.seeds = o.seeds.empty() ? std::vector<std::uint64_t>{1} : expand_seeds(o.seeds);
    spec.out_dir = o.out.empty() ? "sweep" : o.out;
    try {
        spec.validate();
    } catch (const dstbm::ConfigError& e) {
        throw UsageError(e.what());
    }

    auto truth = load_trace(o);
    if (spec.base.mode == dstbm::Mode::TraceDriven && !truth) {
        auto synth_cfg = spec.base;
        synth_cfg.sensing = {};
        synth_cfg.seed = o.truth_seed;
        std::cout << "synthesizing shared ground truth (seed " << o.truth_seed << ")\n";
        truth = dstbm::synthesize_trace(synth_cfg);
    }

    const auto result = dstbm::run_sweep(spec, truth ? &*truth : nullptr, o.threads);
    const fs::path out(spec.out_dir);
    write_file(out / "results.csv", dstbm::results_csv(result.rows()));
    write_file(out / "mean_series.csv", dstbm::mean_series_csv(result));
    write_file(out / "summary.csv", dstbm::summary_csv(result));
    if (!o.plot.empty()) write_file(o.plot, dstbm::render_svg(result));

    for (const auto& s : result.summaries) {
        std::cout << "ds " << s.ds << "  mean P_a "
                  << (s.mean_p_a ? dstbm::format_fixed(*s.mean_p_a, 6) : std::string("no data"))
                  << "\n";
    }
    const auto inversions = dstbm::find_inversions(result);
    if (!inversions.empty()) {
        std::cout << inversions.size()
                  << " seed/window cases where a longer schedule scored higher\n";
    }
    return 0;
}

int cmd_synth(const Options& o) {
    if (o.mode != "closed-loop") throw UsageError("synth runs in closed-loop mode only");
    if (o.ds.size() > 1) throw UsageError("synth takes a single --ds value");
    auto cfg = scenario_from(o);
    const auto seeds = o.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : expand_seeds(o.seeds);
    if (seeds.size() != 1) throw UsageError("synth takes a single --seed value");
    cfg.seed = seeds.front();
    const auto trace = dstbm::synthesize_trace(cfg);
    const std::string path = o.out.empty() ? "trace.csv" : o.out;
    write_file(path, dstbm::serialize_trace(trace));
    std::cout << "wrote " << trace.spot_count() << " spots x " << trace.length()
              << " minutes to " << path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driver-side evaluation of parking detection solutions"};
    app.require_subcommand(1);

    Options run_opts, sweep_opts, synth_opts;

    auto* run = app.add_subcommand("run", "Run one scenario");
    add_scenario_flags(run, run_opts);
    run->add_option("--out", run_opts.out, "Output directory")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Sweep detection schedules x seeds");
    sweep_opts.mode = "trace";
    add_scenario_flags(sweep, sweep_opts);
    sweep->add_option("--out", sweep_opts.out, "Output directory");
    sweep->add_option("--plot", sweep_opts.plot, "Write an SVG accuracy chart");
    sweep->add_option("--truth-seed", sweep_opts.truth_seed,
                      "Seed of the synthesized ground truth when no --trace is given")
        ->capture_default_str();
    sweep->add_option("--threads", sweep_opts.threads, "Worker threads (0 = all cores)");

    auto* synth = app.add_subcommand("synth", "Synthesize a ground-truth trace CSV");
    add_scenario_flags(synth, synth_opts);
    synth->add_option("--out", synth_opts.out, "Output trace path (default trace.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts);
        return cmd_synth(synth_opts);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        std::cerr << "run 'dstbm --help' for usage\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
