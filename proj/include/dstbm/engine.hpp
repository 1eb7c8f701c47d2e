#pragma once

// Discrete-event simulation of one parking region.
//
// Cars arrive at the entrance as a Poisson process and decide to park or pass
// from the detected free-space count and the cars already searching. Cars
// that park travel through a single lane (no overtaking) to the spots, where
// the actual outcome is resolved against ground truth; cars that pass are
// resolved counterfactually at the time they would have reached the spots.
// Outcomes feed a confusion matrix per aggregation window.
//
// Two modes:
//   TraceDriven  ground truth is an external trace; cars are probes and never
//                occupy spots.
//   ClosedLoop   the engine owns occupancy; parked cars hold a spot for a
//                sampled duration. Can record the resulting per-minute trace.
//
// Equal-time events run in the order Departure, Scan, SpotReach, Arrival,
// WindowClose, then by scheduling sequence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dstbm/decision.hpp"
#include "dstbm/error.hpp"
#include "dstbm/sensing.hpp"
#include "dstbm/stochastic.hpp"
#include "dstbm/trace.hpp"

namespace dstbm {

inline constexpr std::int64_t minutes_per_week = 10080;

enum class Mode { TraceDriven, ClosedLoop };

inline std::string_view to_string(Mode m) {
    return m == Mode::TraceDriven ? "trace" : "closed-loop";
}

struct ScenarioConfig {
    double lambda = 0.4;  // arrivals per minute
    double mu = 45.0;     // mean parking duration, minutes
    double sigma = 15.0;  // duration standard deviation, minutes
    SensingConfig sensing;
    double region_length = 200.0; // metres from entrance to spots
    double v_lo = 100.0;          // metres per minute
    double v_hi = 700.0;
    std::int64_t horizon = 11 * minutes_per_week;
    std::int64_t window = minutes_per_week;
    std::uint64_t seed = 1;
    Mode mode = Mode::ClosedLoop;
    int spots = 20; // ClosedLoop only
    bool exclude_warmup = false;
    bool record_trace = false; // ClosedLoop only
    bool keep_log = true;

    void validate() const {
        ArrivalProcess{lambda};
        DurationDistribution{mu, sigma};
        sensing.validate();
        if (!(region_length > 0.0) || !std::isfinite(region_length)) {
            throw ConfigError("region length must be positive");
        }
        if (!(v_lo > 0.0) || !(v_lo <= v_hi) || !std::isfinite(v_hi)) {
            throw ConfigError("velocity bounds must satisfy 0 < v_lo <= v_hi");
        }
        if (window < 1) throw ConfigError("window must be >= 1 minute");
        if (horizon < window) throw ConfigError("horizon must be >= window");
        if (mode == Mode::ClosedLoop && spots < 1) {
            throw ConfigError("closed-loop mode needs at least one spot");
        }
        if (record_trace && mode != Mode::ClosedLoop) {
            throw ConfigError("trace recording is only available in closed-loop mode");
        }
    }
};

// A fixed arrival replacing the Poisson process (used for hand-traced runs).
struct ScriptedArrival {
    double time;
    double velocity;
};

enum class Outcome { Parked, FailedToPark, DeclinedCouldHave, DeclinedCorrectly };

inline std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::Parked: return "parked";
    case Outcome::FailedToPark: return "failed_to_park";
    case Outcome::DeclinedCouldHave: return "declined_could_have";
    case Outcome::DeclinedCorrectly: return "declined_correctly";
    }
    return "unknown";
}

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }

    void add(Outcome o) noexcept {
        switch (o) {
        case Outcome::Parked: ++tp; break;
        case Outcome::FailedToPark: ++fp; break;
        case Outcome::DeclinedCouldHave: ++fn; break;
        case Outcome::DeclinedCorrectly: ++tn; break;
        }
    }

    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
        tp += o.tp;
        tn += o.tn;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// P_a = (TP + TN) / total. Throws NoData on an empty matrix.
inline double accuracy(const ConfusionCounts& c) {
    if (c.total() == 0) throw NoData("no resolved decisions");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

inline std::optional<double> try_accuracy(const ConfusionCounts& c) {
    if (c.total() == 0) return std::nullopt;
    return accuracy(c);
}

// Parkers succeed when more spaces are free than competitors ahead of them
// claim; decliners are judged by the same test at their hypothetical arrival.
inline Outcome resolve_outcome(bool park, std::size_t free_spaces, std::size_t competitors_ahead) {
    const bool could_park = free_spaces > competitors_ahead;
    if (park) return could_park ? Outcome::Parked : Outcome::FailedToPark;
    return could_park ? Outcome::DeclinedCouldHave : Outcome::DeclinedCorrectly;
}

// No overtaking in the single lane.
inline double effective_spot_reach(double own_reach, std::optional<double> predecessor_reach) {
    return predecessor_reach ? std::max(own_reach, *predecessor_reach) : own_reach;
}

struct Car {
    std::uint64_t id = 0;
    double entry_time = 0.0;
    double velocity = 0.0;
    double travel_time = 0.0;
    Decision decision;
    double spot_reach_time = 0.0;
    std::optional<Outcome> outcome;
    std::optional<double> departure_time; // ClosedLoop parkers
    bool warmup = false;
    std::size_t n_c = 0;
    std::size_t d_r = 0;
    std::optional<double> v_min;
    std::vector<std::uint64_t> ahead; // searching cars at entry
};

struct RegionState {
    std::vector<std::uint64_t> searching; // FIFO by entry
    std::uint64_t inflow = 0;             // T_i: cars that entered to park
    std::uint64_t outflow = 0;            // T_o: searchers that parked or exited
    std::uint64_t parked = 0;
    std::uint64_t exited = 0;
    std::optional<double> last_queue_reach;
    std::vector<std::uint8_t> spot_busy; // ClosedLoop occupancy
    std::size_t busy_count = 0;
    std::optional<DetectedView> detected; // last scan reading

    std::size_t free_count() const noexcept { return spot_busy.size() - busy_count; }
};

struct WindowReport {
    std::size_t index = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;
    ConfusionCounts counts;
    std::optional<double> p_a; // nullopt: no data
    bool closed = false;
};

struct AccuracyReport {
    ScenarioConfig config;
    std::vector<WindowReport> windows;
    ConfusionCounts overall;
    std::optional<double> p_a;
    std::uint64_t decisions = 0;
    std::uint64_t resolved = 0;
    std::uint64_t unresolved = 0;
    std::uint64_t warmup_decisions = 0;
    std::uint64_t excluded = 0;
};

enum class LogEvent { Decide, DecideWarmup, Resolve };

inline std::string_view to_string(LogEvent e) {
    switch (e) {
    case LogEvent::Decide: return "decide";
    case LogEvent::DecideWarmup: return "decide_warmup";
    case LogEvent::Resolve: return "resolve";
    }
    return "unknown";
}

struct LogRow {
    double time = 0.0;
    LogEvent event = LogEvent::Decide;
    std::uint64_t car_id = 0;
    std::size_t n_c = 0;
    std::size_t d_r = 0;
    double v_c = 0.0;
    std::optional<double> v_min;
    int d_m = 0;
    std::optional<Outcome> outcome;

    friend bool operator==(const LogRow&, const LogRow&) = default;
};

inline constexpr std::string_view event_log_header = "time,event,car_id,n_c,d_r,v_c,v_min,d_m,outcome";

inline std::string format_fixed(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    return buf;
}

inline std::string event_log_csv(std::span<const LogRow> rows) {
    std::string out(event_log_header);
    out.push_back('\n');
    for (const auto& r : rows) {
        out += format_fixed(r.time, 6);
        out.push_back(',');
        out += to_string(r.event);
        out.push_back(',');
        out += std::to_string(r.car_id);
        out.push_back(',');
        out += std::to_string(r.n_c);
        out.push_back(',');
        out += std::to_string(r.d_r);
        out.push_back(',');
        out += format_fixed(r.v_c, 3);
        out.push_back(',');
        if (r.v_min) out += format_fixed(*r.v_min, 3);
        out.push_back(',');
        out += std::to_string(r.d_m);
        out.push_back(',');
        if (r.outcome) out += to_string(*r.outcome);
        out.push_back('\n');
    }
    return out;
}

struct RunResult {
    AccuracyReport report;
    std::vector<Car> cars;
    std::vector<LogRow> log;
    std::optional<OccupancyTrace> trace; // ClosedLoop with record_trace
};

// 2018-11-12T00:00, start stamp of synthesized traces.
inline constexpr std::int64_t synthetic_trace_start = 25'699'680;

inline std::vector<std::string> synthetic_spot_ids(int count) {
    const int width = std::max(2, static_cast<int>(std::to_string(count).size()));
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i) {
        auto n = std::to_string(i);
        ids.push_back("S" + std::string(static_cast<std::size_t>(width) - n.size(), '0') + n);
    }
    return ids;
}

namespace detail {

enum class EventKind : int { Departure = 0, Scan = 1, SpotReach = 2, Arrival = 3, WindowClose = 4 };

struct Event {
    double time;
    EventKind kind;
    std::uint64_t seq;
    std::uint64_t subject; // car id, spot index, or window index

    // std::priority_queue is a max-heap; "greater" pops the earliest first.
    friend bool operator>(const Event& a, const Event& b) {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, const OccupancyTrace* truth,
               std::span<const ScriptedArrival> script)
        : cfg_(cfg), truth_(truth), script_(script.begin(), script.end()), rng_(cfg.seed),
          arrivals_(cfg.lambda), durations_(cfg.mu, cfg.sigma) {
        cfg_.validate();
        if (cfg_.mode == Mode::TraceDriven) {
            if (!truth_) throw ConfigError("trace-driven mode requires a ground-truth trace");
            if (truth_->horizon_minutes() < cfg_.horizon) {
                throw ConfigError("trace horizon (" + std::to_string(truth_->horizon_minutes()) +
                                  " min) is shorter than the scenario horizon (" +
                                  std::to_string(cfg_.horizon) + " min)");
            }
        } else {
            if (truth_) throw ConfigError("closed-loop mode does not take a ground-truth trace");
            state_.spot_busy.assign(static_cast<std::size_t>(cfg_.spots), 0);
        }
        std::sort(script_.begin(), script_.end(),
                  [](const auto& a, const auto& b) { return a.time < b.time; });
        for (const auto& a : script_) {
            if (!(a.time >= 0.0) || !(a.velocity > 0.0)) {
                throw ConfigError("scripted arrivals need time >= 0 and velocity > 0");
            }
        }
    }

    RunResult run() {
        const auto window_count =
            static_cast<std::size_t>((cfg_.horizon + cfg_.window - 1) / cfg_.window);
        report_.config = cfg_;
        report_.windows.resize(window_count);
        for (std::size_t w = 0; w < window_count; ++w) {
            auto& win = report_.windows[w];
            win.index = w;
            win.start = static_cast<std::int64_t>(w) * cfg_.window;
            win.end = std::min(win.start + cfg_.window, cfg_.horizon);
            schedule(static_cast<double>(win.end), EventKind::WindowClose, w);
        }
        if (!cfg_.sensing.fixed()) {
            for (std::int64_t s = cfg_.sensing.scan_offset; s < cfg_.horizon;
                 s += cfg_.sensing.schedule_ds) {
                schedule(static_cast<double>(s), EventKind::Scan, 0);
            }
        }
        if (cfg_.record_trace) {
            recorded_.assign(state_.spot_busy.size(),
                             std::vector<bool>(static_cast<std::size_t>(cfg_.horizon)));
        }
        schedule_next_arrival(0.0);

        const auto horizon = static_cast<double>(cfg_.horizon);
        while (!queue_.empty()) {
            const Event ev = queue_.top();
            queue_.pop();
            record_until(ev.time);
            switch (ev.kind) {
            case EventKind::Departure: on_departure(ev); break;
            case EventKind::Scan: on_scan(ev); break;
            case EventKind::SpotReach: on_spot_reach(ev); break;
            case EventKind::Arrival: on_arrival(ev); break;
            case EventKind::WindowClose: on_window_close(ev); break;
            }
        }
        record_until(horizon);

        for (const auto& car : cars_) {
            if (!car.outcome) ++report_.unresolved;
        }
        report_.p_a = try_accuracy(report_.overall);

        RunResult result{std::move(report_), std::move(cars_), std::move(log_), std::nullopt};
        if (cfg_.record_trace) {
            result.trace.emplace("synthetic", synthetic_trace_start, 1,
                                 synthetic_spot_ids(cfg_.spots), std::move(recorded_));
        }
        return result;
    }

private:
    void schedule(double time, EventKind kind, std::uint64_t subject) {
        const auto horizon = static_cast<double>(cfg_.horizon);
        if (kind == EventKind::WindowClose ? time > horizon : time >= horizon) return;
        queue_.push(Event{time, kind, next_seq_++, subject});
    }

    void schedule_next_arrival(double now) {
        if (!script_.empty()) {
            if (next_script_ < script_.size()) {
                schedule(script_[next_script_].time, EventKind::Arrival, next_script_);
                ++next_script_;
            }
            return;
        }
        schedule(now + sample_interarrival(rng_, arrivals_), EventKind::Arrival, 0);
    }

    TimeIndex minute_of(double t) const { return TimeIndex{static_cast<std::int64_t>(std::floor(t))}; }

    // Ground-truth free spaces right now.
    std::size_t truth_free(double t) const {
        if (cfg_.mode == Mode::TraceDriven) return free_spaces_at(*truth_, minute_of(t));
        return state_.free_count();
    }

    DetectedView live_view(double t) const {
        if (cfg_.mode == Mode::TraceDriven) return view_at(*truth_, minute_of(t));
        return DetectedView{state_.spot_busy, state_.free_count(), minute_of(t)};
    }

    void on_scan(const Event& ev) { state_.detected = live_view(ev.time); }

    void on_arrival(const Event& ev) {
        const double now = ev.time;
        Car car;
        car.id = cars_.size();
        car.entry_time = now;
        car.velocity = script_.empty() ? sample_velocity(rng_, cfg_.v_lo, cfg_.v_hi)
                                       : script_[ev.subject].velocity;
        car.travel_time = cfg_.region_length / car.velocity;
        schedule_next_arrival(now);

        car.n_c = state_.searching.size();
        car.ahead = state_.searching;
        if (car.n_c > 0) {
            double v = std::numeric_limits<double>::infinity();
            for (auto id : state_.searching) v = std::min(v, cars_[id].velocity);
            car.v_min = v;
        }
        if (cfg_.sensing.fixed()) {
            car.d_r = truth_free(now);
        } else if (state_.detected) {
            car.d_r = state_.detected->free_count;
        } else {
            car.d_r = 0;
            car.warmup = true;
            ++report_.warmup_decisions;
        }
        car.decision = decide(DecisionInputs(car.n_c, car.d_r, car.velocity, car.v_min));
        car.spot_reach_time = effective_spot_reach(now + car.travel_time, state_.last_queue_reach);
        if (car.decision.park) {
            state_.last_queue_reach = car.spot_reach_time;
            state_.searching.push_back(car.id);
            ++state_.inflow;
        }
        ++report_.decisions;
        log(now, car.warmup ? LogEvent::DecideWarmup : LogEvent::Decide, car);
        schedule(car.spot_reach_time, EventKind::SpotReach, car.id);
        cars_.push_back(std::move(car));
    }

    void on_spot_reach(const Event& ev) {
        auto& car = cars_[ev.subject];
        std::size_t competitors = 0;
        std::size_t free = truth_free(ev.time);
        if (cfg_.mode == Mode::TraceDriven) {
            // Probes never appear in the trace, so cars ahead that parked
            // still claim one of the spaces it shows as free.
            for (auto id : car.ahead) {
                if (cars_[id].outcome == Outcome::Parked) ++competitors;
            }
        }
        const Outcome outcome = resolve_outcome(car.decision.park, free, competitors);
        car.outcome = outcome;

        if (car.decision.park) {
            auto& s = state_.searching;
            s.erase(std::find(s.begin(), s.end(), car.id));
            ++state_.outflow;
            if (outcome == Outcome::Parked) {
                ++state_.parked;
                if (cfg_.mode == Mode::ClosedLoop) car.departure_time = occupy_spot(ev.time);
            } else {
                ++state_.exited;
            }
        }

        if (car.warmup && cfg_.exclude_warmup) {
            ++report_.excluded;
        } else {
            const auto w = static_cast<std::size_t>(static_cast<std::int64_t>(ev.time) / cfg_.window);
            report_.windows[w].counts.add(outcome);
            report_.overall.add(outcome);
            ++report_.resolved;
        }
        log(ev.time, LogEvent::Resolve, car);
    }

    // Lowest-numbered free spot; returns the departure time.
    double occupy_spot(double now) {
        auto it = std::find(state_.spot_busy.begin(), state_.spot_busy.end(), 0);
        *it = 1;
        ++state_.busy_count;
        const auto spot = static_cast<std::uint64_t>(it - state_.spot_busy.begin());
        const double leave = now + sample_duration(rng_, durations_);
        schedule(leave, EventKind::Departure, spot);
        return leave;
    }

    void on_departure(const Event& ev) {
        state_.spot_busy[ev.subject] = 0;
        --state_.busy_count;
    }

    void on_window_close(const Event& ev) {
        auto& win = report_.windows[ev.subject];
        win.p_a = try_accuracy(win.counts);
        win.closed = true;
    }

    void record_until(double t) {
        if (!cfg_.record_trace) return;
        while (next_sample_ < cfg_.horizon && static_cast<double>(next_sample_) < t) {
            const auto m = static_cast<std::size_t>(next_sample_);
            for (std::size_t s = 0; s < state_.spot_busy.size(); ++s) {
                recorded_[s][m] = state_.spot_busy[s] != 0;
            }
            ++next_sample_;
        }
    }

    void log(double time, LogEvent kind, const Car& car) {
        if (!cfg_.keep_log) return;
        log_.push_back(LogRow{time, kind, car.id, car.n_c, car.d_r, car.velocity, car.v_min,
                              car.decision.d_m(), kind == LogEvent::Resolve ? car.outcome
                                                                             : std::nullopt});
    }

    ScenarioConfig cfg_;
    const OccupancyTrace* truth_;
    std::vector<ScriptedArrival> script_;
    std::size_t next_script_ = 0;
    RandomSource rng_;
    ArrivalProcess arrivals_;
    DurationDistribution durations_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t next_seq_ = 0;
    RegionState state_;
    std::vector<Car> cars_;
    std::vector<LogRow> log_;
    AccuracyReport report_;
    std::vector<std::vector<bool>> recorded_;
    std::int64_t next_sample_ = 0;
};

} // namespace detail

inline RunResult run(const ScenarioConfig& cfg, const OccupancyTrace* ground_truth = nullptr,
                     std::span<const ScriptedArrival> script = {}) {
    return detail::Simulation(cfg, ground_truth, script).run();
}

inline RunResult run(const ScenarioConfig& cfg, const OccupancyTrace& ground_truth,
                     std::span<const ScriptedArrival> script = {}) {
    return run(cfg, &ground_truth, script);
}

} // namespace dstbm
