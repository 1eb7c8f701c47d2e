#pragma once

// Detected occupancy for fixed sensing (schedule 0: live ground truth) and
// mobile sensing (scan-and-hold: the whole region is read at each scan
// instant and the reading is held until the next pass).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dstbm/error.hpp"
#include "dstbm/trace.hpp"

namespace dstbm {

struct SensingConfig {
    int schedule_ds = 0; // minutes between scans, 0 = fixed sensing
    int scan_offset = 0; // minutes into each period at which the scan happens

    bool fixed() const noexcept { return schedule_ds == 0; }

    void validate() const {
        if (schedule_ds < 0) {
            throw ConfigError("detection schedule must be >= 0, got " +
                              std::to_string(schedule_ds));
        }
        const int period = schedule_ds > 0 ? schedule_ds : 1;
        if (scan_offset < 0 || scan_offset >= period) {
            throw ConfigError("scan offset must lie in [0, " + std::to_string(period) + "), got " +
                              std::to_string(scan_offset));
        }
    }
};

struct DetectedView {
    std::vector<std::uint8_t> bits; // detected occupancy per spot, trace spot order
    std::size_t free_count = 0;     // D_r
    TimeIndex last_scan_time;
};

// Most recent scan instant at or before t, or nullopt during warm-up.
inline std::optional<TimeIndex> last_scan_instant(const SensingConfig& cfg, TimeIndex t) {
    if (cfg.fixed()) return t;
    const std::int64_t ds = cfg.schedule_ds;
    std::int64_t s = (t.minutes / ds) * ds + cfg.scan_offset;
    if (s > t.minutes) s -= ds;
    if (s < 0) return std::nullopt;
    return TimeIndex{s};
}

inline DetectedView view_at(const OccupancyTrace& trace, TimeIndex scan) {
    const auto index = trace.sample_index(scan);
    const auto bits = trace.sample(index);
    return DetectedView{{bits.begin(), bits.end()}, trace.free_at_sample(index), scan};
}

inline DetectedView detect(const OccupancyTrace& trace, const SensingConfig& cfg, TimeIndex t) {
    cfg.validate();
    if (!trace.contains(t)) {
        throw RangeError("detection time " + std::to_string(t.minutes) +
                         " is outside the trace horizon");
    }
    const auto scan = last_scan_instant(cfg, t);
    if (!scan) {
        throw NoObservation("no observation yet at minute " + std::to_string(t.minutes) +
                            " (first scan at minute " + std::to_string(cfg.scan_offset) + ")");
    }
    return view_at(trace, *scan);
}

// The trace as a sensing solution sees it: each sample replaced by the held
// reading of the latest scan.
inline OccupancyTrace downsample(const OccupancyTrace& trace, const SensingConfig& cfg) {
    cfg.validate();
    if (cfg.fixed()) return trace;
    std::vector<std::vector<bool>> occupancy(trace.spot_count(),
                                             std::vector<bool>(trace.length()));
    for (std::size_t i = 0; i < trace.length(); ++i) {
        const TimeIndex t{static_cast<std::int64_t>(i) * trace.resolution()};
        const auto view = detect(trace, cfg, t);
        for (std::size_t s = 0; s < trace.spot_count(); ++s) occupancy[s][i] = view.bits[s] != 0;
    }
    return OccupancyTrace(trace.region_id(), trace.start_minute(), trace.resolution(),
                          trace.spots(), std::move(occupancy));
}

} // namespace dstbm
