#pragma once

// Ground-truth occupancy traces: one boolean series per parking spot sampled
// at a fixed resolution, plus the long-form CSV reader and writer.
//
// CSV layout (UTF-8, LF):
//
//     timestamp,spot_id,occupied
//     2018-11-12T08:00,S01,1
//     2018-11-12T08:00,S02,0
//     ...
//
// Every spot must be sampled over the same span at the same cadence.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dstbm/error.hpp"

namespace dstbm {

// Minutes since the start of a trace.
struct TimeIndex {
    std::int64_t minutes = 0;

    constexpr TimeIndex() = default;
    constexpr explicit TimeIndex(std::int64_t m) : minutes(m) {}

    friend constexpr auto operator<=>(TimeIndex, TimeIndex) = default;
};

// Naive local timestamps, stored as minutes since 1970-01-01T00:00.
inline std::int64_t parse_timestamp(std::string_view text) {
    // YYYY-MM-DDTHH:MM
    auto digits = [&](std::size_t pos, std::size_t len, int& out) {
        if (pos + len > text.size()) return false;
        auto first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, out);
        return ec == std::errc{} && ptr == first + len;
    };
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    if (text.size() != 16 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || !digits(0, 4, y) || !digits(5, 2, mo) || !digits(8, 2, d) ||
        !digits(11, 2, h) || !digits(14, 2, mi)) {
        throw ConfigError("malformed timestamp '" + std::string(text) +
                          "' (expected YYYY-MM-DDTHH:MM)");
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59) {
        throw ConfigError("invalid timestamp '" + std::string(text) + "'");
    }
    const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days_since_epoch) * 1440 + h * 60 + mi;
}

inline std::string format_timestamp(std::int64_t epoch_minutes) {
    using namespace std::chrono;
    auto day_count = epoch_minutes / 1440;
    auto in_day = epoch_minutes % 1440;
    if (in_day < 0) {
        in_day += 1440;
        --day_count;
    }
    const year_month_day ymd{sys_days{days{day_count}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(in_day / 60), static_cast<int>(in_day % 60));
    return buf;
}

// Immutable per-spot occupancy series (true = occupied). Spots are kept in
// ascending id order so that equal content always compares equal.
class OccupancyTrace {
public:
    OccupancyTrace(std::string region_id, std::int64_t start_minute, int resolution,
                   std::vector<std::string> spots, std::vector<std::vector<bool>> occupancy)
        : region_id_(std::move(region_id)), start_minute_(start_minute),
          resolution_(resolution) {
        if (resolution_ < 1) throw ConfigError("trace resolution must be >= 1 minute");
        if (spots.empty()) throw ConfigError("trace must contain at least one spot");
        if (occupancy.size() != spots.size()) {
            throw ConfigError("trace has " + std::to_string(spots.size()) + " spots but " +
                              std::to_string(occupancy.size()) + " occupancy series");
        }
        length_ = occupancy.front().size();
        if (length_ == 0) throw ConfigError("trace series must contain at least one sample");
        std::unordered_set<std::string> seen;
        for (std::size_t s = 0; s < spots.size(); ++s) {
            const auto& id = spots[s];
            if (id.empty() || id.find_first_of(",\r\n") != std::string::npos) {
                throw ConfigError("invalid spot id '" + id + "'");
            }
            if (!seen.insert(id).second) throw ConfigError("duplicate spot id '" + id + "'");
            if (occupancy[s].size() != length_) {
                throw ConfigError("spot '" + id + "' has " +
                                  std::to_string(occupancy[s].size()) + " samples, expected " +
                                  std::to_string(length_));
            }
        }

        std::vector<std::size_t> order(spots.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return spots[a] < spots[b]; });

        spots_.reserve(spots.size());
        for (auto s : order) spots_.push_back(std::move(spots[s]));
        bits_.resize(length_ * spots_.size());
        free_.assign(length_, 0);
        for (std::size_t i = 0; i < length_; ++i) {
            for (std::size_t k = 0; k < order.size(); ++k) {
                const bool occ = occupancy[order[k]][i];
                bits_[i * spots_.size() + k] = occ ? 1 : 0;
                if (!occ) ++free_[i];
            }
        }
    }

    const std::string& region_id() const noexcept { return region_id_; }
    std::int64_t start_minute() const noexcept { return start_minute_; }
    int resolution() const noexcept { return resolution_; }
    const std::vector<std::string>& spots() const noexcept { return spots_; }
    std::size_t spot_count() const noexcept { return spots_.size(); }
    std::size_t length() const noexcept { return length_; }

    // Total span covered, in minutes.
    std::int64_t horizon_minutes() const noexcept {
        return static_cast<std::int64_t>(length_) * resolution_;
    }

    bool contains(TimeIndex t) const noexcept {
        return t.minutes >= 0 && t.minutes < horizon_minutes();
    }

    std::size_t sample_index(TimeIndex t) const {
        if (!contains(t)) {
            throw RangeError("time index " + std::to_string(t.minutes) +
                             " is outside the trace horizon [0, " +
                             std::to_string(horizon_minutes()) + ")");
        }
        return static_cast<std::size_t>(t.minutes / resolution_);
    }

    // Occupancy bits of every spot at one sample, in spot order.
    std::span<const std::uint8_t> sample(std::size_t index) const {
        return {bits_.data() + index * spots_.size(), spots_.size()};
    }

    std::size_t free_at_sample(std::size_t index) const { return free_.at(index); }

    bool occupied(std::size_t spot, std::size_t index) const {
        return bits_.at(index * spots_.size() + spot) != 0;
    }

    std::vector<bool> series(std::size_t spot) const {
        std::vector<bool> out(length_);
        for (std::size_t i = 0; i < length_; ++i) out[i] = occupied(spot, i);
        return out;
    }

    friend bool operator==(const OccupancyTrace& a, const OccupancyTrace& b) {
        return a.region_id_ == b.region_id_ && a.start_minute_ == b.start_minute_ &&
               a.resolution_ == b.resolution_ && a.spots_ == b.spots_ && a.bits_ == b.bits_;
    }

private:
    std::string region_id_;
    std::int64_t start_minute_;
    int resolution_;
    std::size_t length_ = 0;
    std::vector<std::string> spots_;
    std::vector<std::uint8_t> bits_; // time-major
    std::vector<std::size_t> free_;
};

// Number of spots whose occupancy bit is false at t (N_p).
inline std::size_t free_spaces_at(const OccupancyTrace& trace, TimeIndex t) {
    return trace.free_at_sample(trace.sample_index(t));
}

inline std::size_t occupied_spaces_at(const OccupancyTrace& trace, TimeIndex t) {
    return trace.spot_count() - free_spaces_at(trace, t);
}

inline constexpr std::string_view trace_csv_header = "timestamp,spot_id,occupied";

inline OccupancyTrace parse_trace(std::string_view document, std::string region_id = "region") {
    struct Sample {
        bool occupied;
        std::size_t line;
    };
    std::map<std::string, std::map<std::int64_t, Sample>, std::less<>> by_spot;

    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos < document.size()) {
        auto eol = document.find('\n', pos);
        if (eol == std::string_view::npos) eol = document.size();
        auto line = document.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (!header_seen) {
            if (line != trace_csv_header) {
                throw ParseError(line_no, "expected header '" + std::string(trace_csv_header) +
                                              "'");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
            throw ParseError(line_no, "malformed row (expected 3 fields)");
        }
        const auto ts_text = line.substr(0, c1);
        const auto spot = line.substr(c1 + 1, c2 - c1 - 1);
        const auto occ_text = line.substr(c2 + 1);

        std::int64_t minute = 0;
        try {
            minute = parse_timestamp(ts_text);
        } catch (const ConfigError& e) {
            throw ParseError(line_no, e.what());
        }
        if (spot.empty()) throw ParseError(line_no, "empty spot_id");
        if (occ_text != "0" && occ_text != "1") {
            throw ParseError(line_no, "occupied must be 0 or 1, got '" + std::string(occ_text) +
                                          "'");
        }

        auto it = by_spot.find(spot);
        if (it == by_spot.end()) it = by_spot.emplace(std::string(spot), std::map<std::int64_t, Sample>{}).first;
        auto [slot, inserted] = it->second.emplace(minute, Sample{occ_text == "1", line_no});
        if (!inserted) {
            throw ParseError(line_no, "duplicate sample for spot '" + std::string(spot) + "' at " +
                                          std::string(ts_text) + " (first seen on line " +
                                          std::to_string(slot->second.line) + ")");
        }
    }
    if (!header_seen) throw ParseError(1, "empty document");
    if (by_spot.empty()) throw ParseError(line_no, "no data rows");

    std::int64_t start = by_spot.begin()->second.begin()->first;
    std::int64_t end = by_spot.begin()->second.rbegin()->first;
    std::int64_t resolution = 0;
    for (const auto& [id, samples] : by_spot) {
        start = std::min(start, samples.begin()->first);
        end = std::max(end, samples.rbegin()->first);
        for (auto a = samples.begin(), b = std::next(a); b != samples.end(); ++a, ++b) {
            const auto step = b->first - a->first;
            if (resolution == 0 || step < resolution) resolution = step;
        }
    }
    if (resolution == 0) resolution = 1;
    if (resolution > 1'000'000) throw ParseError(1, "sample cadence is implausibly coarse");

    const auto length = static_cast<std::size_t>((end - start) / resolution + 1);
    std::vector<std::string> spots;
    std::vector<std::vector<bool>> occupancy;
    for (const auto& [id, samples] : by_spot) {
        const auto& first = *samples.begin();
        if (first.first != start) {
            throw ParseError(first.second.line, "spot '" + id + "': missing sample at " +
                                                    format_timestamp(start));
        }
        std::vector<bool> bits;
        bits.reserve(length);
        std::int64_t expected = start;
        for (const auto& [minute, sample] : samples) {
            if (minute != expected) {
                if ((minute - start) % resolution != 0) {
                    throw ParseError(sample.line, "spot '" + id + "': non-uniform cadence at " +
                                                      format_timestamp(minute) + " (expected " +
                                                      std::to_string(resolution) + "-minute steps)");
                }
                throw ParseError(sample.line, "spot '" + id + "': missing sample at " +
                                                  format_timestamp(expected));
            }
            bits.push_back(sample.occupied);
            expected += resolution;
        }
        if (bits.size() != length) {
            throw ParseError(samples.rbegin()->second.line,
                             "spot '" + id + "': missing sample at " + format_timestamp(expected));
        }
        spots.push_back(id);
        occupancy.push_back(std::move(bits));
    }
    return OccupancyTrace(std::move(region_id), start, static_cast<int>(resolution),
                          std::move(spots), std::move(occupancy));
}

inline std::string serialize_trace(const OccupancyTrace& trace) {
    std::string out;
    out.reserve(trace.length() * trace.spot_count() * 24 + 32);
    out.append(trace_csv_header);
    out.push_back('\n');
    for (std::size_t i = 0; i < trace.length(); ++i) {
        const auto ts = format_timestamp(trace.start_minute() +
                                         static_cast<std::int64_t>(i) * trace.resolution());
        const auto bits = trace.sample(i);
        for (std::size_t s = 0; s < trace.spot_count(); ++s) {
            out.append(ts);
            out.push_back(',');
            out.append(trace.spots()[s]);
            out.push_back(',');
            out.push_back(bits[s] ? '1' : '0');
            out.push_back('\n');
        }
    }
    return out;
}

} // namespace dstbm
