#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dstbm/trace.hpp"

namespace dstbm::testing {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string data_path(const std::string& name) {
    return std::string(DSTBM_TEST_DATA) + "/" + name;
}

// Single spot from a bit string such as "1110010001".
inline OccupancyTrace trace_from_bits(const std::string& bits, int resolution = 1) {
    std::vector<bool> series;
    for (char c : bits) series.push_back(c == '1');
    return OccupancyTrace("test", parse_timestamp("2018-11-12T08:00"), resolution, {"A"},
                          {series});
}

inline std::string bits_of(const OccupancyTrace& trace, std::size_t spot = 0) {
    std::string out;
    for (bool b : trace.series(spot)) out.push_back(b ? '1' : '0');
    return out;
}

// Random trace with up to `max_spots` spots and `max_len` samples; flip
// probability per sample controls how bursty occupancy is.
inline OccupancyTrace random_trace(std::mt19937_64& gen, std::size_t max_spots = 8,
                                   std::size_t max_len = 60, int max_resolution = 3) {
    std::uniform_int_distribution<std::size_t> spot_n(1, max_spots);
    std::uniform_int_distribution<std::size_t> len_n(1, max_len);
    std::uniform_int_distribution<int> res_n(1, max_resolution);
    std::uniform_int_distribution<std::int64_t> start_n(0, 60LL * 24 * 365 * 60);
    std::bernoulli_distribution flip(0.3);

    const auto spots = spot_n(gen);
    const auto len = len_n(gen);
    std::vector<std::string> ids;
    std::vector<std::vector<bool>> occ(spots, std::vector<bool>(len));
    for (std::size_t s = 0; s < spots; ++s) {
        ids.push_back("P" + std::to_string(gen() % 1000) + "_" + std::to_string(s));
        bool cur = flip(gen);
        for (std::size_t i = 0; i < len; ++i) {
            if (flip(gen)) cur = !cur;
            occ[s][i] = cur;
        }
    }
    return OccupancyTrace("region", start_n(gen), res_n(gen), ids, occ);
}

} // namespace dstbm::testing
