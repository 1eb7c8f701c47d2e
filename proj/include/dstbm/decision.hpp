#pragma once

// Driver's park / pass decision at the region entrance.
//
//   n_c >= d_r                  -> pass (not enough detected spaces)
//   n_c > 0 and v_min > v_c     -> pass (slower than every competitor)
//   otherwise                   -> park

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "dstbm/error.hpp"

namespace dstbm {

enum class DecisionReason { InsufficientSpaces, TooSlow, Favorable, NoCompetition };

inline std::string_view to_string(DecisionReason r) {
    switch (r) {
    case DecisionReason::InsufficientSpaces: return "insufficient_spaces";
    case DecisionReason::TooSlow: return "too_slow";
    case DecisionReason::Favorable: return "favorable";
    case DecisionReason::NoCompetition: return "no_competition";
    }
    return "unknown";
}

class DecisionInputs {
public:
    // v_min must be given exactly when n_c > 0.
    DecisionInputs(std::size_t n_c, std::size_t d_r, double v_c, std::optional<double> v_min)
        : n_c_(n_c), d_r_(d_r), v_c_(v_c), v_min_(v_min) {
        if (!(v_c > 0.0) || !std::isfinite(v_c)) {
            throw ConfigError("deciding car velocity must be positive");
        }
        if (v_min.has_value() != (n_c > 0)) {
            throw ConfigError(n_c > 0 ? "v_min required when competitors are searching"
                                      : "v_min must be absent when no competitor is searching");
        }
        if (v_min && !(*v_min > 0.0)) throw ConfigError("v_min must be positive");
    }

    std::size_t n_c() const noexcept { return n_c_; }
    std::size_t d_r() const noexcept { return d_r_; }
    double v_c() const noexcept { return v_c_; }
    std::optional<double> v_min() const noexcept { return v_min_; }

private:
    std::size_t n_c_;
    std::size_t d_r_;
    double v_c_;
    std::optional<double> v_min_;
};

struct Decision {
    bool park = false; // D_m
    DecisionReason reason = DecisionReason::InsufficientSpaces;

    int d_m() const noexcept { return park ? 1 : 0; }

    friend bool operator==(const Decision&, const Decision&) = default;
};

inline Decision decide(const DecisionInputs& in) {
    if (in.n_c() >= in.d_r()) return {false, DecisionReason::InsufficientSpaces};
    if (in.n_c() == 0) return {true, DecisionReason::NoCompetition};
    if (*in.v_min() > in.v_c()) return {false, DecisionReason::TooSlow};
    return {true, DecisionReason::Favorable};
}

} // namespace dstbm
