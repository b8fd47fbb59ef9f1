#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tsm/market.hpp"

namespace tsm {

struct TranscriptEntry {
    PriceProfile profile;
    Feedback feedback;
    uint64_t repeat = 1;  // identical consecutive rounds collapsed into one entry
};
using Transcript = std::vector<TranscriptEntry>;

// Replays every recorded profile on `inst` and compares the feedback bit for bit.
bool audit_consistency(const Instance& inst, const Transcript& tr);

// One seller (cost 0) and two buyers, uniform prices only.
class Adversary1 {
public:
    explicit Adversary1(uint64_t T);

    Feedback respond(const PriceProfile& prof);
    // Types committed so far: c = 0, v1 = min Phi, v2 = max Phi.
    Instance finalize() const;
    bool frozen() const { return frozen_.has_value(); }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int phase() const { return k_; }
    int streak() const { return phi_; }
    int streak_threshold() const { return threshold_; }

private:
    uint64_t T_, t_ = 0;
    int threshold_;
    double lo_ = 15.0 / 16.0, hi_ = 1.0;
    double phase_len_ = 1.0 / 16.0;
    int k_ = 1, phi_ = 0;
    std::optional<Instance> frozen_;
};

// Three sellers and three buyers, two-price mechanisms only.
class Adversary2 {
public:
    explicit Adversary2(uint64_t T) : T_(T) {}

    Feedback respond(const PriceProfile& prof);
    Instance finalize() const;
    bool frozen() const { return t_ >= T_; }

    double p_bar() const { return p_bar_; }
    double q_low() const { return q_low_; }

private:
    uint64_t T_, t_ = 0;
    double p_bar_ = 0.25, q_low_ = 0.75;
};

}  // namespace tsm
