#include "tsm/adversaries.hpp"

#include <algorithm>
#include <cmath>

namespace tsm {

bool audit_consistency(const Instance& inst, const Transcript& tr) {
    for (const auto& e : tr) {
        try {
            if (apply_mechanism(inst, e.profile).feedback != e.feedback) return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

namespace {

int streak_threshold_for(uint64_t T) {
    double x = static_cast<double>(T);
    for (int r = 0; r < 4; ++r) x = x > 1 ? std::log2(x) : 0.0;
    return std::max(1, static_cast<int>(std::floor(x)));
}

}  // namespace

Adversary1::Adversary1(uint64_t T) : T_(T), threshold_(streak_threshold_for(T)) {}

Instance Adversary1::finalize() const {
    if (frozen_) return *frozen_;
    return Instance{{0.0}, {lo_, hi_}};
}

Feedback Adversary1::respond(const PriceProfile& prof) {
    if (prof.kind != ProfileKind::Single)
        throw Error(Errc::NonSinglePriceProfile, "adversary 1 answers uniform prices only");
    ++t_;
    if (frozen_) return tsm::respond(*frozen_, prof);
    const double p = prof.p;
    bool accept;
    if (p < lo_) {
        accept = true;  // below every value still possible
    } else if (p > hi_) {
        accept = false;
    } else {
        // lo_ is the last accepted price inside the interval
        const double eps = std::exp2(-std::exp2(k_ + 2.0));
        if (p - lo_ > eps) {
            accept = false;
            hi_ = lo_ + eps;
            phase_len_ = hi_ - lo_;
            ++k_;
            phi_ = 0;
        } else {
            accept = true;
            lo_ = p;
            if (hi_ - lo_ <= phase_len_ / 4) {
                phase_len_ = hi_ - lo_;
                ++phi_;
                ++k_;
            }
        }
    }
    Feedback fb{{p >= 0.0}, {static_cast<uint8_t>(accept), static_cast<uint8_t>(accept)}};
    if (phi_ >= threshold_ || t_ >= T_) frozen_ = Instance{{0.0}, {lo_, hi_}};
    return fb;
}

Feedback Adversary2::respond(const PriceProfile& prof) {
    if (prof.kind == ProfileKind::Segmented)
        throw Error(Errc::UnsupportedCombination, "adversary 2 answers two-price mechanisms only");
    const double p = prof.p, q = prof.q;
    if (p > q) throw Error(Errc::BudgetBalanceViolation, "seller price exceeds buyer price");
    ++t_;
    Feedback fb{{1, 1, 1}, {1, 1, 1}};
    if (p < q_low_) {
        fb.sellers = {1, 0, 0};
        p_bar_ = std::max(p_bar_, p);
    }
    if (q > p_bar_) {
        fb.buyers = {1, 1, 0};
        q_low_ = std::min(q_low_, q);
    }
    return fb;
}

Instance Adversary2::finalize() const {
    const double c = (2 * p_bar_ + q_low_) / 3, v = (p_bar_ + 2 * q_low_) / 3;
    return Instance{{0.0, c, c}, {1.0, 1.0, v}};
}

}  // namespace tsm
