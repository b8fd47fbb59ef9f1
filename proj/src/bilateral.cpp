#include "tsm/bilateral.hpp"

#include <algorithm>
#include <cmath>

namespace tsm {

int gap_index(double len) {
    if (!(len > 0)) throw Error(Errc::NonPositiveLength, "gap_index needs a positive length");
    if (len >= 1) return 1;
    const double k = std::floor(1.0 + std::log2(std::log2(1.0 / len)));
    return std::max(1, static_cast<int>(k));
}

double gap_offset(int k) { return std::exp2(-std::exp2(static_cast<double>(k))); }

double loglog2(double T) { return T > 2 ? std::log2(std::log2(T)) : 0.0; }

PriceProfile OptimisticBinarySearch::propose(std::span<const double>) {
    if (phase_ == Phase::Explore) price_ = 0.5 * (iv_.s_lb + iv_.b_ub);
    return PriceProfile::single(price_);
}

void OptimisticBinarySearch::observe(const Feedback& fb) {
    if (phase_ == Phase::Exploit) return;
    const bool s = fb.seller_count() > 0, b = fb.buyer_count() > 0;
    if (s && b) {
        phase_ = Phase::Exploit;
        iv_.s_ub = std::min(iv_.s_ub, price_);
        iv_.b_lb = std::max(iv_.b_lb, price_);
        return;
    }
    if (!s && !b) throw Error(Errc::InconsistentFeedback, "both sides rejected a uniform price");
    if (!s) {
        iv_.s_lb = price_;
        iv_.b_lb = std::max(iv_.b_lb, price_);
    } else {
        iv_.b_ub = price_;
        iv_.s_ub = std::min(iv_.s_ub, price_);
    }
}

OptimisticConservativeSearch::OptimisticConservativeSearch(uint64_t T)
    : inv_T_(1.0 / static_cast<double>(std::max<uint64_t>(T, 1))) {}

PriceProfile OptimisticConservativeSearch::propose(std::span<const double>) {
    switch (phase_) {
        case Phase::ExploreI:
            p_ = q_ = 0.5 * (iv_.s_lb + iv_.b_ub);
            // both types are pinned inside a window below double resolution for the adversary's
            // finalization; keep the midpoint instead of bisecting into rounding noise
            if (iv_.b_ub - iv_.s_lb <= 0x1p-40) phase_ = Phase::Exploit;
            break;
        case Phase::ExploreII: {
            // a side keeps searching until its interval is at most 1/T
            const double ws = iv_.s_ub - iv_.s_lb, wb = iv_.b_ub - iv_.b_lb;
            const bool open_s = ws > inv_T_, open_b = wb > inv_T_;
            if (!open_s && !open_b) {
                phase_ = Phase::Exploit;
                p_ = iv_.s_ub;
                q_ = iv_.b_lb;
                break;
            }
            ms_ = open_s ? gap_index(ws) : 0;
            mb_ = open_b ? gap_index(wb) : 0;
            p_ = iv_.s_ub - (open_s ? gap_offset(ms_) : 0.0);
            q_ = iv_.b_lb + (open_b ? gap_offset(mb_) : 0.0);
            break;
        }
        case Phase::Exploit:
            break;
    }
    return PriceProfile::two(p_, q_);
}

void OptimisticConservativeSearch::observe(const Feedback& fb) {
    const bool s = fb.seller_count() == static_cast<int>(fb.sellers.size());
    const bool b = fb.buyer_count() == static_cast<int>(fb.buyers.size());
    if (phase_ == Phase::ExploreI) {
        if (s && b) {
            iv_.s_ub = p_;
            iv_.b_lb = q_;
            phase_ = Phase::ExploreII;
        } else if (!s && !b) {
            throw Error(Errc::InconsistentFeedback, "both sides rejected during the binary search");
        } else if (!s) {
            iv_.s_lb = p_;
        } else {
            iv_.b_ub = q_;
        }
    } else if (phase_ == Phase::ExploreII) {
        (s ? iv_.s_ub : iv_.s_lb) = p_;
        (b ? iv_.b_lb : iv_.b_ub) = q_;
    }
}

}  // namespace tsm
