#include "tsm/two_sided.hpp"

#include <algorithm>
#include <numeric>

#include "tsm/bilateral.hpp"

namespace tsm {

OneToManySearch::OneToManySearch(uint64_t T) : inv_T_(1.0 / static_cast<double>(std::max<uint64_t>(T, 1))) {}

PriceProfile OneToManySearch::propose(std::span<const double>) {
    if (phase_ == Phase::ExploreI) {
        price_ = 0.5 * (lb_ + ub_);
    } else if (phase_ == Phase::ExploreII) {
        if (ub_ - lb_ <= inv_T_) {
            phase_ = Phase::Exploit;
            price_ = lb_;
        } else {
            price_ = lb_ + gap_offset(gap_index(ub_ - lb_));
        }
    }
    return PriceProfile::single(price_);
}

void OneToManySearch::observe(const Feedback& fb) {
    const int s = fb.seller_count(), b = fb.buyer_count();
    if (phase_ == Phase::ExploreI) {
        if (s == b) {
            if (s == 0) throw Error(Errc::InconsistentFeedback, "nobody accepted the midpoint");
            phase_ = Phase::Exploit;
        } else if (s == 0) {
            lb_ = price_;
        } else if (b == 0) {
            ub_ = price_;
        } else {
            lb_ = price_;
            phase_ = Phase::ExploreII;
        }
    } else if (phase_ == Phase::ExploreII) {
        if (b == 0)
            ub_ = price_;
        else if (b == 1)
            phase_ = Phase::Exploit;
        else
            lb_ = price_;
    }
}

BalanceSegmented::BalanceSegmented(int n, uint64_t T)
    : n_(n),
      T_(static_cast<double>(T)),
      cs_(n, 0),
      cb_(n, 0),
      sact_(n, 1),
      bact_(n, 1),
      ks_(n, 1),
      kb_(n, 1),
      y_(n, 0),
      explorers_(n, 0) {}

int BalanceSegmented::count(const Set& s) { return static_cast<int>(std::count(s.begin(), s.end(), 1)); }

PriceProfile BalanceSegmented::exploit_profile() const {
    std::vector<uint8_t> sg(n_, 1), bg(n_, 1);
    const int ncs = count(cs_), ncb = count(cb_);
    if (ncs >= ncb) {
        for (int i = 0; i < n_; ++i) sg[i] = cs_[i] ? 0 : 1;
        int extra = ncs - ncb;
        for (int j = 0; j < n_; ++j) {
            if (cb_[j]) {
                bg[j] = 0;
            } else if (bact_[j] && extra > 0) {
                bg[j] = 0;
                --extra;
            }
        }
        return PriceProfile::segmented(sg, lb_, 0.0, bg, lb_, 1.0);
    }
    for (int j = 0; j < n_; ++j) bg[j] = cb_[j] ? 0 : 1;
    int extra = ncb - ncs;
    for (int i = 0; i < n_; ++i) {
        if (cs_[i]) {
            sg[i] = 0;
        } else if (sact_[i] && extra > 0) {
            sg[i] = 0;
            --extra;
        }
    }
    return PriceProfile::segmented(sg, ub_, 0.0, bg, ub_, 1.0);
}

PriceProfile BalanceSegmented::propose(std::span<const double>) {
    info_ = RoundInfo{};
    info_.phi_len = ub_ - lb_;
    if (halted_) {
        info_.kind = RoundKind::Halted;
        return PriceProfile::single(*halted_);
    }
    if (ub_ - lb_ <= 1.0 / T_) {
        info_.kind = RoundKind::Exploit;
        return exploit_profile();
    }
    delta_ = gap_offset(gap_index(ub_ - lb_));
    std::fill(explorers_.begin(), explorers_.end(), 0);
    const int ncs = count(cs_), ncb = count(cb_);
    if (ncs >= ncb) {
        if (count(kb_) == 0) {
            info_.kind = RoundKind::Test;
            return PriceProfile::single(ub_ - delta_);
        }
        int want = std::min(count(kb_), count(bact_) - ncs);
        if (want <= 0) {
            // every active buyer is already needed at the conservative price
            info_.kind = RoundKind::Exploit;
            return exploit_profile();
        }
        info_.kind = RoundKind::BuyerSearch;
        std::vector<uint8_t> bg(n_, 0);
        for (int j = 0; j < n_ && want > 0; ++j)
            if (kb_[j]) {
                explorers_[j] = bg[j] = 1;
                --want;
            }
        return PriceProfile::segmented(std::vector<uint8_t>(n_, 0), lb_, lb_, bg, lb_, ub_ - delta_);
    }
    if (count(ks_) == 0) {
        info_.kind = RoundKind::Test;
        return PriceProfile::single(lb_ + delta_);
    }
    int want = std::min(count(ks_), count(sact_) - ncb);
    if (want <= 0) {
        info_.kind = RoundKind::Exploit;
        return exploit_profile();
    }
    info_.kind = RoundKind::SellerSearch;
    std::vector<uint8_t> sg(n_, 0);
    for (int i = 0; i < n_ && want > 0; ++i)
        if (ks_[i]) {
            explorers_[i] = sg[i] = 1;
            --want;
        }
    return PriceProfile::segmented(sg, ub_, lb_ + delta_, std::vector<uint8_t>(n_, 0), ub_, ub_);
}

void BalanceSegmented::end_block() {
    for (int j = 0; j < n_; ++j) kb_[j] = bact_[j] && !cb_[j];
    for (int i = 0; i < n_; ++i) ks_[i] = sact_[i] && !cs_[i];
    std::fill(y_.begin(), y_.end(), 0);
}

void BalanceSegmented::supply_demand(const Feedback& fb) {
    const double p = count(cs_) >= count(cb_) ? ub_ - delta_ : lb_ + delta_;
    const int s = fb.seller_count(), b = fb.buyer_count();
    if (s == b) {
        halted_ = p;
        return;
    }
    if (s < b) {
        lb_ = p;
        cs_ = fb.sellers;
        bact_ = fb.buyers;
    } else {
        ub_ = p;
        cb_ = fb.buyers;
        sact_ = fb.sellers;
    }
    end_block();
}

void BalanceSegmented::observe(const Feedback& fb) {
    switch (info_.kind) {
        case RoundKind::Halted:
        case RoundKind::Exploit:
            return;
        case RoundKind::Test:
            supply_demand(fb);
            return;
        case RoundKind::BuyerSearch: {
            bool found = false;
            for (int j = 0; j < n_; ++j) {
                if (!explorers_[j]) continue;
                kb_[j] = 0;
                if (fb.buyers[j] && !cb_[j]) {
                    found = found || !y_[j];
                    y_[j] = 1;
                }
            }
            info_.found_none = !found;
            if (count(kb_) == 0 && count(cs_) >= count(cb_) + count(y_)) {
                ub_ -= delta_;
                for (int j = 0; j < n_; ++j) cb_[j] = cb_[j] || y_[j];
                end_block();
            }
            return;
        }
        case RoundKind::SellerSearch: {
            bool found = false;
            for (int i = 0; i < n_; ++i) {
                if (!explorers_[i]) continue;
                ks_[i] = 0;
                if (fb.sellers[i] && !cs_[i]) {
                    found = found || !y_[i];
                    y_[i] = 1;
                }
            }
            info_.found_none = !found;
            if (count(ks_) == 0 && count(cb_) >= count(cs_) + count(y_)) {
                lb_ += delta_;
                for (int i = 0; i < n_; ++i) cs_[i] = cs_[i] || y_[i];
                end_block();
            }
            return;
        }
    }
}

void BalanceSegmented::check_invariants(const Instance& truth) const {
    if (halted_) return;
    auto fail = [](const char* what) { throw Error(Errc::InvariantViolation, what); };
    for (int i = 0; i < n_; ++i) {
        const double c = truth.costs[i];
        if (c < lb_ && !cs_[i]) fail("seller below LB missing from known sellers");
        if (cs_[i] && c > lb_) fail("known seller has cost above LB");
        if (cs_[i] && !sact_[i]) fail("known seller is not active");
    }
    for (int j = 0; j < n_; ++j) {
        const double v = truth.values[j];
        if (v > ub_ && !cb_[j]) fail("buyer above UB missing from known buyers");
        if (cb_[j] && v < ub_) fail("known buyer has value below UB");
        if (cb_[j] && !bact_[j]) fail("known buyer is not active");
    }
    if (count(cs_) >= count(cb_)) {
        for (int j = 0; j < n_; ++j)
            if (truth.values[j] >= lb_ && !bact_[j]) fail("buyer with value >= LB is not active");
        if (count(bact_) < count(cs_)) fail("fewer active buyers than known sellers");
    } else {
        for (int i = 0; i < n_; ++i)
            if (truth.costs[i] <= ub_ && !sact_[i]) fail("seller with cost <= UB is not active");
        if (count(sact_) < count(cb_)) fail("fewer active sellers than known buyers");
    }
}

FictitiousProfit::FictitiousProfit(int n, uint64_t T)
    : c_lo(n, 0.0), c_hi(n, 1.0), v_lo(n, 0.0), v_hi(n, 1.0), T_(static_cast<double>(T)) {}

namespace {

// indices sorted by key, ties to lowest index
std::vector<int> order_by(const std::vector<double>& key, bool ascending) {
    std::vector<int> idx(key.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return ascending ? key[a] < key[b] : key[a] > key[b];
    });
    return idx;
}

}  // namespace

int FictitiousProfit::k_star() const {
    auto s = order_by(c_lo, true);
    auto b = order_by(v_hi, false);
    int best_k = 1;
    double best = -1e300;
    for (size_t k = 1; k <= s.size(); ++k) {
        const double val = k * (v_hi[b[k - 1]] - c_lo[s[k - 1]]);
        if (val > best) {
            best = val;
            best_k = static_cast<int>(k);
        }
    }
    return best_k;
}

double FictitiousProfit::optimistic_profit() const {
    auto s = order_by(c_lo, true);
    auto b = order_by(v_hi, false);
    double best = 0;
    for (size_t k = 1; k <= s.size(); ++k) best = std::max(best, k * (v_hi[b[k - 1]] - c_lo[s[k - 1]]));
    return best;
}

PriceProfile FictitiousProfit::propose(std::span<const double>) {
    const int k = k_star();
    auto s = order_by(c_lo, true);
    auto b = order_by(v_hi, false);
    int it = -1, jt = -1;
    double pbest = -1, qbest = 2;
    for (int r = 0; r < k; ++r) {
        const int i = s[r];
        const double w = c_hi[i] - c_lo[i];
        const double p = w <= 1.0 / T_ ? c_hi[i] : c_hi[i] - gap_offset(gap_index(w));
        if (p > pbest || (p == pbest && i < it)) {
            pbest = p;
            it = i;
        }
        const int j = b[r];
        const double wb = v_hi[j] - v_lo[j];
        const double q = wb <= 1.0 / T_ ? v_lo[j] : v_lo[j] + gap_offset(gap_index(wb));
        if (q < qbest || (q == qbest && j < jt)) {
            qbest = q;
            jt = j;
        }
    }
    if (pbest <= qbest) {
        last_ = PriceProfile::two(pbest, qbest);
    } else {
        const double ws = c_hi[it] - c_lo[it], wb = v_hi[jt] - v_lo[jt];
        last_ = PriceProfile::single(ws >= wb ? 0.5 * (c_lo[it] + c_hi[it]) : 0.5 * (v_lo[jt] + v_hi[jt]));
    }
    return last_;
}

void FictitiousProfit::observe(const Feedback& fb) {
    for (size_t i = 0; i < c_lo.size(); ++i) {
        const double p = last_.seller_price(static_cast<int>(i));
        if (fb.sellers[i])
            c_hi[i] = std::min(c_hi[i], p);
        else
            c_lo[i] = std::max(c_lo[i], p);
    }
    for (size_t j = 0; j < v_lo.size(); ++j) {
        const double q = last_.buyer_price(static_cast<int>(j));
        if (fb.buyers[j])
            v_lo[j] = std::max(v_lo[j], q);
        else
            v_hi[j] = std::min(v_hi[j], q);
    }
}

}  // namespace tsm
