#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tsm/learner.hpp"

namespace tsm {

// One seller, many buyers, uniform prices, GFT objective.
class OneToManySearch : public Learner {
public:
    enum class Phase { ExploreI, ExploreII, Exploit };

    explicit OneToManySearch(uint64_t T);

    PriceProfile propose(std::span<const double>) override;
    void observe(const Feedback& fb) override;
    bool settled() const override { return phase_ == Phase::Exploit; }
    std::string name() const override { return "one_to_many"; }

    double lb() const { return lb_; }
    double ub() const { return ub_; }
    Phase phase() const { return phase_; }

private:
    double inv_T_;
    double lb_ = 0, ub_ = 1, price_ = 0.5;
    Phase phase_ = Phase::ExploreI;
};

// Balance two-segmented pricing. Needs as many sellers as buyers.
class BalanceSegmented : public Learner {
public:
    enum class RoundKind { BuyerSearch, SellerSearch, Test, Exploit, Halted };

    struct RoundInfo {
        RoundKind kind = RoundKind::Exploit;
        bool found_none = false;  // search round in which nobody accepted the exploration price
        double phi_len = 0;
    };

    BalanceSegmented(int n, uint64_t T);

    PriceProfile propose(std::span<const double>) override;
    void observe(const Feedback& fb) override;
    bool settled() const override { return halted_.has_value(); }
    std::string name() const override { return "segmented"; }

    // Throws InvariantViolation when the tracked sets disagree with the true types.
    void check_invariants(const Instance& truth) const;

    double lb() const { return lb_; }
    double ub() const { return ub_; }
    std::optional<double> halted_price() const { return halted_; }
    const RoundInfo& last_round() const { return info_; }
    int known_sellers() const { return count(cs_); }
    int known_buyers() const { return count(cb_); }

private:
    using Set = std::vector<uint8_t>;
    static int count(const Set& s);
    PriceProfile exploit_profile() const;
    void end_block();
    void supply_demand(const Feedback& fb);

    int n_;
    double T_;
    double lb_ = 0, ub_ = 1;
    Set cs_, cb_, sact_, bact_, ks_, kb_, y_;
    std::optional<double> halted_;

    // round in flight
    RoundInfo info_;
    double delta_ = 0;
    Set explorers_;
};

// Per-trader intervals and KL-style prices on the optimistic fictitious market.
class FictitiousProfit : public Learner {
public:
    FictitiousProfit(int n, uint64_t T);

    PriceProfile propose(std::span<const double>) override;
    void observe(const Feedback& fb) override;
    std::string name() const override { return "fictitious_profit"; }

    // max_k k * (k-th largest value upper bound - k-th smallest cost lower bound)
    double optimistic_profit() const;
    int k_star() const;

    std::vector<double> c_lo, c_hi, v_lo, v_hi;

private:
    double T_;
    PriceProfile last_;
};

}  // namespace tsm
