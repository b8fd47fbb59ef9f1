#pragma once

#include <cstdint>

#include "tsm/learner.hpp"

namespace tsm {

// max(1, floor(1 + log2 log2 (1/len))). Throws NonPositiveLength.
int gap_index(double len);
// 2^(-2^k)
double gap_offset(int k);
double loglog2(double T);

struct IntervalPair {
    double s_lb = 0, s_ub = 1, b_lb = 0, b_ub = 1;
};

// Binary search on a uniform price until the first trade, then post it forever.
// On markets with several traders a side counts as accepting when any trader does.
class OptimisticBinarySearch : public Learner {
public:
    enum class Phase { Explore, Exploit };

    PriceProfile propose(std::span<const double>) override;
    void observe(const Feedback& fb) override;
    bool settled() const override { return phase_ == Phase::Exploit; }
    std::string name() const override { return "obs"; }

    const IntervalPair& intervals() const { return iv_; }
    Phase phase() const { return phase_; }
    double price() const { return price_; }

private:
    IntervalPair iv_;
    Phase phase_ = Phase::Explore;
    double price_ = 0.5;
};

// Two-price learner for profit. On markets with several traders a side counts
// as accepting only when all of its traders accept.
class OptimisticConservativeSearch : public Learner {
public:
    enum class Phase { ExploreI, ExploreII, Exploit };

    explicit OptimisticConservativeSearch(uint64_t T);

    PriceProfile propose(std::span<const double>) override;
    void observe(const Feedback& fb) override;
    bool settled() const override { return phase_ == Phase::Exploit; }
    std::string name() const override { return "otcs"; }

    const IntervalPair& intervals() const { return iv_; }
    Phase phase() const { return phase_; }
    int seller_index() const { return ms_; }
    int buyer_index() const { return mb_; }

private:
    IntervalPair iv_;
    Phase phase_ = Phase::ExploreI;
    double inv_T_;
    double p_ = 0.5, q_ = 0.5;
    int ms_ = 0, mb_ = 0;
};

}  // namespace tsm
