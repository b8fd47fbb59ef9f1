#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "tsm/geometry.hpp"
#include "tsm/learner.hpp"

namespace tsm {

struct ContextualInstance {
    int d = 0;
    std::vector<Vec> sellers, buyers;  // feature vectors in the unit ball

    int m() const { return static_cast<int>(sellers.size()); }
    int n() const { return static_cast<int>(buyers.size()); }
    // Costs and values for one context. Not range checked: types may leave [0,1].
    Instance at(const Vec& x) const;
    void validate() const;
};

// Uniform in the unit ball, folded into the nonnegative orthant.
Vec random_orthant_point(int d, std::mt19937_64& rng);
ContextualInstance random_contextual_instance(int d, int m, int n, std::mt19937_64& rng);

struct MonteCarloConfig {
    size_t samples = 10000;
    uint64_t seed = 1;
};

// Largest integer l with w <= 2^-l; capped at 60 for vanishing widths.
int scale_index(double w);
// Largest integer l >= 0 with w <= 2^(-2^l); 0 when no such l exists.
int double_scale_index(double w);

// Steiner GFT search for contextual bilateral trade, one shared body.
class SteinerGft : public Learner {
public:
    SteinerGft(int d, MonteCarloConfig mc = {});

    PriceProfile propose(std::span<const double> x) override;
    void observe(const Feedback& fb) override;
    std::string name() const override { return "steiner_gft"; }

    const ConvexBody& body() const { return body_; }
    double last_width() const { return width_; }
    int last_scale() const { return ell_; }
    double last_price() const { return y_; }

private:
    int d_;
    MonteCarloConfig mc_;
    ConvexBody body_;
    std::map<int, std::unique_ptr<PaddedCloud>> clouds_;  // by scale, for the current body version
    uint64_t cloud_version_ = ~0ull;
    Vec x_;
    double width_ = 0, y_ = 0;
    int ell_ = 0;
};

struct RobustPrices {
    PriceProfile profile;
    std::vector<int> sellers, buyers;  // matched under pessimistic types
};

// Matching on pessimistic types (sellers at their upper bound, buyers at their lower bound).
RobustPrices robust_segmented_prices(const std::vector<double>& c_hi, const std::vector<double>& v_lo);

// Ellipsoid search: explore one wide trader at a time, otherwise post robust prices.
class EllipsoidSearch : public Learner {
public:
    EllipsoidSearch(int d, int m, int n, uint64_t T);

    PriceProfile propose(std::span<const double> x) override;
    void observe(const Feedback& fb) override;
    std::string name() const override { return "ellipsoid"; }

    bool last_exploit() const { return target_ < 0; }
    const std::vector<int>& explorations() const { return explored_; }  // sellers then buyers
    const Ellipsoid& seller(int i) const { return es_[i]; }
    const Ellipsoid& buyer(int j) const { return eb_[j]; }

private:
    int d_, m_, n_;
    double delta_;
    std::vector<Ellipsoid> es_, eb_;
    std::vector<int> explored_;
    Vec x_;
    int target_ = -1;  // index into sellers then buyers, -1 in exploitation rounds
    double price_ = 0;
};

// Steiner profit search: KL prices on padded bodies with a bisecting fallback.
class SteinerProfit : public Learner {
public:
    struct RoundInfo {
        bool fallback = false;
        int k_star = 0;
        int i_t = -1, j_t = -1;
        double width_i = 0, width_j = 0;
    };

    SteinerProfit(int d, int n, uint64_t T, MonteCarloConfig mc = {});

    PriceProfile propose(std::span<const double> x) override;
    void observe(const Feedback& fb) override;
    std::string name() const override { return "steiner_profit"; }

    const RoundInfo& last_round() const { return info_; }
    const ConvexBody& seller(int i) const { return bs_[i]; }
    const ConvexBody& buyer(int j) const { return bb_[j]; }
    // Bounds computed during the last proposal.
    std::vector<double> c_lo, c_hi, v_lo, v_hi;

private:
    // f of the padded body's mass on {<theta,x> >= y}
    double cut_at(bool seller, int idx, bool profit_pad, int ell, double f);

    int d_, n_;
    double T_;
    MonteCarloConfig mc_;
    std::vector<ConvexBody> bs_, bb_;
    std::map<std::tuple<bool, int, bool, int>, std::pair<uint64_t, std::unique_ptr<PaddedCloud>>> clouds_;
    Vec x_;
    PriceProfile last_;
    RoundInfo info_;
};

}  // namespace tsm
