#include "tsm/market.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

namespace tsm {

const char* errc_name(Errc e) {
    switch (e) {
        case Errc::Ok: return "Ok";
        case Errc::BudgetBalanceViolation: return "BudgetBalanceViolation";
        case Errc::PriceOutOfRange: return "PriceOutOfRange";
        case Errc::InstanceTooLarge: return "InstanceTooLarge";
        case Errc::InconsistentFeedback: return "InconsistentFeedback";
        case Errc::NonPositiveLength: return "NonPositiveLength";
        case Errc::InvariantViolation: return "InvariantViolation";
        case Errc::NonSinglePriceProfile: return "NonSinglePriceProfile";
        case Errc::EmptyBody: return "EmptyBody";
        case Errc::DegenerateDirection: return "DegenerateDirection";
        case Errc::CutMissesEllipsoid: return "CutMissesEllipsoid";
        case Errc::UnsupportedCombination: return "UnsupportedCombination";
        case Errc::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

void Instance::validate() const {
    if (costs.empty() || values.empty())
        throw Error(Errc::InvalidInput, "instance needs at least one seller and one buyer");
    for (double c : costs)
        if (!(c >= 0 && c <= 1)) throw Error(Errc::InvalidInput, "seller cost outside [0,1]");
    for (double v : values)
        if (!(v >= 0 && v <= 1)) throw Error(Errc::InvalidInput, "buyer value outside [0,1]");
}

Instance pad_balanced(const Instance& inst) {
    Instance out = inst;
    while (out.m() < out.n()) out.costs.push_back(1.0);
    while (out.n() < out.m()) out.values.push_back(0.0);
    return out;
}

PriceProfile PriceProfile::single(double price) {
    PriceProfile r;
    r.kind = ProfileKind::Single;
    r.p = r.q = price;
    return r;
}

PriceProfile PriceProfile::two(double p, double q) {
    PriceProfile r;
    r.kind = ProfileKind::Two;
    r.p = p;
    r.q = q;
    return r;
}

PriceProfile PriceProfile::segmented(std::vector<uint8_t> sg, double p1, double p2,
                                     std::vector<uint8_t> bg, double q1, double q2) {
    PriceProfile r;
    r.kind = ProfileKind::Segmented;
    r.seller_group = std::move(sg);
    r.buyer_group = std::move(bg);
    r.p = p1;
    r.p2 = p2;
    r.q = q1;
    r.q2 = q2;
    return r;
}

double PriceProfile::seller_price(int i) const {
    if (kind != ProfileKind::Segmented) return p;
    return seller_group[i] ? p2 : p;
}

double PriceProfile::buyer_price(int j) const {
    if (kind != ProfileKind::Segmented) return q;
    return buyer_group[j] ? q2 : q;
}

double PriceProfile::max_seller_price(int m) const {
    double r = -1;
    for (int i = 0; i < m; ++i) r = std::max(r, seller_price(i));
    return r;
}

double PriceProfile::min_buyer_price(int n) const {
    double r = 2;
    for (int j = 0; j < n; ++j) r = std::min(r, buyer_price(j));
    return r;
}

void PriceProfile::validate(int m, int n) const {
    if (kind == ProfileKind::Segmented &&
        (static_cast<int>(seller_group.size()) != m || static_cast<int>(buyer_group.size()) != n))
        throw Error(Errc::InvalidInput, "segment map does not cover every trader");
    auto in01 = [](double x) { return x >= 0 && x <= 1; };
    for (int i = 0; i < m; ++i)
        if (!in01(seller_price(i))) throw Error(Errc::PriceOutOfRange, "seller price outside [0,1]");
    for (int j = 0; j < n; ++j)
        if (!in01(buyer_price(j))) throw Error(Errc::PriceOutOfRange, "buyer price outside [0,1]");
    if (max_seller_price(m) > min_buyer_price(n))
        throw Error(Errc::BudgetBalanceViolation, "a seller price exceeds a buyer price");
}

int Feedback::seller_count() const { return static_cast<int>(std::count(sellers.begin(), sellers.end(), 1)); }
int Feedback::buyer_count() const { return static_cast<int>(std::count(buyers.begin(), buyers.end(), 1)); }

Feedback respond(const Instance& inst, const PriceProfile& prof) {
    Feedback fb;
    fb.sellers.resize(inst.m());
    fb.buyers.resize(inst.n());
    for (int i = 0; i < inst.m(); ++i) fb.sellers[i] = prof.seller_price(i) >= inst.costs[i];
    for (int j = 0; j < inst.n(); ++j) fb.buyers[j] = prof.buyer_price(j) <= inst.values[j];
    return fb;
}

RoundOutcome apply_mechanism(const Instance& inst, const PriceProfile& prof, MatchingRule rule) {
    prof.validate(inst.m(), inst.n());
    RoundOutcome out;
    out.feedback = respond(inst, prof);
    std::vector<int> S, B;
    for (int i = 0; i < inst.m(); ++i)
        if (out.feedback.sellers[i]) S.push_back(i);
    for (int j = 0; j < inst.n(); ++j)
        if (out.feedback.buyers[j]) B.push_back(j);
    const size_t k = std::min(S.size(), B.size());
    if (rule.kind == MatchingKind::AdversarialMin) {
        // highest costs and lowest values; stable sorts keep lowest index first on ties
        std::stable_sort(S.begin(), S.end(), [&](int a, int b) { return inst.costs[a] > inst.costs[b]; });
        std::stable_sort(B.begin(), B.end(), [&](int a, int b) { return inst.values[a] < inst.values[b]; });
    } else {
        std::mt19937_64 rng(rule.seed);
        std::shuffle(S.begin(), S.end(), rng);
        std::shuffle(B.begin(), B.end(), rng);
    }
    S.resize(k);
    B.resize(k);
    std::sort(S.begin(), S.end());
    std::sort(B.begin(), B.end());
    for (int i : S) {
        out.gft -= inst.costs[i];
        out.profit -= prof.seller_price(i);
    }
    for (int j : B) {
        out.gft += inst.values[j];
        out.profit += prof.buyer_price(j);
    }
    out.trading_sellers = std::move(S);
    out.trading_buyers = std::move(B);
    return out;
}

std::vector<double> sorted_costs(const Instance& inst) {
    auto c = inst.costs;
    std::sort(c.begin(), c.end());
    return c;
}

std::vector<double> sorted_values(const Instance& inst) {
    auto v = inst.values;
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

int efficient_trade_size(const Instance& inst) {
    auto c = sorted_costs(inst);
    auto v = sorted_values(inst);
    int k = 0;
    const int lim = static_cast<int>(std::min(c.size(), v.size()));
    while (k < lim && v[k] >= c[k]) ++k;
    return k;
}

double gft_star(const Instance& inst) {
    auto c = sorted_costs(inst);
    auto v = sorted_values(inst);
    const int k = efficient_trade_size(inst);
    double s = 0;
    for (int l = 0; l < k; ++l) s += v[l] - c[l];
    return s;
}

ProfitStar profit_star(const Instance& inst) {
    auto c = sorted_costs(inst);
    auto v = sorted_values(inst);
    ProfitStar best{-1e300, 0};
    const int lim = static_cast<int>(std::min(c.size(), v.size()));
    for (int k = 1; k <= lim; ++k) {
        double val = k * (v[k - 1] - c[k - 1]);
        if (val > best.value) best = {val, k};
    }
    best.value = std::max(0.0, best.value);
    return best;
}

double round_regret(Objective obj, const Instance& inst, const RoundOutcome& out) {
    if (obj == Objective::Gft) return gft_star(inst) - out.gft;
    return profit_star(inst).value - out.profit;
}

double brute_force_gft(const Instance& inst) {
    const int m = inst.m(), n = inst.n();
    if (m * n > 64) throw Error(Errc::InstanceTooLarge, "brute force needs m*n <= 64");
    std::vector<char> used(n, 0);
    std::function<double(int)> go = [&](int i) -> double {
        if (i == m) return 0.0;
        double best = go(i + 1);  // seller i unmatched
        for (int j = 0; j < n; ++j) {
            if (used[j]) continue;
            used[j] = 1;
            best = std::max(best, inst.values[j] - inst.costs[i] + go(i + 1));
            used[j] = 0;
        }
        return best;
    };
    return go(0);
}

}  // namespace tsm
