#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsm {

enum class Errc {
    Ok = 0,
    BudgetBalanceViolation,
    PriceOutOfRange,
    InstanceTooLarge,
    InconsistentFeedback,
    NonPositiveLength,
    InvariantViolation,
    NonSinglePriceProfile,
    EmptyBody,
    DegenerateDirection,
    CutMissesEllipsoid,
    UnsupportedCombination,
    InvalidInput,
};

const char* errc_name(Errc e);

class Error : public std::runtime_error {
public:
    Error(Errc c, const std::string& what) : std::runtime_error(what), code_(c) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

struct Instance {
    std::vector<double> costs;   // sellers
    std::vector<double> values;  // buyers

    int m() const { return static_cast<int>(costs.size()); }
    int n() const { return static_cast<int>(values.size()); }
    void validate() const;
};

// Dummy buyers have value 0, dummy sellers cost 1; the result has m == n.
Instance pad_balanced(const Instance& inst);

enum class ProfileKind { Single, Two, Segmented };

struct PriceProfile {
    ProfileKind kind = ProfileKind::Single;
    double p = 0;  // seller price (Single: the price)
    double q = 0;  // buyer price
    // Segmented: group bit per trader (0 -> p/q, 1 -> p2/q2)
    std::vector<uint8_t> seller_group, buyer_group;
    double p2 = 0, q2 = 0;

    static PriceProfile single(double price);
    static PriceProfile two(double p, double q);
    static PriceProfile segmented(std::vector<uint8_t> sg, double p1, double p2,
                                  std::vector<uint8_t> bg, double q1, double q2);

    double seller_price(int i) const;
    double buyer_price(int j) const;
    double max_seller_price(int m) const;
    double min_buyer_price(int n) const;

    // Throws PriceOutOfRange / BudgetBalanceViolation / InvalidInput.
    void validate(int m, int n) const;
};

struct Feedback {
    std::vector<uint8_t> sellers, buyers;

    int seller_count() const;
    int buyer_count() const;
    bool operator==(const Feedback&) const = default;
};

enum class MatchingKind { AdversarialMin, UniformRandom };

struct MatchingRule {
    MatchingKind kind = MatchingKind::AdversarialMin;
    uint64_t seed = 0;
};

struct RoundOutcome {
    Feedback feedback;
    std::vector<int> trading_sellers, trading_buyers;
    double gft = 0;
    double profit = 0;
};

Feedback respond(const Instance& inst, const PriceProfile& prof);
RoundOutcome apply_mechanism(const Instance& inst, const PriceProfile& prof,
                             MatchingRule rule = {});

int efficient_trade_size(const Instance& inst);
double gft_star(const Instance& inst);

struct ProfitStar {
    double value = 0;
    int k = 0;
};
ProfitStar profit_star(const Instance& inst);

enum class Objective { Gft, Profit };

double round_regret(Objective obj, const Instance& inst, const RoundOutcome& out);

// Exhaustive search over all matchings; needs m*n <= 64.
double brute_force_gft(const Instance& inst);

// Ascending costs and descending values, the order statistics used by the benchmarks.
std::vector<double> sorted_costs(const Instance& inst);
std::vector<double> sorted_values(const Instance& inst);

}  // namespace tsm
