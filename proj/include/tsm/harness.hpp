#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsm/adversaries.hpp"
#include "tsm/contextual.hpp"
#include "tsm/learner.hpp"

namespace tsm {

enum class EnvKind { Fixed, Random, Adversary1, Adversary2, Contextual };

struct EnvSpec {
    EnvKind kind = EnvKind::Random;
    Instance instance;            // Fixed
    int m = 1, n = 1;             // Random and generated contextual
    bool positive_gft = true;     // Random: redraw until GFT* > 0
    int d = 0;                    // Contextual
    std::optional<ContextualInstance> features;  // Contextual, from a file
    std::vector<Vec> contexts;    // explicit sequence, cycled if shorter than T
    uint64_t context_seed = 0;    // random contexts when `contexts` is empty
};

// "fixed:<file>", "<file>.json", "random:<m>x<n>", "adversary1", "adversary2",
// "contextual:d=<d>,m=<m>,n=<n>".
EnvSpec parse_env(const std::string& spec);
EnvSpec env_from_json(const nlohmann::json& j);

struct ExperimentConfig {
    std::string algorithm = "obs";
    EnvSpec env;
    std::string env_label = "random:1x1";
    Objective objective = Objective::Gft;
    uint64_t T = 1000;
    MatchingKind matching = MatchingKind::AdversarialMin;
    uint64_t seed = 1;
    bool full_log = false;
    MonteCarloConfig mc;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

struct RoundRecord {
    uint64_t t = 0;
    double price_s = 0, price_b = 0;  // highest seller price, lowest buyer price
    int acc_sellers = 0, acc_buyers = 0;
    double regret = 0, cum_regret = 0;
};

// Per-round lemma checks; each counter should stay at zero.
struct PropertyCounters {
    uint64_t checked = 0;
    uint64_t steiner_cut_over_width = 0;    // cut rounds with regret above the width
    uint64_t exploit_over_bound = 0;        // ellipsoid exploitation regret above 2n/T
    uint64_t exploit_rounds = 0;
    uint64_t fallback_over_bound = 0;       // profit fallback rounds above 2k*(w_i + w_j)
    uint64_t fallback_rounds = 0;
    uint64_t failed_search_over_bound = 0;  // segmented search rounds with nothing found
    uint64_t below_quarter = 0;             // adversary 2 rounds with regret under 1/4
    uint64_t optimistic_below_truth = 0;    // fictitious upper bound under the true optimum
    std::vector<int> explorations;          // ellipsoid search, per trader
    double exploration_limit = 0;
};

struct RegretCurve {
    ExperimentConfig config;
    Instance instance;  // original instance (fixed/random) or finalized adversary instance
    std::optional<ContextualInstance> features;
    std::vector<RoundRecord> records;
    std::vector<nlohmann::json> segment_log;  // with full_log
    Transcript transcript;                    // adversary runs
    bool audited = false;
    bool audit_ok = true;
    double total_regret = 0;
    double max_regret = 0;
    double min_regret = 0;
    uint64_t settle_round = 0;  // first round from which the learner was settled, 0 if never
    uint64_t invariant_violations = 0;
    PropertyCounters props;
};

std::unique_ptr<Learner> make_learner(const std::string& name, int m, int n, int d, uint64_t T,
                                      const MonteCarloConfig& mc);

// Throws UnsupportedCombination, InvariantViolation and whatever the learner throws.
RegretCurve run_experiment(const ExperimentConfig& cfg);

void write_csv(const RegretCurve& c, const std::string& path);
nlohmann::json summary_json(const RegretCurve& c);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const PriceProfile& p);
PriceProfile profile_from_json(const nlohmann::json& j);
nlohmann::json transcript_to_json(const Instance& inst, const Transcript& tr);
// true iff the stored instance reproduces every stored feedback vector
bool audit_transcript_json(const nlohmann::json& j);

struct SweepRow {
    ExperimentConfig config;
    double total_regret = 0;
    uint64_t settle_round = 0;
    bool audit_ok = true;
    std::string error;
};

// Grid: {"algorithm", "env", "objective", "matching", "horizons": [...], "seeds": [...]}
// or {"runs": [config, ...]}. Rows come back in grid order.
std::vector<ExperimentConfig> expand_grid(const nlohmann::json& grid);
std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& cfgs, int threads = 0);
std::string sweep_table_csv(const std::vector<SweepRow>& rows);

}  // namespace tsm
