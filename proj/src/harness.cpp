#include "tsm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "tsm/bilateral.hpp"
#include "tsm/two_sided.hpp"

namespace tsm {

using nlohmann::json;

namespace {

uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::InvalidInput, "cannot open " + path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, path + ": " + e.what());
    }
}

std::vector<Vec> vectors_from_json(const json& a, int d) {
    std::vector<Vec> out;
    for (const auto& row : a) {
        auto v = row.get<std::vector<double>>();
        if (static_cast<int>(v.size()) != d) throw Error(Errc::InvalidInput, "vector has wrong dimension");
        out.push_back(Eigen::Map<Vec>(v.data(), d));
    }
    return out;
}

json vectors_to_json(const std::vector<Vec>& vs) {
    json a = json::array();
    for (const auto& v : vs) a.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return a;
}

EnvSpec env_from_instance_json(const json& j) {
    EnvSpec e;
    try {
        if (j.contains("d")) {
            ContextualInstance ci;
            ci.d = j.at("d").get<int>();
            ci.sellers = vectors_from_json(j.at("seller_vectors"), ci.d);
            ci.buyers = vectors_from_json(j.at("buyer_vectors"), ci.d);
            ci.validate();
            e.kind = EnvKind::Contextual;
            e.d = ci.d;
            e.m = ci.m();
            e.n = ci.n();
            e.features = std::move(ci);
            if (j.contains("contexts")) {
                const json& c = j["contexts"];
                if (c.is_array())
                    e.contexts = vectors_from_json(c, e.d);
                else
                    e.context_seed = c.value("seed", uint64_t{0});
            }
        } else {
            e.kind = EnvKind::Fixed;
            e.instance = instance_from_json(j);
            e.m = e.instance.m();
            e.n = e.instance.n();
        }
    } catch (const json::exception& ex) {
        throw Error(Errc::InvalidInput, std::string("bad instance: ") + ex.what());
    }
    return e;
}

bool same_profile(const PriceProfile& a, const PriceProfile& b) {
    return a.kind == b.kind && a.p == b.p && a.q == b.q && a.p2 == b.p2 && a.q2 == b.q2 &&
           a.seller_group == b.seller_group && a.buyer_group == b.buyer_group;
}

const char* objective_name(Objective o) { return o == Objective::Gft ? "gft" : "profit"; }
const char* matching_name(MatchingKind k) { return k == MatchingKind::AdversarialMin ? "adversarial" : "random"; }

Objective parse_objective(const std::string& s) {
    if (s == "gft") return Objective::Gft;
    if (s == "profit") return Objective::Profit;
    throw Error(Errc::InvalidInput, "objective must be gft or profit");
}

MatchingKind parse_matching(const std::string& s) {
    if (s == "adversarial") return MatchingKind::AdversarialMin;
    if (s == "random") return MatchingKind::UniformRandom;
    throw Error(Errc::InvalidInput, "matching must be adversarial or random");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.empty()) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

json segment_map(uint64_t t, const PriceProfile& p, int m, int n) {
    std::vector<double> s(m), b(n);
    for (int i = 0; i < m; ++i) s[i] = p.seller_price(i);
    for (int j = 0; j < n; ++j) b[j] = p.buyer_price(j);
    return {{"t", t}, {"seller_prices", s}, {"buyer_prices", b}};
}

// Turns blocks of identical rounds into logged records.
class CurveWriter {
public:
    CurveWriter(RegretCurve& c, uint64_t T, int m, int n) : c_(c), T_(T), m_(m), n_(n), dense_(T <= 100000) {}

    void add(uint64_t t0, uint64_t count, const PriceProfile& prof, const Feedback& fb, double regret) {
        RoundRecord r;
        r.price_s = prof.max_seller_price(m_);
        r.price_b = prof.min_buyer_price(n_);
        r.acc_sellers = fb.seller_count();
        r.acc_buyers = fb.buyer_count();
        r.regret = regret;
        const uint64_t end = t0 + count;  // exclusive
        auto emit = [&](uint64_t t) {
            r.t = t;
            r.cum_regret = cum_ + static_cast<double>(t - t0 + 1) * regret;
            c_.records.push_back(r);
            if (c_.config.full_log) c_.segment_log.push_back(segment_map(t, prof, m_, n_));
        };
        if (dense_) {
            for (uint64_t t = t0; t < end; ++t) emit(t);
        } else {
            while (next_ < end) {
                if (next_ >= t0) emit(next_);
                next_ = std::max(next_ + 1, static_cast<uint64_t>(std::ceil(static_cast<double>(next_) * 1.1)));
            }
            if (T_ >= t0 && T_ < end && (c_.records.empty() || c_.records.back().t != T_)) emit(T_);
        }
        cum_ += static_cast<double>(count) * regret;
        c_.max_regret = std::max(c_.max_regret, regret);
        c_.min_regret = std::min(c_.min_regret, regret);
    }

    double total() const { return cum_; }

private:
    RegretCurve& c_;
    uint64_t T_;
    int m_, n_;
    bool dense_;
    uint64_t next_ = 1;
    double cum_ = 0;
};

[[noreturn]] void violation(RegretCurve& out, uint64_t t, const std::string& what) {
    ++out.invariant_violations;
    throw Error(Errc::InvariantViolation, "round " + std::to_string(t) + ": " + what);
}

bool needs_square(const std::string& alg) {
    return alg == "segmented" || alg == "fictitious_profit" || alg == "steiner_profit";
}

// Checks that only make sense before the learner sees the feedback.
void check_before(Learner& L, const Instance& truth, double r, uint64_t T, PropertyCounters& pc) {
    ++pc.checked;
    if (auto* s = dynamic_cast<SteinerGft*>(&L)) {
        if (r > s->last_width() + 1e-9) ++pc.steiner_cut_over_width;
    } else if (auto* e = dynamic_cast<EllipsoidSearch*>(&L)) {
        if (e->last_exploit()) {
            ++pc.exploit_rounds;
            if (r > 2.0 * std::max(truth.m(), truth.n()) / static_cast<double>(T) + 1e-12) ++pc.exploit_over_bound;
        }
    } else if (auto* p = dynamic_cast<SteinerProfit*>(&L)) {
        const auto& info = p->last_round();
        if (info.fallback) {
            ++pc.fallback_rounds;
            if (profit_star(truth).value > 2.0 * info.k_star * (info.width_i + info.width_j) + 1e-9)
                ++pc.fallback_over_bound;
        }
    } else if (auto* f = dynamic_cast<FictitiousProfit*>(&L)) {
        if (f->optimistic_profit() < profit_star(truth).value - 1e-9) ++pc.optimistic_below_truth;
    }
}

bool in(double x, double lo, double hi) { return x >= lo - 1e-12 && x <= hi + 1e-12; }

// Ground-truth containment after the learner has updated.
void check_after(Learner& L, const Instance& truth, const ContextualInstance* ci, RegretCurve& out, uint64_t t) {
    if (auto* o = dynamic_cast<OptimisticBinarySearch*>(&L)) {
        if (truth.m() == 1 && truth.n() == 1) {
            const auto& iv = o->intervals();
            if (!in(truth.costs[0], iv.s_lb, iv.s_ub) || !in(truth.values[0], iv.b_lb, iv.b_ub))
                violation(out, t, "types left the uncertainty intervals");
        }
    } else if (auto* c = dynamic_cast<OptimisticConservativeSearch*>(&L)) {
        if (truth.m() == 1 && truth.n() == 1) {
            const auto& iv = c->intervals();
            if (!in(truth.costs[0], iv.s_lb, iv.s_ub) || !in(truth.values[0], iv.b_lb, iv.b_ub))
                violation(out, t, "types left the uncertainty intervals");
        }
    } else if (auto* s = dynamic_cast<BalanceSegmented*>(&L)) {
        try {
            s->check_invariants(truth);
        } catch (const Error& e) {
            violation(out, t, e.what());
        }
    } else if (auto* f = dynamic_cast<FictitiousProfit*>(&L)) {
        for (int i = 0; i < truth.m(); ++i)
            if (!in(truth.costs[i], f->c_lo[i], f->c_hi[i])) violation(out, t, "seller cost left its interval");
        for (int j = 0; j < truth.n(); ++j)
            if (!in(truth.values[j], f->v_lo[j], f->v_hi[j])) violation(out, t, "buyer value left its interval");
    } else if (auto* g = dynamic_cast<SteinerGft*>(&L)) {
        if (!g->body().contains(ci->sellers[0], 1e-8) || !g->body().contains(ci->buyers[0], 1e-8))
            violation(out, t, "feature vector cut out of the body");
    } else if (auto* e = dynamic_cast<EllipsoidSearch*>(&L)) {
        for (int i = 0; i < ci->m(); ++i)
            if (!e->seller(i).contains(ci->sellers[i], 1e-6)) violation(out, t, "seller vector left its ellipsoid");
        for (int j = 0; j < ci->n(); ++j)
            if (!e->buyer(j).contains(ci->buyers[j], 1e-6)) violation(out, t, "buyer vector left its ellipsoid");
    } else if (auto* p = dynamic_cast<SteinerProfit*>(&L)) {
        for (int i = 0; i < ci->m(); ++i)
            if (!p->seller(i).contains(ci->sellers[i], 1e-8)) violation(out, t, "seller vector cut out of its body");
        for (int j = 0; j < ci->n(); ++j)
            if (!p->buyer(j).contains(ci->buyers[j], 1e-8)) violation(out, t, "buyer vector cut out of its body");
    }
}

}  // namespace

Instance instance_from_json(const json& j) {
    Instance inst;
    try {
        inst.costs = j.at("seller_costs").get<std::vector<double>>();
        inst.values = j.at("buyer_values").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, std::string("bad instance: ") + e.what());
    }
    inst.validate();
    return inst;
}

json instance_to_json(const Instance& inst) { return {{"seller_costs", inst.costs}, {"buyer_values", inst.values}}; }

json profile_to_json(const PriceProfile& p) {
    switch (p.kind) {
        case ProfileKind::Single:
            return {{"kind", "single"}, {"price", p.p}};
        case ProfileKind::Two:
            return {{"kind", "two"}, {"p", p.p}, {"q", p.q}};
        case ProfileKind::Segmented:
            break;
    }
    return {{"kind", "segmented"}, {"seller_group", p.seller_group}, {"p1", p.p}, {"p2", p.p2},
            {"buyer_group", p.buyer_group}, {"q1", p.q}, {"q2", p.q2}};
}

PriceProfile profile_from_json(const json& j) {
    try {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "single") return PriceProfile::single(j.at("price").get<double>());
        if (k == "two") return PriceProfile::two(j.at("p").get<double>(), j.at("q").get<double>());
        if (k == "segmented")
            return PriceProfile::segmented(j.at("seller_group").get<std::vector<uint8_t>>(), j.at("p1").get<double>(),
                                           j.at("p2").get<double>(), j.at("buyer_group").get<std::vector<uint8_t>>(),
                                           j.at("q1").get<double>(), j.at("q2").get<double>());
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, std::string("bad profile: ") + e.what());
    }
    throw Error(Errc::InvalidInput, "unknown profile kind");
}

json transcript_to_json(const Instance& inst, const Transcript& tr) {
    json entries = json::array();
    for (const auto& e : tr)
        entries.push_back({{"profile", profile_to_json(e.profile)},
                           {"feedback", {{"sellers", e.feedback.sellers}, {"buyers", e.feedback.buyers}}},
                           {"repeat", e.repeat}});
    return {{"instance", instance_to_json(inst)}, {"entries", entries}};
}

bool audit_transcript_json(const json& j) {
    const Instance inst = instance_from_json(j.at("instance"));
    Transcript tr;
    try {
        for (const auto& e : j.at("entries")) {
            TranscriptEntry te;
            te.profile = profile_from_json(e.at("profile"));
            te.feedback.sellers = e.at("feedback").at("sellers").get<std::vector<uint8_t>>();
            te.feedback.buyers = e.at("feedback").at("buyers").get<std::vector<uint8_t>>();
            te.repeat = e.value("repeat", uint64_t{1});
            tr.push_back(std::move(te));
        }
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, std::string("bad transcript: ") + e.what());
    }
    return audit_consistency(inst, tr);
}

EnvSpec parse_env(const std::string& spec) {
    EnvSpec e;
    if (spec == "adversary1") {
        e.kind = EnvKind::Adversary1;
        e.m = 1;
        e.n = 2;
        return e;
    }
    if (spec == "adversary2") {
        e.kind = EnvKind::Adversary2;
        e.m = e.n = 3;
        return e;
    }
    if (spec.rfind("random:", 0) == 0) {
        std::string rest = spec.substr(7);
        if (auto pos = rest.find(":any"); pos != std::string::npos) {
            e.positive_gft = false;
            rest.erase(pos);
        }
        if (std::sscanf(rest.c_str(), "%dx%d", &e.m, &e.n) != 2 || e.m < 1 || e.n < 1)
            throw Error(Errc::InvalidInput, "random env needs <m>x<n>: " + spec);
        e.kind = EnvKind::Random;
        return e;
    }
    if (spec.rfind("contextual:", 0) == 0) {
        e.kind = EnvKind::Contextual;
        std::stringstream ss(spec.substr(11));
        std::string kv;
        while (std::getline(ss, kv, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw Error(Errc::InvalidInput, "bad contextual field: " + kv);
            const std::string k = kv.substr(0, eq);
            const int v = std::atoi(kv.c_str() + eq + 1);
            if (k == "d")
                e.d = v;
            else if (k == "m")
                e.m = v;
            else if (k == "n")
                e.n = v;
            else
                throw Error(Errc::InvalidInput, "bad contextual field: " + kv);
        }
        if (e.d < 1 || e.m < 1 || e.n < 1) throw Error(Errc::InvalidInput, "contextual env needs d, m, n >= 1");
        return e;
    }
    std::string path = spec;
    if (spec.rfind("fixed:", 0) == 0)
        path = spec.substr(6);
    else if (spec.size() < 5 || spec.substr(spec.size() - 5) != ".json")
        throw Error(Errc::InvalidInput, "unknown environment: " + spec);
    return env_from_instance_json(read_json_file(path));
}

EnvSpec env_from_json(const json& j) {
    if (j.is_string()) return parse_env(j.get<std::string>());
    return env_from_instance_json(j);
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        c.algorithm = j.value("algorithm", c.algorithm);
        if (j.contains("env")) {
            c.env = env_from_json(j["env"]);
            c.env_label = j["env"].is_string() ? j["env"].get<std::string>() : "inline";
        } else {
            c.env = parse_env(c.env_label);
        }
        c.objective = parse_objective(j.value("objective", std::string("gft")));
        c.T = j.value("horizon", c.T);
        c.seed = j.value("seed", c.seed);
        c.matching = parse_matching(j.value("matching", std::string("adversarial")));
        c.full_log = j.value("full_log", false);
        c.mc.samples = j.value("mc_samples", c.mc.samples);
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, std::string("bad config: ") + e.what());
    }
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    return {{"algorithm", c.algorithm}, {"env", c.env_label},       {"objective", objective_name(c.objective)},
            {"horizon", c.T},           {"seed", c.seed},           {"matching", matching_name(c.matching)},
            {"full_log", c.full_log},   {"mc_samples", c.mc.samples}};
}

std::unique_ptr<Learner> make_learner(const std::string& name, int m, int n, int d, uint64_t T,
                                      const MonteCarloConfig& mc) {
    const bool contextual = name == "steiner_gft" || name == "ellipsoid" || name == "steiner_profit";
    const bool known = contextual || name == "obs" || name == "otcs" || name == "one_to_many" ||
                       name == "segmented" || name == "fictitious_profit";
    if (!known) throw Error(Errc::InvalidInput, "unknown algorithm: " + name);
    if (contextual != (d > 0))
        throw Error(Errc::UnsupportedCombination, name + (contextual ? " needs" : " does not take") + " contexts");
    if (needs_square(name) && m != n) throw Error(Errc::UnsupportedCombination, name + " needs m == n");
    if (name == "obs") return std::make_unique<OptimisticBinarySearch>();
    if (name == "otcs") return std::make_unique<OptimisticConservativeSearch>(T);
    if (name == "one_to_many") {
        if (m != 1) throw Error(Errc::UnsupportedCombination, "one_to_many needs a single seller");
        return std::make_unique<OneToManySearch>(T);
    }
    if (name == "segmented") return std::make_unique<BalanceSegmented>(n, T);
    if (name == "fictitious_profit") return std::make_unique<FictitiousProfit>(n, T);
    if (name == "steiner_gft") {
        if (m != 1 || n != 1) throw Error(Errc::UnsupportedCombination, "steiner_gft is bilateral");
        return std::make_unique<SteinerGft>(d, mc);
    }
    if (name == "ellipsoid") return std::make_unique<EllipsoidSearch>(d, m, n, T);
    return std::make_unique<SteinerProfit>(d, n, T, mc);
}

RegretCurve run_experiment(const ExperimentConfig& cfg) {
    RegretCurve out;
    out.config = cfg;
    out.min_regret = std::numeric_limits<double>::infinity();
    const EnvSpec& env = cfg.env;
    const uint64_t T = cfg.T;
    const std::string& alg = cfg.algorithm;
    MonteCarloConfig mc = cfg.mc;
    mc.seed = mix(cfg.seed, mc.seed);
    std::mt19937_64 rng(mix(cfg.seed, 0));

    const bool adversarial = env.kind == EnvKind::Adversary1 || env.kind == EnvKind::Adversary2;
    if (env.kind == EnvKind::Adversary1 && alg != "obs" && alg != "one_to_many")
        throw Error(Errc::UnsupportedCombination, "adversary1 needs a single-price algorithm");
    if (env.kind == EnvKind::Adversary2 && alg != "obs" && alg != "otcs" && alg != "fictitious_profit")
        throw Error(Errc::UnsupportedCombination, "adversary2 needs a two-price algorithm");

    Instance market;
    std::optional<ContextualInstance> ci;
    int d = 0;
    switch (env.kind) {
        case EnvKind::Fixed:
            env.instance.validate();
            out.instance = env.instance;
            break;
        case EnvKind::Random: {
            std::uniform_real_distribution<double> U;
            do {
                out.instance.costs.resize(env.m);
                out.instance.values.resize(env.n);
                for (auto& c : out.instance.costs) c = U(rng);
                for (auto& v : out.instance.values) v = U(rng);
            } while (env.positive_gft && !(gft_star(out.instance) > 0));
            break;
        }
        case EnvKind::Adversary1:
            market.costs.assign(1, 0);
            market.values.assign(2, 0);
            break;
        case EnvKind::Adversary2:
            market.costs.assign(3, 0);
            market.values.assign(3, 0);
            break;
        case EnvKind::Contextual:
            ci = env.features ? *env.features : random_contextual_instance(env.d, env.m, env.n, rng);
            d = ci->d;
            market.costs.assign(ci->m(), 0);
            market.values.assign(ci->n(), 0);
            out.features = ci;
            break;
    }
    if (env.kind == EnvKind::Fixed || env.kind == EnvKind::Random)
        market = needs_square(alg) ? pad_balanced(out.instance) : out.instance;
    const int m = market.m(), n = market.n();
    auto learner = make_learner(alg, m, n, d, T, mc);

    std::mt19937_64 crng(env.context_seed ? env.context_seed : mix(cfg.seed, 2));
    if (!env.contexts.empty() && static_cast<int>(env.contexts[0].size()) != d)
        throw Error(Errc::InvalidInput, "context has wrong dimension");

    std::optional<Adversary1> adv1;
    std::optional<Adversary2> adv2;
    if (env.kind == EnvKind::Adversary1) adv1.emplace(T);
    if (env.kind == EnvKind::Adversary2) adv2.emplace(T);

    CurveWriter writer(out, T, m, n);
    if (learner->name() == "ellipsoid") out.props.exploration_limit = exploration_bound(d, 1.0, 1.0 / static_cast<double>(T));

    Vec x;
    std::vector<double> xs;
    for (uint64_t t = 1; t <= T; ++t) {
        if (ci) {
            x = env.contexts.empty() ? random_orthant_point(d, crng) : env.contexts[(t - 1) % env.contexts.size()];
            xs.assign(x.data(), x.data() + d);
            market = ci->at(x);
        }
        const bool settled = learner->settled();
        if (!settled)
            out.settle_round = 0;
        else if (out.settle_round == 0)
            out.settle_round = t;
        const PriceProfile prof = learner->propose(xs);
        try {
            prof.validate(m, n);
        } catch (const Error& e) {
            violation(out, t, e.what());
        }

        if (adversarial) {
            const Feedback fb = adv1 ? adv1->respond(prof) : adv2->respond(prof);
            if (!out.transcript.empty() && same_profile(out.transcript.back().profile, prof) &&
                out.transcript.back().feedback == fb)
                ++out.transcript.back().repeat;
            else
                out.transcript.push_back({prof, fb, 1});
            if (settled && adv1 && adv1->frozen()) {
                // the frozen adversary answers a fixed profile identically from here on
                out.transcript.back().repeat += T - t;
                break;
            }
            learner->observe(fb);
            continue;
        }

        const RoundOutcome o = apply_mechanism(market, prof, {cfg.matching, mix(cfg.seed, t)});
        const double r = round_regret(cfg.objective, market, o);
        check_before(*learner, market, r, T, out.props);
        uint64_t count = 1;
        if (settled && !ci && cfg.matching == MatchingKind::AdversarialMin) {
            count = T - t + 1;
        } else {
            learner->observe(o.feedback);
            check_after(*learner, market, ci ? &*ci : nullptr, out, t);
        }
        writer.add(t, count, prof, o.feedback, r);
        t += count - 1;
    }

    if (adversarial) {
        out.instance = adv1 ? adv1->finalize() : adv2->finalize();
        out.audited = true;
        out.audit_ok = audit_consistency(out.instance, out.transcript);
        uint64_t t = 1;
        for (const auto& e : out.transcript) {
            const uint64_t block = cfg.matching == MatchingKind::AdversarialMin ? e.repeat : 1;
            for (uint64_t k = 0; k < e.repeat; k += block) {
                const RoundOutcome o = apply_mechanism(out.instance, e.profile, {cfg.matching, mix(cfg.seed, t)});
                const double r = round_regret(cfg.objective, out.instance, o);
                if (adv2 && r < 0.25 - 1e-12) out.props.below_quarter += block;
                out.props.checked += block;
                writer.add(t, block, e.profile, o.feedback, r);
                t += block;
            }
        }
    }
    if (auto* e = dynamic_cast<EllipsoidSearch*>(learner.get())) out.props.explorations = e->explorations();
    out.total_regret = writer.total();
    if (out.records.empty()) out.min_regret = 0;
    return out;
}

void write_csv(const RegretCurve& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(Errc::InvalidInput, "cannot write " + path);
    f << "t,price_s,price_b,acc_sellers,acc_buyers,regret,cum_regret\n";
    for (const auto& r : c.records)
        f << r.t << ',' << fmt(r.price_s) << ',' << fmt(r.price_b) << ',' << r.acc_sellers << ',' << r.acc_buyers << ','
          << fmt(r.regret) << ',' << fmt(r.cum_regret) << '\n';
}

json summary_json(const RegretCurve& c) {
    json j;
    j["config"] = config_to_json(c.config);
    if (c.features)
        j["instance"] = {{"d", c.features->d},
                         {"seller_vectors", vectors_to_json(c.features->sellers)},
                         {"buyer_vectors", vectors_to_json(c.features->buyers)}};
    else
        j["instance"] = instance_to_json(c.instance);
    j["rounds"] = c.config.T;
    j["total_regret"] = c.total_regret;
    j["max_round_regret"] = c.max_regret;
    j["min_round_regret"] = c.min_regret;
    j["settle_round"] = c.settle_round;
    j["invariant_violations"] = c.invariant_violations;
    if (c.audited) j["audit_consistent"] = c.audit_ok;
    const auto& p = c.props;
    json props = {{"rounds_checked", p.checked},
                  {"steiner_regret_over_width", p.steiner_cut_over_width},
                  {"exploit_rounds", p.exploit_rounds},
                  {"exploit_over_bound", p.exploit_over_bound},
                  {"fallback_rounds", p.fallback_rounds},
                  {"fallback_over_bound", p.fallback_over_bound},
                  {"optimistic_below_truth", p.optimistic_below_truth}};
    if (c.config.env.kind == EnvKind::Adversary2) props["rounds_below_quarter"] = p.below_quarter;
    if (!p.explorations.empty()) {
        props["explorations"] = p.explorations;
        props["exploration_limit"] = p.exploration_limit;
    }
    j["properties"] = props;
    return j;
}

std::vector<ExperimentConfig> expand_grid(const json& grid) {
    std::vector<ExperimentConfig> out;
    if (grid.contains("runs")) {
        for (const auto& r : grid["runs"]) out.push_back(config_from_json(r));
        return out;
    }
    auto list = [&](const char* many, const char* one) {
        if (grid.contains(many)) return grid[many];
        return grid.contains(one) ? json::array({grid[one]}) : json::array({nullptr});
    };
    json seeds = list("seeds", "seed");
    if (grid.contains("seed_count")) {
        seeds = json::array();
        const uint64_t first = grid.value("seed_start", uint64_t{1});
        for (uint64_t s = 0; s < grid["seed_count"].get<uint64_t>(); ++s) seeds.push_back(first + s);
    }
    for (const auto& a : list("algorithms", "algorithm"))
        for (const auto& e : list("envs", "env"))
            for (const auto& T : list("horizons", "horizon"))
                for (const auto& s : seeds) {
                    json c = grid;
                    for (const char* k : {"runs", "algorithms", "envs", "horizons", "seeds", "seed_count", "seed_start"})
                        c.erase(k);
                    if (!a.is_null()) c["algorithm"] = a;
                    if (!e.is_null()) c["env"] = e;
                    if (!T.is_null()) c["horizon"] = T;
                    if (!s.is_null()) c["seed"] = s;
                    out.push_back(config_from_json(c));
                }
    return out;
}

std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& cfgs, int threads) {
    std::vector<SweepRow> rows(cfgs.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i; (i = next.fetch_add(1)) < cfgs.size();) {
            SweepRow& r = rows[i];
            r.config = cfgs[i];
            try {
                ExperimentConfig c = cfgs[i];
                c.full_log = false;
                const RegretCurve curve = run_experiment(c);
                r.total_regret = curve.total_regret;
                r.settle_round = curve.settle_round;
                r.audit_ok = curve.audit_ok;
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(std::min<size_t>(threads, std::max<size_t>(1, cfgs.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < threads; ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return rows;
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream o;
    o << "kind,algorithm,env,objective,matching,horizon,seed,runs,total_regret,mean_total_regret,max_total_regret,"
         "settle_round,audit_ok,error\n";
    struct Cell {
        size_t runs = 0;
        double sum = 0, max = -std::numeric_limits<double>::infinity();
    };
    using Key = std::tuple<std::string, std::string, int, int, uint64_t>;
    std::vector<Key> order;
    std::map<Key, Cell> cells;
    for (const auto& r : rows) {
        const auto& c = r.config;
        o << "run," << c.algorithm << ',' << c.env_label << ',' << objective_name(c.objective) << ','
          << matching_name(c.matching) << ',' << c.T << ',' << c.seed << ",1," << fmt(r.total_regret) << ",,,"
          << r.settle_round << ',' << (r.audit_ok ? 1 : 0) << ',' << csv_quote(r.error)
          << '\n';
        if (!r.error.empty()) continue;
        Key k{c.algorithm, c.env_label, static_cast<int>(c.objective), static_cast<int>(c.matching), c.T};
        if (!cells.count(k)) order.push_back(k);
        Cell& cell = cells[k];
        ++cell.runs;
        cell.sum += r.total_regret;
        cell.max = std::max(cell.max, r.total_regret);
    }
    for (const auto& k : order) {
        const Cell& cell = cells[k];
        o << "cell," << std::get<0>(k) << ',' << std::get<1>(k) << ','
          << objective_name(static_cast<Objective>(std::get<2>(k))) << ','
          << matching_name(static_cast<MatchingKind>(std::get<3>(k))) << ',' << std::get<4>(k) << ",," << cell.runs
          << ",," << fmt(cell.sum / static_cast<double>(cell.runs)) << ',' << fmt(cell.max) << ",,,\n";
    }
    return o.str();
}

}  // namespace tsm
