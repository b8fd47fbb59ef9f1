#include "tsm.h"

#include <fstream>
#include <memory>
#include <string>

#include "tsm/harness.hpp"

struct tsm_instance {
    tsm::Instance inst;
};
struct tsm_profile {
    tsm::PriceProfile prof;
};
struct tsm_learner {
    std::unique_ptr<tsm::Learner> impl;
    size_t m, n, d;
};
struct tsm_result {
    tsm::RegretCurve curve;
    std::string summary;
};

namespace {

thread_local std::string g_error;

int fail(int code, const std::string& msg) {
    g_error = msg;
    return code;
}

template <class F>
int guard(F&& f) {
    g_error.clear();
    try {
        f();
        return TSM_OK;
    } catch (const tsm::Error& e) {
        return fail(static_cast<int>(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail(TSM_INTERNAL, e.what());
    }
}

void need(const void* p) {
    if (!p) throw tsm::Error(tsm::Errc::InvalidInput, "null argument");
}

void write_text(const char* path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw tsm::Error(tsm::Errc::InvalidInput, std::string("cannot write ") + path);
    f << text;
}

}  // namespace

extern "C" {

const char* tsm_status_name(int s) {
    if (s == TSM_INTERNAL) return "Internal";
    if (s < 0 || s > TSM_INVALID_INPUT) return "Unknown";
    return tsm::errc_name(static_cast<tsm::Errc>(s));
}

const char* tsm_last_error(void) { return g_error.c_str(); }

const char* tsm_version(void) { return "0.1.0"; }

int tsm_instance_create(const double* costs, size_t m, const double* values, size_t n, tsm_instance** out) {
    return guard([&] {
        need(out);
        if ((m && !costs) || (n && !values)) need(nullptr);
        auto h = std::make_unique<tsm_instance>();
        h->inst.costs.assign(costs, costs + m);
        h->inst.values.assign(values, values + n);
        h->inst.validate();
        *out = h.release();
    });
}

void tsm_instance_free(tsm_instance* inst) { delete inst; }

int tsm_gft_star(const tsm_instance* inst, double* out) {
    return guard([&] {
        need(inst);
        need(out);
        *out = tsm::gft_star(inst->inst);
    });
}

int tsm_profit_star(const tsm_instance* inst, double* value, int* k) {
    return guard([&] {
        need(inst);
        const auto p = tsm::profit_star(inst->inst);
        if (value) *value = p.value;
        if (k) *k = p.k;
    });
}

int tsm_efficient_trade_size(const tsm_instance* inst, int* out) {
    return guard([&] {
        need(inst);
        need(out);
        *out = tsm::efficient_trade_size(inst->inst);
    });
}

int tsm_profile_single(double price, tsm_profile** out) {
    return guard([&] {
        need(out);
        auto h = std::make_unique<tsm_profile>(tsm_profile{tsm::PriceProfile::single(price)});
        h->prof.validate(1, 1);
        *out = h.release();
    });
}

int tsm_profile_two(double p, double q, tsm_profile** out) {
    return guard([&] {
        need(out);
        auto h = std::make_unique<tsm_profile>(tsm_profile{tsm::PriceProfile::two(p, q)});
        h->prof.validate(1, 1);
        *out = h.release();
    });
}

int tsm_profile_segmented(const uint8_t* sg, size_t m, double p1, double p2, const uint8_t* bg, size_t n, double q1,
                          double q2, tsm_profile** out) {
    return guard([&] {
        need(out);
        if ((m && !sg) || (n && !bg)) need(nullptr);
        auto h = std::make_unique<tsm_profile>(tsm_profile{tsm::PriceProfile::segmented(
            std::vector<uint8_t>(sg, sg + m), p1, p2, std::vector<uint8_t>(bg, bg + n), q1, q2)});
        h->prof.validate(static_cast<int>(m), static_cast<int>(n));
        *out = h.release();
    });
}

void tsm_profile_free(tsm_profile* prof) { delete prof; }

int tsm_profile_seller_price(const tsm_profile* prof, size_t i, double* out) {
    return guard([&] {
        need(prof);
        need(out);
        if (prof->prof.kind == tsm::ProfileKind::Segmented && i >= prof->prof.seller_group.size())
            throw tsm::Error(tsm::Errc::InvalidInput, "seller index out of range");
        *out = prof->prof.seller_price(static_cast<int>(i));
    });
}

int tsm_profile_buyer_price(const tsm_profile* prof, size_t j, double* out) {
    return guard([&] {
        need(prof);
        need(out);
        if (prof->prof.kind == tsm::ProfileKind::Segmented && j >= prof->prof.buyer_group.size())
            throw tsm::Error(tsm::Errc::InvalidInput, "buyer index out of range");
        *out = prof->prof.buyer_price(static_cast<int>(j));
    });
}

int tsm_apply_mechanism(const tsm_instance* inst, const tsm_profile* prof, int matching, uint64_t seed,
                        uint8_t* seller_accept, uint8_t* buyer_accept, double* gft, double* profit) {
    return guard([&] {
        need(inst);
        need(prof);
        if (matching != TSM_MATCH_ADVERSARIAL && matching != TSM_MATCH_RANDOM)
            throw tsm::Error(tsm::Errc::InvalidInput, "unknown matching rule");
        const tsm::MatchingRule rule{
            matching == TSM_MATCH_RANDOM ? tsm::MatchingKind::UniformRandom : tsm::MatchingKind::AdversarialMin, seed};
        const auto o = tsm::apply_mechanism(inst->inst, prof->prof, rule);
        if (seller_accept) std::copy(o.feedback.sellers.begin(), o.feedback.sellers.end(), seller_accept);
        if (buyer_accept) std::copy(o.feedback.buyers.begin(), o.feedback.buyers.end(), buyer_accept);
        if (gft) *gft = o.gft;
        if (profit) *profit = o.profit;
    });
}

int tsm_learner_create(const char* name, size_t m, size_t n, size_t d, uint64_t horizon, uint64_t seed,
                       tsm_learner** out) {
    return guard([&] {
        need(name);
        need(out);
        tsm::MonteCarloConfig mc;
        mc.seed = seed;
        auto h = std::make_unique<tsm_learner>();
        h->impl = tsm::make_learner(name, static_cast<int>(m), static_cast<int>(n), static_cast<int>(d), horizon, mc);
        h->m = m;
        h->n = n;
        h->d = d;
        *out = h.release();
    });
}

void tsm_learner_free(tsm_learner* l) { delete l; }

int tsm_learner_propose(tsm_learner* l, const double* context, size_t d, tsm_profile** out) {
    return guard([&] {
        need(l);
        need(out);
        if (d != l->d || (d && !context)) throw tsm::Error(tsm::Errc::InvalidInput, "context has wrong dimension");
        *out = new tsm_profile{l->impl->propose(std::span<const double>(context, d))};
    });
}

int tsm_learner_observe(tsm_learner* l, const uint8_t* sa, size_t m, const uint8_t* ba, size_t n) {
    return guard([&] {
        need(l);
        if (m != l->m || n != l->n || !sa || !ba) throw tsm::Error(tsm::Errc::InvalidInput, "feedback has wrong size");
        tsm::Feedback fb;
        fb.sellers.assign(sa, sa + m);
        fb.buyers.assign(ba, ba + n);
        l->impl->observe(fb);
    });
}

int tsm_learner_settled(const tsm_learner* l, int* out) {
    return guard([&] {
        need(l);
        need(out);
        *out = l->impl->settled() ? 1 : 0;
    });
}

int tsm_run_json(const char* config_json, tsm_result** out) {
    return guard([&] {
        need(config_json);
        need(out);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::exception& e) {
            throw tsm::Error(tsm::Errc::InvalidInput, e.what());
        }
        auto r = std::make_unique<tsm_result>();
        r->curve = tsm::run_experiment(tsm::config_from_json(j));
        r->summary = tsm::summary_json(r->curve).dump(2);
        *out = r.release();
    });
}

void tsm_result_free(tsm_result* r) { delete r; }

int tsm_result_total_regret(const tsm_result* r, double* out) {
    return guard([&] {
        need(r);
        need(out);
        *out = r->curve.total_regret;
    });
}

int tsm_result_invariant_violations(const tsm_result* r, uint64_t* out) {
    return guard([&] {
        need(r);
        need(out);
        *out = r->curve.invariant_violations;
    });
}

const char* tsm_result_summary(const tsm_result* r) { return r ? r->summary.c_str() : ""; }

int tsm_result_write(const tsm_result* r, const char* csv, const char* summary, const char* segments,
                     const char* transcript) {
    return guard([&] {
        need(r);
        if (csv) tsm::write_csv(r->curve, csv);
        if (summary) write_text(summary, r->summary + "\n");
        if (segments && r->curve.config.full_log) write_text(segments, nlohmann::json(r->curve.segment_log).dump() + "\n");
        if (transcript && r->curve.audited)
            write_text(transcript, tsm::transcript_to_json(r->curve.instance, r->curve.transcript).dump() + "\n");
    });
}

int tsm_sweep_json(const char* grid_json, const char* csv_path, int threads, size_t* runs, size_t* failed) {
    return guard([&] {
        need(grid_json);
        need(csv_path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(grid_json);
        } catch (const nlohmann::json::exception& e) {
            throw tsm::Error(tsm::Errc::InvalidInput, e.what());
        }
        const auto rows = tsm::sweep(tsm::expand_grid(j), threads);
        write_text(csv_path, tsm::sweep_table_csv(rows));
        if (runs) *runs = rows.size();
        if (failed) {
            *failed = 0;
            for (const auto& r : rows) *failed += r.error.empty() ? 0 : 1;
        }
    });
}

int tsm_audit_json(const char* transcript_json, int* consistent) {
    return guard([&] {
        need(transcript_json);
        need(consistent);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(transcript_json);
        } catch (const nlohmann::json::exception& e) {
            throw tsm::Error(tsm::Errc::InvalidInput, e.what());
        }
        *consistent = tsm::audit_transcript_json(j) ? 1 : 0;
    });
}

}  // extern "C"
