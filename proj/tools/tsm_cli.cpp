#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsm.h"

namespace {

int report(int status) {
    if (status != TSM_OK) std::fprintf(stderr, "error [%s]: %s\n", tsm_status_name(status), tsm_last_error());
    return status == TSM_OK ? 0 : 2;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// out.csv -> out.<suffix>.json
std::string sibling(const std::string& csv, const std::string& suffix) {
    std::string stem = csv;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
    return stem + "." + suffix + ".json";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Posted-price learning in two-sided markets"};
    app.require_subcommand(1);

    std::string alg = "obs", env = "random:1x1", objective = "gft", matching = "adversarial", out = "regret.csv";
    uint64_t horizon = 1000, seed = 1;
    size_t mc_samples = 10000;
    bool full_log = false, quiet = false;
    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--alg", alg, "obs|otcs|one_to_many|segmented|fictitious_profit|steiner_gft|ellipsoid|steiner_profit")
        ->required();
    run->add_option("--env", env, "fixed:<file>|<file>.json|random:<m>x<n>[:any]|adversary1|adversary2|contextual:d=,m=,n=")
        ->required();
    run->add_option("--objective", objective)->check(CLI::IsMember({"gft", "profit"}));
    run->add_option("--horizon", horizon);
    run->add_option("--seed", seed);
    run->add_option("--matching", matching)->check(CLI::IsMember({"adversarial", "random"}));
    run->add_option("--out", out, "CSV path; summary and sidecars are written next to it");
    run->add_option("--mc-samples", mc_samples, "Monte Carlo samples per padded body");
    run->add_flag("--full-log", full_log, "Also write the per-round segment map");
    run->add_flag("--quiet", quiet, "Do not print the summary");

    std::string grid, table = "sweep.csv";
    int threads = 0;
    auto* sw = app.add_subcommand("sweep", "Run a grid of experiments");
    sw->add_option("--grid", grid, "Grid JSON file")->required()->check(CLI::ExistingFile);
    sw->add_option("--out", table, "Summary table CSV");
    sw->add_option("--threads", threads, "Worker threads, 0 for all cores");

    std::string transcript;
    auto* audit = app.add_subcommand("audit", "Check an adversary transcript for consistency");
    audit->add_option("--transcript", transcript)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            nlohmann::json cfg = {{"algorithm", alg},   {"env", env},           {"objective", objective},
                                  {"horizon", horizon}, {"seed", seed},         {"matching", matching},
                                  {"full_log", full_log}, {"mc_samples", mc_samples}};
            tsm_result* res = nullptr;
            if (int s = tsm_run_json(cfg.dump().c_str(), &res)) return report(s);
            const std::string seg = sibling(out, "segments"), tr = sibling(out, "transcript"),
                              sum = sibling(out, "summary");
            int s = tsm_result_write(res, out.c_str(), sum.c_str(), full_log ? seg.c_str() : nullptr, tr.c_str());
            if (s == TSM_OK && !quiet) std::cout << tsm_result_summary(res) << "\n";
            tsm_result_free(res);
            return report(s);
        }
        if (*sw) {
            size_t runs = 0, failed = 0;
            const std::string text = slurp(grid);
            if (int s = tsm_sweep_json(text.c_str(), table.c_str(), threads, &runs, &failed)) return report(s);
            std::cout << runs << " runs, " << failed << " failed -> " << table << "\n";
            return failed ? 2 : 0;
        }
        int consistent = 0;
        const std::string text = slurp(transcript);
        if (int s = tsm_audit_json(text.c_str(), &consistent)) return report(s);
        std::cout << (consistent ? "consistent" : "inconsistent") << "\n";
        return consistent ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
