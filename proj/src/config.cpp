#include "shadow/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "shadow/errors.hpp"
#include "shadow/models.hpp"

namespace shadow {

using nlohmann::json;

void RunConfig::validate() const {
    if (sites < 2 || sites > 24)
        throw ValidationError("L = " + std::to_string(sites) + " outside the envelope [2, 24]");
    if (snapshots < 1) throw ValidationError("N must be >= 1");
    schedule().validate(); // epochs, lr0, x_eps_target, ...
    if (floor.alpha0 < 0.0 || floor.b0 < 0.0)
        throw ValidationError("floor parameters must be non-negative");
    if (epsilon0(snapshots, sites, floor) >= 0.0)
        throw ValidationError("floor parameters give a non-negative epsilon0 at this (N, L); "
                              "the relaxed positivity constraint would be empty");
    if (report_weights.empty()) throw ValidationError("report_weights must be non-empty");
    for (int k : report_weights)
        if (k < 1 || k > sites)
            throw ValidationError("report weight " + std::to_string(k) + " outside [1, L]");
    if (out_dir.empty()) throw ValidationError("out_dir must be non-empty");
    if (threads < 0) throw ValidationError("threads must be >= 0");
    // resolving the model validates it, and expansion checks offsets vs L
    expand_model(resolve_model(model), sites);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config file " + path + ": " + e.what());
    }
    RunConfig c;
    try {
        c.model = j.value("model", c.model);
        c.sites = j.value("L", c.sites);
        c.snapshots = j.value("N", c.snapshots);
        c.seed = j.value("seed", c.seed);
        c.epochs = j.value("T", c.epochs);
        c.x_eps_target = j.value("x_eps_target", c.x_eps_target);
        c.lr0 = j.value("lr0", c.lr0);
        c.mu0 = j.value("mu0", c.mu0);
        c.g = j.value("g", c.g);
        c.adam_eps = j.value("adam_eps", c.adam_eps);
        c.backoff_factor = j.value("backoff_factor", c.backoff_factor);
        c.grad_ratio_cap = j.value("grad_ratio_cap", c.grad_ratio_cap);
        c.preopt_gap = j.value("preopt_gap", c.preopt_gap);
        c.preopt_step_limit = j.value("preopt_step_limit", c.preopt_step_limit);
        c.retry_cap = j.value("retry_cap", c.retry_cap);
        c.report_weights = j.value("report_weights", c.report_weights);
        if (j.contains("floor")) {
            c.floor.alpha0 = j["floor"].value("alpha0", c.floor.alpha0);
            c.floor.b0 = j["floor"].value("b0", c.floor.b0);
        }
        c.out_dir = j.value("out", c.out_dir);
        c.threads = j.value("threads", c.threads);
    } catch (const json::exception& e) {
        throw ValidationError("config file " + path + ": " + e.what());
    }
    return c;
}

std::string config_to_json(const RunConfig& c) {
    json j;
    j["model"] = c.model;
    j["L"] = c.sites;
    j["N"] = c.snapshots;
    j["seed"] = c.seed;
    j["T"] = c.epochs;
    j["x_eps_target"] = c.x_eps_target;
    j["lr0"] = c.lr0;
    j["mu0"] = c.mu0;
    j["g"] = c.g;
    j["adam_eps"] = c.adam_eps;
    j["backoff_factor"] = c.backoff_factor;
    j["grad_ratio_cap"] = c.grad_ratio_cap;
    j["preopt_gap"] = c.preopt_gap;
    j["preopt_step_limit"] = c.preopt_step_limit;
    j["retry_cap"] = c.retry_cap;
    j["report_weights"] = c.report_weights;
    j["floor"] = {{"alpha0", c.floor.alpha0}, {"b0", c.floor.b0}};
    j["out"] = c.out_dir;
    j["threads"] = c.threads;
    return j.dump(2);
}

} // namespace shadow
